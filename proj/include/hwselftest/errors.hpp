#pragma once

#include <stdexcept>
#include <string>

namespace hwst {

// All library failures derive from Error so callers (the CLI in particular)
// can map them onto exit codes without enumerating every kind.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HWST_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

HWST_DEFINE_ERROR(InvalidDimension);
HWST_DEFINE_ERROR(ZeroInverse);
HWST_DEFINE_ERROR(UnsupportedDim);
HWST_DEFINE_ERROR(DimensionMismatch);
HWST_DEFINE_ERROR(SpecMismatch);
HWST_DEFINE_ERROR(ZeroN);
HWST_DEFINE_ERROR(InvalidNu);
HWST_DEFINE_ERROR(InvalidStrategy);
HWST_DEFINE_ERROR(ConventionUnresolvable);
HWST_DEFINE_ERROR(InfeasibleMethod);
HWST_DEFINE_ERROR(WrongDim);
HWST_DEFINE_ERROR(NonUnitaryOps);

#undef HWST_DEFINE_ERROR

} // namespace hwst
