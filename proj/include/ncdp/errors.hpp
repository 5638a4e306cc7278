#pragma once

#include <stdexcept>
#include <string>

namespace ncdp {

/// Base class for all library errors; `code()` is a stable machine-readable tag.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}
    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define NCDP_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& msg) : Error(#Name, msg) {}     \
    };

NCDP_DEFINE_ERROR(InvalidModel)
NCDP_DEFINE_ERROR(SearchBoxExhausted)
NCDP_DEFINE_ERROR(GridTooCoarse)
NCDP_DEFINE_ERROR(BudgetExceeded)
NCDP_DEFINE_ERROR(UnsupportedStructure)
NCDP_DEFINE_ERROR(HorizonConditionViolated)
NCDP_DEFINE_ERROR(NotASubspace)
NCDP_DEFINE_ERROR(InexactNullSpace)
NCDP_DEFINE_ERROR(ModelNotFrictionless)
NCDP_DEFINE_ERROR(NoCashAccount)

#undef NCDP_DEFINE_ERROR

}  // namespace ncdp
