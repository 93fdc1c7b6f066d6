#ifndef CHASM_ERRORS_HPP
#define CHASM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace chasm {

/// Raised for bad arguments, malformed streams and violated preconditions.
class InvalidArgument : public std::invalid_argument {
public:
    explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a computation cannot produce a trustworthy number
/// (eigensolver failure, covariance too ill-conditioned to invert, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

} // namespace detail
} // namespace chasm

#endif
