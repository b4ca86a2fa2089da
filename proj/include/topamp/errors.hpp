#pragma once

#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace topamp {

// Invalid input: bad dimensions, broken Hermiticity, out-of-range parameters.
// The CLI maps this to exit code 1.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A well-formed problem that cannot be answered numerically (ill-conditioned
// solve, unstable dynamics, gapless Bloch curve, ...). The CLI maps this to
// exit code 2. `code()` is a stable machine-readable tag.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string code, const std::string& what,
                   double value = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(what), code_(std::move(code)), value_(value) {}

    const std::string& code() const noexcept { return code_; }
    double value() const noexcept { return value_; }

private:
    std::string code_;
    double value_;
};

// Number formatting for messages.
template <class T>
std::string fmt(T x) {
    if constexpr (std::is_integral_v<T>) {
        return std::to_string(x);
    } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", static_cast<double>(x));
        return buf;
    }
}

namespace error_code {
inline constexpr const char* ill_conditioned = "ill-conditioned";
inline constexpr const char* singular_beyond_precision = "singular-beyond-precision";
inline constexpr const char* unstable = "unstable-no-steady-state";
inline constexpr const char* gapless = "gapless";
inline constexpr const char* no_edge_mode = "no-edge-mode";
inline constexpr const char* not_parity_symmetric = "not-parity-symmetric";
inline constexpr const char* diverged = "diverged";
inline constexpr const char* eigensolver = "eigensolver-failed";
inline constexpr const char* winding_not_integer = "winding-not-integer";
} // namespace error_code

} // namespace topamp
