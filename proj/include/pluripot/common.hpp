// Shared error types and small utilities.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pluripot {

// Finite stand-in for -infinity on grids.  Results must be stable under
// doubling this depth; see the floor-stability tests.
inline constexpr double kDefaultFloor = -1.0e6;

class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Violated operation contract (sign, shape, convexity, threshold ...).
class contract_error : public error {
public:
    explicit contract_error(const std::string& what) : error(what) {}
};

// Malformed file or scenario input.
class parse_error : public error {
public:
    explicit parse_error(const std::string& what) : error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw contract_error(msg);
}

inline bool nearly_equal(double a, double b, double tol) {
    return std::abs(a - b) <= tol;
}

// Aitken extrapolation of a 3-term sequence; returns x2 if degenerate.
inline double aitken(double x0, double x1, double x2) {
    const double d1 = x1 - x0;
    const double d2 = x2 - x1;
    const double dd = d2 - d1;
    if (std::abs(dd) < 1e-14 * (std::abs(d1) + std::abs(d2) + 1e-300)) return x2;
    return x2 - d2 * d2 / dd;
}

} // namespace pluripot
