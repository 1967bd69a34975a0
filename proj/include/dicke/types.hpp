// types.hpp — shared aliases, half-integer labels and error types

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dicke {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

// Solver or tolerance failure (Jordan blocks, step underflow, non-integer
// multiplicities). Precondition violations use std::invalid_argument.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Spin quantum numbers j, m stored as twice their value.
struct HalfInt {
    int twice = 0;

    static constexpr HalfInt from_twice(int t) { return HalfInt{t}; }
    static constexpr HalfInt from_int(int v) { return HalfInt{2 * v}; }

    constexpr double value() const { return twice / 2.0; }
    constexpr bool is_integer() const { return twice % 2 == 0; }

    constexpr auto operator<=>(const HalfInt&) const = default;

    std::string str() const {
        if (twice % 2 == 0) return std::to_string(twice / 2);
        return std::to_string(twice) + "/2";
    }
};

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

inline int hilbert_dim(int atom_count) { return 1 << atom_count; }

} // namespace dicke
