#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace meritluck {

inline double normal_pdf(double z) {
    return 0.3989422804014326779399460599344 * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440084436210485); }

// True if x is within atol of the integer it rounds to.
inline bool near_integer(double x, double atol = 1e-9) {
    return std::abs(x - std::round(x)) < atol;
}

// Round half away from zero, the convention used for all grid rounding here.
inline long long round_half_up(double x) {
    return static_cast<long long>(x >= 0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

// Nodes and weights for n-point Gauss-Legendre quadrature on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights);

// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

// Regularized incomplete beta function I_x(a, b).
double reg_incomplete_beta(double a, double b, double x);

// Two-sided p-value of a t statistic with dof degrees of freedom; falls back
// to the normal approximation for dof > 1e6.
double student_t_two_sided_p(double t, double dof);

// Shortest decimal string that round-trips the double (via std::to_chars).
std::string format_double(double x);

// Strict double parse of an entire string; returns false on any trailing junk.
bool parse_double(const std::string& s, double& out);

// Strict unsigned integer parse of an entire string.
bool parse_u64(const std::string& s, std::uint64_t& out);

}  // namespace meritluck
