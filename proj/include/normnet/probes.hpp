#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "normnet/grid.hpp"
#include "normnet/relu_net.hpp"

namespace normnet {

struct RegimeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Normalized Euclidean metric rho_2(x, y) = m^{-1/2} ||x - y||_2.
double rho2(const Vector& x, const Vector& y);

// Sign vectors with guaranteed pairwise Hamming separation > floor(m/8).
// Vectors are packed bitwise: bit j set means +1 at position j.
struct SignPack {
    int m = 0;
    std::vector<std::uint32_t> vectors;
    int min_hamming = 0;  // guaranteed lower bound from the construction

    std::vector<int> signs(std::size_t idx) const;
    int hamming(std::size_t i, std::size_t j) const;
};

// Greedy exclusion of Hamming balls of radius floor(m/8) over all 2^m sign
// vectors in lexicographic order. Supported for 8 <= m <= 24.
SignPack greedy_sign_packing(int m);

/// Exhaustive separation check via ball membership; exact for all supported m.
bool verify_sign_pack(const SignPack& pack);

// The bump class h_a(x) = C_{psi,alpha} N^{-alpha} sum_n a_n psi(Nx - n) with
// psi(x) = prod_i g(4 x_i), g(t) = exp(1 - 1/(1-t^2)) on |t| < 1.
struct BumpClassSpec {
    int d = 1;
    int N = 1;
    double alpha = 1.0;
    double c_psi_alpha = 1.0;
    std::vector<std::int8_t> a;  // row-major over {0..N-1}^d

    std::size_t flat_index(const std::vector<int>& n) const;
};

double bump_psi(const Vector& x);
double bump_eval(const BumpClassSpec& spec, const Vector& x);

// Numerical admissible constant for C_{psi,alpha}: finite-difference sup-norms
// of the partial derivatives up to order r plus the Hoelder quotient of the
// top order, reciprocal of the max, halved.
double estimate_c_psi_alpha(int d, double alpha, std::uint64_t seed = 9);

BumpClassSpec make_bump_class(int d, int N, double alpha, std::vector<std::int8_t> a);

struct RademacherEstimate {
    long n = 0;
    double K = 0.0;
    long trials = 0;
    double mc_mean = 0.0;
    double mc_stderr = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
};

// Monte-Carlo estimate of the Rademacher complexity of the linear subclass
// { x -> a^T (x,1) : ||a||_1 <= K/2 }; the per-draw supremum has the closed
// form (K/2) || sum_i xi_i (x_i,1) ||_inf / n. Columns of `points` are the
// sample points in [-B,B]^d.
RademacherEstimate rademacher_linear_lb(const Matrix& points, double K, long trials,
                                        std::uint64_t seed, int L, double B);

/// (K / (2 sqrt(2n)), B K sqrt(2(L+2+ln(d+1))) / sqrt(n))
std::pair<double, double> rademacher_bound_formulas(long n, int d, double K, int L, double B);

struct W1Probe {
    double estimate = 0.0;
    double stderr_ = 0.0;
    double lower_bound = 0.0;
};

// Monte-Carlo average of min_i ||x_i - Y||_inf for Y uniform on [0,1]^d,
// a lower bound on W_1 between the empirical measure and the uniform law;
// lower_bound = d (d+1)^{-1-1/d} n^{-1/d} / 2 holds for every configuration.
W1Probe w1_nn_probe(const Matrix& points, long mc_samples, std::uint64_t seed);

struct ApproxLowerBounds {
    double general = 0.0;                          // bare power (K sqrt(L))^(-2a/(d-2a))
    std::optional<double> lipschitz_explicit;      // alpha = 1, d >= 3 only
};

ApproxLowerBounds approx_lower_bound_formulas(int d, double alpha, double K, int L);

/// Max over the grid of |f(x) - net(x)| for a scalar-output net.
double sup_error(const ReluNet& net, const std::function<double(const Vector&)>& f,
                 const GridSpec& grid);

}  // namespace normnet
