#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "normnet/grid.hpp"
#include "normnet/relu_net.hpp"

namespace normnet {

// Target function descriptor for the smoothness class H^alpha: alpha = r + beta
// with beta in (0, 1]. `deriv` must report partial derivatives for every
// multi-index with |s|_1 <= r; it may be left empty when r = 0 (the order-0
// derivative is f itself). Derivative values are the caller's responsibility
// to keep within [-1, 1]; holder_spot_check provides a grid-based sanity scan.
struct HolderSpec {
    int d = 1;
    double alpha = 1.0;
    std::function<double(const Vector&)> f;
    std::function<double(const std::vector<int>&, const Vector&)> deriv;

    int smoothness_r() const;
    double holder_beta() const { return alpha - smoothness_r(); }
    double derivative(const std::vector<int>& s, const Vector& x) const;
};

// Structured view of a local-Taylor network as sum_i coef_i * subnet_i where
// term i is supported on the cube ||x - n_i/N||_inf <= 1/N. Evaluating the
// terms directly and skipping inactive ones agrees with evaluating the
// assembled network up to floating-point reassociation.
struct TaylorParts {
    struct Term {
        double coef = 0.0;
        ReluNet subnet;
        std::vector<int> index;
    };

    int d = 1;
    int N = 1;
    std::vector<Term> terms;

    double eval(const Vector& x) const;
    Matrix eval_batch(const Matrix& X) const;  // 1 x n
};

struct ApproxCertificate {
    ReluNet net;
    int width = 0;               // stated formula value (actual net width <=)
    int depth = 0;               // stated formula value (actual equals)
    double kappa_stated = 0.0;
    double error_bound = 0.0;
    int N = 0;
    int k = 0;
    std::shared_ptr<const TaylorParts> parts;  // present for Taylor nets
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Riemann-sum approximation of x^2 on [0,1]: width k, depth 1, kappa = 3,
/// sup error <= 1/(2k^2), identically zero on (-inf, 0].
ApproxCertificate build_square(int k);

/// xy on [-1,1]^2 via the polarization identity plus output clip: width 6k,
/// depth 2, kappa <= 216, sup error <= 3/k^2, exactly zero when xy = 0.
ApproxCertificate build_product(int k);

/// x_1...x_d on [-1,1]^d by a binary tree of product nets: width <= 6dk,
/// depth 2*ceil(log2 d), kappa <= 6^(3*ceil(log2 d)), error <= 6d/k^2.
ApproxCertificate build_monomial(int d, int k);

/// Hat bump psi(t) = sigma(1 - sigma(t) - sigma(-t)) as a 1-input net.
ReluNet build_hat();

/// Output clip chi_B as a standalone 1-input net (width 4, depth 1, kappa 2B+4).
ReluNet build_clip(double bound);

// Partition-of-unity factor psi_n(x) = prod_i psi(N x_i - n_i). For d = 1 the
// hat is exact; for d >= 2 the product is realized through build_monomial(d,k).
ReluNet build_partition(int N, int d, const std::vector<int>& n, int k = 8);

// Local Taylor-expansion approximator of the target on [0,1]^d. Stated
// budgets: W = 6(r+1)(d+r)d^r(N+1)^d k, L = 2 ceil(log2(d+r)) + 2,
// K = 6^(3 ceil(log2(d+r)) + 1)(r+1)d^r N(N+1)^d, sup error
// <= 2^d d^r (N^-alpha + 6(r+1)(d+r)k^-2). Throws ResourceError when the
// assembled dense weight count would exceed weight_cap.
ApproxCertificate build_taylor_net(const HolderSpec& spec, int N, int k,
                                   long weight_cap = 2000000);

/// Largest k (with N = ceil(k^(2/alpha))) whose stated kappa fits K_target.
ApproxCertificate build_approximant(const HolderSpec& spec, double K_target,
                                    long weight_cap = 2000000);

/// Max |target(x) - net(x)| over the grid, using the structured evaluator when
/// the certificate carries one.
double measure_sup_error(const ApproxCertificate& cert,
                         const std::function<double(const Vector&)>& target,
                         const GridSpec& grid);

/// Scans a coarse grid for derivative values outside [-1,1]; returns a
/// diagnostic message if any, nullopt when clean.
std::optional<std::string> holder_spot_check(const HolderSpec& spec, int per_dim = 5);

// Built-in targets with analytic derivative oracles.
HolderSpec target_product(int d);                 // alpha = 2, scaled for d > 2
HolderSpec target_sin_sum(int d);                 // alpha = 1
HolderSpec target_quad_mean(int d);               // alpha = 2
HolderSpec target_constant(int d, double value);  // any alpha
HolderSpec make_target(const std::string& name, int d);

}  // namespace normnet
