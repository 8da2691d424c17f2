#include "normnet/probes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "normnet/rng.hpp"

namespace normnet {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

struct BitSet {
    explicit BitSet(std::size_t n) : words((n + 63) / 64, 0ULL) {}
    bool test(std::size_t i) const { return (words[i >> 6] >> (i & 63)) & 1ULL; }
    void set(std::size_t i) { words[i >> 6] |= 1ULL << (i & 63); }
    std::vector<std::uint64_t> words;
};

// all xor masks with 1 <= popcount <= radius over m bits
std::vector<std::uint32_t> flip_masks(int m, int radius) {
    std::vector<std::uint32_t> masks;
    std::vector<int> pos;
    std::function<void(int, int, std::uint32_t)> walk = [&](int start, int left, std::uint32_t acc) {
        if (acc != 0) masks.push_back(acc);
        if (left == 0) return;
        for (int p = start; p < m; ++p) walk(p + 1, left - 1, acc | (1u << p));
    };
    walk(0, radius, 0);
    return masks;
}

}  // namespace

double rho2(const Vector& x, const Vector& y) {
    if (x.size() != y.size() || x.size() < 1)
        throw std::invalid_argument("rho2: length mismatch");
    return (x - y).norm() / std::sqrt(static_cast<double>(x.size()));
}

std::vector<int> SignPack::signs(std::size_t idx) const {
    std::vector<int> out(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
        out[static_cast<std::size_t>(j)] = (vectors[idx] >> j) & 1u ? 1 : -1;
    return out;
}

int SignPack::hamming(std::size_t i, std::size_t j) const {
    return std::popcount(vectors[i] ^ vectors[j]);
}

SignPack greedy_sign_packing(int m) {
    if (m < 8 || m > 24)
        throw std::invalid_argument("greedy_sign_packing: m must be in [8, 24]");
    const int radius = m / 8;
    const std::size_t total = std::size_t{1} << m;
    const auto masks = flip_masks(m, radius);

    SignPack pack;
    pack.m = m;
    pack.min_hamming = radius + 1;
    BitSet excluded(total);
    for (std::size_t v = 0; v < total; ++v) {
        if (excluded.test(v)) continue;
        pack.vectors.push_back(static_cast<std::uint32_t>(v));
        excluded.set(v);
        for (std::uint32_t mask : masks) excluded.set(v ^ mask);
    }
    return pack;
}

bool verify_sign_pack(const SignPack& pack) {
    const int radius = pack.m / 8;
    const std::size_t total = std::size_t{1} << pack.m;
    BitSet member(total);
    for (std::uint32_t v : pack.vectors) member.set(v);
    const auto masks = flip_masks(pack.m, radius);
    for (std::uint32_t v : pack.vectors)
        for (std::uint32_t mask : masks)
            if (member.test(v ^ mask)) return false;
    return true;
}

std::size_t BumpClassSpec::flat_index(const std::vector<int>& n) const {
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i)
        idx = idx * static_cast<std::size_t>(N) + static_cast<std::size_t>(n[static_cast<std::size_t>(i)]);
    return idx;
}

namespace {

double bump_g(double t) {
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

}  // namespace

double bump_psi(const Vector& x) {
    double out = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        out *= bump_g(4.0 * x(i));
        if (out == 0.0) return 0.0;
    }
    return out;
}

double bump_eval(const BumpClassSpec& spec, const Vector& x) {
    if (x.size() != spec.d) throw std::invalid_argument("bump_eval: dimension mismatch");
    // bumps around distinct lattice points have disjoint supports, so at most
    // the nearest index contributes
    std::vector<int> n(static_cast<std::size_t>(spec.d));
    Vector offset(spec.d);
    for (int i = 0; i < spec.d; ++i) {
        double t = spec.N * x(i);
        double nearest = std::nearbyint(t);
        if (nearest < 0.0 || nearest > spec.N - 1.0 || std::abs(t - nearest) >= 0.25) return 0.0;
        n[static_cast<std::size_t>(i)] = static_cast<int>(nearest);
        offset(i) = t - nearest;
    }
    double scale = spec.c_psi_alpha * std::pow(static_cast<double>(spec.N), -spec.alpha);
    return scale * static_cast<double>(spec.a[spec.flat_index(n)]) * bump_psi(offset);
}

namespace {

// j-th derivative of g(4t) via iterated central differences
double g4_derivative(int j, double t, double h = 5e-3) {
    if (j == 0) return bump_g(4.0 * t);
    return (g4_derivative(j - 1, t + 0.5 * h, h) - g4_derivative(j - 1, t - 0.5 * h, h)) / h;
}

std::vector<std::vector<int>> indices_with_sum_at_most(int d, int r) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(d), 0);
    std::function<void(int, int)> walk = [&](int pos, int left) {
        if (pos == d) {
            out.push_back(cur);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            cur[static_cast<std::size_t>(pos)] = v;
            walk(pos + 1, left - v);
        }
        cur[static_cast<std::size_t>(pos)] = 0;
    };
    walk(0, r);
    return out;
}

double fd_partial(const std::vector<int>& s, const Vector& x) {
    double out = 1.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        out *= g4_derivative(s[i], x(static_cast<Eigen::Index>(i)));
    return out;
}

}  // namespace

double estimate_c_psi_alpha(int d, double alpha, std::uint64_t seed) {
    const int r = static_cast<int>(std::ceil(alpha)) - 1;
    const double beta = alpha - r;

    // per-order 1-D sup norms on a fine grid; the bump factors over
    // coordinates, so d-dimensional sups are products of these
    const int grid_n = 4001;
    std::vector<double> order_sup(static_cast<std::size_t>(r) + 1, 0.0);
    for (int j = 0; j <= r; ++j) {
        double best = 0.0;
        for (int g = 0; g < grid_n; ++g) {
            double t = -0.26 + 0.52 * g / (grid_n - 1);
            best = std::max(best, std::abs(g4_derivative(j, t)));
        }
        order_sup[static_cast<std::size_t>(j)] = best;
    }

    double worst = 0.0;
    const auto all_s = indices_with_sum_at_most(d, r);
    for (const auto& s : all_s) {
        double prod = 1.0;
        for (int v : s) prod *= order_sup[static_cast<std::size_t>(v)];
        worst = std::max(worst, prod);
    }

    // Hoelder quotient of the top-order derivatives on random pairs
    RngStream rng(seed, 0);
    for (const auto& s : all_s) {
        if (std::accumulate(s.begin(), s.end(), 0) != r) continue;
        for (int trial = 0; trial < 2000; ++trial) {
            Vector x(d), y(d);
            for (int i = 0; i < d; ++i) x(i) = rng.uniform(-0.3, 0.3);
            double spread = (trial % 2 == 0) ? 0.02 : 0.3;
            for (int i = 0; i < d; ++i) y(i) = x(i) + rng.uniform(-spread, spread);
            double dist = (x - y).lpNorm<Eigen::Infinity>();
            if (dist < 1e-9) continue;
            double q = std::abs(fd_partial(s, x) - fd_partial(s, y)) / std::pow(dist, beta);
            worst = std::max(worst, q);
        }
    }
    return 0.5 / worst;
}

BumpClassSpec make_bump_class(int d, int N, double alpha, std::vector<std::int8_t> a) {
    if (d < 1 || N < 1) throw std::invalid_argument("make_bump_class: bad d or N");
    std::size_t expected = 1;
    for (int i = 0; i < d; ++i) expected *= static_cast<std::size_t>(N);
    if (a.size() != expected) throw std::invalid_argument("make_bump_class: sign vector size");
    for (std::int8_t v : a)
        if (v != 1 && v != -1) throw std::invalid_argument("make_bump_class: signs must be +-1");
    BumpClassSpec spec;
    spec.d = d;
    spec.N = N;
    spec.alpha = alpha;
    spec.c_psi_alpha = estimate_c_psi_alpha(d, alpha);
    spec.a = std::move(a);
    return spec;
}

RademacherEstimate rademacher_linear_lb(const Matrix& points, double K, long trials,
                                        std::uint64_t seed, int L, double B) {
    const long n = points.cols();
    if (n < 1) throw std::invalid_argument("rademacher_linear_lb: empty point set");
    if (K < 0.0 || trials < 1) throw std::invalid_argument("rademacher_linear_lb: bad K or trials");
    const int d = static_cast<int>(points.rows());

    double sum = 0.0;
    double sum_sq = 0.0;
    for (long t = 0; t < trials; ++t) {
        RngStream rng(seed, static_cast<std::uint64_t>(t));
        Vector acc = Vector::Zero(d + 1);
        for (long i = 0; i < n; ++i) {
            double xi = rng.rademacher();
            acc.head(d) += xi * points.col(i);
            acc(d) += xi;
        }
        double value = 0.5 * K * acc.lpNorm<Eigen::Infinity>() / static_cast<double>(n);
        sum += value;
        sum_sq += value * value;
    }
    RademacherEstimate est;
    est.n = n;
    est.K = K;
    est.trials = trials;
    est.mc_mean = sum / trials;
    double var = (trials > 1) ? std::max(0.0, (sum_sq - sum * sum / trials) / (trials - 1)) : 0.0;
    est.mc_stderr = std::sqrt(var / trials);

    Vector col_sq = Vector::Zero(d + 1);
    for (long i = 0; i < n; ++i) {
        col_sq.head(d) += points.col(i).cwiseAbs2();
        col_sq(d) += 1.0;
    }
    est.lower_bound = K / (2.0 * kSqrt2 * n) * std::sqrt(col_sq.maxCoeff());
    est.upper_bound = B * K * std::sqrt(2.0 * (L + 2 + std::log(d + 1.0))) / std::sqrt(n);
    return est;
}

std::pair<double, double> rademacher_bound_formulas(long n, int d, double K, int L, double B) {
    if (n < 1 || K < 0.0 || L < 1 || B < 1.0)
        throw std::invalid_argument("rademacher_bound_formulas: bad parameters");
    double lb = K / (2.0 * std::sqrt(2.0 * n));
    double ub = B * K * std::sqrt(2.0 * (L + 2 + std::log(d + 1.0))) / std::sqrt(n);
    return {lb, ub};
}

W1Probe w1_nn_probe(const Matrix& points, long mc_samples, std::uint64_t seed) {
    const long n = points.cols();
    if (n < 1 || mc_samples < 1) throw std::invalid_argument("w1_nn_probe: bad inputs");
    const int d = static_cast<int>(points.rows());

    double sum = 0.0;
    double sum_sq = 0.0;
    Vector y(d);
    for (long t = 0; t < mc_samples; ++t) {
        RngStream rng(seed, static_cast<std::uint64_t>(t));
        for (int i = 0; i < d; ++i) y(i) = rng.uniform();
        double best = std::numeric_limits<double>::infinity();
        for (long i = 0; i < n; ++i)
            best = std::min(best, (points.col(i) - y).lpNorm<Eigen::Infinity>());
        sum += best;
        sum_sq += best * best;
    }
    W1Probe probe;
    probe.estimate = sum / mc_samples;
    double var = (mc_samples > 1)
                     ? std::max(0.0, (sum_sq - sum * sum / mc_samples) / (mc_samples - 1))
                     : 0.0;
    probe.stderr_ = std::sqrt(var / mc_samples);
    probe.lower_bound = 0.5 * d * std::pow(d + 1.0, -1.0 - 1.0 / d) *
                     std::pow(static_cast<double>(n), -1.0 / d);
    return probe;
}

ApproxLowerBounds approx_lower_bound_formulas(int d, double alpha, double K, int L) {
    if (K < 1.0 || L < 1) throw std::invalid_argument("approx_lower_bound_formulas: K >= 1, L >= 1 required");
    if (!(d > 2.0 * alpha)) {
        std::ostringstream msg;
        msg << "approx_lower_bound_formulas: regime d > 2*alpha violated (d=" << d
            << ", alpha=" << alpha << ")";
        throw RegimeError(msg.str());
    }
    ApproxLowerBounds out;
    out.general = std::pow(K * std::sqrt(static_cast<double>(L)), -2.0 * alpha / (d - 2.0 * alpha));
    if (alpha == 1.0 && d >= 3) {
        double c_d = (d - 2.0) * std::pow(4.0, -static_cast<double>(d) / (d - 2.0)) *
                     std::pow(d + 1.0, -(d + 1.0) / (d - 2.0));
        double t = K * std::sqrt(L + 2.0 + std::log(d + 1.0));
        out.lipschitz_explicit = c_d * std::pow(t, -2.0 / (d - 2.0));
    }
    return out;
}

double sup_error(const ReluNet& net, const std::function<double(const Vector&)>& f,
                 const GridSpec& grid) {
    if (net.output_dim() != 1) throw std::invalid_argument("sup_error: scalar-output net required");
    if (grid.d != net.input_dim()) throw std::invalid_argument("sup_error: dimension mismatch");
    const Matrix pts = grid.materialize();
    const Eigen::Index chunk = 4096;
    double worst = 0.0;
    for (Eigen::Index start = 0; start < pts.cols(); start += chunk) {
        Eigen::Index len = std::min(chunk, pts.cols() - start);
        Matrix block = pts.middleCols(start, len);
        Matrix vals = net.eval_batch(block);
        for (Eigen::Index p = 0; p < len; ++p)
            worst = std::max(worst, std::abs(f(block.col(p)) - vals(0, p)));
    }
    return worst;
}

}  // namespace normnet
