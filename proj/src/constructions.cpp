#include "normnet/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "normnet/net_algebra.hpp"

namespace normnet {

namespace {

int ceil_log2(int v) {
    int m = 0;
    while ((1 << m) < v) ++m;
    return m;
}

double pow_int(double base, int e) {
    double out = 1.0;
    for (int i = 0; i < e; ++i) out *= base;
    return out;
}

// selector [I 0] or [0 I] picking one half of 2h inputs
Matrix half_selector(int h, bool second) {
    Matrix A = Matrix::Zero(h, 2 * h);
    for (int i = 0; i < h; ++i) A(i, second ? h + i : i) = 1.0;
    return A;
}

// tree of product nets over 2^m inputs
ReluNet product_tree(const ReluNet& prod, int m) {
    ReluNet level = prod;
    for (int stage = 1; stage < m; ++stage) {
        int h = 1 << stage;
        ReluNet lhs = precompose_affine(level, half_selector(h, false), Vector());
        ReluNet rhs = precompose_affine(level, half_selector(h, true), Vector());
        level = compose(prod, concat(lhs, rhs));
    }
    return level;
}

// sigma(x_i - c) - sigma(-x_i + c) as a d-input net
ReluNet coordinate_shift_net(int d, int i, double c) {
    Matrix A0 = Matrix::Zero(2, d);
    A0(0, i) = 1.0;
    A0(1, i) = -1.0;
    Vector b0(2);
    b0 << -c, c;
    Matrix A1(1, 2);
    A1 << 1.0, -1.0;
    return rescale(ReluNet({{A0, b0}, {A1, Vector()}}));
}

std::vector<std::vector<int>> multi_indices_up_to(int d, int r) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(d), 0);
    std::function<void(int, int)> walk = [&](int pos, int remaining) {
        if (pos == d) {
            out.push_back(cur);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            cur[static_cast<std::size_t>(pos)] = v;
            walk(pos + 1, remaining - v);
        }
        cur[static_cast<std::size_t>(pos)] = 0;
    };
    walk(0, r);
    return out;
}

double factorial_of(const std::vector<int>& s) {
    double out = 1.0;
    for (int v : s)
        for (int j = 2; j <= v; ++j) out *= j;
    return out;
}

// One-pass flattening of the lincomb fold over already depth-aligned subnets:
// shared-input first layer, block-diagonal interior, coefficient-scaled output
// row. Identical to folding the binary combinators, without the intermediate
// copies.
ReluNet assemble_weighted_sum(const std::vector<TaylorParts::Term>& terms, long weight_cap) {
    const int Lc = terms.front().subnet.depth();
    const int d = terms.front().subnet.input_dim();

    std::vector<long> rows(static_cast<std::size_t>(Lc) + 1, 0);
    for (const auto& term : terms)
        for (int l = 0; l <= Lc; ++l)
            rows[static_cast<std::size_t>(l)] += term.subnet.layer(l).A.rows();
    long total = 0;
    long prev_cols = d;
    for (int l = 0; l <= Lc; ++l) {
        long r = rows[static_cast<std::size_t>(l)];
        total += r * prev_cols + (l < Lc ? r : 0);
        prev_cols = r;
    }
    if (total > weight_cap) {
        std::ostringstream msg;
        msg << "build_taylor_net: assembled weight count " << total
            << " exceeds configured cap " << weight_cap;
        throw ResourceError(msg.str());
    }

    std::vector<AffineLayer> layers;
    layers.reserve(static_cast<std::size_t>(Lc) + 1);
    prev_cols = d;
    for (int l = 0; l < Lc; ++l) {
        long r = rows[static_cast<std::size_t>(l)];
        Matrix A = Matrix::Zero(r, prev_cols);
        Vector b = Vector::Zero(r);
        long row0 = 0;
        long col0 = 0;
        for (const auto& term : terms) {
            const AffineLayer& lay = term.subnet.layer(l);
            if (l == 0) {
                A.block(row0, 0, lay.A.rows(), d) = lay.A;
            } else {
                A.block(row0, col0, lay.A.rows(), lay.A.cols()) = lay.A;
                col0 += lay.A.cols();
            }
            if (lay.has_bias()) b.segment(row0, lay.b.size()) = lay.b;
            row0 += lay.A.rows();
        }
        layers.push_back({std::move(A), std::move(b)});
        prev_cols = r;
    }
    Matrix out = Matrix::Zero(1, prev_cols);
    long col0 = 0;
    for (const auto& term : terms) {
        const AffineLayer& lay = term.subnet.layer(Lc);
        out.block(0, col0, 1, lay.A.cols()) = term.coef * lay.A;
        col0 += lay.A.cols();
    }
    layers.push_back({std::move(out), Vector()});
    return ReluNet(std::move(layers));
}

}  // namespace

int HolderSpec::smoothness_r() const {
    return static_cast<int>(std::ceil(alpha)) - 1;
}

double HolderSpec::derivative(const std::vector<int>& s, const Vector& x) const {
    bool zero_order = std::all_of(s.begin(), s.end(), [](int v) { return v == 0; });
    if (zero_order && !deriv) return f(x);
    if (!deriv) throw std::invalid_argument("HolderSpec: derivative oracle missing");
    return deriv(s, x);
}

double TaylorParts::eval(const Vector& x) const {
    double acc = 0.0;
    for (const Term& term : terms) {
        bool active = true;
        for (int i = 0; i < d; ++i) {
            if (std::abs(N * x(i) - term.index[static_cast<std::size_t>(i)]) >= 1.0) {
                active = false;
                break;
            }
        }
        if (active) acc += term.coef * term.subnet.eval(x)(0);
    }
    return acc;
}

Matrix TaylorParts::eval_batch(const Matrix& X) const {
    Matrix out = Matrix::Zero(1, X.cols());
    std::vector<Eigen::Index> active;
    for (const Term& term : terms) {
        active.clear();
        for (Eigen::Index p = 0; p < X.cols(); ++p) {
            bool ok = true;
            for (int i = 0; i < d; ++i) {
                if (std::abs(N * X(i, p) - term.index[static_cast<std::size_t>(i)]) >= 1.0) {
                    ok = false;
                    break;
                }
            }
            if (ok) active.push_back(p);
        }
        if (active.empty()) continue;
        Matrix sub(X.rows(), static_cast<Eigen::Index>(active.size()));
        for (std::size_t j = 0; j < active.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = X.col(active[j]);
        Matrix vals = term.subnet.eval_batch(sub);
        for (std::size_t j = 0; j < active.size(); ++j)
            out(0, active[j]) += term.coef * vals(0, static_cast<Eigen::Index>(j));
    }
    return out;
}

ApproxCertificate build_square(int k) {
    if (k < 1) throw std::invalid_argument("build_square: k must be >= 1");
    Matrix A0(k, 1);
    Vector b0(k);
    Matrix A1(1, k);
    for (int i = 1; i <= k; ++i) {
        double c = (2.0 * i - 1.0) / (2.0 * k);
        double scale = 1.0 + c;  // row norm before normalization
        A0(i - 1, 0) = 1.0 / scale;
        b0(i - 1) = -c / scale;
        A1(0, i - 1) = 2.0 * scale / k;
    }
    ApproxCertificate cert;
    cert.net = ReluNet({{A0, b0}, {A1, Vector()}});
    cert.width = k;
    cert.depth = 1;
    cert.kappa_stated = 3.0;
    cert.error_bound = 0.5 / (static_cast<double>(k) * k);
    cert.k = k;
    return cert;
}

ReluNet build_clip(double bound) {
    if (!(bound > 0.0)) throw std::invalid_argument("build_clip: bound must be positive");
    Matrix id(1, 1);
    id << 1.0;
    return truncate(ReluNet({{id, Vector()}}), bound);
}

ApproxCertificate build_product(int k) {
    if (k < 1) throw std::invalid_argument("build_product: k must be >= 1");
    ReluNet square = build_square(k).net;
    Matrix neg(1, 1);
    neg << -1.0;
    ReluNet folded = lincomb(1.0, square, 1.0, precompose_affine(square, neg, Vector()));

    auto arm = [&](double wx, double wy) {
        Matrix A(1, 2);
        A << wx, wy;
        return precompose_affine(folded, A, Vector());
    };
    ReluNet raw = lincomb(1.0, lincomb(2.0, arm(0.5, 0.5), -2.0, arm(0.5, 0.0)), -2.0,
                          arm(0.0, 0.5));
    ApproxCertificate cert;
    cert.net = compose(build_clip(1.0), raw);
    cert.width = 6 * k;
    cert.depth = 2;
    cert.kappa_stated = 216.0;
    cert.error_bound = 3.0 / (static_cast<double>(k) * k);
    cert.k = k;
    return cert;
}

ApproxCertificate build_monomial(int d, int k) {
    if (d < 2) throw std::invalid_argument("build_monomial: d must be >= 2");
    if (k < 1) throw std::invalid_argument("build_monomial: k must be >= 1");
    const int m = ceil_log2(d);
    ReluNet tree = product_tree(build_product(k).net, m);
    const int padded = 1 << m;
    if (padded > d) {
        Matrix A = Matrix::Zero(padded, d);
        A.topLeftCorner(d, d) = Matrix::Identity(d, d);
        Vector b = Vector::Zero(padded);
        b.tail(padded - d).setOnes();
        tree = precompose_affine(tree, A, b);
    }
    ApproxCertificate cert;
    cert.net = std::move(tree);
    cert.width = 6 * d * k;
    cert.depth = 2 * m;
    cert.kappa_stated = pow_int(6.0, 3 * m);
    cert.error_bound = 6.0 * d / (static_cast<double>(k) * k);
    cert.k = k;
    return cert;
}

ReluNet build_hat() {
    Matrix A0(2, 1);
    A0 << 1.0, -1.0;
    Vector b0 = Vector::Zero(2);
    // middle row (1 - h1 - h2) carries norm 3; emit it normalized
    Matrix A1(1, 2);
    A1 << -1.0 / 3.0, -1.0 / 3.0;
    Vector b1(1);
    b1 << 1.0 / 3.0;
    Matrix A2(1, 1);
    A2 << 3.0;
    return ReluNet({{A0, b0}, {A1, b1}, {A2, Vector()}});
}

namespace {

ReluNet hat_factor(int N, int d, int i, int n_i) {
    Matrix A = Matrix::Zero(1, d);
    A(0, i) = static_cast<double>(N);
    Vector b(1);
    b << -static_cast<double>(n_i);
    return precompose_affine(build_hat(), A, b);
}

}  // namespace

ReluNet build_partition(int N, int d, const std::vector<int>& n, int k) {
    if (N < 1 || d < 1) throw std::invalid_argument("build_partition: bad N or d");
    if (static_cast<int>(n.size()) != d)
        throw std::invalid_argument("build_partition: index length != d");
    for (int v : n)
        if (v < 0 || v > N) throw std::invalid_argument("build_partition: index out of range");
    if (d == 1) return hat_factor(N, 1, 0, n[0]);
    ReluNet inner = hat_factor(N, d, 0, n[0]);
    for (int i = 1; i < d; ++i) inner = concat(inner, hat_factor(N, d, i, n[static_cast<std::size_t>(i)]));
    return compose(build_monomial(d, k).net, inner);
}

ApproxCertificate build_taylor_net(const HolderSpec& spec, int N, int k, long weight_cap) {
    if (N < 1 || k < 1) throw std::invalid_argument("build_taylor_net: N, k must be >= 1");
    if (spec.d < 1) throw std::invalid_argument("build_taylor_net: bad dimension");
    if (!spec.f) throw std::invalid_argument("build_taylor_net: missing target callback");
    const int d = spec.d;
    const int r = spec.smoothness_r();
    if (r > 0 && !spec.deriv)
        throw std::invalid_argument("build_taylor_net: derivative oracle required for r >= 1");

    const int m = (d + r >= 2) ? ceil_log2(d + r) : 0;
    const int depth_stated = 2 * m + 2;
    const auto s_list = multi_indices_up_to(d, r);

    std::map<int, ReluNet> monomials;  // per product arity
    auto monomial_for = [&](int D) -> const ReluNet& {
        auto it = monomials.find(D);
        if (it == monomials.end()) it = monomials.emplace(D, build_monomial(D, k).net).first;
        return it->second;
    };

    double count_guard = 1.0;
    for (int i = 0; i < d; ++i) count_guard *= static_cast<double>(N + 1);
    count_guard *= static_cast<double>(s_list.size());
    if (count_guard > 1e7)
        throw ResourceError("build_taylor_net: term count (N+1)^d exceeds supported range");

    auto parts = std::make_shared<TaylorParts>();
    parts->d = d;
    parts->N = N;

    std::vector<int> n(static_cast<std::size_t>(d), 0);
    Vector center(d);
    while (true) {
        for (int i = 0; i < d; ++i)
            center(i) = static_cast<double>(n[static_cast<std::size_t>(i)]) / N;
        for (const auto& s : s_list) {
            const int s_sum = std::accumulate(s.begin(), s.end(), 0);
            double coef = spec.derivative(s, center) / factorial_of(s);

            ReluNet inner = hat_factor(N, d, 0, n[0]);
            for (int i = 1; i < d; ++i)
                inner = concat(inner, hat_factor(N, d, i, n[static_cast<std::size_t>(i)]));
            for (int i = 0; i < d; ++i)
                for (int rep = 0; rep < s[static_cast<std::size_t>(i)]; ++rep)
                    inner = concat(inner, coordinate_shift_net(d, i, center(i)));

            ReluNet subnet = (d == 1 && s_sum == 0)
                                 ? inner
                                 : compose(monomial_for(d + s_sum), inner);
            if (subnet.depth() < depth_stated)
                subnet = pad(subnet, subnet.width(), depth_stated);
            parts->terms.push_back({coef, std::move(subnet), n});
        }
        int pos = d - 1;
        while (pos >= 0 && ++n[static_cast<std::size_t>(pos)] > N) {
            n[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }

    ApproxCertificate cert;
    cert.net = assemble_weighted_sum(parts->terms, weight_cap);
    double n_cells = pow_int(static_cast<double>(N + 1), d);
    double dr = pow_int(static_cast<double>(d), r);
    cert.width = static_cast<int>(6.0 * (r + 1) * (d + r) * dr * n_cells * k);
    cert.depth = depth_stated;
    cert.kappa_stated = pow_int(6.0, 3 * m + 1) * (r + 1) * dr * N * n_cells;
    cert.error_bound =
        pow_int(2.0, d) * dr * (std::pow(N, -spec.alpha) + 6.0 * (r + 1) * (d + r) / (static_cast<double>(k) * k));
    cert.N = N;
    cert.k = k;
    cert.parts = std::move(parts);
    return cert;
}

ApproxCertificate build_approximant(const HolderSpec& spec, double K_target, long weight_cap) {
    if (!(K_target >= 1.0)) throw std::invalid_argument("build_approximant: K_target must be >= 1");
    const int d = spec.d;
    const int r = spec.smoothness_r();
    const int m = (d + r >= 2) ? ceil_log2(d + r) : 0;
    double dr = pow_int(static_cast<double>(d), r);

    auto grid_N_for = [&](int k) {
        double v = std::pow(static_cast<double>(k), 2.0 / spec.alpha);
        double rounded = std::nearbyint(v);
        if (std::abs(v - rounded) < 1e-9) v = rounded;
        return static_cast<int>(std::ceil(v));
    };
    auto stated_kappa = [&](int k) {
        int N = grid_N_for(k);
        return pow_int(6.0, 3 * m + 1) * (r + 1) * dr * N * pow_int(static_cast<double>(N + 1), d);
    };

    if (stated_kappa(1) > K_target)
        throw InfeasibleBudgetError("build_approximant: no k >= 1 fits the kappa budget");
    int k = 1;
    while (k < 1000000 && stated_kappa(k + 1) <= K_target) ++k;
    return build_taylor_net(spec, grid_N_for(k), k, weight_cap);
}

double measure_sup_error(const ApproxCertificate& cert,
                         const std::function<double(const Vector&)>& target,
                         const GridSpec& grid) {
    const Matrix pts = grid.materialize();
    const Eigen::Index n = pts.cols();
    const Eigen::Index chunk = 4096;
    double worst = 0.0;
    for (Eigen::Index start = 0; start < n; start += chunk) {
        Eigen::Index len = std::min(chunk, n - start);
        Matrix block = pts.middleCols(start, len);
        Matrix vals = cert.parts ? cert.parts->eval_batch(block) : cert.net.eval_batch(block);
        for (Eigen::Index p = 0; p < len; ++p) {
            double err = std::abs(target(block.col(p)) - vals(0, p));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

std::optional<std::string> holder_spot_check(const HolderSpec& spec, int per_dim) {
    const int r = spec.smoothness_r();
    GridSpec grid = GridSpec::tensor(spec.d, per_dim);
    Matrix pts = grid.materialize();
    for (const auto& s : multi_indices_up_to(spec.d, r)) {
        for (Eigen::Index p = 0; p < pts.cols(); ++p) {
            double v = spec.derivative(s, pts.col(p));
            if (!(std::abs(v) <= 1.0 + 1e-9)) {
                std::ostringstream msg;
                msg << "derivative magnitude " << std::abs(v) << " exceeds 1 at a grid point";
                return msg.str();
            }
        }
    }
    return std::nullopt;
}

HolderSpec target_product(int d) {
    double scale = (d <= 2) ? 1.0 : 1.0 / static_cast<double>(d - 1);
    HolderSpec spec;
    spec.d = d;
    spec.alpha = 2.0;
    spec.f = [d, scale](const Vector& x) {
        double out = scale;
        for (int i = 0; i < d; ++i) out *= x(i);
        return out;
    };
    spec.deriv = [d, scale](const std::vector<int>& s, const Vector& x) {
        double out = scale;
        for (int i = 0; i < d; ++i) {
            int si = s[static_cast<std::size_t>(i)];
            if (si == 0)
                out *= x(i);
            else if (si > 1)
                return 0.0;
        }
        return out;
    };
    return spec;
}

HolderSpec target_sin_sum(int d) {
    HolderSpec spec;
    spec.d = d;
    spec.alpha = 1.0;
    double freq = 2.0 / d;
    spec.f = [d, freq](const Vector& x) { return 0.5 * std::sin(freq * x.sum()); };
    spec.deriv = [spec](const std::vector<int>&, const Vector& x) { return spec.f(x); };
    return spec;
}

HolderSpec target_quad_mean(int d) {
    HolderSpec spec;
    spec.d = d;
    spec.alpha = 2.0;
    spec.f = [d](const Vector& x) { return x.squaredNorm() / (2.0 * d); };
    spec.deriv = [d, f = spec.f](const std::vector<int>& s, const Vector& x) {
        int total = std::accumulate(s.begin(), s.end(), 0);
        if (total == 0) return f(x);
        int i = static_cast<int>(std::find(s.begin(), s.end(), 1) - s.begin());
        return x(i) / d;
    };
    return spec;
}

HolderSpec target_constant(int d, double value) {
    HolderSpec spec;
    spec.d = d;
    spec.alpha = 1.0;
    spec.f = [value](const Vector&) { return value; };
    spec.deriv = [value](const std::vector<int>& s, const Vector&) {
        int total = std::accumulate(s.begin(), s.end(), 0);
        return total == 0 ? value : 0.0;
    };
    return spec;
}

HolderSpec make_target(const std::string& name, int d) {
    if (name == "prod") return target_product(d);
    if (name == "sinsum") return target_sin_sum(d);
    if (name == "quadmean") return target_quad_mean(d);
    if (name.rfind("const:", 0) == 0) return target_constant(d, std::stod(name.substr(6)));
    throw std::invalid_argument("make_target: unknown target '" + name + "'");
}

}  // namespace normnet
