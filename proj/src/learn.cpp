#include "normnet/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace normnet {

namespace {

std::vector<AffineLayer> step_layers(const ReluNet& net, const NetGrad& grad, double lr) {
    std::vector<AffineLayer> layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].A -= lr * grad.dA[l];
        if (layers[l].has_bias() && grad.db[l].size() > 0) layers[l].b -= lr * grad.db[l];
    }
    return layers;
}

int argmax_row_norm(const AffineLayer& lay) {
    Vector sums = lay.A.cwiseAbs().rowwise().sum();
    if (lay.has_bias()) sums += lay.b.cwiseAbs();
    int best = 0;
    for (Eigen::Index i = 1; i < sums.size(); ++i)
        if (sums(i) > sums(best)) best = static_cast<int>(i);
    return best;
}

}  // namespace

NetGrad NetGrad::zeros_like(const ReluNet& net) {
    NetGrad g;
    g.dA.reserve(net.layers().size());
    g.db.reserve(net.layers().size());
    for (const AffineLayer& lay : net.layers()) {
        g.dA.push_back(Matrix::Zero(lay.A.rows(), lay.A.cols()));
        g.db.push_back(lay.has_bias() ? Vector(Vector::Zero(lay.b.size())) : Vector());
    }
    return g;
}

void NetGrad::add_scaled(double c, const NetGrad& other) {
    for (std::size_t l = 0; l < dA.size(); ++l) {
        dA[l] += c * other.dA[l];
        if (db[l].size() > 0 && other.db[l].size() > 0) db[l] += c * other.db[l];
    }
}

BackpropResult backprop_pass(const ReluNet& net, const Matrix& X, const Matrix& out_delta) {
    if (X.cols() < 1) throw std::invalid_argument("backprop_pass: empty batch");
    if (X.rows() != net.input_dim() || out_delta.rows() != net.output_dim() ||
        out_delta.cols() != X.cols())
        throw std::invalid_argument("backprop_pass: dimension mismatch");

    const int L = net.depth();
    std::vector<Matrix> acts;  // post-activation values, acts[0] = X
    acts.reserve(static_cast<std::size_t>(L) + 1);
    acts.push_back(X);
    for (int l = 0; l < L; ++l) {
        Matrix z = net.layer(l).A * acts.back();
        if (net.layer(l).has_bias()) z.colwise() += net.layer(l).b;
        acts.push_back(z.cwiseMax(0.0));
    }

    BackpropResult res;
    res.grad = NetGrad::zeros_like(net);
    res.grad.dA[static_cast<std::size_t>(L)] = out_delta * acts[static_cast<std::size_t>(L)].transpose();
    Matrix delta = net.layer(L).A.transpose() * out_delta;
    for (int l = L - 1; l >= 0; --l) {
        // subgradient 0 at the kink: strictly positive activations only
        delta.array() *= (acts[static_cast<std::size_t>(l) + 1].array() > 0.0).cast<double>();
        res.grad.dA[static_cast<std::size_t>(l)] = delta * acts[static_cast<std::size_t>(l)].transpose();
        if (net.layer(l).has_bias()) res.grad.db[static_cast<std::size_t>(l)] = delta.rowwise().sum();
        delta = net.layer(l).A.transpose() * delta;
    }
    res.input_delta = std::move(delta);
    return res;
}

LossGrad backprop_squared(const ReluNet& net, const Matrix& X, const Matrix& Y) {
    if (Y.cols() != X.cols() || Y.rows() != net.output_dim())
        throw std::invalid_argument("backprop_squared: label shape mismatch");
    const double B = static_cast<double>(X.cols());
    Matrix residual = net.eval_batch(X) - Y;
    LossGrad out;
    out.loss = residual.squaredNorm() / B;
    out.grad = backprop_pass(net, X, Matrix((2.0 / B) * residual)).grad;
    return out;
}

LossGrad backprop_witness(const ReluNet& net, const Matrix& XA, const Matrix& XB) {
    if (net.output_dim() != 1)
        throw std::invalid_argument("backprop_witness: scalar-output net required");
    if (XA.cols() < 1 || XB.cols() < 1)
        throw std::invalid_argument("backprop_witness: empty batch");
    LossGrad out;
    out.loss = net.eval_batch(XA).mean() - net.eval_batch(XB).mean();
    Matrix da = Matrix::Constant(1, XA.cols(), 1.0 / static_cast<double>(XA.cols()));
    Matrix db = Matrix::Constant(1, XB.cols(), -1.0 / static_cast<double>(XB.cols()));
    out.grad = backprop_pass(net, XA, da).grad;
    out.grad.add_scaled(1.0, backprop_pass(net, XB, db).grad);
    return out;
}

ReluNet kappa_project(const ReluNet& net, double K) {
    if (!(K > 0.0)) throw std::invalid_argument("kappa_project: K must be positive");
    ReluNet scaled = rescale(net);
    double out_norm = op_norm(scaled.layer(scaled.depth()).A);
    if (out_norm <= K) return scaled;
    std::vector<AffineLayer> layers = scaled.layers();
    layers.back().A *= K / out_norm;
    return ReluNet(std::move(layers));
}

NetGrad kappa_penalty_grad(const ReluNet& net, bool squared) {
    const int L = net.depth();
    KappaReport report = kappa(net);
    NetGrad grad = NetGrad::zeros_like(net);

    double hidden_product = 1.0;
    for (double h : report.hidden_norms) hidden_product *= std::max(h, 1.0);

    const AffineLayer& out = net.layer(L);
    int row = argmax_row_norm(out);
    for (Eigen::Index c = 0; c < out.A.cols(); ++c) {
        double v = out.A(row, c);
        if (v != 0.0) grad.dA[static_cast<std::size_t>(L)](row, c) = (v > 0.0 ? 1.0 : -1.0) * hidden_product;
    }

    for (int l = 0; l < L; ++l) {
        double h = report.hidden_norms[static_cast<std::size_t>(l)];
        if (h <= 1.0) continue;  // flat region of max{., 1}
        double factor = report.output_norm;
        for (int j = 0; j < L; ++j)
            if (j != l) factor *= std::max(report.hidden_norms[static_cast<std::size_t>(j)], 1.0);
        const AffineLayer& lay = net.layer(l);
        int i = argmax_row_norm(lay);
        for (Eigen::Index c = 0; c < lay.A.cols(); ++c) {
            double v = lay.A(i, c);
            if (v != 0.0) grad.dA[static_cast<std::size_t>(l)](i, c) = (v > 0.0 ? 1.0 : -1.0) * factor;
        }
        if (lay.has_bias() && lay.b(i) != 0.0)
            grad.db[static_cast<std::size_t>(l)](i) = (lay.b(i) > 0.0 ? 1.0 : -1.0) * factor;
    }

    if (squared) {
        for (std::size_t l = 0; l < grad.dA.size(); ++l) {
            grad.dA[l] *= 2.0 * report.kappa;
            if (grad.db[l].size() > 0) grad.db[l] *= 2.0 * report.kappa;
        }
    }
    return grad;
}

ReluNet random_net(int in_dim, int out_dim, int width, int depth, RngStream& rng, double scale) {
    if (in_dim < 1 || out_dim < 1 || width < 1 || depth < 0)
        throw std::invalid_argument("random_net: bad architecture");
    std::vector<AffineLayer> layers;
    int prev = in_dim;
    for (int l = 0; l < depth; ++l) {
        double a = scale / std::sqrt(static_cast<double>(prev));
        Matrix A(width, prev);
        Vector b(width);
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = rng.uniform(-a, a);
        // nonnegative biases keep every unit initially alive under ReLU
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(0.0, 0.1) * scale;
        layers.push_back({std::move(A), std::move(b)});
        prev = width;
    }
    double a = scale / std::sqrt(static_cast<double>(prev));
    Matrix A(out_dim, prev);
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = rng.uniform(-a, a);
    layers.push_back({std::move(A), Vector()});
    return ReluNet(std::move(layers));
}

DivergenceError::DivergenceError(int at_epoch)
    : std::runtime_error("training diverged (loss > 1e6) at epoch " + std::to_string(at_epoch)),
      epoch(at_epoch) {}

TrainReport train_regression(const RegressionConfig& cfg) {
    if (cfg.K.has_value() == cfg.lambda.has_value())
        throw std::invalid_argument("train_regression: exactly one of K, lambda must be set");
    if (cfg.n < 1 || cfg.steps < 1 || cfg.batch < 1 || cfg.epochs < 1)
        throw std::invalid_argument("train_regression: bad sizes");
    if (!cfg.target.f) throw std::invalid_argument("train_regression: missing target");
    const int d = cfg.target.d;

    RngStream data_rng(cfg.seed, 1);
    Matrix X(d, cfg.n);
    Matrix Y(1, cfg.n);
    for (long i = 0; i < cfg.n; ++i) {
        for (int j = 0; j < d; ++j) X(j, i) = data_rng.uniform();
        Y(0, i) = cfg.target.f(X.col(i)) + cfg.noise_std * data_rng.normal();
    }
    RngStream holdout_rng(cfg.seed, 2);
    Matrix Xh(d, cfg.holdout_n);
    Vector fh(cfg.holdout_n);
    for (long i = 0; i < cfg.holdout_n; ++i) {
        for (int j = 0; j < d; ++j) Xh(j, i) = holdout_rng.uniform();
        fh(i) = cfg.target.f(Xh.col(i));
    }

    RngStream init_rng(cfg.seed, 3);
    ReluNet net = random_net(d, 1, cfg.width, cfg.depth, init_rng, 1.0);
    if (cfg.K) net = kappa_project(net, *cfg.K);

    RngStream batch_rng(cfg.seed, 4);
    const double t0 = cfg.lr_decay_t0 > 0.0 ? cfg.lr_decay_t0
                                            : std::max(1.0, static_cast<double>(cfg.steps) / 10.0);
    const long steps_per_epoch = std::max(1L, cfg.steps / cfg.epochs);

    TrainReport report;
    double best_loss = std::numeric_limits<double>::infinity();
    Matrix Xb(d, cfg.batch);
    Matrix Yb(1, cfg.batch);

    auto record_epoch = [&](int epoch) {
        double full_loss = (net.eval_batch(X) - Y).squaredNorm() / static_cast<double>(cfg.n);
        if (full_loss > 1e6) throw DivergenceError(epoch);
        best_loss = std::min(best_loss, full_loss);
        Matrix pred = net.eval_batch(Xh).cwiseMax(-1.0).cwiseMin(1.0);  // NN^1 convention
        double mse = (pred.transpose().col(0) - fh).squaredNorm() / static_cast<double>(cfg.holdout_n);
        report.epochs.push_back({epoch, full_loss, kappa(net).kappa, mse, full_loss - best_loss});
    };

    for (long t = 0; t < cfg.steps; ++t) {
        for (int b = 0; b < cfg.batch; ++b) {
            long i = static_cast<long>(batch_rng.below(static_cast<std::uint64_t>(cfg.n)));
            Xb.col(b) = X.col(i);
            Yb(0, b) = Y(0, i);
        }
        LossGrad lg = backprop_squared(net, Xb, Yb);
        if (!(lg.loss <= 1e6))
            throw DivergenceError(static_cast<int>(t / steps_per_epoch) + 1);
        if (cfg.lambda) lg.grad.add_scaled(*cfg.lambda, kappa_penalty_grad(net, false));
        double lr_t = cfg.lr / (1.0 + static_cast<double>(t) / t0);
        net = ReluNet(step_layers(net, lg.grad, lr_t));
        if (cfg.K) net = kappa_project(net, *cfg.K);
        if ((t + 1) % steps_per_epoch == 0 || t + 1 == cfg.steps) {
            record_epoch(static_cast<int>((t + steps_per_epoch) / steps_per_epoch));
            if (t + 1 == cfg.steps) break;
        }
    }
    report.net = std::move(net);
    return report;
}

double ipm_estimate(int disc_width, int disc_depth, std::optional<double> K,
                    std::optional<double> lambda, const Matrix& samples_mu,
                    const Matrix& samples_nu, long inner_steps, double lr,
                    std::uint64_t seed) {
    if (samples_mu.cols() < 1 || samples_nu.cols() < 1)
        throw std::invalid_argument("ipm_estimate: empty samples");
    if (K.has_value() == lambda.has_value())
        throw std::invalid_argument("ipm_estimate: exactly one of K, lambda must be set");
    const int d = static_cast<int>(samples_mu.rows());

    RngStream init_rng(seed, 11);
    ReluNet seeded = random_net(d, 1, disc_width, disc_depth, init_rng, 1.0);
    // ascent-friendly start: unit-norm first-layer directions, no bias, zero
    // output layer, so the budget flows toward the units that pay off
    std::vector<AffineLayer> layers = seeded.layers();
    for (Eigen::Index i = 0; i < layers.front().A.rows(); ++i) {
        double norm = layers.front().A.row(i).cwiseAbs().sum();
        if (norm > 0.0) layers.front().A.row(i) /= norm;
    }
    layers.front().b.setZero();
    layers.back().A.setZero();
    ReluNet disc(layers);
    if (K) disc = kappa_project(disc, *K);

    auto objective = [&](const ReluNet& f) {
        double gap = f.eval_batch(samples_mu).mean() - f.eval_batch(samples_nu).mean();
        if (lambda) {
            double kap = kappa(f).kappa;
            gap -= *lambda * kap * kap;
        }
        return gap;
    };

    const double t0 = std::max(1.0, static_cast<double>(inner_steps) / 10.0);
    double best = objective(disc);
    for (long t = 0; t < inner_steps; ++t) {
        LossGrad lg = backprop_witness(disc, samples_mu, samples_nu);
        if (lambda) lg.grad.add_scaled(-1.0 * *lambda, kappa_penalty_grad(disc, true));
        double lr_t = lr / (1.0 + static_cast<double>(t) / t0);
        disc = ReluNet(step_layers(disc, lg.grad, -lr_t));  // ascent
        if (K) disc = kappa_project(disc, *K);
        double value = objective(disc);
        if (!(value > -1e12 && value < 1e12)) throw DivergenceError(static_cast<int>(t));
        best = std::max(best, value);
    }
    return best;
}

std::pair<double, double> scaling_identity_check(const ReluNet& witness,
                                                 const Matrix& samples_mu,
                                                 const Matrix& samples_nu, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("scaling_identity_check: lambda must be > 0");
    ReluNet unit = rescale(witness);
    double kap = kappa(unit).kappa;
    double delta = 0.0;
    if (kap > 0.0) {
        std::vector<AffineLayer> layers = unit.layers();
        layers.back().A /= kap;
        unit = ReluNet(std::move(layers));
        delta = unit.eval_batch(samples_mu).mean() - unit.eval_batch(samples_nu).mean();
    }

    auto value = [&](double a) { return a * delta - lambda * a * a; };
    double lo = 0.0;
    double hi = std::max(delta, 0.0) / lambda + 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        double m1 = lo + (hi - lo) / 3.0;
        double m2 = hi - (hi - lo) / 3.0;
        if (value(m1) < value(m2))
            lo = m1;
        else
            hi = m2;
    }
    double lhs = std::max(value(0.5 * (lo + hi)), 0.0);
    double pos = std::max(delta, 0.0);
    double rhs = pos * pos / (4.0 * lambda);
    return {lhs, rhs};
}

double WitnessFamily::surrogate(const Matrix& p, const Matrix& q) const {
    double worst = 0.0;
    for (const auto& fn : fns) {
        double mp = 0.0;
        for (Eigen::Index i = 0; i < p.cols(); ++i) mp += fn(p.col(i));
        mp /= static_cast<double>(p.cols());
        double mq = 0.0;
        for (Eigen::Index i = 0; i < q.cols(); ++i) mq += fn(q.col(i));
        mq /= static_cast<double>(q.cols());
        worst = std::max(worst, std::abs(mp - mq));
    }
    return worst;
}

WitnessFamily make_witness_family(int d, int count, std::uint64_t seed) {
    WitnessFamily family;
    for (int i = 0; i < d; ++i)
        family.fns.push_back([i](const Vector& x) { return x(i); });
    RngStream rng(seed, 5);
    for (int w = 0; w < count; ++w) {
        ReluNet net = kappa_project(random_net(d, 1, 8, 1, rng, 1.5), 1.0);
        family.fns.push_back([net](const Vector& x) { return net.eval(x)(0); });
    }
    return family;
}

GanReport train_gan(const GanConfig& cfg) {
    if (cfg.disc_K.has_value() == cfg.disc_lambda.has_value())
        throw std::invalid_argument("train_gan: exactly one of disc_K, disc_lambda must be set");
    if (!cfg.planted_generator && !cfg.target_samples)
        throw std::invalid_argument("train_gan: no target distribution given");
    if (cfg.n < 1 || cfg.nu_batch < 1) throw std::invalid_argument("train_gan: bad sample sizes");
    const int d = cfg.data_dim;

    auto draw_source = [&](RngStream& rng, long count) {
        Matrix Z(cfg.source_dim, count);
        for (long i = 0; i < count; ++i)
            for (int j = 0; j < cfg.source_dim; ++j) Z(j, i) = rng.uniform();
        return Z;
    };

    RngStream data_rng(cfg.seed, 21);
    Matrix target(d, cfg.n);
    if (cfg.planted_generator) {
        Matrix Z = draw_source(data_rng, cfg.n);
        target = cfg.planted_generator->eval_batch(Z);
    } else {
        if (cfg.target_samples->rows() != d)
            throw std::invalid_argument("train_gan: target sample dimension mismatch");
        target = *cfg.target_samples;
    }

    RngStream init_rng(cfg.seed, 22);
    ReluNet gen = random_net(cfg.source_dim, d, cfg.gen_width, cfg.gen_depth, init_rng, 1.0);
    ReluNet disc = random_net(d, 1, cfg.disc_width, cfg.disc_depth, init_rng, 1.0);
    if (cfg.disc_K) disc = kappa_project(disc, *cfg.disc_K);

    WitnessFamily family = make_witness_family(d, cfg.witness_count, cfg.seed);
    RngStream eval_rng(cfg.seed, 23);
    Matrix eval_z = draw_source(eval_rng, cfg.eval_samples);
    Matrix eval_target(d, cfg.eval_samples);
    if (cfg.planted_generator) {
        Matrix Z = draw_source(eval_rng, cfg.eval_samples);
        eval_target = cfg.planted_generator->eval_batch(Z);
    } else {
        eval_target = target;
    }

    RngStream probe_rng(cfg.seed, 24);
    std::vector<std::pair<Vector, Vector>> probe_pairs;
    for (int i = 0; i < 64; ++i) {
        Vector a(d), b(d);
        for (int j = 0; j < d; ++j) {
            a(j) = probe_rng.uniform();
            b(j) = probe_rng.uniform();
        }
        probe_pairs.emplace_back(std::move(a), std::move(b));
    }

    RngStream z_rng(cfg.seed, 25);
    GanReport report;
    report.initial_surrogate = family.surrogate(eval_target, gen.eval_batch(eval_z));

    const double disc_t0 = std::max(1.0, static_cast<double>(cfg.inner_steps) / 4.0);
    const double gen_t0 = std::max(1.0, static_cast<double>(cfg.outer_steps) / 4.0);
    for (int outer = 0; outer < cfg.outer_steps; ++outer) {
        Matrix Z = draw_source(z_rng, cfg.nu_batch);
        Matrix fake = gen.eval_batch(Z);

        double inner_value = 0.0;
        for (int t = 0; t < cfg.inner_steps; ++t) {
            LossGrad lg = backprop_witness(disc, target, fake);
            if (cfg.disc_lambda)
                lg.grad.add_scaled(-1.0 * *cfg.disc_lambda, kappa_penalty_grad(disc, true));
            double lr_t = cfg.lr_disc / (1.0 + static_cast<double>(t) / disc_t0);
            disc = ReluNet(step_layers(disc, lg.grad, -lr_t));
            if (cfg.disc_K) disc = kappa_project(disc, *cfg.disc_K);
        }
        {
            double gap = disc.eval_batch(target).mean() - disc.eval_batch(fake).mean();
            if (cfg.disc_lambda) {
                double kap = kappa(disc).kappa;
                gap -= *cfg.disc_lambda * kap * kap;
            }
            inner_value = gap;
            if (std::abs(gap) > 1e6) throw DivergenceError(outer);
        }

        // generator step: descend mean_mu f - mean f(g(z))
        Matrix ones = Matrix::Constant(1, fake.cols(), 1.0 / static_cast<double>(fake.cols()));
        Matrix din = backprop_pass(disc, fake, ones).input_delta;
        NetGrad gen_grad = backprop_pass(gen, Z, Matrix(-din)).grad;
        double lr_g = cfg.lr_gen / (1.0 + static_cast<double>(outer) / gen_t0);
        gen = ReluNet(step_layers(gen, gen_grad, lr_g));

        double surrogate = family.surrogate(eval_target, gen.eval_batch(eval_z));
        report.steps.push_back({outer, inner_value, kappa(disc).kappa,
                                lipschitz_probe(disc, probe_pairs), surrogate});
    }
    report.final_surrogate = report.steps.empty() ? report.initial_surrogate
                                                  : report.steps.back().ipm_surrogate;
    report.generator = std::move(gen);
    report.discriminator = std::move(disc);
    return report;
}

}  // namespace normnet
