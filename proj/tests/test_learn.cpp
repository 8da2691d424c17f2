#include "doctest.h"

#include <cmath>

#include "normnet/learn.hpp"
#include "normnet/net_algebra.hpp"
#include "test_util.hpp"

using namespace normnet;
using testutil::vec1;

namespace {

// central finite differences through every parameter of the net
NetGrad fd_gradient(const ReluNet& net, const std::function<double(const ReluNet&)>& loss,
                    double h = 1e-5) {
    NetGrad g = NetGrad::zeros_like(net);
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        const AffineLayer& lay = net.layer(static_cast<int>(l));
        for (Eigen::Index i = 0; i < lay.A.rows(); ++i)
            for (Eigen::Index j = 0; j < lay.A.cols(); ++j) {
                std::vector<AffineLayer> up = net.layers();
                std::vector<AffineLayer> down = net.layers();
                up[l].A(i, j) += h;
                down[l].A(i, j) -= h;
                g.dA[l](i, j) = (loss(ReluNet(up)) - loss(ReluNet(down))) / (2.0 * h);
            }
        if (lay.has_bias())
            for (Eigen::Index i = 0; i < lay.b.size(); ++i) {
                std::vector<AffineLayer> up = net.layers();
                std::vector<AffineLayer> down = net.layers();
                up[l].b(i) += h;
                down[l].b(i) -= h;
                g.db[l](i) = (loss(ReluNet(up)) - loss(ReluNet(down))) / (2.0 * h);
            }
    }
    return g;
}

double max_rel_gap(const NetGrad& a, const NetGrad& b) {
    double worst = 0.0;
    for (std::size_t l = 0; l < a.dA.size(); ++l) {
        for (Eigen::Index i = 0; i < a.dA[l].rows(); ++i)
            for (Eigen::Index j = 0; j < a.dA[l].cols(); ++j) {
                double denom = std::max(1.0, std::abs(b.dA[l](i, j)));
                worst = std::max(worst, std::abs(a.dA[l](i, j) - b.dA[l](i, j)) / denom);
            }
        for (Eigen::Index i = 0; i < a.db[l].size(); ++i) {
            double denom = std::max(1.0, std::abs(b.db[l](i)));
            worst = std::max(worst, std::abs(a.db[l](i) - b.db[l](i)) / denom);
        }
    }
    return worst;
}

// true when every hidden pre-activation stays away from the ReLU kink
bool away_from_kinks(const ReluNet& net, const Matrix& X, double margin = 1e-4) {
    Matrix h = X;
    for (int l = 0; l < net.depth(); ++l) {
        Matrix z = net.layer(l).A * h;
        if (net.layer(l).has_bias()) z.colwise() += net.layer(l).b;
        if (z.cwiseAbs().minCoeff() < margin) return false;
        h = z.cwiseMax(0.0);
    }
    return true;
}

}  // namespace

TEST_CASE("backprop matches finite differences away from kinks") {
    RngStream rng(100);
    int checked = 0;
    while (checked < 40) {
        ReluNet net = testutil::random_small_net(rng, 2, 1);
        Matrix X = testutil::random_points(2, 4, rng, -1.0, 1.0);
        Matrix Y = testutil::random_points(1, 4, rng, -1.0, 1.0);
        if (!away_from_kinks(net, X)) continue;
        ++checked;

        LossGrad lg = backprop_squared(net, X, Y);
        NetGrad fd = fd_gradient(net, [&](const ReluNet& candidate) {
            return (candidate.eval_batch(X) - Y).squaredNorm() / static_cast<double>(X.cols());
        });
        CHECK(max_rel_gap(lg.grad, fd) < 1e-5);
    }
}

TEST_CASE("witness-loss gradients match finite differences") {
    RngStream rng(101);
    int checked = 0;
    while (checked < 40) {
        ReluNet net = testutil::random_small_net(rng, 2, 1);
        Matrix XA = testutil::random_points(2, 3, rng);
        Matrix XB = testutil::random_points(2, 5, rng);
        Matrix joined(2, 8);
        joined << XA, XB;
        if (!away_from_kinks(net, joined)) continue;
        ++checked;

        LossGrad lg = backprop_witness(net, XA, XB);
        NetGrad fd = fd_gradient(net, [&](const ReluNet& candidate) {
            return candidate.eval_batch(XA).mean() - candidate.eval_batch(XB).mean();
        });
        CHECK(max_rel_gap(lg.grad, fd) < 1e-5);
    }
}

TEST_CASE("gradient vanishes at a perfect fit") {
    Matrix A0(2, 1), A1(1, 2);
    A0 << 1.0, -1.0;
    A1 << 1.0, -1.0;
    ReluNet id({{A0, Vector::Zero(2)}, {A1, Vector()}});
    Matrix X = Matrix::Constant(1, 6, 0.4);
    Matrix Y = Matrix::Constant(1, 6, 0.4);
    LossGrad lg = backprop_squared(id, X, Y);
    CHECK(lg.loss == doctest::Approx(0.0));
    for (const Matrix& dA : lg.grad.dA) CHECK(dA.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("kappa projection clips only the infeasible part") {
    RngStream rng(102);
    for (int trial = 0; trial < 50; ++trial) {
        ReluNet net = testutil::random_small_net(rng, 2, 1);
        double K = rng.uniform(0.5, 3.0);
        ReluNet projected = kappa_project(net, K);
        CHECK(kappa(projected).kappa <= K * (1.0 + 1e-12));
        // idempotent
        ReluNet twice = kappa_project(projected, K);
        CHECK(kappa(twice).kappa <= K * (1.0 + 1e-12));
        Vector x = testutil::random_point(2, rng, -1.0, 1.0);
        CHECK(std::abs(twice.eval(x)(0) - projected.eval(x)(0)) <=
              1e-10 * std::max(1.0, std::abs(projected.eval(x)(0))));
    }

    ReluNet net = testutil::random_small_net(rng, 2, 1);
    double kap = kappa(net).kappa;
    ReluNet feasible = kappa_project(net, kap * 2.0);
    ReluNet halved = kappa_project(net, kap / 2.0);
    for (int p = 0; p < 50; ++p) {
        Vector x = testutil::random_point(2, rng, -1.0, 1.0);
        double want = net.eval(x)(0);
        CHECK(std::abs(feasible.eval(x)(0) - want) <= 1e-10 * std::max(1.0, std::abs(want)));
        CHECK(std::abs(halved.eval(x)(0) - 0.5 * want) <= 1e-10 * std::max(1.0, std::abs(want)));
    }
    CHECK(kappa(halved).kappa == doctest::Approx(kap / 2.0));
    CHECK_THROWS_AS(kappa_project(net, 0.0), std::invalid_argument);
}

TEST_CASE("kappa subgradient follows the argmax-row sign pattern") {
    // single linear layer [2, -3]
    Matrix A(1, 2);
    A << 2.0, -3.0;
    ReluNet linear({{A, Vector()}});
    NetGrad g = kappa_penalty_grad(linear);
    CHECK(g.dA[0](0, 0) == 1.0);
    CHECK(g.dA[0](0, 1) == -1.0);

    // doubling the output layer doubles kappa, direction unchanged
    Matrix A2 = 2.0 * A;
    ReluNet doubled({{A2, Vector()}});
    NetGrad g2 = kappa_penalty_grad(doubled);
    CHECK(g2.dA[0](0, 0) == 1.0);
    CHECK(g2.dA[0](0, 1) == -1.0);
    CHECK(kappa(doubled).kappa == doctest::Approx(2.0 * kappa(linear).kappa));

    // hidden norms below one contribute nothing
    RngStream rng(103);
    ReluNet net = rescale(testutil::random_small_net(rng, 2, 1));
    NetGrad hg = kappa_penalty_grad(net);
    for (int l = 0; l < net.depth(); ++l) {
        CHECK(hg.dA[static_cast<std::size_t>(l)].cwiseAbs().maxCoeff() == 0.0);
    }
    int L = net.depth();
    int nonzero_rows = 0;
    for (Eigen::Index i = 0; i < hg.dA[static_cast<std::size_t>(L)].rows(); ++i)
        if (hg.dA[static_cast<std::size_t>(L)].row(i).cwiseAbs().sum() > 0.0) ++nonzero_rows;
    CHECK(nonzero_rows == 1);
}

TEST_CASE("kappa subgradient matches finite differences at generic nets") {
    RngStream rng(104);
    int checked = 0;
    while (checked < 20) {
        ReluNet net = testutil::random_small_net(rng, 2, 1);
        KappaReport report = kappa(net);
        bool generic = std::abs(report.hidden_norms[0] - 1.0) > 1e-3;
        for (double h : report.hidden_norms) generic = generic && std::abs(h - 1.0) > 1e-3;
        if (!generic) continue;
        ++checked;
        NetGrad analytic = kappa_penalty_grad(net);
        NetGrad fd = fd_gradient(net, [](const ReluNet& candidate) {
            return kappa(candidate).kappa;
        });
        CHECK(max_rel_gap(analytic, fd) < 1e-5);
    }
}

TEST_CASE("regression in constraint mode recovers a planted net") {
    RngStream rng(105);
    ReluNet planted = kappa_project(random_net(2, 1, 6, 1, rng, 1.5), 1.0);

    RegressionConfig cfg;
    cfg.target.d = 2;
    cfg.target.alpha = 1.0;
    cfg.target.f = [planted](const Vector& x) { return planted.eval(x)(0); };
    cfg.n = 256;
    cfg.width = 24;
    cfg.depth = 1;
    cfg.K = 2.0;
    cfg.steps = 4000;
    cfg.lr = 0.25;
    cfg.batch = 32;
    cfg.seed = 3;
    cfg.epochs = 8;
    cfg.holdout_n = 2000;

    TrainReport report = train_regression(cfg);
    for (const EpochStats& e : report.epochs) CHECK(e.kappa <= 2.0 * (1.0 + 1e-12));
    CHECK(report.epochs.back().train_loss < 1e-3);
}

TEST_CASE("regression with a heavy penalty collapses kappa") {
    RegressionConfig cfg;
    cfg.target.d = 1;
    cfg.target.alpha = 1.0;
    cfg.target.f = [](const Vector& x) { return 0.8 * x(0); };
    cfg.n = 64;
    cfg.width = 8;
    cfg.depth = 1;
    cfg.lambda = 5.0;
    cfg.steps = 1500;
    cfg.lr = 0.01;
    cfg.batch = 16;
    cfg.seed = 5;
    cfg.epochs = 4;
    cfg.holdout_n = 500;

    TrainReport report = train_regression(cfg);
    CHECK(report.epochs.back().kappa < 0.1);

    RegressionConfig both = cfg;
    both.K = 1.0;
    CHECK_THROWS_AS(train_regression(both), std::invalid_argument);
    RegressionConfig neither = cfg;
    neither.lambda.reset();
    CHECK_THROWS_AS(train_regression(neither), std::invalid_argument);
}

TEST_CASE("ipm estimate: identical samples give exactly zero") {
    RngStream rng(106);
    Matrix pts = testutil::random_points(2, 30, rng);
    double v = ipm_estimate(8, 1, 2.0, std::nullopt, pts, pts, 50, 0.2, 7);
    CHECK(v == 0.0);
}

TEST_CASE("ipm estimate approaches K for unit-separated point masses") {
    Matrix at_one = Matrix::Constant(1, 1, 1.0);
    Matrix at_zero = Matrix::Constant(1, 1, 0.0);
    const double K = 2.0;
    double v = ipm_estimate(16, 1, K, std::nullopt, at_one, at_zero, 600, 0.5, 11);
    CHECK(v >= 0.9 * K);
    CHECK(v <= K * (1.0 + 1e-9));
}

TEST_CASE("ipm estimate is monotone in the step count") {
    RngStream rng(107);
    Matrix mu = testutil::random_points(2, 40, rng);
    Matrix nu = testutil::random_points(2, 40, rng);
    nu.row(0).array() += 0.3;
    double prev = -1e300;
    for (long steps : {5L, 20L, 80L}) {
        double v = ipm_estimate(8, 1, 1.5, std::nullopt, mu, nu, steps, 0.3, 13);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("penalized ipm approximates the squared constrained value") {
    Matrix at_one = Matrix::Constant(1, 1, 1.0);
    Matrix at_zero = Matrix::Constant(1, 1, 0.0);
    const double K = 2.0;
    const double lambda = 1.0 / (4.0 * K * K);
    double constrained = ipm_estimate(16, 1, K, std::nullopt, at_one, at_zero, 600, 0.5, 11);
    double penalized = ipm_estimate(16, 1, std::nullopt, lambda, at_one, at_zero, 6000, 0.1, 11);
    double predicted = constrained * constrained / (4.0 * lambda * K * K);
    CHECK(std::abs(penalized - predicted) <= 0.2 * predicted);
}

TEST_CASE("scaling identity: 1-D optimization matches the quadratic vertex") {
    // witness with kappa = 1 computing x/2, point masses at 0.9 and 0.1
    Matrix A0(2, 1), A1(1, 2);
    A0 << 1.0, -1.0;
    A1 << 1.0, -1.0;
    ReluNet identity({{A0, Vector::Zero(2)}, {A1, Vector()}});
    Matrix mu = Matrix::Constant(1, 1, 0.9);
    Matrix nu = Matrix::Constant(1, 1, 0.1);

    auto [lhs, rhs] = scaling_identity_check(identity, mu, nu, 0.1);
    CHECK(rhs == doctest::Approx(0.4).epsilon(1e-12));  // Delta = 0.4
    CHECK(std::abs(lhs - rhs) < 1e-9);

    auto [lhs_neg, rhs_neg] = scaling_identity_check(identity, nu, mu, 0.1);
    CHECK(rhs_neg == 0.0);
    CHECK(std::abs(lhs_neg - rhs_neg) < 1e-9);

    auto [lhs_big, rhs_big] = scaling_identity_check(identity, mu, nu, 1e6);
    CHECK(rhs_big == doctest::Approx(4e-8).epsilon(1e-9));
    CHECK(std::abs(lhs_big - rhs_big) < 1e-9);

    RngStream rng(108);
    for (int trial = 0; trial < 100; ++trial) {
        ReluNet witness = testutil::random_small_net(rng, 2, 1);
        Matrix m = testutil::random_points(2, 20, rng);
        Matrix n = testutil::random_points(2, 20, rng);
        double lambda = rng.uniform(0.01, 10.0);
        auto [l, r] = scaling_identity_check(witness, m, n, lambda);
        CHECK(std::abs(l - r) < 1e-9);
    }
}

TEST_CASE("gan training respects the constraint and the probe inequality") {
    GanConfig cfg;
    cfg.data_dim = 2;
    cfg.source_dim = 2;
    cfg.n = 128;
    cfg.gen_width = 8;
    cfg.disc_width = 8;
    cfg.outer_steps = 6;
    cfg.inner_steps = 5;
    cfg.disc_K = 3.0;
    cfg.seed = 17;
    cfg.nu_batch = 64;
    cfg.eval_samples = 256;
    RngStream rng(110);
    cfg.planted_generator = kappa_project(random_net(2, 2, 6, 1, rng, 1.0), 1.0);

    GanReport report = train_gan(cfg);
    CHECK(report.steps.size() == 6);
    for (const GanStepStats& s : report.steps) {
        CHECK(s.disc_kappa <= 3.0 * (1.0 + 1e-12));
        CHECK(s.lip_probe <= s.disc_kappa * (1.0 + 1e-9));
    }

    GanConfig bad = cfg;
    bad.disc_lambda = 0.1;
    CHECK_THROWS_AS(train_gan(bad), std::invalid_argument);
}
