#include "doctest.h"

#include <cmath>

#include "normnet/constructions.hpp"
#include "normnet/probes.hpp"
#include "test_util.hpp"

using namespace normnet;
using testutil::vec1;

TEST_CASE("rho2 is the normalized Euclidean metric") {
    Vector x(4), y(4);
    x << 1, 2, 3, 4;
    y = x;
    CHECK(rho2(x, y) == 0.0);
    y.array() -= 1.0;
    CHECK(rho2(x, y) == doctest::Approx(1.0));
    CHECK_THROWS_AS(rho2(Vector::Zero(2), Vector::Zero(3)), std::invalid_argument);

    // two sign vectors differing in 3 of 16 places separate past 1/2
    Vector a = Vector::Ones(16), b = Vector::Ones(16);
    b(2) = b(7) = b(11) = -1.0;
    CHECK(rho2(a, b) == doctest::Approx(2.0 * std::sqrt(3.0 / 16.0)));
    CHECK(rho2(a, b) > 0.5);
}

TEST_CASE("greedy sign packing meets the cardinality and separation bounds") {
    for (int m : {8, 12, 16}) {
        SignPack pack = greedy_sign_packing(m);
        CHECK(static_cast<double>(pack.vectors.size()) >= std::pow(2.0, m / 4.0));
        CHECK(pack.min_hamming == m / 8 + 1);
        CHECK(verify_sign_pack(pack));
        for (std::size_t i = 0; i < std::min<std::size_t>(pack.vectors.size(), 50); ++i) {
            for (int s : pack.signs(i)) CHECK((s == 1 || s == -1));
            for (std::size_t j = 0; j < i; ++j) CHECK(pack.hamming(i, j) > m / 8);
        }
    }
    CHECK_THROWS_AS(greedy_sign_packing(7), std::invalid_argument);
    CHECK_THROWS_AS(greedy_sign_packing(25), std::invalid_argument);
}

TEST_CASE("bump class hits the prescribed grid values") {
    const int d = 2, N = 4;
    std::vector<std::int8_t> a(16, 1);
    a[5] = -1;
    a[10] = -1;
    BumpClassSpec spec = make_bump_class(d, N, 1.0, a);
    CHECK(spec.c_psi_alpha > 0.0);

    double scale = spec.c_psi_alpha * std::pow(static_cast<double>(N), -1.0);
    for (int n1 = 0; n1 < N; ++n1)
        for (int n2 = 0; n2 < N; ++n2) {
            Vector x(2);
            x << static_cast<double>(n1) / N, static_cast<double>(n2) / N;
            double want = scale * a[static_cast<std::size_t>(n1 * N + n2)];
            CHECK(bump_eval(spec, x) == doctest::Approx(want).epsilon(1e-12));
        }

    // quarter-cell away from every lattice point the class vanishes
    Vector x(2);
    x << 0.5 / N + 0.25 / N, 1.5 / N;
    CHECK(bump_eval(spec, x) == 0.0);

    // disjoint supports: h_a + h_{-a} vanishes identically
    std::vector<std::int8_t> na(16);
    for (int i = 0; i < 16; ++i) na[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(-a[static_cast<std::size_t>(i)]);
    BumpClassSpec flipped = make_bump_class(d, N, 1.0, na);
    RngStream rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        Vector p = testutil::random_point(2, rng);
        CHECK(std::abs(bump_eval(spec, p) + bump_eval(flipped, p)) <= 1e-15);
    }

    // flipping one sign only changes values near that lattice point
    std::vector<std::int8_t> one = a;
    one[5] = static_cast<std::int8_t>(-one[5]);
    BumpClassSpec bumped = make_bump_class(d, N, 1.0, one);
    for (int trial = 0; trial < 200; ++trial) {
        Vector p = testutil::random_point(2, rng);
        double diff = bump_eval(bumped, p) - bump_eval(spec, p);
        Vector center(2);
        center << 1.0 / N, 1.0 / N;  // flat index 5 = (1,1)
        if ((p - center).lpNorm<Eigen::Infinity>() >= 0.25 / N) CHECK(diff == 0.0);
    }
}

TEST_CASE("rademacher estimator matches the degenerate closed forms") {
    Matrix zero_point = Matrix::Zero(3, 1);
    RademacherEstimate est = rademacher_linear_lb(zero_point, 2.0, 500, 4, 1, 1.0);
    CHECK(est.mc_mean == doctest::Approx(1.0));  // K/2 every draw
    CHECK(est.mc_stderr == 0.0);

    RngStream rng(9);
    Matrix pts = testutil::random_points(3, 50, rng);
    RademacherEstimate zero_k = rademacher_linear_lb(pts, 0.0, 100, 5, 1, 1.0);
    CHECK(zero_k.mc_mean == 0.0);
    CHECK(zero_k.lower_bound == 0.0);
    CHECK(zero_k.upper_bound == 0.0);
}

TEST_CASE("rademacher MC estimate sits inside the closed-form bracket") {
    RngStream rng(10);
    Matrix pts = testutil::random_points(3, 100, rng);
    RademacherEstimate est = rademacher_linear_lb(pts, 2.0, 4000, 11, 2, 1.0);
    CHECK(est.mc_mean >= est.lower_bound - 3.0 * est.mc_stderr);
    CHECK(est.mc_mean <= est.upper_bound + 3.0 * est.mc_stderr);
}

TEST_CASE("rademacher bound formulas reproduce hand-computed values") {
    auto [lb, ub] = rademacher_bound_formulas(100, 3, 1.0, 1, 1.0);
    CHECK(lb == doctest::Approx(0.035355339059327376).epsilon(1e-12));
    CHECK(ub == doctest::Approx(0.29618556).epsilon(1e-6));
    auto [lb0, ub0] = rademacher_bound_formulas(100, 3, 0.0, 1, 1.0);
    CHECK(lb0 == 0.0);
    CHECK(ub0 == 0.0);
    CHECK(lb <= ub);
}

TEST_CASE("w1 probe reproduces the single-point integral and the closed-form bound") {
    Matrix half = Matrix::Constant(1, 1, 0.5);
    W1Probe probe = w1_nn_probe(half, 40000, 13);
    CHECK(std::abs(probe.estimate - 0.25) <= 4.0 * probe.stderr_ + 1e-4);

    RngStream rng(14);
    Matrix pts = testutil::random_points(3, 1000, rng);
    W1Probe big = w1_nn_probe(pts, 4000, 15);
    CHECK(big.lower_bound == doctest::Approx(0.023623519).epsilon(1e-6));
    CHECK(big.estimate >= big.lower_bound - 3.0 * big.stderr_);

    // near-optimal regular grid still respects the bound
    int side = 10;
    Matrix grid_pts(2, side * side);
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j) {
            grid_pts(0, i * side + j) = (i + 0.5) / side;
            grid_pts(1, i * side + j) = (j + 0.5) / side;
        }
    W1Probe gp = w1_nn_probe(grid_pts, 4000, 16);
    CHECK(gp.estimate >= gp.lower_bound - 3.0 * gp.stderr_);
}

TEST_CASE("approximation lower-bound formulas and regimes") {
    ApproxLowerBounds lb = approx_lower_bound_formulas(3, 1.0, 1.0, 1);
    REQUIRE(lb.lipschitz_explicit.has_value());
    CHECK(*lb.lipschitz_explicit == doctest::Approx(1.3915e-5).epsilon(1e-4));
    CHECK(lb.general == doctest::Approx(1.0));  // (1 * 1)^(-2) = 1

    ApproxLowerBounds doubled = approx_lower_bound_formulas(3, 1.0, 2.0, 1);
    CHECK(doubled.general / lb.general == doctest::Approx(std::pow(2.0, -2.0)));

    CHECK_THROWS_AS(approx_lower_bound_formulas(2, 1.0, 1.0, 1), RegimeError);
    CHECK_THROWS_AS(approx_lower_bound_formulas(3, 2.0, 1.0, 1), RegimeError);
    CHECK_THROWS_AS(approx_lower_bound_formulas(3, 1.0, 0.5, 1), std::invalid_argument);
    ApproxLowerBounds smooth = approx_lower_bound_formulas(5, 1.5, 2.0, 2);
    CHECK(!smooth.lipschitz_explicit.has_value());
}

TEST_CASE("sup_error measures the grid discrepancy") {
    ApproxCertificate cert = build_square(8);
    double sup = sup_error(cert.net, [](const Vector& x) { return x(0) * x(0); },
                           GridSpec::certification(1));
    CHECK(sup <= 1.0 / 128.0);

    Matrix A0(1, 1), A1(1, 1);
    A0 << 1.0;
    A1 << 0.0;
    ReluNet zero({{A0, Vector::Zero(1)}, {A1, Vector()}});
    CHECK(sup_error(zero, [](const Vector&) { return 1.0; }, GridSpec::tensor(1, 100)) ==
          doctest::Approx(1.0));
    CHECK(sup_error(zero, [](const Vector&) { return 0.0; }, GridSpec::tensor(1, 100)) == 0.0);
}
