#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "normnet/constructions.hpp"
#include "normnet/relu_net.hpp"
#include "normnet/rng.hpp"

namespace normnet {

// Parameter gradients aligned with the layer list; db entries are empty for
// bias-free layers.
struct NetGrad {
    std::vector<Matrix> dA;
    std::vector<Vector> db;

    static NetGrad zeros_like(const ReluNet& net);
    void add_scaled(double c, const NetGrad& other);
};

struct BackpropResult {
    NetGrad grad;
    Matrix input_delta;  // d x batch
};

// Reverse pass: out_delta holds dLoss/d(output) per point (k x batch). The
// ReLU subgradient at 0 is taken as 0.
BackpropResult backprop_pass(const ReluNet& net, const Matrix& X, const Matrix& out_delta);

struct LossGrad {
    double loss = 0.0;
    NetGrad grad;
};

/// (1/B) sum_i ||net(x_i) - y_i||^2 and its parameter gradient.
LossGrad backprop_squared(const ReluNet& net, const Matrix& X, const Matrix& Y);

/// mean net(XA) - mean net(XB) for scalar-output nets, with gradient.
LossGrad backprop_witness(const ReluNet& net, const Matrix& XA, const Matrix& XB);

// Projection onto {kappa <= K}: rescale, then shrink the output layer when
// its norm exceeds K. Identity on feasible nets.
ReluNet kappa_project(const ReluNet& net, double K);

// Subgradient of kappa(theta) (or kappa^2): product rule over the per-layer
// max-row norms; only the argmax row of each active factor contributes, ties
// broken toward the lowest row index, and hidden factors at norm <= 1 sit on
// the flat side of max{.,1}.
NetGrad kappa_penalty_grad(const ReluNet& net, bool squared = false);

ReluNet random_net(int in_dim, int out_dim, int width, int depth, RngStream& rng,
                   double scale = 1.0);

struct DivergenceError : std::runtime_error {
    explicit DivergenceError(int at_epoch);
    int epoch;
};

struct RegressionConfig {
    HolderSpec target;                // f0; only the value callback is used
    long n = 100;
    double noise_std = 0.0;           // V
    int width = 16;
    int depth = 1;
    std::optional<double> K;          // constraint mode
    std::optional<double> lambda;     // penalty mode (exactly one of the two)
    long steps = 2000;
    double lr = 0.1;
    int batch = 32;
    std::uint64_t seed = 1;
    int epochs = 10;
    long holdout_n = 10000;
    double lr_decay_t0 = 0.0;         // 0 -> steps / 10
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double kappa = 0.0;
    double holdout_mse = 0.0;  // held-out L2(mu)^2 estimate, output clipped to [-1,1]
    double opt_gap = 0.0;      // achieved minus best-seen empirical loss
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    ReluNet net;
};

TrainReport train_regression(const RegressionConfig& cfg);

// Inner maximization of mean_mu f - mean_nu f over the norm-constrained
// (projection) or penalized class; returns the best objective seen, a lower
// bound on the corresponding IPM and nondecreasing in inner_steps.
double ipm_estimate(int disc_width, int disc_depth, std::optional<double> K,
                    std::optional<double> lambda, const Matrix& samples_mu,
                    const Matrix& samples_nu, long inner_steps, double lr,
                    std::uint64_t seed);

// lhs = max_{a>=0} (a*Delta - lambda*a^2) by 1-D search, rhs = closed form
// (max{Delta,0})^2 / (4 lambda), with Delta the witness mean gap at kappa = 1.
std::pair<double, double> scaling_identity_check(const ReluNet& witness,
                                                 const Matrix& samples_mu,
                                                 const Matrix& samples_nu, double lambda);

// Fixed evaluation family for the IPM surrogate: coordinate maps plus random
// kappa <= 1 networks.
struct WitnessFamily {
    std::vector<std::function<double(const Vector&)>> fns;
    double surrogate(const Matrix& p, const Matrix& q) const;
};

WitnessFamily make_witness_family(int d, int count, std::uint64_t seed);

struct GanConfig {
    int data_dim = 2;
    int source_dim = 2;
    std::optional<ReluNet> planted_generator;  // target = pushforward through this
    std::optional<Matrix> target_samples;      // or explicit samples
    long n = 512;
    int gen_width = 16;
    int gen_depth = 1;
    int disc_width = 16;
    int disc_depth = 1;
    std::optional<double> disc_K;
    std::optional<double> disc_lambda;
    int outer_steps = 60;
    int inner_steps = 20;
    double lr_gen = 0.05;
    double lr_disc = 0.5;
    long nu_batch = 256;
    std::uint64_t seed = 1;
    int witness_count = 16;
    long eval_samples = 2000;
};

struct GanStepStats {
    int step = 0;
    double ipm_inner = 0.0;   // inner objective (penalized in lambda mode)
    double disc_kappa = 0.0;
    double lip_probe = 0.0;
    double ipm_surrogate = 0.0;
};

struct GanReport {
    std::vector<GanStepStats> steps;
    ReluNet generator;
    ReluNet discriminator;
    double initial_surrogate = 0.0;
    double final_surrogate = 0.0;
};

GanReport train_gan(const GanConfig& cfg);

}  // namespace normnet
