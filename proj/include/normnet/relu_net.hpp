#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace normnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One affine stage A*x + b. The output layer of a network carries no bias,
// encoded as b of size zero.
struct AffineLayer {
    Matrix A;
    Vector b;

    bool has_bias() const { return b.size() > 0; }
    Eigen::Index out_dim() const { return A.rows(); }
    Eigen::Index in_dim() const { return A.cols(); }
};

/// Per-layer norms and the norm budget kappa = ||A_L|| * prod max{||(A_l,b_l)||, 1}.
struct KappaReport {
    std::vector<double> hidden_norms;
    double output_norm = 0.0;
    double kappa = 0.0;
};

// Explicit ReLU network: layers[0..L-1] are hidden (ReLU applied after each),
// layers[L] is the bias-free output layer. Value type, immutable after
// construction; all operations on it are pure.
class ReluNet {
public:
    // empty placeholder so nets can live in aggregates; assign before use
    ReluNet() = default;
    explicit ReluNet(std::vector<AffineLayer> layers);

    const std::vector<AffineLayer>& layers() const { return layers_; }
    const AffineLayer& layer(int i) const { return layers_[static_cast<std::size_t>(i)]; }

    int input_dim() const { return input_dim_; }
    int output_dim() const { return output_dim_; }
    int depth() const { return depth_; }   // number of hidden layers L
    int width() const { return width_; }   // max hidden dimension (0 when L = 0)

    long total_weight_count() const;       // sum of rows*cols + bias sizes

    Vector eval(const Vector& x) const;
    // columns of X are input points; returns output_dim x n
    Matrix eval_batch(const Matrix& X) const;

private:
    std::vector<AffineLayer> layers_;
    int input_dim_ = 0;
    int output_dim_ = 0;
    int depth_ = 0;
    int width_ = 0;
};

/// Operator norm induced by the sup norm: maximum row 1-norm.
double op_norm(const Matrix& A);

/// Row 1-norms of A with b appended as an extra column (||(A,b)||).
double op_norm_with_bias(const AffineLayer& layer);

KappaReport kappa(const ReluNet& net);

// Rewrites the parameterization so every hidden ||(A_l,b_l)|| <= 1 with the
// scale pushed into the output layer. Function values are preserved; kappa
// never increases.
ReluNet rescale(const ReluNet& net);

// Clips every output coordinate to [-B, B] through the four-term ReLU form of
// chi_B. Depth grows by one, width by at most 4*output_dim.
ReluNet truncate(const ReluNet& net, double bound);

// Bias-free reparameterization over the augmented input (x, 1). The product
// of layer operator norms of the result equals kappa(net).
ReluNet snn_embed(const ReluNet& net);

/// Max finite-difference ratio ||f(x)-f(y)||_inf / ||x-y||_inf over the pairs.
double lipschitz_probe(const ReluNet& net,
                       const std::vector<std::pair<Vector, Vector>>& pairs);

nlohmann::json to_json(const ReluNet& net);
ReluNet net_from_json(const nlohmann::json& j);

void save_net(const ReluNet& net, const std::string& path);
ReluNet load_net(const std::string& path);

}  // namespace normnet
