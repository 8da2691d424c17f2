#include "normnet/relu_net.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace normnet {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

ReluNet::ReluNet(std::vector<AffineLayer> layers) : layers_(std::move(layers)) {
    require(!layers_.empty(), "ReluNet: layer list is empty");
    const std::size_t L = layers_.size() - 1;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const AffineLayer& lay = layers_[l];
        require(lay.A.rows() > 0 && lay.A.cols() > 0, "ReluNet: empty matrix in layer");
        if (lay.has_bias())
            require(lay.b.size() == lay.A.rows(), "ReluNet: bias length mismatch");
        if (l > 0)
            require(lay.A.cols() == layers_[l - 1].A.rows(),
                    "ReluNet: consecutive layer dimensions do not chain");
        require(lay.A.allFinite() && (!lay.has_bias() || lay.b.allFinite()),
                "ReluNet: non-finite weight");
    }
    require(!layers_[L].has_bias(), "ReluNet: output layer must not carry a bias");
    input_dim_ = static_cast<int>(layers_.front().A.cols());
    output_dim_ = static_cast<int>(layers_.back().A.rows());
    depth_ = static_cast<int>(L);
    width_ = 0;
    for (std::size_t l = 0; l < L; ++l)
        width_ = std::max(width_, static_cast<int>(layers_[l].A.rows()));
}

long ReluNet::total_weight_count() const {
    long count = 0;
    for (const AffineLayer& lay : layers_)
        count += static_cast<long>(lay.A.size()) + static_cast<long>(lay.b.size());
    return count;
}

Vector ReluNet::eval(const Vector& x) const {
    require(x.size() == input_dim_, "eval: input dimension mismatch");
    Vector h = x;
    const std::size_t L = layers_.size() - 1;
    for (std::size_t l = 0; l < L; ++l) {
        h = layers_[l].A * h;
        if (layers_[l].has_bias()) h += layers_[l].b;
        h = h.cwiseMax(0.0);
    }
    return layers_[L].A * h;
}

Matrix ReluNet::eval_batch(const Matrix& X) const {
    require(X.rows() == input_dim_, "eval_batch: input dimension mismatch");
    Matrix h = X;
    const std::size_t L = layers_.size() - 1;
    for (std::size_t l = 0; l < L; ++l) {
        Matrix z = layers_[l].A * h;
        if (layers_[l].has_bias()) z.colwise() += layers_[l].b;
        h = z.cwiseMax(0.0);
    }
    return layers_[L].A * h;
}

double op_norm(const Matrix& A) {
    if (A.rows() < 1 || A.cols() < 1) throw std::invalid_argument("op_norm: empty matrix");
    return A.cwiseAbs().rowwise().sum().maxCoeff();
}

double op_norm_with_bias(const AffineLayer& layer) {
    Vector row_sums = layer.A.cwiseAbs().rowwise().sum();
    if (layer.has_bias()) row_sums += layer.b.cwiseAbs();
    return row_sums.maxCoeff();
}

KappaReport kappa(const ReluNet& net) {
    KappaReport report;
    const int L = net.depth();
    report.hidden_norms.reserve(static_cast<std::size_t>(L));
    double product = 1.0;
    for (int l = 0; l < L; ++l) {
        double h = op_norm_with_bias(net.layer(l));
        report.hidden_norms.push_back(h);
        product *= std::max(h, 1.0);
    }
    report.output_norm = op_norm(net.layer(L).A);
    report.kappa = report.output_norm * product;
    return report;
}

ReluNet rescale(const ReluNet& net) {
    const int L = net.depth();
    std::vector<AffineLayer> layers = net.layers();
    double running = 1.0;  // prod_{i<=l} k_i
    for (int l = 0; l < L; ++l) {
        double k_l = std::max(op_norm_with_bias(layers[static_cast<std::size_t>(l)]), 1.0);
        AffineLayer& lay = layers[static_cast<std::size_t>(l)];
        running *= k_l;
        lay.A /= k_l;
        if (lay.has_bias()) lay.b /= running;
    }
    layers[static_cast<std::size_t>(L)].A *= running;
    return ReluNet(std::move(layers));
}

ReluNet truncate(const ReluNet& net, double bound) {
    if (!(bound > 0.0)) throw std::invalid_argument("truncate: bound must be positive");
    const int k = net.output_dim();
    const double Bp1 = bound + 1.0;
    // chi_B(x) = s(x) - s(-x) - (B+1) s(x/(B+1) - B/(B+1)) + (B+1) s(-x/(B+1) - B/(B+1))
    Matrix H = Matrix::Zero(4 * k, k);
    Vector hb = Vector::Zero(4 * k);
    Matrix Out = Matrix::Zero(k, 4 * k);
    for (int i = 0; i < k; ++i) {
        H(4 * i + 0, i) = 1.0;
        H(4 * i + 1, i) = -1.0;
        H(4 * i + 2, i) = 1.0 / Bp1;
        hb(4 * i + 2) = -bound / Bp1;
        H(4 * i + 3, i) = -1.0 / Bp1;
        hb(4 * i + 3) = -bound / Bp1;
        Out(i, 4 * i + 0) = 1.0;
        Out(i, 4 * i + 1) = -1.0;
        Out(i, 4 * i + 2) = -Bp1;
        Out(i, 4 * i + 3) = Bp1;
    }
    std::vector<AffineLayer> layers;
    layers.reserve(net.layers().size() + 1);
    const int L = net.depth();
    for (int l = 0; l < L; ++l) layers.push_back(net.layer(l));
    // fold the old output layer into the clip's hidden stage
    layers.push_back({H * net.layer(L).A, hb});
    layers.push_back({Out, Vector()});
    return ReluNet(std::move(layers));
}

ReluNet snn_embed(const ReluNet& net) {
    const int L = net.depth();
    std::vector<AffineLayer> layers;
    layers.reserve(net.layers().size());
    for (int l = 0; l < L; ++l) {
        const AffineLayer& lay = net.layer(l);
        const Eigen::Index m = lay.A.rows();
        const Eigen::Index n = lay.A.cols();
        Matrix Ablock = Matrix::Zero(m + 1, n + 1);
        Ablock.topLeftCorner(m, n) = lay.A;
        if (lay.has_bias()) Ablock.col(n).head(m) = lay.b;
        Ablock(m, n) = 1.0;
        layers.push_back({Ablock, Vector()});
    }
    const AffineLayer& out = net.layer(L);
    Matrix Aout = Matrix::Zero(out.A.rows(), out.A.cols() + 1);
    Aout.leftCols(out.A.cols()) = out.A;
    layers.push_back({Aout, Vector()});
    return ReluNet(std::move(layers));
}

double lipschitz_probe(const ReluNet& net,
                       const std::vector<std::pair<Vector, Vector>>& pairs) {
    double best = -1.0;
    for (const auto& [x, y] : pairs) {
        double dx = (x - y).lpNorm<Eigen::Infinity>();
        if (dx == 0.0) continue;
        double dy = (net.eval(x) - net.eval(y)).lpNorm<Eigen::Infinity>();
        best = std::max(best, dy / dx);
    }
    if (best < 0.0) throw std::invalid_argument("lipschitz_probe: all pairs degenerate");
    return best;
}

nlohmann::json to_json(const ReluNet& net) {
    nlohmann::json j;
    j["input_dim"] = net.input_dim();
    j["output_dim"] = net.output_dim();
    nlohmann::json layers = nlohmann::json::array();
    for (const AffineLayer& lay : net.layers()) {
        nlohmann::json lj;
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < lay.A.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < lay.A.cols(); ++c) row.push_back(lay.A(i, c));
            rows.push_back(std::move(row));
        }
        lj["A"] = std::move(rows);
        if (lay.has_bias()) {
            nlohmann::json bv = nlohmann::json::array();
            for (Eigen::Index i = 0; i < lay.b.size(); ++i) bv.push_back(lay.b(i));
            lj["b"] = std::move(bv);
        }
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    return j;
}

ReluNet net_from_json(const nlohmann::json& j) {
    std::vector<AffineLayer> layers;
    for (const auto& lj : j.at("layers")) {
        const auto& rows = lj.at("A");
        const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
        if (m == 0) throw std::invalid_argument("net_from_json: empty matrix");
        const Eigen::Index n = static_cast<Eigen::Index>(rows.front().size());
        Matrix A(m, n);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto& row = rows[static_cast<std::size_t>(i)];
            if (static_cast<Eigen::Index>(row.size()) != n)
                throw std::invalid_argument("net_from_json: ragged matrix");
            for (Eigen::Index c = 0; c < n; ++c) A(i, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
        Vector b;
        if (lj.contains("b")) {
            const auto& bv = lj.at("b");
            b.resize(static_cast<Eigen::Index>(bv.size()));
            for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = bv[static_cast<std::size_t>(i)].get<double>();
        }
        layers.push_back({std::move(A), std::move(b)});
    }
    ReluNet net(std::move(layers));
    if (j.contains("input_dim") && j.at("input_dim").get<int>() != net.input_dim())
        throw std::invalid_argument("net_from_json: input_dim mismatch");
    if (j.contains("output_dim") && j.at("output_dim").get<int>() != net.output_dim())
        throw std::invalid_argument("net_from_json: output_dim mismatch");
    return net;
}

void save_net(const ReluNet& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_net: cannot open " + path);
    out << to_json(net).dump(2) << '\n';
}

ReluNet load_net(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_net: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return net_from_json(j);
}

}  // namespace normnet
