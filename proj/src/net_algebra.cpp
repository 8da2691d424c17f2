#include "normnet/net_algebra.hpp"

#include <algorithm>
#include <stdexcept>

namespace normnet {

namespace {

Vector stacked_bias(const AffineLayer& top, const AffineLayer& bottom) {
    if (!top.has_bias() && !bottom.has_bias()) return Vector();
    Vector b = Vector::Zero(top.A.rows() + bottom.A.rows());
    if (top.has_bias()) b.head(top.A.rows()) = top.b;
    if (bottom.has_bias()) b.tail(bottom.A.rows()) = bottom.b;
    return b;
}

// Depth-1 equivalent of a pure affine map, sigma(z) - sigma(-z) per output.
// Costs a factor <= 2 in kappa; only used when mixing affine operands into
// concat/lincomb.
ReluNet lift_affine(const ReluNet& net) {
    const AffineLayer& out = net.layer(0);
    const Eigen::Index k = out.A.rows();
    Matrix H(2 * k, out.A.cols());
    H.topRows(k) = out.A;
    H.bottomRows(k) = -out.A;
    Matrix O = Matrix::Zero(k, 2 * k);
    for (Eigen::Index i = 0; i < k; ++i) {
        O(i, i) = 1.0;
        O(i, k + i) = -1.0;
    }
    return ReluNet({{H, Vector()}, {O, Vector()}});
}

}  // namespace

BudgetBound budget_of(const ReluNet& net) {
    return {net.width(), net.depth(), kappa(net).kappa};
}

BudgetBound pad_budget(const BudgetBound& b, int target_width, int target_depth) {
    return {std::max(b.width_bound, target_width), std::max(b.depth_bound, target_depth),
            b.kappa_bound};
}

BudgetBound compose_budget(const BudgetBound& outer, const BudgetBound& inner) {
    return {std::max(outer.width_bound, inner.width_bound),
            outer.depth_bound + inner.depth_bound,
            outer.kappa_bound * std::max(inner.kappa_bound, 1.0)};
}

BudgetBound precompose_budget(const BudgetBound& b, double affine_norm) {
    return {b.width_bound, b.depth_bound, b.kappa_bound * std::max(affine_norm, 1.0)};
}

BudgetBound concat_budget(const BudgetBound& b1, const BudgetBound& b2) {
    return {b1.width_bound + b2.width_bound, std::max(b1.depth_bound, b2.depth_bound),
            std::max(b1.kappa_bound, b2.kappa_bound)};
}

BudgetBound lincomb_budget(double c1, const BudgetBound& b1, double c2, const BudgetBound& b2) {
    return {b1.width_bound + b2.width_bound, std::max(b1.depth_bound, b2.depth_bound),
            std::abs(c1) * b1.kappa_bound + std::abs(c2) * b2.kappa_bound};
}

ReluNet pad(const ReluNet& net, int target_width, int target_depth) {
    if (target_width < net.width() || target_depth < net.depth())
        throw std::invalid_argument("pad: targets smaller than current dimensions");
    if (target_depth > net.depth() && net.depth() == 0)
        throw std::invalid_argument("pad: cannot depth-pad a pure affine net");
    if (target_width == net.width() && target_depth == net.depth()) return net;

    const int L = net.depth();
    std::vector<AffineLayer> layers;
    layers.reserve(static_cast<std::size_t>(target_depth) + 1);
    for (int l = 0; l <= L; ++l) {
        const AffineLayer& lay = net.layer(l);
        Eigen::Index rows = (l == L) ? lay.A.rows() : target_width;
        Eigen::Index cols = (l == 0) ? lay.A.cols() : target_width;
        Matrix A = Matrix::Zero(rows, cols);
        A.topLeftCorner(lay.A.rows(), lay.A.cols()) = lay.A;
        Vector b;
        if (l < L) {
            b = Vector::Zero(rows);
            if (lay.has_bias()) b.head(lay.b.size()) = lay.b;
        }
        layers.push_back({std::move(A), std::move(b)});
    }
    const int extra = target_depth - L;
    if (extra > 0) {
        AffineLayer id{Matrix::Identity(target_width, target_width), Vector::Zero(target_width)};
        layers.insert(layers.begin() + 1, static_cast<std::size_t>(extra), id);
    }
    return ReluNet(std::move(layers));
}

ReluNet compose(const ReluNet& outer_raw, const ReluNet& inner_raw) {
    if (inner_raw.output_dim() != outer_raw.input_dim())
        throw std::invalid_argument("compose: inner output dim != outer input dim");
    ReluNet outer = rescale(outer_raw);
    ReluNet inner = rescale(inner_raw);
    const int L1 = inner.depth();
    const int L2 = outer.depth();

    std::vector<AffineLayer> layers;
    layers.reserve(static_cast<std::size_t>(L1 + L2) + 1);
    for (int l = 0; l < L1; ++l) layers.push_back(inner.layer(l));
    if (L2 == 0) {
        layers.push_back({outer.layer(0).A * inner.layer(L1).A, Vector()});
    } else {
        const AffineLayer& junction = outer.layer(0);
        Vector jb = junction.has_bias() ? junction.b : Vector();
        layers.push_back({junction.A * inner.layer(L1).A, std::move(jb)});
        for (int l = 1; l <= L2; ++l) layers.push_back(outer.layer(l));
    }
    return rescale(ReluNet(std::move(layers)));
}

ReluNet precompose_affine(const ReluNet& net_raw, const Matrix& A, const Vector& b) {
    if (A.rows() != net_raw.input_dim())
        throw std::invalid_argument("precompose_affine: A rows != net input dim");
    if (b.size() > 0 && b.size() != A.rows())
        throw std::invalid_argument("precompose_affine: bias length mismatch");
    ReluNet net = rescale(net_raw);
    std::vector<AffineLayer> layers = net.layers();
    AffineLayer& first = layers.front();
    Vector shift = (b.size() > 0) ? Vector(first.A * b) : Vector::Zero(first.A.rows());
    if (net.depth() == 0) {
        if (shift.lpNorm<Eigen::Infinity>() != 0.0)
            throw std::invalid_argument(
                "precompose_affine: shifting a pure affine net needs a hidden layer");
        first.A = first.A * A;
        return ReluNet(std::move(layers));
    }
    Vector nb = first.has_bias() ? Vector(first.b + shift) : shift;
    first = {first.A * A, std::move(nb)};
    return rescale(ReluNet(std::move(layers)));
}

ReluNet concat(const ReluNet& a_raw, const ReluNet& b_raw) {
    if (a_raw.input_dim() != b_raw.input_dim())
        throw std::invalid_argument("concat: input dims differ");
    ReluNet a = rescale(a_raw);
    ReluNet b = rescale(b_raw);
    if (a.depth() == 0 && b.depth() > 0) a = lift_affine(a);
    if (b.depth() == 0 && a.depth() > 0) b = lift_affine(b);
    const int L = std::max(a.depth(), b.depth());
    if (a.depth() < L) a = pad(a, a.width(), L);
    if (b.depth() < L) b = pad(b, b.width(), L);

    std::vector<AffineLayer> layers;
    layers.reserve(static_cast<std::size_t>(L) + 1);
    for (int l = 0; l <= L; ++l) {
        const AffineLayer& la = a.layer(l);
        const AffineLayer& lb = b.layer(l);
        Matrix A;
        if (l == 0) {
            A.resize(la.A.rows() + lb.A.rows(), la.A.cols());
            A.topRows(la.A.rows()) = la.A;
            A.bottomRows(lb.A.rows()) = lb.A;
        } else {
            A = Matrix::Zero(la.A.rows() + lb.A.rows(), la.A.cols() + lb.A.cols());
            A.topLeftCorner(la.A.rows(), la.A.cols()) = la.A;
            A.bottomRightCorner(lb.A.rows(), lb.A.cols()) = lb.A;
        }
        Vector bias = (l == L) ? Vector() : stacked_bias(la, lb);
        layers.push_back({std::move(A), std::move(bias)});
    }
    return rescale(ReluNet(std::move(layers)));
}

ReluNet lincomb(double c1, const ReluNet& n1, double c2, const ReluNet& n2) {
    if (n1.input_dim() != n2.input_dim() || n1.output_dim() != n2.output_dim())
        throw std::invalid_argument("lincomb: dimension mismatch");
    ReluNet both = concat(n1, n2);
    std::vector<AffineLayer> layers = both.layers();
    AffineLayer& out = layers.back();
    const int k = n1.output_dim();
    out.A.topRows(k) *= c1;
    Matrix combined = out.A.topRows(k) + out.A.bottomRows(k) * c2;
    out.A = std::move(combined);
    return rescale(ReluNet(std::move(layers)));
}

}  // namespace normnet
