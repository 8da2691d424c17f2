#include "normnet/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace normnet {

GridSpec GridSpec::tensor(int d, long per_dim, double lo, double hi) {
    if (d < 1 || per_dim < 2) throw std::invalid_argument("GridSpec::tensor: bad parameters");
    GridSpec g;
    g.d = d;
    g.kind = Kind::Tensor;
    g.points_per_dim = per_dim;
    g.lo = lo;
    g.hi = hi;
    return g;
}

GridSpec GridSpec::latin_hypercube(int d, long total, std::uint64_t seed, double lo, double hi) {
    if (d < 1 || total < 1) throw std::invalid_argument("GridSpec::latin_hypercube: bad parameters");
    GridSpec g;
    g.d = d;
    g.kind = Kind::LatinHypercube;
    g.total_points = total;
    g.seed = seed;
    g.lo = lo;
    g.hi = hi;
    return g;
}

long GridSpec::point_count() const {
    if (kind == Kind::Tensor) {
        long n = 1;
        for (int i = 0; i < d; ++i) {
            if (n > (1L << 40) / points_per_dim)
                throw std::invalid_argument("GridSpec: tensor grid too large");
            n *= points_per_dim;
        }
        return n;
    }
    return total_points;
}

Matrix GridSpec::materialize() const {
    const long n = point_count();
    Matrix pts(d, n);
    if (kind == Kind::Tensor) {
        const double step = (hi - lo) / static_cast<double>(points_per_dim - 1);
        std::vector<long> idx(static_cast<std::size_t>(d), 0);
        for (long p = 0; p < n; ++p) {
            for (int i = 0; i < d; ++i)
                pts(i, p) = lo + step * static_cast<double>(idx[static_cast<std::size_t>(i)]);
            for (int i = d - 1; i >= 0; --i) {
                if (++idx[static_cast<std::size_t>(i)] < points_per_dim) break;
                idx[static_cast<std::size_t>(i)] = 0;
            }
        }
        return pts;
    }
    // Latin hypercube: each dimension gets an independent stratified shuffle
    for (int i = 0; i < d; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i) + 1);
        std::vector<long> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0L);
        for (long p = n - 1; p > 0; --p)
            std::swap(perm[static_cast<std::size_t>(p)],
                      perm[rng.below(static_cast<std::uint64_t>(p) + 1)]);
        for (long p = 0; p < n; ++p) {
            double u = rng.uniform();
            double t = (static_cast<double>(perm[static_cast<std::size_t>(p)]) + u) /
                       static_cast<double>(n);
            pts(i, p) = lo + (hi - lo) * t;
        }
    }
    return pts;
}

double GridSpec::mesh_radius() const {
    if (!has_mesh_radius()) throw std::logic_error("GridSpec: no mesh radius for sampled grids");
    return 0.5 * (hi - lo) / static_cast<double>(points_per_dim - 1);
}

GridSpec GridSpec::certification(int d, std::uint64_t seed, double lo, double hi) {
    if (d == 1) return tensor(1, 100000, lo, hi);
    if (d == 2) return tensor(2, 512, lo, hi);
    return latin_hypercube(d, 100000, seed, lo, hi);
}

}  // namespace normnet
