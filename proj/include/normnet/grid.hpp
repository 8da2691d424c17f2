#pragma once

#include <cstdint>
#include <vector>

#include "normnet/relu_net.hpp"
#include "normnet/rng.hpp"

namespace normnet {

// Point set used for sup-norm certification: full tensor grids in low
// dimension, Latin hypercube samples otherwise.
struct GridSpec {
    enum class Kind { Tensor, LatinHypercube };

    int d = 1;
    Kind kind = Kind::Tensor;
    long points_per_dim = 0;  // Tensor
    long total_points = 0;    // LatinHypercube
    std::uint64_t seed = 0;   // LatinHypercube
    double lo = 0.0;
    double hi = 1.0;

    static GridSpec tensor(int d, long per_dim, double lo = 0.0, double hi = 1.0);
    static GridSpec latin_hypercube(int d, long total, std::uint64_t seed,
                                    double lo = 0.0, double hi = 1.0);

    long point_count() const;
    // d x point_count matrix, one point per column, deterministic ordering
    Matrix materialize() const;
    // half the covering radius statement only makes sense for tensor grids
    bool has_mesh_radius() const { return kind == Kind::Tensor; }
    double mesh_radius() const;

    /// Default certification grid per dimension: 1e5 uniform (d=1), 512^2
    /// tensor (d=2), 1e5 Latin hypercube (d>=3).
    static GridSpec certification(int d, std::uint64_t seed = 2024,
                                  double lo = 0.0, double hi = 1.0);
};

}  // namespace normnet
