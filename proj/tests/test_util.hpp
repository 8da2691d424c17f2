#pragma once

#include <vector>

#include "normnet/learn.hpp"
#include "normnet/relu_net.hpp"
#include "normnet/rng.hpp"

namespace testutil {

inline normnet::Vector vec1(double x) {
    normnet::Vector v(1);
    v << x;
    return v;
}

inline normnet::Vector vec2(double x, double y) {
    normnet::Vector v(2);
    v << x, y;
    return v;
}

inline normnet::Vector random_point(int d, normnet::RngStream& rng, double lo = 0.0,
                                    double hi = 1.0) {
    normnet::Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = rng.uniform(lo, hi);
    return v;
}

inline normnet::Matrix random_points(int d, long n, normnet::RngStream& rng, double lo = 0.0,
                                     double hi = 1.0) {
    normnet::Matrix m(d, n);
    for (long p = 0; p < n; ++p)
        for (int i = 0; i < d; ++i) m(i, p) = rng.uniform(lo, hi);
    return m;
}

inline normnet::ReluNet random_small_net(normnet::RngStream& rng, int in_dim = 2, int out_dim = 1) {
    int width = 2 + static_cast<int>(rng.below(6));
    int depth = 1 + static_cast<int>(rng.below(3));
    return normnet::random_net(in_dim, out_dim, width, depth, rng, 1.0 + rng.uniform());
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace testutil
