#pragma once

#include "normnet/relu_net.hpp"

namespace normnet {

// (W, L, K) arithmetic of the basic network operations. Every combinator
// below satisfies the corresponding bound computed from its operands.
struct BudgetBound {
    int width_bound = 0;
    int depth_bound = 0;
    double kappa_bound = 0.0;
};

BudgetBound budget_of(const ReluNet& net);
BudgetBound pad_budget(const BudgetBound& b, int target_width, int target_depth);
BudgetBound compose_budget(const BudgetBound& outer, const BudgetBound& inner);
BudgetBound precompose_budget(const BudgetBound& b, double affine_norm);
BudgetBound concat_budget(const BudgetBound& b1, const BudgetBound& b2);
BudgetBound lincomb_budget(double c1, const BudgetBound& b1, double c2, const BudgetBound& b2);

// Same function at requested width/depth; kappa unchanged. Depth extension
// inserts norm-1 identity blocks after the first hidden layer (activations
// there are nonnegative, so ReLU acts as identity). Requires depth >= 1 when
// extending depth.
ReluNet pad(const ReluNet& net, int target_width, int target_depth);

/// outer(inner(x)); kappa <= K_outer * max{K_inner, 1}.
ReluNet compose(const ReluNet& outer, const ReluNet& inner);

/// x -> net(A x + b); kappa <= K * max{||(A,b)||, 1}. Pass empty b for none.
ReluNet precompose_affine(const ReluNet& net, const Matrix& A, const Vector& b);

/// x -> (n1(x), n2(x)); kappa <= max{K1, K2}.
ReluNet concat(const ReluNet& n1, const ReluNet& n2);

/// c1*n1 + c2*n2; kappa <= |c1| K1 + |c2| K2.
ReluNet lincomb(double c1, const ReluNet& n1, double c2, const ReluNet& n2);

}  // namespace normnet
