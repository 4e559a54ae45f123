#pragma once

#include <span>
#include <vector>

#include "ssmtree/linalg.hpp"
#include "ssmtree/tree_model.hpp"

namespace ssmtree {

// A q-dimensional probability vector (a marginal over colors).
struct ColorDistribution {
    std::vector<double> probs;

    int q() const { return static_cast<int>(probs.size()); }
    double operator[](int c) const { return probs[static_cast<std::size_t>(c)]; }

    static ColorDistribution uniform(int q);
    static ColorDistribution point_mass(int q, Color c);

    double l2_distance_sq(const ColorDistribution& other) const;
    // Entries nonnegative and summing to 1 within tol.
    bool is_valid(double tol = 1e-12) const;
};

// One tree recursion step: maps the children's subtree marginals to the
// parent's marginal,
//   f_c = prod_i (1 - x_{i,c}) / sum_j prod_i (1 - x_{i,j}).
// Inputs need not be probability vectors (the Jacobian validation perturbs
// single coordinates); the denominator is formed explicitly so that a
// non-extendible configuration raises ZeroDenominatorError instead of being
// silently renormalized. Summation order is fixed: colors ascending,
// children left to right.
ColorDistribution bp_step(std::span<const ColorDistribution> child_marginals, int q);

// Conditional root marginal mu_T(sigma_root = . | sigma_Lambda = eta) by
// post-order recursion: conditioned vertices contribute a point mass (after
// a consistency check against their children), childless unconditioned
// vertices are uniform, everything else is a bp_step. Subtrees containing
// no boundary vertex short-circuit to the uniform distribution, so sparse
// boundaries never force a full-tree walk.
//
// `keep`, when non-null, restricts evaluation to the given prefix-closed
// vertex set; vertices outside it are treated as absent. Used to evaluate
// marginals on subtrees embedded in the complete tree.
//
// Throws FrozenRootError if the root is conditioned and NonExtendibleError
// (or its ZeroDenominatorError refinement) if the boundary is inconsistent.
ColorDistribution root_marginal(const TreeInstance& instance, const BoundaryMap& boundary,
                                const AddressSet* keep = nullptr);

// Marginals of the root's children, each within its own subtree under the
// restriction of `boundary` to that subtree. A conditioned child is a point
// mass. Requires h >= 1.
std::vector<ColorDistribution> child_marginals(const TreeInstance& instance,
                                               const BoundaryMap& boundary);

// A point on the segment between two tuples of child marginals:
// z_i = t * pi_i + (1-t) * pi_i', and the induced root marginal
// pi_hat = bp_step(z). t = 1 recovers the eta side, t = 0 the eta' side.
struct InterpolationPoint {
    double t = 0.0;
    std::vector<ColorDistribution> z;
    ColorDistribution pi_hat;
};

InterpolationPoint interpolation_point(double t,
                                       std::span<const ColorDistribution> children_eta,
                                       std::span<const ColorDistribution> children_eta_prime);

// Analytic partial derivatives of the recursion at an interpolation point:
// block i holds d f_c / d x_{i,j} with f evaluated at z, i.e.
//   -(f_c - f_c^2) / (1 - z_{i,j})   for j = c,
//    f_c * f_j     / (1 - z_{i,j})   for j != c.
// Throws DivisionByOneError if any z_{i,j} = 1 (frozen-child column).
struct BpJacobian {
    int d = 0;
    int q = 0;
    std::vector<Matrix> blocks;  // blocks[i](c, j)
};

BpJacobian bp_jacobian(const InterpolationPoint& point);

}  // namespace ssmtree
