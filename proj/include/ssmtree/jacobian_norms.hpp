#pragma once

#include <vector>

#include "ssmtree/bp_engine.hpp"
#include "ssmtree/linalg.hpp"
#include "ssmtree/tree_model.hpp"

namespace ssmtree {

// The idealized recursion Jacobian M = (diag(pi) - pi pi^T) diag(gamma),
// its spectral norm, and the closed-form bound
//   (1/2) max_j pi_j (1 + gamma_j^2),
// which dominates the norm for any probability vector pi and gamma in [0,1]^q.
struct JacobianBundle {
    std::vector<double> pi_hat;
    std::vector<double> gamma_hat;
    Matrix matrix;
    double spectral_norm = 0.0;
    double closed_form_bound = 0.0;
};

JacobianBundle build_matrix(const std::vector<double>& pi_hat,
                            const std::vector<double>& gamma_hat);

struct NormCheck {
    double norm = 0.0;
    double bound = 0.0;
    bool ok = false;  // norm <= bound + 1e-10
};

NormCheck norm_bound_check(const std::vector<double>& pi_hat,
                           const std::vector<double>& gamma_hat);

// Child-aggregation contraction coefficient
//   K = 1/(1 - 1/(q-d)) * max_t ||M_{pi_hat(t), sqrt(gamma)}||_2,
// with the max over t in [0,1] approximated two ways on a uniform closed
// grid: by the spectral norm itself (k_grid, an under-estimate of the true
// max) and by the closed-form bound (k_closed_form, an over-estimate of the
// norm at every grid point). The pair brackets the continuous quantity.
// The certified inequality is
//   ||pi - pi'||_2^2 <= |D| K^2 sum_i ||pi_i - pi_i'||_2^2.
struct ContractionK {
    double k_grid = 0.0;
    double k_closed_form = 0.0;
    int t_grid = 0;
};

// Requires q >= d+2 and dist(root, Delta) >= 3.
ContractionK contraction_k(const BoundaryPair& pair, int t_grid = 1001);

// Lower-level form used by the trial runner, with the child marginals
// already computed.
ContractionK contraction_k(int q, int d, const AvailabilityProfile& profile,
                           std::span<const ColorDistribution> kids_eta,
                           std::span<const ColorDistribution> kids_eta_prime, int t_grid);

// Peak of (1/2) pi_hat_k(t) (1 + gamma_k) over the t grid and all colors,
// next to the budget k_prime / |D| it is expected to stay below in the
// contraction regime. Reported, not asserted: the regime's onset ratio is
// an uncalibrated constant.
struct MarginalPeak {
    double max_value = 0.0;
    double budget = 0.0;
};

MarginalPeak weighted_marginal_peak(const BoundaryPair& pair, int t_grid, double k_prime);

// Worst-case conditional marginal of an available root color,
//   L = (1 - 1/(q-d))^d / (d + (q-d)(1 - 1/(q-d))^d).
// Requires q >= d+1.
double marginal_lower_bound(int q, int d);

}  // namespace ssmtree
