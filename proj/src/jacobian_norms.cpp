#include "ssmtree/jacobian_norms.hpp"

#include <cmath>
#include <string>

#include "ssmtree/errors.hpp"

namespace ssmtree {

namespace {

double closed_form(const std::vector<double>& pi_hat, const std::vector<double>& gamma_hat) {
    double best = 0.0;
    for (std::size_t j = 0; j < pi_hat.size(); ++j) {
        best = std::max(best, 0.5 * pi_hat[j] * (1.0 + gamma_hat[j] * gamma_hat[j]));
    }
    return best;
}

}  // namespace

JacobianBundle build_matrix(const std::vector<double>& pi_hat,
                            const std::vector<double>& gamma_hat) {
    const int q = static_cast<int>(pi_hat.size());
    JacobianBundle bundle;
    bundle.pi_hat = pi_hat;
    bundle.gamma_hat = gamma_hat;
    bundle.matrix = Matrix(q, q);
    for (int c = 0; c < q; ++c) {
        for (int j = 0; j < q; ++j) {
            const double delta = (c == j) ? pi_hat[static_cast<std::size_t>(c)] : 0.0;
            bundle.matrix(c, j) =
                (delta - pi_hat[static_cast<std::size_t>(c)] * pi_hat[static_cast<std::size_t>(j)]) *
                gamma_hat[static_cast<std::size_t>(j)];
        }
    }
    bundle.spectral_norm = ssmtree::spectral_norm(bundle.matrix);
    bundle.closed_form_bound = closed_form(pi_hat, gamma_hat);
    return bundle;
}

NormCheck norm_bound_check(const std::vector<double>& pi_hat,
                           const std::vector<double>& gamma_hat) {
    const JacobianBundle bundle = build_matrix(pi_hat, gamma_hat);
    NormCheck check;
    check.norm = bundle.spectral_norm;
    check.bound = bundle.closed_form_bound;
    check.ok = check.norm <= check.bound + 1e-10;
    return check;
}

ContractionK contraction_k(int q, int d, const AvailabilityProfile& profile,
                           std::span<const ColorDistribution> kids_eta,
                           std::span<const ColorDistribution> kids_eta_prime, int t_grid) {
    if (q < d + 2) throw PreconditionError("contraction coefficient requires q >= d+2");
    if (t_grid < 2) throw PreconditionError("t grid needs at least the two endpoints");
    const double scale = 1.0 / (1.0 - 1.0 / (q - d));
    double max_norm = 0.0;
    double max_closed = 0.0;
    for (int step = 0; step < t_grid; ++step) {
        const double t = static_cast<double>(step) / (t_grid - 1);
        const InterpolationPoint point = interpolation_point(t, kids_eta, kids_eta_prime);
        const JacobianBundle bundle = build_matrix(point.pi_hat.probs, profile.gamma_sqrt);
        max_norm = std::max(max_norm, bundle.spectral_norm);
        max_closed = std::max(max_closed, bundle.closed_form_bound);
    }
    ContractionK k;
    k.k_grid = scale * max_norm;
    k.k_closed_form = scale * max_closed;
    k.t_grid = t_grid;
    return k;
}

ContractionK contraction_k(const BoundaryPair& pair, int t_grid) {
    const auto dist = dist_root_to_set(pair.instance, pair.disagreement());
    if (dist.has_value() && *dist < 3) {
        throw PreconditionError("contraction coefficient requires dist(root, Delta) >= 3");
    }
    const AvailabilityProfile profile = classify_children(pair.instance, pair.eta);
    const auto kids_eta = child_marginals(pair.instance, pair.eta);
    const auto kids_eta_prime = child_marginals(pair.instance, pair.eta_prime);
    return contraction_k(pair.instance.q, pair.instance.d, profile, kids_eta, kids_eta_prime,
                         t_grid);
}

MarginalPeak weighted_marginal_peak(const BoundaryPair& pair, int t_grid, double k_prime) {
    const AvailabilityProfile profile = classify_children(pair.instance, pair.eta);
    if (profile.d_size() < 1) {
        throw PreconditionError("weighted marginal peak requires at least one non-frozen child");
    }
    if (t_grid < 2) throw PreconditionError("t grid needs at least the two endpoints");
    const auto kids_eta = child_marginals(pair.instance, pair.eta);
    const auto kids_eta_prime = child_marginals(pair.instance, pair.eta_prime);
    MarginalPeak peak;
    peak.budget = k_prime / profile.d_size();
    for (int step = 0; step < t_grid; ++step) {
        const double t = static_cast<double>(step) / (t_grid - 1);
        const InterpolationPoint point = interpolation_point(t, kids_eta, kids_eta_prime);
        for (int k = 0; k < pair.instance.q; ++k) {
            peak.max_value =
                std::max(peak.max_value, 0.5 * point.pi_hat[k] *
                                             (1.0 + profile.gamma[static_cast<std::size_t>(k)]));
        }
    }
    return peak;
}

double marginal_lower_bound(int q, int d) {
    if (q < d + 1) {
        throw std::domain_error("marginal lower bound needs q >= d+1, got q=" +
                                std::to_string(q) + " d=" + std::to_string(d));
    }
    const double base = 1.0 - 1.0 / (q - d);
    const double powed = std::pow(base, d);
    return powed / (d + (q - d) * powed);
}

}  // namespace ssmtree
