#include "ssmtree/bp_engine.hpp"

#include <cmath>

#include "ssmtree/errors.hpp"

namespace ssmtree {

ColorDistribution ColorDistribution::uniform(int q) {
    ColorDistribution dist;
    dist.probs.assign(static_cast<std::size_t>(q), 1.0 / q);
    return dist;
}

ColorDistribution ColorDistribution::point_mass(int q, Color c) {
    ColorDistribution dist;
    dist.probs.assign(static_cast<std::size_t>(q), 0.0);
    dist.probs[static_cast<std::size_t>(c)] = 1.0;
    return dist;
}

double ColorDistribution::l2_distance_sq(const ColorDistribution& other) const {
    return ssmtree::l2_distance_sq(probs, other.probs);
}

bool ColorDistribution::is_valid(double tol) const {
    double sum = 0.0;
    for (double p : probs) {
        if (p < -tol) return false;
        sum += p;
    }
    return std::abs(sum - 1.0) <= tol;
}

ColorDistribution bp_step(std::span<const ColorDistribution> child_marginals, int q) {
    ColorDistribution out;
    out.probs.assign(static_cast<std::size_t>(q), 0.0);
    double denom = 0.0;
    for (int c = 0; c < q; ++c) {
        double numer = 1.0;
        for (const auto& child : child_marginals) numer *= 1.0 - child[c];
        out.probs[static_cast<std::size_t>(c)] = numer;
        denom += numer;
    }
    if (denom <= 0.0) {
        throw ZeroDenominatorError("every color excluded at the parent (denominator 0)");
    }
    for (auto& p : out.probs) p /= denom;
    return out;
}

namespace {

struct MarginalWalk {
    const TreeInstance& instance;
    const BoundaryMap& boundary;
    const AddressSet* keep;

    bool present(const VertexAddress& v) const { return keep == nullptr || keep->count(v) > 0; }

    ColorDistribution subtree(const VertexAddress& v) const {
        const auto frozen_it = boundary.find(v);
        const bool is_frozen = frozen_it != boundary.end();

        // Free subtrees contribute color-symmetric factors that cancel in the
        // recursion, so an unconditioned subtree is uniform without a walk.
        if (!is_frozen && !TreeInstance::subtree_has_boundary(boundary, v)) {
            return ColorDistribution::uniform(instance.q);
        }

        std::vector<ColorDistribution> kids;
        if (v.depth() < instance.h) {
            kids.reserve(static_cast<std::size_t>(instance.d));
            for (int i = 0; i < instance.d; ++i) {
                const VertexAddress c = v.child(i);
                if (present(c)) kids.push_back(subtree(c));
            }
        }

        if (is_frozen) {
            const Color color = frozen_it->second;
            for (const auto& kid : kids) {
                if (kid[color] >= 1.0) {
                    throw NonExtendibleError("conditioned vertex " + v.str() +
                                             " conflicts with its subtree");
                }
            }
            return ColorDistribution::point_mass(instance.q, color);
        }
        if (kids.empty()) return ColorDistribution::uniform(instance.q);
        try {
            return bp_step(kids, instance.q);
        } catch (const ZeroDenominatorError&) {
            throw NonExtendibleError("boundary not extendible below vertex \"" + v.str() + "\"");
        }
    }
};

}  // namespace

ColorDistribution root_marginal(const TreeInstance& instance, const BoundaryMap& boundary,
                                const AddressSet* keep) {
    if (boundary.count(VertexAddress::root())) {
        throw FrozenRootError("root is conditioned; its marginal is a point mass");
    }
    return MarginalWalk{instance, boundary, keep}.subtree(VertexAddress::root());
}

std::vector<ColorDistribution> child_marginals(const TreeInstance& instance,
                                               const BoundaryMap& boundary) {
    if (instance.h < 1) throw PreconditionError("child_marginals requires h >= 1");
    const MarginalWalk walk{instance, boundary, nullptr};
    std::vector<ColorDistribution> out;
    out.reserve(static_cast<std::size_t>(instance.d));
    for (int i = 0; i < instance.d; ++i) {
        out.push_back(walk.subtree(VertexAddress::root().child(i)));
    }
    return out;
}

InterpolationPoint interpolation_point(double t,
                                       std::span<const ColorDistribution> children_eta,
                                       std::span<const ColorDistribution> children_eta_prime) {
    if (children_eta.size() != children_eta_prime.size()) {
        throw PreconditionError("child marginal lists differ in length");
    }
    if (children_eta.empty()) throw PreconditionError("need at least one child marginal");
    if (t < 0.0 || t > 1.0) throw PreconditionError("t must lie in [0, 1]");
    InterpolationPoint point;
    point.t = t;
    point.z.reserve(children_eta.size());
    int q = 0;
    for (std::size_t i = 0; i < children_eta.size(); ++i) {
        q = children_eta[i].q();
        ColorDistribution z;
        z.probs.resize(static_cast<std::size_t>(q));
        for (int c = 0; c < q; ++c) {
            z.probs[static_cast<std::size_t>(c)] =
                t * children_eta[i][c] + (1.0 - t) * children_eta_prime[i][c];
        }
        point.z.push_back(std::move(z));
    }
    point.pi_hat = bp_step(point.z, q);
    return point;
}

BpJacobian bp_jacobian(const InterpolationPoint& point) {
    BpJacobian jac;
    jac.d = static_cast<int>(point.z.size());
    jac.q = point.pi_hat.q();
    jac.blocks.reserve(static_cast<std::size_t>(jac.d));
    const ColorDistribution& f = point.pi_hat;
    for (int i = 0; i < jac.d; ++i) {
        Matrix block(jac.q, jac.q);
        for (int j = 0; j < jac.q; ++j) {
            const double z = point.z[static_cast<std::size_t>(i)][j];
            if (z == 1.0) {
                throw DivisionByOneError("z[" + std::to_string(i) + "][" + std::to_string(j) +
                                         "] = 1: frozen-child column has no derivative");
            }
            for (int c = 0; c < jac.q; ++c) {
                block(c, j) = (j == c) ? -(f[c] - f[c] * f[c]) / (1.0 - z)
                                       : f[c] * f[j] / (1.0 - z);
            }
        }
        jac.blocks.push_back(std::move(block));
    }
    return jac;
}

}  // namespace ssmtree
