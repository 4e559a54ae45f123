#include "ssmtree/exact_oracle.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include "ssmtree/errors.hpp"

namespace ssmtree {

namespace mp = boost::multiprecision;

double RationalMarginal::value(Color c) const {
    using Rational = mp::cpp_rational;
    return Rational(numerators[static_cast<std::size_t>(c)], denominator).convert_to<double>();
}

std::vector<double> RationalMarginal::to_doubles() const {
    std::vector<double> out(static_cast<std::size_t>(q()));
    for (int c = 0; c < q(); ++c) out[static_cast<std::size_t>(c)] = value(c);
    return out;
}

bool RationalMarginal::at_least(Color c, const BigInt& p, const BigInt& r) const {
    // numerators[c]/denominator >= p/r  <=>  numerators[c]*r >= p*denominator
    return numerators[static_cast<std::size_t>(c)] * r >= p * denominator;
}

namespace {

void check_budget(const TreeInstance& instance, const OracleBudget& budget,
                  const AddressSet* keep) {
    // A pruned walk only ever visits the retained vertices.
    const std::uint64_t vertices = keep ? keep->size() : instance.vertex_count();
    if (vertices == UINT64_MAX ||
        vertices > budget.max_states / static_cast<std::uint64_t>(instance.q)) {
        throw BudgetExceededError("instance needs q * vertices > " +
                                  std::to_string(budget.max_states) +
                                  " DP states; raise the budget to enumerate it");
    }
}

struct CountWalk {
    const TreeInstance& instance;
    const BoundaryMap& boundary;
    const AddressSet* keep;

    bool present(const VertexAddress& v) const { return keep == nullptr || keep->count(v) > 0; }

    // counts[c] = number of proper colorings of the subtree at v with v
    // colored c, consistent with the boundary inside the subtree.
    std::vector<BigInt> subtree(const VertexAddress& v) const {
        std::vector<BigInt> counts(static_cast<std::size_t>(instance.q), 1);
        if (v.depth() < instance.h) {
            for (int i = 0; i < instance.d; ++i) {
                const VertexAddress childaddr = v.child(i);
                if (!present(childaddr)) continue;
                const std::vector<BigInt> child = subtree(childaddr);
                BigInt total = 0;
                for (const BigInt& n : child) total += n;
                for (int c = 0; c < instance.q; ++c) {
                    counts[static_cast<std::size_t>(c)] *=
                        total - child[static_cast<std::size_t>(c)];
                }
            }
        }
        const auto frozen = boundary.find(v);
        if (frozen != boundary.end()) {
            for (int c = 0; c < instance.q; ++c) {
                if (c != frozen->second) counts[static_cast<std::size_t>(c)] = 0;
            }
        }
        return counts;
    }
};

std::vector<BigInt> root_counts(const TreeInstance& instance, const BoundaryMap& boundary,
                                const OracleBudget& budget, const AddressSet* keep) {
    instance.validate();
    check_budget(instance, budget, keep);
    return CountWalk{instance, boundary, keep}.subtree(VertexAddress::root());
}

}  // namespace

BigInt count_extensions(const TreeInstance& instance, const BoundaryMap& boundary,
                        const OracleBudget& budget, const AddressSet* keep) {
    BigInt total = 0;
    for (const BigInt& n : root_counts(instance, boundary, budget, keep)) total += n;
    return total;
}

RationalMarginal exact_marginal(const TreeInstance& instance, const BoundaryMap& boundary,
                                const OracleBudget& budget, const AddressSet* keep) {
    if (boundary.count(VertexAddress::root())) {
        throw FrozenRootError("root is conditioned; its marginal is a point mass");
    }
    RationalMarginal marginal;
    marginal.numerators = root_counts(instance, boundary, budget, keep);
    marginal.denominator = 0;
    for (const BigInt& n : marginal.numerators) marginal.denominator += n;
    if (marginal.denominator == 0) {
        throw NonExtendibleError("boundary admits no proper coloring");
    }
    return marginal;
}

bool is_extendible(const TreeInstance& instance, const BoundaryMap& boundary,
                   const OracleBudget& budget, const AddressSet* keep) {
    return count_extensions(instance, boundary, budget, keep) > 0;
}

}  // namespace ssmtree
