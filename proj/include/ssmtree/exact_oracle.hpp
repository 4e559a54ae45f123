#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <vector>

#include "ssmtree/tree_model.hpp"

namespace ssmtree {

using BigInt = boost::multiprecision::cpp_int;

// Exact conditional root marginal: numerators[c] counts the proper colorings
// with the root colored c, denominator their sum.
struct RationalMarginal {
    std::vector<BigInt> numerators;
    BigInt denominator;

    int q() const { return static_cast<int>(numerators.size()); }
    double value(Color c) const;
    std::vector<double> to_doubles() const;
    // Exact comparison numerators[c] / denominator >= p / r (all integers).
    bool at_least(Color c, const BigInt& p, const BigInt& r) const;
};

struct OracleBudget {
    // Refuse instances whose DP table (q * vertex count) exceeds this.
    std::uint64_t max_states = 10'000'000;
};

// Number of proper q-colorings consistent with the boundary, by bottom-up
// dynamic programming over (vertex, color) in exact integer arithmetic.
// Returns 0 for non-extendible boundaries. `keep` restricts the tree to a
// prefix-closed vertex set, as in root_marginal.
// Throws BudgetExceededError when the instance exceeds the budget.
BigInt count_extensions(const TreeInstance& instance, const BoundaryMap& boundary,
                        const OracleBudget& budget = {}, const AddressSet* keep = nullptr);

// Throws FrozenRootError if the root is conditioned, NonExtendibleError if
// the count is zero.
RationalMarginal exact_marginal(const TreeInstance& instance, const BoundaryMap& boundary,
                                const OracleBudget& budget = {}, const AddressSet* keep = nullptr);

bool is_extendible(const TreeInstance& instance, const BoundaryMap& boundary,
                   const OracleBudget& budget = {}, const AddressSet* keep = nullptr);

}  // namespace ssmtree
