#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ssmtree {

// Colors are 0-based everywhere in process; file formats use 1-based colors
// and convert at the I/O boundary (see instance_io).
using Color = int;

// A vertex of the complete d-ary tree, addressed by its child-index path
// from the root. The root is the empty path; canonical text form is
// dot-separated indices, e.g. "0.2.1" ("" for the root).
struct VertexAddress {
    std::vector<int> path;

    static VertexAddress root() { return {}; }
    static VertexAddress parse(const std::string& s);

    std::string str() const;
    int depth() const { return static_cast<int>(path.size()); }
    bool is_root() const { return path.empty(); }
    VertexAddress child(int i) const;
    VertexAddress parent() const;
    bool is_prefix_of(const VertexAddress& other) const;

    auto operator<=>(const VertexAddress&) const = default;
};

using BoundaryMap = std::map<VertexAddress, Color>;
using AddressSet = std::set<VertexAddress>;

// A rooted complete d-ary tree of height h with q colors and a partial
// boundary assignment. The tree itself is implicit: no vertex list is ever
// materialized, so large h is fine as long as the boundary stays sparse.
struct TreeInstance {
    int q = 0;
    int d = 0;
    int h = 0;
    BoundaryMap boundary;

    // Throws std::invalid_argument on malformed parameters, out-of-tree
    // addresses, or out-of-range colors.
    void validate() const;

    bool contains(const VertexAddress& v) const;

    // Saturates at UINT64_MAX instead of overflowing.
    std::uint64_t vertex_count() const;

    // True iff some boundary vertex lies in the subtree rooted at `prefix`
    // (inclusive). O(log |boundary|) via ordered-map prefix lookup.
    static bool subtree_has_boundary(const BoundaryMap& boundary, const VertexAddress& prefix);
};

// Two boundary assignments on the same conditioning set Lambda.
struct BoundaryPair {
    TreeInstance instance;  // instance.boundary conventionally mirrors eta
    BoundaryMap eta;
    BoundaryMap eta_prime;

    void validate() const;  // shared key set, colors in range
    std::vector<VertexAddress> disagreement() const;
};

// Non-frozen children of the root and, per color, the fraction of them for
// which that color is available.
struct AvailabilityProfile {
    std::vector<int> non_frozen;           // D, ascending child indices
    std::vector<int> available_counts;     // per color: |{i in D : color available at v_i}|
    std::vector<double> gamma;             // available_counts / |D| (zero vector when D is empty)
    std::vector<double> gamma_sqrt;

    int d_size() const { return static_cast<int>(non_frozen.size()); }
    bool operator==(const AvailabilityProfile& other) const {
        return non_frozen == other.non_frozen && available_counts == other.available_counts;
    }
};

// D = children of the root absent from the boundary; gamma_c = fraction of
// i in D such that no conditioned tree-neighbor of v_i carries color c.
// Neighbors of v_i are its children and the root; a conditioned root blocks
// its color at every child (vacuous in the dist(root, Delta) >= 3 setting,
// where the root is never conditioned).
AvailabilityProfile classify_children(const TreeInstance& instance, const BoundaryMap& boundary);

// Runtime assertion that eta and eta' induce identical frozen sets and
// blocked colors at the root's children. Requires dist(root, Delta) >= 3;
// closer disagreements are a caller error (PreconditionError).
bool blocked_agreement_check(const BoundaryPair& pair);

// Minimum depth over the set; nullopt for the empty set (infinity).
std::optional<int> dist_root_to_set(const TreeInstance& instance,
                                    const std::vector<VertexAddress>& vertices);

}  // namespace ssmtree
