#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssmtree/bp_engine.hpp"
#include "ssmtree/exact_oracle.hpp"
#include "ssmtree/tree_model.hpp"

namespace ssmtree {

enum class PairStyle { Random, AdversarialLeaves, FrozenRing };

std::string style_name(PairStyle style);
PairStyle parse_style(const std::string& name);

// The tree a run operates on. With root_plus_one the root gets d+1 children
// while every other internal vertex keeps d; that shape is realized as a
// (d+1)-ary instance restricted to a prefix-closed vertex set.
struct TreeContext {
    TreeInstance base;               // boundary empty; q, branching, h
    int d_nominal = 0;               // the d of the run configuration
    bool root_plus_one = false;
    std::optional<AddressSet> keep;  // populated iff root_plus_one

    const AddressSet* keep_ptr() const { return keep ? &*keep : nullptr; }
    int root_child_count() const { return base.d; }
    std::vector<VertexAddress> vertices_at_depth(int depth) const;
};

TreeContext make_tree_context(int q, int d, int h, bool root_plus_one = false);

struct GeneratorConfig {
    int q = 0;
    int d = 0;
    int h = 0;
    int depth = 0;  // dist(root, Delta) of the generated pair, exactly
    PairStyle style = PairStyle::Random;
    std::uint64_t seed = 0;
    int max_attempts = 10000;
    bool root_plus_one = false;
    OracleBudget budget;
};

// Rejection-samples an extendible pair whose disagreement set sits exactly at
// the requested depth (extendibility of both sides verified by the exact
// oracle). Styles:
//   random             disagreements at the target depth plus a few frozen
//                      agreement vertices anywhere below the root
//   adversarial-leaves deterministically saturates the target depth with a
//                      cycling color pattern vs. its shifted copy
//   frozen-ring        random disagreements plus agreement vertices frozen
//                      identically at depths >= 3
// Throws GenerationFailureError when max_attempts rejections run out.
BoundaryPair generate_boundary_pair(const GeneratorConfig& config);

// Single extendible boundary on the complete tree (for oracle-equivalence
// style checks). freeze_target is the number of conditioned vertices aimed
// for; the result may carry fewer on tiny trees.
TreeInstance generate_random_boundary(int q, int d, int h, std::uint64_t seed,
                                      int freeze_target, const OracleBudget& budget = {});

// One contraction measurement on a generated pair.
struct TrialRow {
    int trial = 0;
    std::string style;
    int depth = 0;
    std::uint64_t seed = 0;
    int d_size = 0;  // |D|
    double root_gap = 0.0;
    double max_child_gap = 0.0;
    double sum_child_gaps = 0.0;
    std::optional<double> ratio;  // root_gap / max_child_gap; empty when the max is 0
    double k_grid = 0.0;
    double k_closed_form = 0.0;
    double certificate = 0.0;  // |D| k_grid^2 sum_child_gaps
    bool cert_ok = true;
    bool agreement_ok = true;
    bool oracle_checked = false;
    double oracle_delta = 0.0;  // max |BP - exact| across all marginals checked
};

struct ContractionConfig {
    int q = 0;
    int d = 0;
    int h = 0;
    int trials = 200;
    int depth_min = 3;
    int depth_max = 0;  // 0 = h
    std::vector<PairStyle> styles = {PairStyle::Random, PairStyle::Random,
                                     PairStyle::FrozenRing, PairStyle::AdversarialLeaves};
    std::uint64_t seed = 0;
    int t_grid = 1001;
    int threads = 0;  // 0 = all cores
    bool oracle_check = true;
    bool root_plus_one = false;
    int max_attempts = 10000;
    OracleBudget budget;
};

struct ContractionReport {
    ContractionConfig config;
    std::vector<TrialRow> rows;
    int attempted = 0;
    int failed_generation = 0;
    int defined_ratios = 0;
    double max_ratio = 0.0;
    double ratio_q50 = 0.0;
    double ratio_q90 = 0.0;
    bool all_cert_ok = true;
    bool all_agreement_ok = true;
    double max_oracle_delta = 0.0;
};

// Runs trials in parallel (results land in per-trial slots; every aggregate
// is a sequential fold over trial index, so output is independent of the
// schedule). The per-trial certificate check retries once with a 10x finer
// grid before reporting a violation: the grid max under-estimates the true
// max over t.
ContractionReport run_contraction(const ContractionConfig& config);

TrialRow contraction_trial(const BoundaryPair& pair, int t_grid, bool oracle_check,
                           const OracleBudget& budget = {});

struct DecayLevel {
    int level = 0;
    int attempted = 0;
    int generated = 0;
    double max_gap = 0.0;  // max ||pi - pi'||_2^2 over the level's pairs
    double zeta = 0.0;     // reference decay curve, when available
};

struct DecayConfig {
    int q = 0;
    int d = 0;
    int h = 0;
    int trials_per_level = 100;
    std::vector<PairStyle> styles = {PairStyle::Random, PairStyle::FrozenRing,
                                     PairStyle::AdversarialLeaves};
    std::uint64_t seed = 0;
    int threads = 0;
    int tail_start = 2;  // first level of the log-linear fit
    bool root_plus_one = false;
    int max_attempts = 10000;
    OracleBudget budget;
};

struct DecayCurve {
    DecayConfig config;
    std::vector<DecayLevel> levels;  // levels 1..h
    bool zeta_available = false;     // contraction condition held at q/d_eff
    double u = 0.0;                  // pipeline U when zeta_available
    double fitted_rate = 0.0;        // slope of log max_gap per level on the tail
    double fit_r2 = 0.0;
    int fit_points = 0;
};

DecayCurve decay_sweep(const DecayConfig& config);

// Whether the root-marginal L2 distance between eta and eta' computed on the
// pruned tree (`retained`, prefix-closed, boundary keys inside it) matches
// the distance on the completed tree to `tol`. Free completion subtrees
// contribute color-symmetric factors, so the two must agree.
bool subtree_completion_check(const TreeInstance& instance, const AddressSet& retained,
                              const BoundaryMap& eta, const BoundaryMap& eta_prime,
                              double tol = 1e-12);

// Artifact emission. Every artifact embeds the schema version, the full
// config, and the seed, and is byte-stable for a fixed (config, seed).
void write_contraction_csv(const ContractionReport& report, std::ostream& out);
nlohmann::json contraction_json(const ContractionReport& report);
void write_decay_csv(const DecayCurve& curve, std::ostream& out);
nlohmann::json decay_json(const DecayCurve& curve);

nlohmann::json config_json(const ContractionConfig& config);
nlohmann::json config_json(const DecayConfig& config);

// Fixed-format double used in all text artifacts ("%.17g": round-trip exact).
std::string format_double(double value);

// Deterministic helper: runs fn(0..n-1) on `threads` threads (0 = all
// cores), each result written to its own slot by the caller.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace ssmtree
