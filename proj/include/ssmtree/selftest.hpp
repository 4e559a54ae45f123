#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ssmtree/experiments.hpp"
#include "ssmtree/tree_model.hpp"

namespace ssmtree {

// The fixed regression corpus: deterministic generator configurations that
// the property suites and the acceptance checks run against.
std::vector<GeneratorConfig> corpus_pair_specs();  // q >= d+2, disagreements at depth >= 3

struct CorpusInstanceSpec {
    int q = 0;
    int d = 0;
    int h = 0;
    std::uint64_t seed = 0;
    int freeze_target = 0;
};

std::vector<CorpusInstanceSpec> corpus_instance_specs();  // q >= d+1

struct SelfTestOptions {
    int oracle_instances = 120;   // random BP-vs-exact comparisons
    int norm_pairs_per_q = 2000;  // random norm-bound pairs per q in 2..10
    int jacobian_points = 40;     // finite-difference comparisons
    std::uint64_t seed = 0;
    int threads = 0;
    bool verbose = true;
};

// Runs the cross-module property suite, printing one line per check to
// `out`. Returns true iff every check passed.
bool run_selftest(const SelfTestOptions& options, std::ostream& out);

}  // namespace ssmtree
