#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ssmtree/errors.hpp"
#include "ssmtree/exact_oracle.hpp"
#include "ssmtree/experiments.hpp"
#include "ssmtree/rng.hpp"
#include "ssmtree/selftest.hpp"

using namespace ssmtree;

namespace {

GeneratorConfig gen_config(int q, int d, int h, int depth, PairStyle style, std::uint64_t seed) {
    GeneratorConfig g;
    g.q = q;
    g.d = d;
    g.h = h;
    g.depth = depth;
    g.style = style;
    g.seed = seed;
    return g;
}

}  // namespace

TEST_CASE("generated pairs disagree exactly at the requested depth and extend") {
    for (auto style : {PairStyle::Random, PairStyle::FrozenRing, PairStyle::AdversarialLeaves}) {
        const auto g = gen_config(5, 2, 4, 4, style, 17);
        const BoundaryPair pair = generate_boundary_pair(g);
        CHECK(dist_root_to_set(pair.instance, pair.disagreement()) == 4);
        CHECK(is_extendible(pair.instance, pair.eta));
        CHECK(is_extendible(pair.instance, pair.eta_prime));
        CHECK(blocked_agreement_check(pair));
    }
}

TEST_CASE("adversarial style saturates the target depth deterministically") {
    const auto g = gen_config(5, 2, 3, 3, PairStyle::AdversarialLeaves, 123);
    const BoundaryPair pair = generate_boundary_pair(g);
    CHECK(pair.disagreement().size() == 8);  // all 2^3 vertices at depth 3
    const BoundaryPair replay = generate_boundary_pair(gen_config(5, 2, 3, 3, PairStyle::AdversarialLeaves, 999));
    CHECK(replay.eta == pair.eta);  // independent of the seed
    CHECK(replay.eta_prime == pair.eta_prime);
}

TEST_CASE("frozen-ring agreements sit at depth >= 3") {
    const auto g = gen_config(6, 2, 4, 3, PairStyle::FrozenRing, 5);
    const BoundaryPair pair = generate_boundary_pair(g);
    int agreements = 0;
    for (const auto& [v, c] : pair.eta) {
        if (pair.eta_prime.at(v) == c) {
            ++agreements;
            CHECK(v.depth() >= 3);
        }
    }
    CHECK(agreements >= 1);
}

TEST_CASE("random style always places at least one agreement vertex") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const BoundaryPair pair = generate_boundary_pair(gen_config(5, 2, 4, 3, PairStyle::Random, seed));
        int agreements = 0;
        for (const auto& [v, c] : pair.eta) {
            if (pair.eta_prime.at(v) == c) ++agreements;
        }
        CHECK(agreements >= 1);
    }
}

TEST_CASE("two colors on the binary tree cannot host a strong-mixing pair") {
    auto g = gen_config(2, 2, 3, 3, PairStyle::Random, 3);
    g.max_attempts = 300;
    CHECK_THROWS_AS(generate_boundary_pair(g), GenerationFailureError);
}

TEST_CASE("identical boundaries give zero gaps and an undefined ratio") {
    BoundaryPair pair = generate_boundary_pair(gen_config(6, 2, 3, 3, PairStyle::Random, 8));
    pair.eta_prime = pair.eta;
    const TrialRow row = contraction_trial(pair, 101, true);
    CHECK(row.root_gap == 0.0);
    CHECK(row.max_child_gap == 0.0);
    CHECK_FALSE(row.ratio.has_value());
    CHECK(row.cert_ok);
    CHECK(row.oracle_delta <= 1e-12);
}

TEST_CASE("frozen children carry bitwise-equal marginals across the pair") {
    // freeze child 0 identically on both sides, disagree deep inside child 1
    BoundaryPair pair;
    pair.instance.q = 6;
    pair.instance.d = 2;
    pair.instance.h = 3;
    pair.eta[VertexAddress::parse("0")] = 4;
    pair.eta_prime[VertexAddress::parse("0")] = 4;
    pair.eta[VertexAddress::parse("1.0.1")] = 0;
    pair.eta_prime[VertexAddress::parse("1.0.1")] = 1;
    pair.instance.boundary = pair.eta;

    const TrialRow row = contraction_trial(pair, 101, true);
    CHECK(row.d_size == 1);
    CHECK(row.agreement_ok);
    CHECK(row.oracle_delta <= 1e-12);
    // child 0 contributes exactly zero gap (point mass on both sides)
    CHECK(row.sum_child_gaps == row.max_child_gap);
}

TEST_CASE("contraction run aggregates and stays certified") {
    ContractionConfig config;
    config.q = 6;
    config.d = 2;
    config.h = 3;
    config.trials = 12;
    config.seed = 99;
    config.t_grid = 101;
    config.threads = 2;
    const ContractionReport report = run_contraction(config);
    CHECK(report.attempted == 12);
    CHECK(report.rows.size() + report.failed_generation == 12);
    CHECK(report.all_cert_ok);
    CHECK(report.all_agreement_ok);
    CHECK(report.max_oracle_delta <= 1e-12);
    CHECK(report.defined_ratios > 0);
    for (const auto& row : report.rows) {
        if (row.ratio) CHECK(*row.ratio >= 0.0);
        CHECK(row.depth == 3);
        CHECK(row.d_size <= 2);
    }
}

TEST_CASE("contraction artifacts are byte-stable across runs and thread counts") {
    ContractionConfig config;
    config.q = 5;
    config.d = 2;
    config.h = 3;
    config.trials = 6;
    config.seed = 4242;
    config.t_grid = 51;
    std::ostringstream a, b, c;
    config.threads = 1;
    write_contraction_csv(run_contraction(config), a);
    config.threads = 2;
    write_contraction_csv(run_contraction(config), b);
    write_contraction_csv(run_contraction(config), c);
    CHECK(a.str() == b.str());
    CHECK(b.str() == c.str());
    CHECK(contraction_json(run_contraction(config)).dump() ==
          contraction_json(run_contraction(config)).dump());
}

TEST_CASE("decay sweep shapes, reproducibility, and partial failure accounting") {
    DecayConfig config;
    config.q = 7;
    config.d = 2;
    config.h = 4;
    config.trials_per_level = 10;
    config.seed = 7;
    config.threads = 2;
    const DecayCurve curve = decay_sweep(config);
    REQUIRE(curve.levels.size() == 4);
    for (int level = 1; level <= 4; ++level) {
        CHECK(curve.levels[level - 1].level == level);
        CHECK(curve.levels[level - 1].attempted == 10);
        CHECK(curve.levels[level - 1].max_gap >= 0.0);
        CHECK(curve.levels[level - 1].max_gap <= 2.0);
    }
    CHECK(curve.zeta_available);  // q/d = 3.5 is deep in the regime
    CHECK(curve.levels[1].zeta == doctest::Approx(2.0));

    std::ostringstream a, b;
    write_decay_csv(curve, a);
    write_decay_csv(decay_sweep(config), b);
    CHECK(a.str() == b.str());
    CHECK(decay_json(curve).dump() == decay_json(decay_sweep(config)).dump());
}

TEST_CASE("subtree completion: a path inside the complete binary tree") {
    TreeInstance host;
    host.q = 4;
    host.d = 2;
    host.h = 3;
    AddressSet retained;
    retained.insert(VertexAddress::root());
    retained.insert(VertexAddress::parse("0"));
    retained.insert(VertexAddress::parse("0.1"));
    retained.insert(VertexAddress::parse("0.1.0"));
    BoundaryMap eta, eta_prime;
    eta[VertexAddress::parse("0.1.0")] = 0;
    eta_prime[VertexAddress::parse("0.1.0")] = 1;
    CHECK(subtree_completion_check(host, retained, eta, eta_prime));

    // marginal vectors themselves agree with the oracle on the pruned shape
    const auto pruned = root_marginal(host, eta, &retained);
    const auto pruned_exact = exact_marginal(host, eta, {}, &retained);
    for (int c = 0; c < 4; ++c) {
        CHECK(pruned[c] == doctest::Approx(pruned_exact.value(c)).epsilon(1e-13));
    }
}

TEST_CASE("subtree completion: boundary on the retained part only") {
    TreeInstance host;
    host.q = 5;
    host.d = 3;
    host.h = 2;
    AddressSet retained;
    retained.insert(VertexAddress::root());
    retained.insert(VertexAddress::parse("1"));
    retained.insert(VertexAddress::parse("1.2"));
    retained.insert(VertexAddress::parse("2"));
    BoundaryMap eta, eta_prime;
    eta[VertexAddress::parse("1.2")] = 3;
    eta_prime[VertexAddress::parse("1.2")] = 4;
    eta[VertexAddress::parse("2")] = 0;
    eta_prime[VertexAddress::parse("2")] = 0;
    CHECK(subtree_completion_check(host, retained, eta, eta_prime));

    // a complete tree is trivially equal to itself
    AddressSet everything;
    std::function<void(const VertexAddress&)> collect = [&](const VertexAddress& v) {
        everything.insert(v);
        if (v.depth() < host.h) {
            for (int i = 0; i < host.d; ++i) collect(v.child(i));
        }
    };
    collect(VertexAddress::root());
    CHECK(subtree_completion_check(host, everything, eta, eta_prime));
}

TEST_CASE("subtree completion rejects malformed retained sets") {
    TreeInstance host;
    host.q = 4;
    host.d = 2;
    host.h = 2;
    AddressSet no_root{VertexAddress::parse("0")};
    CHECK_THROWS_AS(subtree_completion_check(host, no_root, {}, {}), PreconditionError);
    AddressSet gap{VertexAddress::root(), VertexAddress::parse("0.1")};
    CHECK_THROWS_AS(subtree_completion_check(host, gap, {}, {}), PreconditionError);
    AddressSet ok{VertexAddress::root(), VertexAddress::parse("0")};
    BoundaryMap outside;
    outside[VertexAddress::parse("1")] = 0;
    CHECK_THROWS_AS(subtree_completion_check(host, ok, outside, outside), PreconditionError);
}

TEST_CASE("the extra-root-child shape builds the right vertex counts") {
    const TreeContext ctx = make_tree_context(7, 2, 3, true);
    CHECK(ctx.base.d == 3);
    CHECK(ctx.root_child_count() == 3);
    CHECK(ctx.vertices_at_depth(1).size() == 3);
    CHECK(ctx.vertices_at_depth(2).size() == 6);
    CHECK(ctx.vertices_at_depth(3).size() == 12);
    REQUIRE(ctx.keep.has_value());
    CHECK(ctx.keep->size() == 1 + 3 + 6 + 12);

    // a contraction run on that shape works end to end (q >= (d+1)+2)
    ContractionConfig config;
    config.q = 7;
    config.d = 2;
    config.h = 3;
    config.trials = 4;
    config.seed = 31;
    config.t_grid = 51;
    config.root_plus_one = true;
    const ContractionReport report = run_contraction(config);
    CHECK(report.rows.size() + report.failed_generation == 4);
    CHECK(report.all_cert_ok);
    for (const auto& row : report.rows) CHECK(row.d_size <= 3);
}

TEST_CASE("style names round-trip") {
    for (auto s : {PairStyle::Random, PairStyle::AdversarialLeaves, PairStyle::FrozenRing}) {
        CHECK(parse_style(style_name(s)) == s);
    }
    CHECK_THROWS_AS(parse_style("bogus"), std::invalid_argument);
}
