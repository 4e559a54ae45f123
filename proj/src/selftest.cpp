#include "ssmtree/selftest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>

#include "ssmtree/bp_engine.hpp"
#include "ssmtree/errors.hpp"
#include "ssmtree/exact_oracle.hpp"
#include "ssmtree/jacobian_norms.hpp"
#include "ssmtree/rng.hpp"
#include "ssmtree/thresholds.hpp"

namespace ssmtree {

std::vector<GeneratorConfig> corpus_pair_specs() {
    std::vector<GeneratorConfig> specs;
    for (int d : {1, 2, 3}) {
        for (int q : {d + 2, d + 3, 2 * d + 10}) {
            for (int h : {3, 4}) {
                for (int depth = 3; depth <= h; ++depth) {
                    const auto add = [&](PairStyle style, std::uint64_t seed) {
                        GeneratorConfig g;
                        g.q = q;
                        g.d = d;
                        g.h = h;
                        g.depth = depth;
                        g.style = style;
                        g.seed = seed;
                        specs.push_back(g);
                    };
                    add(PairStyle::Random, 1);
                    add(PairStyle::Random, 2);
                    add(PairStyle::FrozenRing, 3);
                    add(PairStyle::AdversarialLeaves, 1);
                }
            }
        }
    }
    return specs;
}

std::vector<CorpusInstanceSpec> corpus_instance_specs() {
    std::vector<CorpusInstanceSpec> specs;
    for (int d : {1, 2, 3}) {
        for (int q : {d + 1, d + 2, d + 3, 2 * d + 10}) {
            for (int h : {2, 3}) {
                for (int seed : {1, 2}) {
                    specs.push_back({q, d, h, static_cast<std::uint64_t>(seed), 2 + seed});
                }
            }
        }
    }
    return specs;
}

namespace {

std::vector<double> random_probability_vector(Rng& rng, int q) {
    std::vector<double> p(static_cast<std::size_t>(q));
    double sum = 0.0;
    for (auto& v : p) {
        v = -std::log(1.0 - rng.uniform01());
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return p;
}

using CheckFn = std::function<bool(std::string&)>;

struct Check {
    std::string name;
    CheckFn fn;
};

GeneratorConfig small_pair_config(Rng& rng) {
    GeneratorConfig g;
    g.d = rng.uniform_int(1, 3);
    g.q = g.d + 2 + rng.uniform_int(0, 3);
    g.h = rng.uniform_int(3, 4);
    g.depth = rng.uniform_int(3, g.h);
    g.style = (rng.uniform_int(0, 1) == 0) ? PairStyle::Random : PairStyle::FrozenRing;
    g.seed = rng.next();
    return g;
}

}  // namespace

bool run_selftest(const SelfTestOptions& options, std::ostream& out) {
    std::vector<Check> checks;

    checks.push_back({"bp matches exact oracle on random instances", [&](std::string& detail) {
        Rng rng(Rng::mix(options.seed ^ 0x01));
        double worst = 0.0;
        for (int i = 0; i < options.oracle_instances; ++i) {
            const int d = rng.uniform_int(1, 3);
            const int q = rng.uniform_int(3, 6);
            const int h = rng.uniform_int(1, 3);
            const TreeInstance inst =
                generate_random_boundary(q, d, h, rng.next(), rng.uniform_int(0, 4));
            if (inst.boundary.count(VertexAddress::root())) continue;
            const auto bp = root_marginal(inst, inst.boundary);
            const auto exact = exact_marginal(inst, inst.boundary);
            for (int c = 0; c < q; ++c) worst = std::max(worst, std::abs(bp[c] - exact.value(c)));
        }
        detail = "max delta " + format_double(worst);
        return worst <= 1e-12;
    }});

    checks.push_back({"jacobian norm bound holds on random (pi, gamma)", [&](std::string& detail) {
        Rng rng(Rng::mix(options.seed ^ 0x02));
        double worst = -1.0;
        for (int q = 2; q <= 10; ++q) {
            for (int i = 0; i < options.norm_pairs_per_q; ++i) {
                std::vector<double> gamma(static_cast<std::size_t>(q));
                for (auto& g : gamma) g = rng.uniform01();
                const auto check = norm_bound_check(random_probability_vector(rng, q), gamma);
                worst = std::max(worst, check.norm - check.bound);
                if (!check.ok) {
                    detail = "violation at q=" + std::to_string(q);
                    return false;
                }
            }
        }
        detail = "max (norm - bound) " + format_double(worst);
        return true;
    }});

    checks.push_back({"analytic jacobian matches central differences", [&](std::string& detail) {
        Rng rng(Rng::mix(options.seed ^ 0x03));
        const double step = 1e-6;
        double worst = 0.0;
        for (int n = 0; n < options.jacobian_points; ++n) {
            const GeneratorConfig g = small_pair_config(rng);
            BoundaryPair pair;
            try {
                pair = generate_boundary_pair(g);
            } catch (const GenerationFailureError&) {
                continue;
            }
            bool frozen_child = false;
            for (const auto& [v, c] : pair.eta) frozen_child |= v.depth() == 1;
            if (frozen_child) continue;  // those columns have no derivative
            const auto kids = child_marginals(pair.instance, pair.eta);
            const auto kids_prime = child_marginals(pair.instance, pair.eta_prime);
            const double t = rng.uniform01();
            const InterpolationPoint point = interpolation_point(t, kids, kids_prime);
            const BpJacobian jac = bp_jacobian(point);
            for (int i = 0; i < jac.d; ++i) {
                for (int j = 0; j < jac.q; ++j) {
                    auto plus = point.z;
                    auto minus = point.z;
                    plus[static_cast<std::size_t>(i)].probs[static_cast<std::size_t>(j)] += step;
                    minus[static_cast<std::size_t>(i)].probs[static_cast<std::size_t>(j)] -= step;
                    const auto f_plus = bp_step(plus, jac.q);
                    const auto f_minus = bp_step(minus, jac.q);
                    for (int c = 0; c < jac.q; ++c) {
                        const double fd = (f_plus[c] - f_minus[c]) / (2.0 * step);
                        worst = std::max(worst, std::abs(fd - jac.blocks[static_cast<std::size_t>(i)](c, j)));
                    }
                }
            }
        }
        detail = "max |analytic - fd| " + format_double(worst);
        return worst <= 1e-6;
    }});

    checks.push_back({"jacobian rows sum to zero per (i, j)", [&](std::string& detail) {
        Rng rng(Rng::mix(options.seed ^ 0x04));
        double worst = 0.0;
        for (int n = 0; n < 20; ++n) {
            const GeneratorConfig g = small_pair_config(rng);
            BoundaryPair pair;
            try {
                pair = generate_boundary_pair(g);
            } catch (const GenerationFailureError&) {
                continue;
            }
            bool frozen_child = false;
            for (const auto& [v, c] : pair.eta) frozen_child |= v.depth() == 1;
            if (frozen_child) continue;
            const auto kids = child_marginals(pair.instance, pair.eta);
            const auto kids_prime = child_marginals(pair.instance, pair.eta_prime);
            const InterpolationPoint point = interpolation_point(rng.uniform01(), kids, kids_prime);
            const BpJacobian jac = bp_jacobian(point);
            for (int i = 0; i < jac.d; ++i) {
                for (int j = 0; j < jac.q; ++j) {
                    double sum = 0.0;
                    for (int c = 0; c < jac.q; ++c) sum += jac.blocks[static_cast<std::size_t>(i)](c, j);
                    worst = std::max(worst, std::abs(sum));
                }
            }
        }
        detail = "max |row sum| " + format_double(worst);
        return worst <= 1e-12;
    }});

    checks.push_back({"interpolated child marginals respect the 1/(q-d) cap", [&](std::string& detail) {
        Rng rng(Rng::mix(options.seed ^ 0x05));
        double worst = 0.0;
        for (int n = 0; n < 20; ++n) {
            const GeneratorConfig g = small_pair_config(rng);
            BoundaryPair pair;
            try {
                pair = generate_boundary_pair(g);
            } catch (const GenerationFailureError&) {
                continue;
            }
            const double cap = 1.0 / (g.q - g.d);
            const auto profile = classify_children(pair.instance, pair.eta);
            const auto kids = child_marginals(pair.instance, pair.eta);
            const auto kids_prime = child_marginals(pair.instance, pair.eta_prime);
            for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                const InterpolationPoint point = interpolation_point(t, kids, kids_prime);
                for (int i : profile.non_frozen) {
                    for (int j = 0; j < g.q; ++j) {
                        const double z = point.z[static_cast<std::size_t>(i)][j];
                        worst = std::max(worst, std::max(-z, z - cap));
                    }
                }
            }
        }
        detail = "max excess " + format_double(worst);
        return worst <= 1e-12;
    }});

    checks.push_back({"frozen sets and blocked colors agree across the pair", [&](std::string& detail) {
        Rng rng(Rng::mix(options.seed ^ 0x06));
        int tested = 0;
        for (int n = 0; n < 40; ++n) {
            const GeneratorConfig g = small_pair_config(rng);
            BoundaryPair pair;
            try {
                pair = generate_boundary_pair(g);
            } catch (const GenerationFailureError&) {
                continue;
            }
            ++tested;
            if (!blocked_agreement_check(pair)) {
                detail = "disagreeing profiles for q=" + std::to_string(g.q);
                return false;
            }
        }
        detail = std::to_string(tested) + " pairs";
        return tested > 0;
    }});

    checks.push_back({"free subtrees do not move the root marginal", [&](std::string& detail) {
        Rng rng(Rng::mix(options.seed ^ 0x07));
        double worst = 0.0;
        for (int n = 0; n < 30; ++n) {
            const int d = rng.uniform_int(1, 3);
            const int q = rng.uniform_int(3, 6);
            const int h = rng.uniform_int(1, 3);
            const TreeInstance inst =
                generate_random_boundary(q, d, h, rng.next(), rng.uniform_int(1, 3));
            TreeInstance taller = inst;
            taller.h = h + 1;  // same boundary; one extra unconditioned level
            const auto a = root_marginal(inst, inst.boundary);
            const auto b = root_marginal(taller, taller.boundary);
            for (int c = 0; c < q; ++c) worst = std::max(worst, std::abs(a[c] - b[c]));
        }
        detail = "max delta " + format_double(worst);
        return worst <= 1e-12;
    }});

    checks.push_back({"exact marginal is color-equivariant", [&](std::string& detail) {
        Rng rng(Rng::mix(options.seed ^ 0x08));
        for (int n = 0; n < 25; ++n) {
            const int d = rng.uniform_int(1, 3);
            const int q = rng.uniform_int(3, 6);
            const int h = rng.uniform_int(1, 3);
            const TreeInstance inst =
                generate_random_boundary(q, d, h, rng.next(), rng.uniform_int(1, 4));
            if (inst.boundary.count(VertexAddress::root())) continue;
            std::vector<int> perm(static_cast<std::size_t>(q));
            for (int c = 0; c < q; ++c) perm[static_cast<std::size_t>(c)] = c;
            rng.shuffle(perm);
            BoundaryMap permuted;
            for (const auto& [v, c] : inst.boundary) permuted[v] = perm[static_cast<std::size_t>(c)];
            const auto base = exact_marginal(inst, inst.boundary);
            const auto mapped = exact_marginal(inst, permuted);
            if (base.denominator != mapped.denominator) {
                detail = "denominators differ";
                return false;
            }
            for (int c = 0; c < q; ++c) {
                if (base.numerators[static_cast<std::size_t>(c)] !=
                    mapped.numerators[static_cast<std::size_t>(perm[static_cast<std::size_t>(c)])]) {
                    detail = "numerators differ after permutation";
                    return false;
                }
            }
        }
        return true;
    }});

    checks.push_back({"available root marginals clear the closed-form floor", [&](std::string& detail) {
        for (const auto& spec : corpus_instance_specs()) {
            TreeInstance inst;
            try {
                inst = generate_random_boundary(spec.q, spec.d, spec.h, spec.seed,
                                                spec.freeze_target);
            } catch (const GenerationFailureError&) {
                continue;
            }
            if (inst.boundary.count(VertexAddress::root())) continue;
            const auto exact = exact_marginal(inst, inst.boundary);
            const int s = spec.q - spec.d;
            const BigInt l_num = boost::multiprecision::pow(BigInt(s - 1), static_cast<unsigned>(spec.d));
            const BigInt l_den = spec.d * boost::multiprecision::pow(BigInt(s), static_cast<unsigned>(spec.d)) + s * l_num;
            for (int c = 0; c < spec.q; ++c) {
                bool available = true;
                for (int i = 0; i < spec.d && spec.h >= 1; ++i) {
                    const auto it = inst.boundary.find(VertexAddress::root().child(i));
                    if (it != inst.boundary.end() && it->second == c) available = false;
                }
                if (available && !exact.at_least(c, l_num, l_den)) {
                    detail = "floor violated at q=" + std::to_string(spec.q) +
                             " d=" + std::to_string(spec.d) + " color " + std::to_string(c + 1);
                    return false;
                }
            }
        }
        return true;
    }});

    checks.push_back({"child-aggregation certificate holds on the corpus", [&](std::string& detail) {
        double worst_slack = 0.0;
        int tested = 0;
        for (const auto& spec : corpus_pair_specs()) {
            BoundaryPair pair;
            try {
                pair = generate_boundary_pair(spec);
            } catch (const GenerationFailureError&) {
                continue;
            }
            const TrialRow row = contraction_trial(pair, 201, false);
            ++tested;
            worst_slack = std::max(worst_slack, row.root_gap - row.certificate);
            if (!row.cert_ok) {
                detail = "certificate violated at q=" + std::to_string(spec.q) +
                         " d=" + std::to_string(spec.d) + " seed " + std::to_string(spec.seed);
                return false;
            }
        }
        detail = std::to_string(tested) + " pairs, max (lhs - rhs) " + format_double(worst_slack);
        return tested > 0;
    }});

    checks.push_back({"spectral norm is transpose-invariant", [&](std::string& detail) {
        Rng rng(Rng::mix(options.seed ^ 0x09));
        double worst = 0.0;
        for (int n = 0; n < 200; ++n) {
            const int q = rng.uniform_int(2, 8);
            std::vector<double> gamma(static_cast<std::size_t>(q));
            for (auto& g : gamma) g = rng.uniform01();
            const auto bundle = build_matrix(random_probability_vector(rng, q), gamma);
            worst = std::max(worst, std::abs(spectral_norm(bundle.matrix) -
                                             spectral_norm(bundle.matrix.transpose())));
        }
        detail = "max |norm - norm^T| " + format_double(worst);
        return worst <= 1e-10;
    }});

    checks.push_back({"zero availability kills the matching column", [&](std::string& detail) {
        Rng rng(Rng::mix(options.seed ^ 0x0a));
        for (int n = 0; n < 100; ++n) {
            const int q = rng.uniform_int(2, 8);
            std::vector<double> gamma(static_cast<std::size_t>(q));
            for (auto& g : gamma) g = rng.uniform01();
            const int j = rng.uniform_int(0, q - 1);
            gamma[static_cast<std::size_t>(j)] = 0.0;
            const auto bundle = build_matrix(random_probability_vector(rng, q), gamma);
            for (int c = 0; c < q; ++c) {
                if (bundle.matrix(c, j) != 0.0) {
                    detail = "nonzero entry in a zeroed column";
                    return false;
                }
            }
        }
        return true;
    }});

    checks.push_back({"threshold solver and pipeline ordering", [&](std::string& detail) {
        if (std::abs(solve_alpha_prime(4) - 1.5897) > 1e-12) {
            detail = "alpha' at four digits is not 1.5897";
            return false;
        }
        if (std::abs(solve_alpha_star() - 1.763) > 5e-4) {
            detail = "alpha* not 1.763 to three decimals";
            return false;
        }
        for (double r : {1.59, 1.6, 1.75, 2.0, 5.0}) {
            const auto p = make_pipeline(r);
            if (!(0 < p.c && p.c < p.k_prime && p.k_prime < p.u_prime && p.u_prime < 1.0 &&
                  p.u < 1.0)) {
                detail = "pipeline ordering broken at r=" + format_double(r);
                return false;
            }
        }
        return true;
    }});

    checks.push_back({"pruned subtrees match their completed host tree", [&](std::string& detail) {
        // A path retained inside the complete (d=2, h=3) tree.
        TreeInstance host;
        host.q = 4;
        host.d = 2;
        host.h = 3;
        AddressSet retained;
        VertexAddress v;
        retained.insert(v);
        for (int step : {0, 1, 0}) {
            v = v.child(step);
            retained.insert(v);
        }
        BoundaryMap eta, eta_prime;
        eta[v] = 0;
        eta_prime[v] = 1;
        if (!subtree_completion_check(host, retained, eta, eta_prime)) {
            detail = "path-in-tree distances differ";
            return false;
        }
        // Boundary on an interior retained vertex as well.
        eta[VertexAddress::parse("0.1")] = 2;
        eta_prime[VertexAddress::parse("0.1")] = 2;
        if (!subtree_completion_check(host, retained, eta, eta_prime)) {
            detail = "interior-boundary distances differ";
            return false;
        }
        return true;
    }});

    checks.push_back({"decay sweep artifacts are byte-stable", [&](std::string& detail) {
        DecayConfig config;
        config.q = 7;
        config.d = 2;
        config.h = 3;
        config.trials_per_level = 6;
        config.seed = 11;
        config.threads = options.threads;
        std::ostringstream a, b;
        write_decay_csv(decay_sweep(config), a);
        write_decay_csv(decay_sweep(config), b);
        if (a.str() != b.str()) {
            detail = "two identical runs differ";
            return false;
        }
        return true;
    }});

    bool all_ok = true;
    for (const auto& check : checks) {
        std::string detail;
        bool ok = false;
        try {
            ok = check.fn(detail);
        } catch (const std::exception& err) {
            ok = false;
            detail = std::string("exception: ") + err.what();
        }
        all_ok = all_ok && ok;
        if (options.verbose || !ok) {
            out << (ok ? "[ok]   " : "[FAIL] ") << check.name;
            if (!detail.empty()) out << "  (" << detail << ")";
            out << "\n";
        }
    }
    return all_ok;
}

}  // namespace ssmtree
