#include "ssmtree/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "ssmtree/errors.hpp"
#include "ssmtree/jacobian_norms.hpp"
#include "ssmtree/rng.hpp"
#include "ssmtree/thresholds.hpp"

namespace ssmtree {

std::string style_name(PairStyle style) {
    switch (style) {
        case PairStyle::Random: return "random";
        case PairStyle::AdversarialLeaves: return "adversarial-leaves";
        case PairStyle::FrozenRing: return "frozen-ring";
    }
    return "?";
}

PairStyle parse_style(const std::string& name) {
    if (name == "random") return PairStyle::Random;
    if (name == "adversarial-leaves") return PairStyle::AdversarialLeaves;
    if (name == "frozen-ring") return PairStyle::FrozenRing;
    throw std::invalid_argument("unknown pair style: " + name);
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n));
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(n, lo + chunk);
        pool.emplace_back([&, lo, hi] {
            for (int i = lo; i < hi; ++i) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<VertexAddress> TreeContext::vertices_at_depth(int depth) const {
    std::vector<VertexAddress> frontier{VertexAddress::root()};
    for (int level = 0; level < depth; ++level) {
        std::vector<VertexAddress> next;
        for (const auto& v : frontier) {
            const int width = v.is_root() ? base.d : d_nominal;
            for (int i = 0; i < width; ++i) next.push_back(v.child(i));
        }
        frontier = std::move(next);
    }
    return frontier;
}

TreeContext make_tree_context(int q, int d, int h, bool root_plus_one) {
    TreeContext ctx;
    ctx.d_nominal = d;
    ctx.root_plus_one = root_plus_one;
    ctx.base.q = q;
    ctx.base.d = root_plus_one ? d + 1 : d;
    ctx.base.h = h;
    ctx.base.validate();
    if (root_plus_one) {
        AddressSet keep;
        std::vector<VertexAddress> frontier{VertexAddress::root()};
        keep.insert(VertexAddress::root());
        for (int level = 0; level < h; ++level) {
            std::vector<VertexAddress> next;
            for (const auto& v : frontier) {
                const int width = v.is_root() ? d + 1 : d;
                for (int i = 0; i < width; ++i) {
                    next.push_back(v.child(i));
                    keep.insert(next.back());
                }
            }
            frontier = std::move(next);
        }
        ctx.keep = std::move(keep);
    }
    return ctx;
}

namespace {

// Adjacent conditioned vertices sharing a color can never extend; filters
// most rejects before the oracle pass.
bool has_adjacent_conflict(const BoundaryMap& boundary) {
    for (const auto& [v, c] : boundary) {
        if (v.is_root()) continue;
        const auto parent = boundary.find(v.parent());
        if (parent != boundary.end() && parent->second == c) return true;
    }
    return false;
}

struct PairDraft {
    BoundaryMap eta;
    BoundaryMap eta_prime;
};

PairDraft draw_pair(const TreeContext& ctx, const GeneratorConfig& config, Rng& rng) {
    PairDraft draft;
    const int q = config.q;
    auto targets = ctx.vertices_at_depth(config.depth);

    if (config.style == PairStyle::AdversarialLeaves) {
        // Saturate the target depth: eta cycles over colors 2..q (1-based),
        // eta' is the cyclic shift, so every target vertex disagrees and
        // color 1 stays unblocked everywhere under eta.
        for (std::size_t k = 0; k < targets.size(); ++k) {
            const Color a = 1 + static_cast<Color>(k % static_cast<std::size_t>(q - 1));
            const Color b = 1 + static_cast<Color>((k + 1) % static_cast<std::size_t>(q - 1));
            draft.eta[targets[k]] = a;
            draft.eta_prime[targets[k]] = b;
        }
        return draft;
    }

    // Disagreement set: a few vertices at exactly the target depth.
    rng.shuffle(targets);
    const int max_delta = std::min<int>(4, static_cast<int>(targets.size()));
    const int n_delta = rng.uniform_int(1, max_delta);
    for (int k = 0; k < n_delta; ++k) {
        const Color a = rng.uniform_int(0, q - 1);
        Color b = rng.uniform_int(0, q - 2);
        if (b >= a) ++b;
        draft.eta[targets[static_cast<std::size_t>(k)]] = a;
        draft.eta_prime[targets[static_cast<std::size_t>(k)]] = b;
    }

    // Agreement vertices, frozen identically under both assignments. The
    // point of the strong (rather than weak) mixing setting is conditioning
    // that survives near the root, so every draft carries at least one.
    const int lo_depth = (config.style == PairStyle::FrozenRing) ? 3 : 1;
    if (lo_depth <= ctx.base.h) {
        const int n_agree = 1 + rng.uniform_int(0, 2);
        int placed = 0;
        for (int k = 0; k < n_agree || (placed == 0 && k < n_agree + 20); ++k) {
            const int depth = rng.uniform_int(lo_depth, ctx.base.h);
            auto candidates = ctx.vertices_at_depth(depth);
            const auto& v = candidates[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<int>(candidates.size()) - 1))];
            if (draft.eta.count(v)) continue;
            const Color c = rng.uniform_int(0, q - 1);
            draft.eta[v] = c;
            draft.eta_prime[v] = c;
            ++placed;
        }
    }
    return draft;
}

}  // namespace

BoundaryPair generate_boundary_pair(const GeneratorConfig& config) {
    const TreeContext ctx = make_tree_context(config.q, config.d, config.h, config.root_plus_one);
    if (config.depth < 1 || config.depth > config.h) {
        throw PreconditionError("disagreement depth must lie in [1, h]");
    }
    Rng rng(config.seed);
    const int attempts_cap =
        (config.style == PairStyle::AdversarialLeaves) ? 1 : config.max_attempts;

    int attempts = 0;
    for (; attempts < attempts_cap; ++attempts) {
        PairDraft draft = draw_pair(ctx, config, rng);
        if (config.style != PairStyle::AdversarialLeaves) {
            int agreements = 0;
            for (const auto& [v, c] : draft.eta) {
                if (draft.eta_prime.at(v) == c) ++agreements;
            }
            if (agreements == 0) continue;
        }
        if (has_adjacent_conflict(draft.eta) || has_adjacent_conflict(draft.eta_prime)) continue;
        // Keep at least one non-frozen child so the availability profile and
        // the contraction machinery stay non-degenerate.
        bool root_child_free = false;
        for (int i = 0; i < ctx.root_child_count() && ctx.base.h >= 1; ++i) {
            if (!draft.eta.count(VertexAddress::root().child(i))) root_child_free = true;
        }
        if (!root_child_free && ctx.base.h >= 1) continue;
        if (!is_extendible(ctx.base, draft.eta, config.budget, ctx.keep_ptr())) continue;
        if (!is_extendible(ctx.base, draft.eta_prime, config.budget, ctx.keep_ptr())) continue;

        BoundaryPair pair;
        pair.instance = ctx.base;
        pair.instance.boundary = draft.eta;
        pair.eta = std::move(draft.eta);
        pair.eta_prime = std::move(draft.eta_prime);
        // Disagreements live at the requested depth by construction; guard
        // against degenerate drafts (q = 2 leaves no second color to cycle).
        const auto dist = dist_root_to_set(pair.instance, pair.disagreement());
        if (!dist || *dist != config.depth) continue;
        return pair;
    }
    throw GenerationFailureError(
        "no extendible pair with disagreements at depth " + std::to_string(config.depth) +
            " after " + std::to_string(attempts) + " attempts (acceptance rate 0)",
        attempts, 0);
}

TreeInstance generate_random_boundary(int q, int d, int h, std::uint64_t seed, int freeze_target,
                                      const OracleBudget& budget) {
    TreeContext ctx = make_tree_context(q, d, h, false);
    Rng rng(seed);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        BoundaryMap boundary;
        for (int k = 0; k < freeze_target && h >= 1; ++k) {
            const int depth = rng.uniform_int(1, h);
            auto level = ctx.vertices_at_depth(depth);
            const auto& v =
                level[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(level.size()) - 1))];
            boundary[v] = rng.uniform_int(0, q - 1);
        }
        if (has_adjacent_conflict(boundary)) continue;
        if (!is_extendible(ctx.base, boundary, budget)) continue;
        TreeInstance instance = ctx.base;
        instance.boundary = std::move(boundary);
        return instance;
    }
    throw GenerationFailureError("no extendible boundary found", 10000, 0);
}

namespace {

// Every child of the root heads a complete d_nominal-ary subtree, whether or
// not the root itself carries an extra child.
TreeInstance child_subinstance(const TreeContext& ctx) {
    TreeInstance sub;
    sub.q = ctx.base.q;
    sub.d = ctx.d_nominal;
    sub.h = ctx.base.h - 1;
    return sub;
}

BoundaryMap restrict_to_child(const BoundaryMap& boundary, int child) {
    BoundaryMap sub;
    for (const auto& [v, c] : boundary) {
        if (!v.is_root() && v.path.front() == child) {
            VertexAddress stripped;
            stripped.path.assign(v.path.begin() + 1, v.path.end());
            sub.emplace(std::move(stripped), c);
        }
    }
    return sub;
}

std::vector<ColorDistribution> context_child_marginals(const TreeContext& ctx,
                                                       const BoundaryMap& boundary) {
    std::vector<ColorDistribution> out;
    for (int i = 0; i < ctx.root_child_count(); ++i) {
        const auto frozen = boundary.find(VertexAddress::root().child(i));
        if (frozen != boundary.end()) {
            out.push_back(ColorDistribution::point_mass(ctx.base.q, frozen->second));
        } else {
            out.push_back(root_marginal(child_subinstance(ctx), restrict_to_child(boundary, i)));
        }
    }
    return out;
}

TrialRow run_trial(const TreeContext& ctx, const BoundaryPair& pair, int t_grid,
                   bool oracle_check, const OracleBudget& budget) {
    TrialRow row;
    row.agreement_ok = blocked_agreement_check(pair);

    const ColorDistribution pi = root_marginal(ctx.base, pair.eta, ctx.keep_ptr());
    const ColorDistribution pi_prime = root_marginal(ctx.base, pair.eta_prime, ctx.keep_ptr());
    row.root_gap = pi.l2_distance_sq(pi_prime);

    const auto kids_eta = context_child_marginals(ctx, pair.eta);
    const auto kids_eta_prime = context_child_marginals(ctx, pair.eta_prime);
    for (std::size_t i = 0; i < kids_eta.size(); ++i) {
        const double gap = kids_eta[i].l2_distance_sq(kids_eta_prime[i]);
        row.sum_child_gaps += gap;
        row.max_child_gap = std::max(row.max_child_gap, gap);
    }
    if (row.max_child_gap > 0.0) row.ratio = row.root_gap / row.max_child_gap;

    const AvailabilityProfile profile = classify_children(ctx.base, pair.eta);
    row.d_size = profile.d_size();

    const int d_eff = ctx.root_child_count();
    ContractionK k =
        contraction_k(ctx.base.q, d_eff, profile, kids_eta, kids_eta_prime, t_grid);
    row.certificate = row.d_size * k.k_grid * k.k_grid * row.sum_child_gaps;
    row.cert_ok = row.root_gap <= row.certificate + 1e-9;
    if (!row.cert_ok) {
        // The grid max under-estimates the continuous max; refine before
        // reporting a violation.
        k = contraction_k(ctx.base.q, d_eff, profile, kids_eta, kids_eta_prime,
                          (t_grid - 1) * 10 + 1);
        row.certificate = row.d_size * k.k_grid * k.k_grid * row.sum_child_gaps;
        row.cert_ok = row.root_gap <= row.certificate + 1e-9;
    }
    row.k_grid = k.k_grid;
    row.k_closed_form = k.k_closed_form;

    if (oracle_check) {
        row.oracle_checked = true;
        double delta = 0.0;
        const auto compare = [&delta](const ColorDistribution& bp, const RationalMarginal& exact) {
            for (int c = 0; c < bp.q(); ++c) {
                delta = std::max(delta, std::abs(bp[c] - exact.value(c)));
            }
        };
        compare(pi, exact_marginal(ctx.base, pair.eta, budget, ctx.keep_ptr()));
        compare(pi_prime, exact_marginal(ctx.base, pair.eta_prime, budget, ctx.keep_ptr()));
        for (int i = 0; i < ctx.root_child_count(); ++i) {
            for (const auto* boundary : {&pair.eta, &pair.eta_prime}) {
                const auto frozen = boundary->find(VertexAddress::root().child(i));
                if (frozen != boundary->end()) continue;
                const auto& bp = (boundary == &pair.eta) ? kids_eta[static_cast<std::size_t>(i)]
                                                         : kids_eta_prime[static_cast<std::size_t>(i)];
                compare(bp, exact_marginal(child_subinstance(ctx),
                                           restrict_to_child(*boundary, i), budget));
            }
        }
        row.oracle_delta = delta;
    }
    return row;
}

}  // namespace

TrialRow contraction_trial(const BoundaryPair& pair, int t_grid, bool oracle_check,
                           const OracleBudget& budget) {
    TreeContext ctx;
    ctx.base = pair.instance;
    ctx.d_nominal = pair.instance.d;
    TrialRow row = run_trial(ctx, pair, t_grid, oracle_check, budget);
    row.style = "explicit";
    const auto dist = dist_root_to_set(pair.instance, pair.disagreement());
    row.depth = dist ? *dist : -1;
    return row;
}

ContractionReport run_contraction(const ContractionConfig& config) {
    ContractionReport report;
    report.config = config;
    const int depth_max = config.depth_max > 0 ? config.depth_max : config.h;
    if (config.depth_min < 3) throw PreconditionError("contraction trials need depth >= 3");
    if (depth_max < config.depth_min || depth_max > config.h) {
        throw PreconditionError("bad contraction depth range");
    }
    const TreeContext ctx = make_tree_context(config.q, config.d, config.h, config.root_plus_one);

    struct Slot {
        bool generated = false;
        TrialRow row;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(config.trials));

    parallel_for(config.trials, config.threads, [&](int i) {
        GeneratorConfig gen;
        gen.q = config.q;
        gen.d = config.d;
        gen.h = config.h;
        gen.depth = config.depth_min + i % (depth_max - config.depth_min + 1);
        gen.style = config.styles[static_cast<std::size_t>(i) % config.styles.size()];
        gen.seed = Rng::mix(config.seed ^ Rng::mix(0x5eedULL + static_cast<std::uint64_t>(i)));
        gen.max_attempts = config.max_attempts;
        gen.root_plus_one = config.root_plus_one;
        gen.budget = config.budget;
        Slot& slot = slots[static_cast<std::size_t>(i)];
        BoundaryPair pair;
        try {
            pair = generate_boundary_pair(gen);
        } catch (const GenerationFailureError&) {
            return;  // slot stays empty; counted below
        }
        slot.row = run_trial(ctx, pair, config.t_grid, config.oracle_check, config.budget);
        slot.row.trial = i;
        slot.row.style = style_name(gen.style);
        slot.row.depth = gen.depth;
        slot.row.seed = gen.seed;
        slot.generated = true;
    });

    std::vector<double> ratios;
    for (const Slot& slot : slots) {
        ++report.attempted;
        if (!slot.generated) {
            ++report.failed_generation;
            continue;
        }
        report.rows.push_back(slot.row);
        const TrialRow& row = slot.row;
        if (row.ratio) {
            ratios.push_back(*row.ratio);
            report.max_ratio = std::max(report.max_ratio, *row.ratio);
        }
        report.all_cert_ok = report.all_cert_ok && row.cert_ok;
        report.all_agreement_ok = report.all_agreement_ok && row.agreement_ok;
        report.max_oracle_delta = std::max(report.max_oracle_delta, row.oracle_delta);
    }
    report.defined_ratios = static_cast<int>(ratios.size());
    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        report.ratio_q50 = ratios[ratios.size() / 2];
        report.ratio_q90 = ratios[(ratios.size() * 9) / 10];
    }
    return report;
}

DecayCurve decay_sweep(const DecayConfig& config) {
    DecayCurve curve;
    curve.config = config;
    const TreeContext ctx = make_tree_context(config.q, config.d, config.h, config.root_plus_one);

    const int d_eff = ctx.root_child_count();
    const double ratio = static_cast<double>(config.q) / d_eff;
    if (ratio > 1.0 && contraction_condition(ratio) < 1.0) {
        curve.zeta_available = true;
        curve.u = make_pipeline(ratio).u;
    }

    const int per_level = config.trials_per_level;
    struct Slot {
        bool generated = false;
        double gap = 0.0;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(config.h * per_level));

    parallel_for(config.h * per_level, config.threads, [&](int idx) {
        const int level = 1 + idx / per_level;
        const int t = idx % per_level;
        GeneratorConfig gen;
        gen.q = config.q;
        gen.d = config.d;
        gen.h = config.h;
        gen.depth = level;
        gen.style = config.styles[static_cast<std::size_t>(t) % config.styles.size()];
        gen.seed = Rng::mix(config.seed ^ Rng::mix(0xdecaULL + static_cast<std::uint64_t>(idx)));
        gen.max_attempts = config.max_attempts;
        gen.root_plus_one = config.root_plus_one;
        gen.budget = config.budget;
        BoundaryPair pair;
        try {
            pair = generate_boundary_pair(gen);
        } catch (const GenerationFailureError&) {
            return;
        }
        const ColorDistribution pi = root_marginal(ctx.base, pair.eta, ctx.keep_ptr());
        const ColorDistribution pi_prime = root_marginal(ctx.base, pair.eta_prime, ctx.keep_ptr());
        Slot& slot = slots[static_cast<std::size_t>(idx)];
        slot.gap = pi.l2_distance_sq(pi_prime);
        slot.generated = true;
    });

    for (int level = 1; level <= config.h; ++level) {
        DecayLevel entry;
        entry.level = level;
        for (int t = 0; t < per_level; ++t) {
            const Slot& slot = slots[static_cast<std::size_t>((level - 1) * per_level + t)];
            ++entry.attempted;
            if (!slot.generated) continue;
            ++entry.generated;
            entry.max_gap = std::max(entry.max_gap, slot.gap);
        }
        if (curve.zeta_available) {
            entry.zeta = 2.0 * std::pow(curve.u, level - 2);
        }
        curve.levels.push_back(entry);
    }

    // Log-linear fit of the tail: least squares of log(max_gap) against level.
    std::vector<std::pair<double, double>> points;
    for (const auto& entry : curve.levels) {
        if (entry.level >= config.tail_start && entry.max_gap > 0.0) {
            points.emplace_back(entry.level, std::log(entry.max_gap));
        }
    }
    curve.fit_points = static_cast<int>(points.size());
    if (points.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& [x, y] : points) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(points.size());
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double intercept = (sy - slope * sx) / n;
        curve.fitted_rate = slope;
        double ss_res = 0, ss_tot = 0;
        const double mean_y = sy / n;
        for (const auto& [x, y] : points) {
            ss_res += (y - (slope * x + intercept)) * (y - (slope * x + intercept));
            ss_tot += (y - mean_y) * (y - mean_y);
        }
        curve.fit_r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
    }
    return curve;
}

bool subtree_completion_check(const TreeInstance& instance, const AddressSet& retained,
                              const BoundaryMap& eta, const BoundaryMap& eta_prime, double tol) {
    if (!retained.count(VertexAddress::root())) {
        throw PreconditionError("retained set must contain the root");
    }
    for (const auto& v : retained) {
        if (!v.is_root() && !retained.count(v.parent())) {
            throw PreconditionError("retained set must be prefix-closed");
        }
        if (!instance.contains(v)) {
            throw PreconditionError("retained vertex " + v.str() + " outside the host tree");
        }
    }
    for (const auto* boundary : {&eta, &eta_prime}) {
        for (const auto& [v, c] : *boundary) {
            if (!retained.count(v)) {
                throw PreconditionError("boundary vertex " + v.str() + " not retained");
            }
        }
    }
    const double pruned = std::sqrt(
        root_marginal(instance, eta, &retained).l2_distance_sq(root_marginal(instance, eta_prime, &retained)));
    const double completed = std::sqrt(
        root_marginal(instance, eta).l2_distance_sq(root_marginal(instance, eta_prime)));
    return std::abs(pruned - completed) <= tol;
}

namespace {

nlohmann::json styles_json(const std::vector<PairStyle>& styles) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto s : styles) arr.push_back(style_name(s));
    return arr;
}

}  // namespace

nlohmann::json config_json(const ContractionConfig& config) {
    return {{"q", config.q},
            {"d", config.d},
            {"h", config.h},
            {"trials", config.trials},
            {"depth_min", config.depth_min},
            {"depth_max", config.depth_max > 0 ? config.depth_max : config.h},
            {"styles", styles_json(config.styles)},
            {"seed", config.seed},
            {"t_grid", config.t_grid},
            {"oracle_check", config.oracle_check},
            {"root_plus_one", config.root_plus_one},
            {"budget", config.budget.max_states}};
}

nlohmann::json config_json(const DecayConfig& config) {
    return {{"q", config.q},
            {"d", config.d},
            {"h", config.h},
            {"trials_per_level", config.trials_per_level},
            {"styles", styles_json(config.styles)},
            {"seed", config.seed},
            {"tail_start", config.tail_start},
            {"root_plus_one", config.root_plus_one},
            {"budget", config.budget.max_states}};
}

void write_contraction_csv(const ContractionReport& report, std::ostream& out) {
    out << "# schema=ssmtree.contraction/1\n";
    out << "# config=" << config_json(report.config).dump() << "\n";
    out << "trial,style,depth,seed,d_size,root_gap,max_child_gap,sum_child_gaps,ratio,"
           "k_grid,k_closed_form,certificate,cert_ok,agreement_ok,oracle_checked,oracle_delta\n";
    for (const TrialRow& row : report.rows) {
        out << row.trial << ',' << row.style << ',' << row.depth << ',' << row.seed << ','
            << row.d_size << ',' << format_double(row.root_gap) << ','
            << format_double(row.max_child_gap) << ',' << format_double(row.sum_child_gaps) << ','
            << (row.ratio ? format_double(*row.ratio) : "") << ',' << format_double(row.k_grid)
            << ',' << format_double(row.k_closed_form) << ',' << format_double(row.certificate)
            << ',' << (row.cert_ok ? 1 : 0) << ',' << (row.agreement_ok ? 1 : 0) << ','
            << (row.oracle_checked ? 1 : 0) << ',' << format_double(row.oracle_delta) << '\n';
    }
}

nlohmann::json contraction_json(const ContractionReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const TrialRow& row : report.rows) {
        nlohmann::json r = {{"trial", row.trial},
                            {"style", row.style},
                            {"depth", row.depth},
                            {"seed", row.seed},
                            {"d_size", row.d_size},
                            {"root_gap", row.root_gap},
                            {"max_child_gap", row.max_child_gap},
                            {"sum_child_gaps", row.sum_child_gaps},
                            {"k_grid", row.k_grid},
                            {"k_closed_form", row.k_closed_form},
                            {"certificate", row.certificate},
                            {"cert_ok", row.cert_ok},
                            {"agreement_ok", row.agreement_ok},
                            {"oracle_checked", row.oracle_checked},
                            {"oracle_delta", row.oracle_delta}};
        if (row.ratio) r["ratio"] = *row.ratio;
        rows.push_back(std::move(r));
    }
    return {{"schema", "ssmtree.contraction/1"},
            {"config", config_json(report.config)},
            {"rows", rows},
            {"summary",
             {{"attempted", report.attempted},
              {"failed_generation", report.failed_generation},
              {"defined_ratios", report.defined_ratios},
              {"max_ratio", report.max_ratio},
              {"ratio_q50", report.ratio_q50},
              {"ratio_q90", report.ratio_q90},
              {"all_cert_ok", report.all_cert_ok},
              {"all_agreement_ok", report.all_agreement_ok},
              {"max_oracle_delta", report.max_oracle_delta}}}};
}

void write_decay_csv(const DecayCurve& curve, std::ostream& out) {
    out << "# schema=ssmtree.decay/1\n";
    out << "# config=" << config_json(curve.config).dump() << "\n";
    out << "level,attempted,generated,max_gap,zeta\n";
    for (const DecayLevel& entry : curve.levels) {
        out << entry.level << ',' << entry.attempted << ',' << entry.generated << ','
            << format_double(entry.max_gap) << ','
            << (curve.zeta_available ? format_double(entry.zeta) : "") << '\n';
    }
    out << "# fitted_rate=" << format_double(curve.fitted_rate) << " fit_r2="
        << format_double(curve.fit_r2) << " fit_points=" << curve.fit_points << "\n";
}

nlohmann::json decay_json(const DecayCurve& curve) {
    nlohmann::json levels = nlohmann::json::array();
    for (const DecayLevel& entry : curve.levels) {
        nlohmann::json e = {{"level", entry.level},
                            {"attempted", entry.attempted},
                            {"generated", entry.generated},
                            {"max_gap", entry.max_gap}};
        if (curve.zeta_available) e["zeta"] = entry.zeta;
        levels.push_back(std::move(e));
    }
    return {{"schema", "ssmtree.decay/1"},
            {"config", config_json(curve.config)},
            {"levels", levels},
            {"fit",
             {{"rate", curve.fitted_rate},
              {"r2", curve.fit_r2},
              {"points", curve.fit_points},
              {"zeta_available", curve.zeta_available},
              {"u", curve.u}}}};
}

}  // namespace ssmtree
