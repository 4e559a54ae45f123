// Command-line surface: exact and BP marginals, Jacobian norm checks,
// contraction and decay experiments, and the threshold constants.
//
// Exit codes: 0 success, 1 a verification failed, 2 usage/input error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "ssmtree/bp_engine.hpp"
#include "ssmtree/errors.hpp"
#include "ssmtree/exact_oracle.hpp"
#include "ssmtree/experiments.hpp"
#include "ssmtree/instance_io.hpp"
#include "ssmtree/jacobian_norms.hpp"
#include "ssmtree/rng.hpp"
#include "ssmtree/selftest.hpp"
#include "ssmtree/thresholds.hpp"
#include "ssmtree/tree_model.hpp"

namespace {

using namespace ssmtree;

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailed = 1;
constexpr int kExitUsage = 2;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    out << text;
}

void emit_json(const nlohmann::json& doc, const std::string& out_path) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text(out_path, text);
    }
}

nlohmann::json instance_config(const BoundaryPair& pair, const std::string& which) {
    return {{"q", pair.instance.q},
            {"d", pair.instance.d},
            {"h", pair.instance.h},
            {"eta_size", pair.eta.size()},
            {"eta_prime_size", pair.eta_prime.size()},
            {"which", which},
            {"seed", 0}};
}

const BoundaryMap& select_boundary(const BoundaryPair& pair, const std::string& which) {
    if (which == "eta") return pair.eta;
    if (which == "eta-prime") return pair.eta_prime;
    throw std::invalid_argument("--which must be eta or eta-prime");
}

nlohmann::json marginal_json(const ColorDistribution& dist) {
    nlohmann::json arr = nlohmann::json::array();
    for (int c = 0; c < dist.q(); ++c) arr.push_back(dist[c]);
    return arr;
}

int cmd_marginal(const std::string& instance_path, const std::string& which,
                 const std::string& out_path) {
    const BoundaryPair pair = load_instance_file(instance_path);
    const ColorDistribution dist = root_marginal(pair.instance, select_boundary(pair, which));
    emit_json({{"schema", "ssmtree.marginal/1"},
               {"config", instance_config(pair, which)},
               {"marginal", marginal_json(dist)}},
              out_path);
    return kExitOk;
}

int cmd_oracle(const std::string& instance_path, const std::string& which, bool compare_bp,
               std::uint64_t budget, const std::string& out_path) {
    const BoundaryPair pair = load_instance_file(instance_path);
    const BoundaryMap& boundary = select_boundary(pair, which);
    OracleBudget oracle_budget;
    if (budget > 0) oracle_budget.max_states = budget;
    const RationalMarginal exact = exact_marginal(pair.instance, boundary, oracle_budget);

    nlohmann::json numerators = nlohmann::json::array();
    for (const auto& n : exact.numerators) numerators.push_back(n.str());
    nlohmann::json doc = {{"schema", "ssmtree.oracle/1"},
                          {"config", instance_config(pair, which)},
                          {"numerators", numerators},
                          {"denominator", exact.denominator.str()},
                          {"marginal", exact.to_doubles()}};

    int code = kExitOk;
    if (compare_bp) {
        const ColorDistribution bp = root_marginal(pair.instance, boundary);
        double delta = 0.0;
        for (int c = 0; c < bp.q(); ++c) delta = std::max(delta, std::abs(bp[c] - exact.value(c)));
        doc["bp_marginal"] = marginal_json(bp);
        doc["max_delta"] = delta;
        doc["agreement_ok"] = delta <= 1e-12;
        if (delta > 1e-12) code = kExitVerificationFailed;
    }
    emit_json(doc, out_path);
    return code;
}

int cmd_jacobian(const std::string& instance_path, double t, const std::string& out_path) {
    const BoundaryPair pair = load_instance_file(instance_path);
    const AvailabilityProfile profile = classify_children(pair.instance, pair.eta);
    const auto kids_eta = child_marginals(pair.instance, pair.eta);
    const auto kids_eta_prime = child_marginals(pair.instance, pair.eta_prime);
    const InterpolationPoint point = interpolation_point(t, kids_eta, kids_eta_prime);
    const JacobianBundle bundle = build_matrix(point.pi_hat.probs, profile.gamma_sqrt);

    nlohmann::json matrix = nlohmann::json::array();
    for (int r = 0; r < bundle.matrix.rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < bundle.matrix.cols; ++c) row.push_back(bundle.matrix(r, c));
        matrix.push_back(std::move(row));
    }
    const bool ok = bundle.spectral_norm <= bundle.closed_form_bound + 1e-10;
    emit_json({{"schema", "ssmtree.jacobian/1"},
               {"config", instance_config(pair, "eta")},
               {"t", t},
               {"pi_hat", marginal_json(point.pi_hat)},
               {"gamma", profile.gamma},
               {"matrix", matrix},
               {"spectral_norm", bundle.spectral_norm},
               {"closed_form_bound", bundle.closed_form_bound},
               {"bound_ok", ok}},
              out_path);
    return ok ? kExitOk : kExitVerificationFailed;
}

int cmd_norm_check(int trials, int q_min, int q_max, std::uint64_t seed,
                   const std::string& out_path) {
    Rng rng(Rng::mix(seed ^ 0x5c0ffeULL));
    double worst_excess = -1.0;
    double worst_equality_gap = 0.0;
    long long violations = 0;
    for (int q = q_min; q <= q_max; ++q) {
        for (int i = 0; i < trials; ++i) {
            std::vector<double> pi(static_cast<std::size_t>(q));
            double sum = 0.0;
            for (auto& v : pi) {
                v = -std::log(1.0 - rng.uniform01());
                sum += v;
            }
            for (auto& v : pi) v /= sum;
            std::vector<double> gamma(static_cast<std::size_t>(q));
            for (auto& g : gamma) g = rng.uniform01();
            const NormCheck check = norm_bound_check(pi, gamma);
            worst_excess = std::max(worst_excess, check.norm - check.bound);
            if (!check.ok) ++violations;
        }
        // Tightness case: uniform pi with gamma = 1 attains the bound.
        const NormCheck tight =
            norm_bound_check(std::vector<double>(static_cast<std::size_t>(q), 1.0 / q),
                             std::vector<double>(static_cast<std::size_t>(q), 1.0));
        worst_equality_gap = std::max(worst_equality_gap, std::abs(tight.norm - tight.bound));
        std::cout << "q=" << q << " trials=" << trials
                  << " max(norm-bound)=" << format_double(worst_excess)
                  << " equality_gap=" << format_double(std::abs(tight.norm - tight.bound)) << "\n";
    }
    const bool ok = violations == 0 && worst_equality_gap <= 1e-10;
    std::cout << (ok ? "norm-check ok" : "norm-check FAILED") << " violations=" << violations
              << "\n";
    if (!out_path.empty()) {
        emit_json({{"schema", "ssmtree.norm-check/1"},
                   {"config",
                    {{"trials", trials}, {"q_min", q_min}, {"q_max", q_max}, {"seed", seed}}},
                   {"violations", violations},
                   {"max_excess", worst_excess},
                   {"max_equality_gap", worst_equality_gap},
                   {"ok", ok}},
                  out_path);
    }
    return ok ? kExitOk : kExitVerificationFailed;
}

int cmd_threshold(int digits, double r, const std::string& out_path) {
    const double alpha_prime = solve_alpha_prime(digits);
    const double alpha_star = solve_alpha_star();
    const ConstantPipeline pipeline = make_pipeline(r);

    char alpha_buf[40];
    std::snprintf(alpha_buf, sizeof alpha_buf, "%.*f", digits, alpha_prime);
    std::ostringstream text;
    text << "alpha_prime " << alpha_buf << "\n"
         << "alpha_star " << format_double(alpha_star) << "\n"
         << "r " << format_double(pipeline.r) << "\n"
         << "C " << format_double(pipeline.c) << "\n"
         << "K_prime " << format_double(pipeline.k_prime) << "\n"
         << "U_prime " << format_double(pipeline.u_prime) << "\n"
         << "U " << format_double(pipeline.u) << "\n";
    std::cout << text.str();

    if (!out_path.empty()) {
        emit_json({{"schema", "ssmtree.threshold/1"},
                   {"config", {{"digits", digits}, {"r", r}, {"seed", 0}}},
                   {"alpha_prime", alpha_prime},
                   {"alpha_prime_text", alpha_buf},
                   {"alpha_star", alpha_star},
                   {"C", pipeline.c},
                   {"K_prime", pipeline.k_prime},
                   {"U_prime", pipeline.u_prime},
                   {"U", pipeline.u}},
                  out_path);
    }
    return kExitOk;
}

int cmd_contraction(const ContractionConfig& config, const std::string& out_path,
                    const std::string& format) {
    const ContractionReport report = run_contraction(config);
    std::string artifact;
    if (format == "csv") {
        std::ostringstream buf;
        write_contraction_csv(report, buf);
        artifact = buf.str();
    } else {
        artifact = contraction_json(report).dump(2) + "\n";
    }
    if (out_path.empty()) {
        std::cout << artifact;
    } else {
        write_text(out_path, artifact);
        std::cout << "trials=" << report.attempted
                  << " generated=" << report.rows.size()
                  << " failed_generation=" << report.failed_generation
                  << " defined_ratios=" << report.defined_ratios
                  << " max_ratio=" << format_double(report.max_ratio)
                  << " all_cert_ok=" << (report.all_cert_ok ? 1 : 0)
                  << " max_oracle_delta=" << format_double(report.max_oracle_delta) << "\n";
    }
    const bool ok = report.all_cert_ok && report.all_agreement_ok &&
                    (!report.config.oracle_check || report.max_oracle_delta <= 1e-12);
    return ok ? kExitOk : kExitVerificationFailed;
}

int cmd_decay(const DecayConfig& config, const std::string& out_path, const std::string& format) {
    const DecayCurve curve = decay_sweep(config);
    std::string artifact;
    if (format == "csv") {
        std::ostringstream buf;
        write_decay_csv(curve, buf);
        artifact = buf.str();
    } else {
        artifact = decay_json(curve).dump(2) + "\n";
    }
    if (out_path.empty()) {
        std::cout << artifact;
    } else {
        write_text(out_path, artifact);
        std::cout << "levels=" << curve.levels.size() << " fitted_rate="
                  << format_double(curve.fitted_rate) << " r2=" << format_double(curve.fit_r2)
                  << "\n";
    }
    return kExitOk;
}

std::vector<PairStyle> parse_styles(const std::string& csv) {
    std::vector<PairStyle> styles;
    std::istringstream in(csv);
    std::string token;
    while (std::getline(in, token, ',')) {
        if (!token.empty()) styles.push_back(parse_style(token));
    }
    if (styles.empty()) throw std::invalid_argument("empty style list");
    return styles;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"strong spatial mixing toolkit for q-colorings on d-ary trees"};
    app.require_subcommand(1);
    // long-only help everywhere: -h would collide with the --h height flag
    app.set_help_flag("--help", "print help and exit");

    std::string instance_path;
    std::string which = "eta";
    std::string out_path;
    std::string format = "json";
    std::uint64_t seed = 0;
    std::uint64_t budget = 0;
    bool compare_bp = false;
    double t_value = 1.0;
    int trials = 0;
    int q_min = 2, q_max = 10;
    int digits = 4;
    double r_value = 1.59;
    ContractionConfig contraction;
    DecayConfig decay;
    std::string styles_csv;
    int threads = 0;
    SelfTestOptions selftest_options;
    bool quick = false;
    bool no_oracle_check = false;

    auto* marginal = app.add_subcommand("marginal", "BP root marginal of an instance file");
    marginal->set_help_flag("--help", "print help and exit");
    marginal->add_option("--instance", instance_path, "instance JSON file")->required();
    marginal->add_option("--which", which, "eta or eta-prime");
    marginal->add_option("--out", out_path, "write the JSON artifact here");

    auto* oracle = app.add_subcommand("oracle", "exact rational root marginal");
    oracle->set_help_flag("--help", "print help and exit");
    oracle->add_option("--instance", instance_path, "instance JSON file")->required();
    oracle->add_option("--which", which, "eta or eta-prime");
    oracle->add_flag("--compare-bp", compare_bp, "also run BP and report the max deviation");
    oracle->add_option("--budget", budget, "DP state budget (default 10^7)");
    oracle->add_option("--out", out_path, "write the JSON artifact here");

    auto* jacobian = app.add_subcommand("jacobian", "idealized Jacobian at an interpolation point");
    jacobian->set_help_flag("--help", "print help and exit");
    jacobian->add_option("--instance", instance_path, "instance JSON file")->required();
    jacobian->add_option("--t", t_value, "interpolation parameter in [0,1] (default 1)");
    jacobian->add_option("--out", out_path, "write the JSON artifact here");

    auto* norm_check = app.add_subcommand("norm-check", "randomized spectral-norm bound suite");
    norm_check->set_help_flag("--help", "print help and exit");
    norm_check->add_option("--trials", trials, "pairs per q (default 10000)");
    norm_check->add_option("--q-min", q_min, "smallest q (default 2)");
    norm_check->add_option("--q-max", q_max, "largest q (default 10)");
    norm_check->add_option("--seed", seed, "RNG seed (default 0)");
    norm_check->add_option("--out", out_path, "write the JSON artifact here");

    auto* contraction_cmd = app.add_subcommand("contraction", "contraction trials on random pairs");
    contraction_cmd->set_help_flag("--help", "print help and exit");
    contraction_cmd->add_option("--q", contraction.q, "colors")->required();
    contraction_cmd->add_option("--d", contraction.d, "branching factor")->required();
    contraction_cmd->add_option("--h", contraction.h, "height")->required();
    contraction_cmd->add_option("--trials", contraction.trials, "trial count (default 200)");
    contraction_cmd->add_option("--depth-min", contraction.depth_min, "min disagreement depth (default 3)");
    contraction_cmd->add_option("--depth-max", contraction.depth_max, "max disagreement depth (default h)");
    contraction_cmd->add_option("--seed", contraction.seed, "RNG seed (default 0)");
    contraction_cmd->add_option("--t-grid", contraction.t_grid, "grid points for the t max (default 1001)");
    contraction_cmd->add_option("--threads", contraction.threads, "worker threads (default all cores)");
    contraction_cmd->add_option("--styles", styles_csv, "comma list: random,adversarial-leaves,frozen-ring");
    contraction_cmd->add_flag("--no-oracle-check", no_oracle_check, "skip the exact-oracle cross-check");
    contraction_cmd->add_flag("--root-plus-one", contraction.root_plus_one,
                              "give the root an extra child (regular-tree shape)");
    contraction_cmd->add_option("--budget", budget, "DP state budget (default 10^7)");
    contraction_cmd->add_option("--out", out_path, "artifact file");
    contraction_cmd->add_option("--format", format, "json or csv (default json)");

    auto* decay_cmd = app.add_subcommand("decay", "max-gap decay across disagreement depths");
    decay_cmd->set_help_flag("--help", "print help and exit");
    decay_cmd->add_option("--q", decay.q, "colors")->required();
    decay_cmd->add_option("--d", decay.d, "branching factor")->required();
    decay_cmd->add_option("--h", decay.h, "height")->required();
    decay_cmd->add_option("--trials", decay.trials_per_level, "trials per level (default 100)");
    decay_cmd->add_option("--seed", decay.seed, "RNG seed (default 0)");
    decay_cmd->add_option("--threads", decay.threads, "worker threads (default all cores)");
    decay_cmd->add_option("--tail-start", decay.tail_start, "first level of the log-linear fit (default 2)");
    decay_cmd->add_option("--styles", styles_csv, "comma list: random,adversarial-leaves,frozen-ring");
    decay_cmd->add_flag("--root-plus-one", decay.root_plus_one,
                        "give the root an extra child (regular-tree shape)");
    decay_cmd->add_option("--budget", budget, "DP state budget (default 10^7)");
    decay_cmd->add_option("--out", out_path, "artifact file");
    decay_cmd->add_option("--format", format, "json or csv (default json)");

    auto* threshold = app.add_subcommand("threshold", "threshold ratios and the constant pipeline");
    threshold->set_help_flag("--help", "print help and exit");
    threshold->add_option("--digits", digits, "decimal digits for the improved ratio (default 4)");
    threshold->add_option("--r", r_value, "ratio for the constant pipeline (default 1.59)");
    threshold->add_option("--out", out_path, "write the JSON artifact here");

    auto* selftest = app.add_subcommand("selftest", "run the cross-module property suite");
    selftest->set_help_flag("--help", "print help and exit");
    selftest->add_option("--seed", selftest_options.seed, "RNG seed (default 0)");
    selftest->add_option("--threads", threads, "worker threads");
    selftest->add_flag("--quick", quick, "smaller sample sizes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (format != "json" && format != "csv") {
            throw std::invalid_argument("--format must be json or csv");
        }
        if (app.got_subcommand(marginal)) return cmd_marginal(instance_path, which, out_path);
        if (app.got_subcommand(oracle)) {
            return cmd_oracle(instance_path, which, compare_bp, budget, out_path);
        }
        if (app.got_subcommand(jacobian)) return cmd_jacobian(instance_path, t_value, out_path);
        if (app.got_subcommand(norm_check)) {
            return cmd_norm_check(trials > 0 ? trials : 10000, q_min, q_max, seed, out_path);
        }
        if (app.got_subcommand(contraction_cmd)) {
            if (!styles_csv.empty()) contraction.styles = parse_styles(styles_csv);
            contraction.oracle_check = !no_oracle_check;
            if (budget > 0) contraction.budget.max_states = budget;
            return cmd_contraction(contraction, out_path, format);
        }
        if (app.got_subcommand(decay_cmd)) {
            if (!styles_csv.empty()) decay.styles = parse_styles(styles_csv);
            if (budget > 0) decay.budget.max_states = budget;
            return cmd_decay(decay, out_path, format);
        }
        if (app.got_subcommand(threshold)) return cmd_threshold(digits, r_value, out_path);
        if (app.got_subcommand(selftest)) {
            selftest_options.threads = threads;
            if (quick) {
                selftest_options.oracle_instances = 40;
                selftest_options.norm_pairs_per_q = 300;
                selftest_options.jacobian_points = 10;
            }
            return run_selftest(selftest_options, std::cout) ? kExitOk : kExitVerificationFailed;
        }
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BudgetExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const GenerationFailureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NonExtendibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FrozenRootError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
