#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

#include "ssmtree/errors.hpp"
#include "ssmtree/exact_oracle.hpp"
#include "ssmtree/experiments.hpp"
#include "ssmtree/jacobian_norms.hpp"
#include "ssmtree/rng.hpp"
#include "ssmtree/selftest.hpp"
#include "ssmtree/thresholds.hpp"

using namespace ssmtree;

namespace {

// Independent dense route for the largest singular value.
double eigen_svd_norm(const Matrix& m) {
    Eigen::MatrixXd e(m.rows, m.cols);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) e(r, c) = m(r, c);
    return Eigen::JacobiSVD<Eigen::MatrixXd>(e).singularValues()(0);
}

std::vector<double> random_prob_vector(Rng& rng, int q) {
    std::vector<double> p(q);
    double sum = 0;
    for (auto& v : p) {
        v = -std::log(1.0 - rng.uniform01());
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return p;
}

}  // namespace

TEST_CASE("spectral_norm: fixed points") {
    CHECK(spectral_norm(Matrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spectral_norm(Matrix(4, 4)) == 0.0);
}

TEST_CASE("spectral_norm matches the dense decomposition on random matrices") {
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        const int n = rng.uniform_int(1, 7);
        Matrix m(n, n);
        for (auto& v : m.data) v = 2.0 * rng.uniform01() - 1.0;
        CHECK(spectral_norm(m) == doctest::Approx(eigen_svd_norm(m)).epsilon(1e-10));
    }
}

TEST_CASE("symmetric_eigenvalues agrees with Eigen on random symmetric matrices") {
    Rng rng(32);
    for (int i = 0; i < 50; ++i) {
        const int n = rng.uniform_int(2, 6);
        Matrix m(n, n);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c <= r; ++c) {
                const double v = 2.0 * rng.uniform01() - 1.0;
                m(r, c) = v;
                m(c, r) = v;
            }
        }
        const auto mine = symmetric_eigenvalues(m);
        Eigen::MatrixXd e(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) e(r, c) = m(r, c);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e);
        for (int k = 0; k < n; ++k) {
            CHECK(mine[k] == doctest::Approx(solver.eigenvalues()(k)).epsilon(1e-10));
        }
    }
}

TEST_CASE("build_matrix: zero availability gives the zero matrix") {
    const auto bundle = build_matrix({0.25, 0.25, 0.25, 0.25}, {0, 0, 0, 0});
    CHECK(bundle.matrix.max_abs() == 0.0);
    CHECK(bundle.spectral_norm == 0.0);
    CHECK(bundle.closed_form_bound == doctest::Approx(0.125));
}

TEST_CASE("build_matrix: uniform with full availability attains the bound") {
    for (int q = 2; q <= 10; ++q) {
        const auto bundle = build_matrix(std::vector<double>(q, 1.0 / q),
                                         std::vector<double>(q, 1.0));
        CHECK(bundle.closed_form_bound == doctest::Approx(1.0 / q).epsilon(1e-14));
        CHECK(std::abs(bundle.spectral_norm - bundle.closed_form_bound) <= 1e-10);
    }
}

TEST_CASE("build_matrix: skewed marginal stays under the bound") {
    const auto bundle = build_matrix({0.5, 0.3, 0.2}, {1, 1, 1});
    CHECK(bundle.closed_form_bound == doctest::Approx(0.5));
    CHECK(bundle.spectral_norm <= 0.5);
    CHECK(bundle.spectral_norm == doctest::Approx(eigen_svd_norm(bundle.matrix)).epsilon(1e-10));
}

TEST_CASE("build_matrix: single available color has a closed-form norm") {
    for (int q = 3; q <= 7; ++q) {
        std::vector<double> gamma(q, 0.0);
        gamma[0] = 1.0;
        const auto bundle = build_matrix(std::vector<double>(q, 1.0 / q), gamma);
        const double expected = (1.0 / q) * std::sqrt((q - 1.0) / q);
        CHECK(bundle.spectral_norm == doctest::Approx(expected).epsilon(1e-12));
        // all other columns vanish
        for (int c = 0; c < q; ++c)
            for (int j = 1; j < q; ++j) CHECK(bundle.matrix(c, j) == 0.0);
    }
}

TEST_CASE("norm never exceeds the closed-form bound on random inputs") {
    Rng rng(33);
    double worst = -1.0;
    for (int q = 2; q <= 10; ++q) {
        for (int i = 0; i < 10000; ++i) {
            std::vector<double> gamma(q);
            for (auto& g : gamma) g = rng.uniform01();
            const auto check = norm_bound_check(random_prob_vector(rng, q), gamma);
            REQUIRE(check.ok);
            worst = std::max(worst, check.norm - check.bound);
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("spectral norm is transpose-invariant") {
    Rng rng(34);
    for (int i = 0; i < 100; ++i) {
        const int q = rng.uniform_int(2, 8);
        std::vector<double> gamma(q);
        for (auto& g : gamma) g = rng.uniform01();
        const auto bundle = build_matrix(random_prob_vector(rng, q), gamma);
        CHECK(spectral_norm(bundle.matrix) ==
              doctest::Approx(spectral_norm(bundle.matrix.transpose())).epsilon(1e-10));
    }
}

TEST_CASE("contraction coefficient: identical sides are a degenerate but valid input") {
    GeneratorConfig g;
    g.q = 6;
    g.d = 2;
    g.h = 3;
    g.depth = 3;
    g.style = PairStyle::Random;
    g.seed = 9;
    BoundaryPair pair = generate_boundary_pair(g);
    pair.eta_prime = pair.eta;  // collapse the segment
    const auto k = contraction_k(pair, 101);
    CHECK(k.k_grid >= 0.0);
    CHECK(k.k_grid <= k.k_closed_form + 1e-12);
    const auto row = contraction_trial(pair, 101, false);
    CHECK(row.root_gap == 0.0);
    CHECK_FALSE(row.ratio.has_value());
    CHECK(row.cert_ok);
}

TEST_CASE("child aggregation inequality holds with exact-oracle marginals") {
    Rng rng(35);
    int tested = 0;
    while (tested < 8) {
        GeneratorConfig g;
        g.q = 6;
        g.d = 2;
        g.h = 3;
        g.depth = 3;
        g.style = tested % 2 ? PairStyle::FrozenRing : PairStyle::Random;
        g.seed = rng.next();
        BoundaryPair pair;
        try {
            pair = generate_boundary_pair(g);
        } catch (const GenerationFailureError&) {
            continue;
        }
        ++tested;

        const auto lhs_pi = exact_marginal(pair.instance, pair.eta).to_doubles();
        const auto lhs_pi_prime = exact_marginal(pair.instance, pair.eta_prime).to_doubles();
        const double lhs = l2_distance_sq(lhs_pi, lhs_pi_prime);

        // child marginals from the oracle as well
        std::vector<ColorDistribution> kids, kids_prime;
        double sum_child = 0.0;
        for (int i = 0; i < 2; ++i) {
            for (const auto* side : {&pair.eta, &pair.eta_prime}) {
                TreeInstance sub;
                sub.q = g.q;
                sub.d = g.d;
                sub.h = g.h - 1;
                BoundaryMap restricted;
                for (const auto& [v, c] : *side) {
                    if (!v.is_root() && v.path.front() == i) {
                        VertexAddress stripped;
                        stripped.path.assign(v.path.begin() + 1, v.path.end());
                        restricted.emplace(stripped, c);
                    }
                }
                ColorDistribution dist;
                const auto frozen = side->find(VertexAddress::root().child(i));
                if (frozen != side->end()) {
                    dist = ColorDistribution::point_mass(g.q, frozen->second);
                } else {
                    dist.probs = exact_marginal(sub, restricted).to_doubles();
                }
                (side == &pair.eta ? kids : kids_prime).push_back(dist);
            }
        }
        for (int i = 0; i < 2; ++i) sum_child += kids[i].l2_distance_sq(kids_prime[i]);

        const auto profile = classify_children(pair.instance, pair.eta);
        const auto k = contraction_k(g.q, g.d, profile, kids, kids_prime, 1001);
        const double rhs = profile.d_size() * k.k_grid * k.k_grid * sum_child;
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("grid refinement moves the coefficient very little") {
    GeneratorConfig g;
    g.q = 7;
    g.d = 2;
    g.h = 3;
    g.depth = 3;
    g.style = PairStyle::Random;
    g.seed = 21;
    const BoundaryPair pair = generate_boundary_pair(g);
    const auto coarse = contraction_k(pair, 101);
    const auto fine = contraction_k(pair, 1001);
    CHECK(std::abs(coarse.k_grid - fine.k_grid) < 1e-3);
    CHECK(coarse.k_grid <= fine.k_grid + 1e-12);  // finer grids only grow the max
}

TEST_CASE("weighted marginal peak: symmetric case and budget") {
    // no conditioning at all: gamma = 1 everywhere and pi_hat stays uniform,
    // so the peak is (1/2)(1/q)(1+1) = 1/q
    BoundaryPair pair;
    pair.instance.q = 5;
    pair.instance.d = 2;
    pair.instance.h = 3;
    const double k_prime = make_pipeline(1.59).k_prime;
    const auto peak = weighted_marginal_peak(pair, 101, k_prime);
    CHECK(peak.max_value == doctest::Approx(1.0 / 5).epsilon(1e-13));
    CHECK(peak.budget == doctest::Approx(k_prime / 2));
}

TEST_CASE("weighted marginal peak dominates the oracle endpoint terms") {
    // both children have their first color blocked by identically frozen
    // grandchildren, so gamma[0] = 0 and that color's term is halved
    BoundaryPair pair;
    pair.instance.q = 4;
    pair.instance.d = 2;
    pair.instance.h = 3;
    for (const char* addr : {"0.0", "1.0"}) {
        pair.eta[VertexAddress::parse(addr)] = 0;
        pair.eta_prime[VertexAddress::parse(addr)] = 0;
    }
    pair.eta[VertexAddress::parse("0.1.0")] = 1;
    pair.eta_prime[VertexAddress::parse("0.1.0")] = 2;
    pair.instance.boundary = pair.eta;

    const auto profile = classify_children(pair.instance, pair.eta);
    REQUIRE(profile.gamma[0] == 0.0);
    const auto peak = weighted_marginal_peak(pair, 201, 0.9);
    CHECK(peak.budget == doctest::Approx(0.45));

    // the grid includes both endpoints, where pi_hat equals the conditional
    // marginal; bound the peak from below via the exact oracle
    for (const auto* side : {&pair.eta, &pair.eta_prime}) {
        const auto pi = exact_marginal(pair.instance, *side).to_doubles();
        for (int k = 0; k < 4; ++k) {
            const double term = 0.5 * pi[k] * (1.0 + profile.gamma[k]);
            CHECK(peak.max_value >= term - 1e-9);
        }
    }
}

TEST_CASE("weighted marginal peak stays under budget at a comfortable ratio") {
    // observed regression property at q = 2d+10: the generous ratio leaves a
    // wide margin between the peak and K'/|D|
    const double k_prime = make_pipeline(1.59).k_prime;
    Rng rng(36);
    int tested = 0;
    while (tested < 6) {
        GeneratorConfig g;
        g.d = 3;
        g.q = 16;
        g.h = 3;
        g.depth = 3;
        g.style = tested % 2 ? PairStyle::FrozenRing : PairStyle::Random;
        g.seed = rng.next();
        BoundaryPair pair;
        try {
            pair = generate_boundary_pair(g);
        } catch (const GenerationFailureError&) {
            continue;
        }
        ++tested;
        const auto peak = weighted_marginal_peak(pair, 201, k_prime);
        CHECK(peak.max_value < peak.budget);
        CHECK(peak.max_value > 0.0);
    }
}

TEST_CASE("marginal_lower_bound closed form") {
    CHECK(marginal_lower_bound(5, 2) == doctest::Approx(2.0 / 15).epsilon(1e-15));
    CHECK(marginal_lower_bound(4, 3) == 0.0);  // q = d+1
    CHECK_THROWS_AS(marginal_lower_bound(3, 3), std::domain_error);
    // d * L < 1/3 throughout the regime the decay argument uses
    for (int d = 2; d <= 40; ++d) {
        for (int q = static_cast<int>(std::ceil(1.59 * d)); q <= static_cast<int>(2.01 * d); ++q) {
            if (q < d + 1) continue;
            CHECK(d * marginal_lower_bound(q, d) < 1.0 / 3);
        }
    }
}
