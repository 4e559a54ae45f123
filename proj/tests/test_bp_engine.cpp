#include <doctest.h>

#include <cmath>

#include "ssmtree/bp_engine.hpp"
#include "ssmtree/errors.hpp"
#include "ssmtree/exact_oracle.hpp"
#include "ssmtree/experiments.hpp"
#include "ssmtree/rng.hpp"

using namespace ssmtree;

namespace {

ColorDistribution dist_of(std::initializer_list<double> probs) {
    ColorDistribution d;
    d.probs = probs;
    return d;
}

BoundaryMap boundary_of(std::initializer_list<std::pair<const char*, Color>> entries) {
    BoundaryMap b;
    for (const auto& [addr, c] : entries) b[VertexAddress::parse(addr)] = c;
    return b;
}

TreeInstance instance_of(int q, int d, int h, BoundaryMap boundary = {}) {
    TreeInstance inst;
    inst.q = q;
    inst.d = d;
    inst.h = h;
    inst.boundary = std::move(boundary);
    return inst;
}

}  // namespace

TEST_CASE("bp_step: uniform children stay uniform") {
    const auto u = ColorDistribution::uniform(3);
    const std::vector<ColorDistribution> kids{u, u};
    const auto out = bp_step(kids, 3);
    for (int c = 0; c < 3; ++c) CHECK(out[c] == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("bp_step: a frozen child excludes its color") {
    const std::vector<ColorDistribution> kids{ColorDistribution::point_mass(3, 0)};
    const auto out = bp_step(kids, 3);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == doctest::Approx(0.5));
    CHECK(out[2] == doctest::Approx(0.5));
}

TEST_CASE("bp_step: hand-evaluated product formula") {
    const std::vector<ColorDistribution> kids{dist_of({0.5, 0.5, 0.0}),
                                              dist_of({1.0 / 3, 1.0 / 3, 1.0 / 3})};
    const auto out = bp_step(kids, 3);
    CHECK(out[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(out[1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(out[2] == doctest::Approx(0.50).epsilon(1e-14));
}

TEST_CASE("bp_step: zero denominator is detected, not masked") {
    const std::vector<ColorDistribution> kids{ColorDistribution::point_mass(3, 0),
                                              ColorDistribution::point_mass(3, 1),
                                              ColorDistribution::point_mass(3, 2)};
    CHECK_THROWS_AS(bp_step(kids, 3), ZeroDenominatorError);
}

TEST_CASE("root_marginal: two leaves frozen to the same color") {
    const auto inst = instance_of(3, 2, 1, boundary_of({{"0", 0}, {"1", 0}}));
    const auto out = root_marginal(inst, inst.boundary);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == doctest::Approx(0.5));
    CHECK(out[2] == doctest::Approx(0.5));
}

TEST_CASE("root_marginal: empty boundary is uniform by symmetry") {
    const auto inst = instance_of(4, 2, 2);
    const auto out = root_marginal(inst, inst.boundary);
    for (int c = 0; c < 4; ++c) CHECK(out[c] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("root_marginal: a single unconditioned vertex is uniform") {
    const auto inst = instance_of(3, 2, 0);
    const auto out = root_marginal(inst, inst.boundary);
    for (int c = 0; c < 3; ++c) CHECK(out[c] == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("root_marginal: frozen grandchildren, checked against enumeration") {
    // Leaves of child 0 frozen to the first two colors; exact marginal is
    // (1/3, 1/3, 1/6, 1/6).
    const auto inst = instance_of(4, 2, 2, boundary_of({{"0.0", 0}, {"0.1", 1}}));
    const auto out = root_marginal(inst, inst.boundary);
    CHECK(out[0] == doctest::Approx(1.0 / 3).epsilon(1e-13));
    CHECK(out[1] == doctest::Approx(1.0 / 3).epsilon(1e-13));
    CHECK(out[2] == doctest::Approx(1.0 / 6).epsilon(1e-13));
    CHECK(out[3] == doctest::Approx(1.0 / 6).epsilon(1e-13));
}

TEST_CASE("root_marginal errors") {
    const auto frozen_root = instance_of(3, 2, 1, boundary_of({{"", 0}}));
    CHECK_THROWS_AS(root_marginal(frozen_root, frozen_root.boundary), FrozenRootError);

    const auto impossible = instance_of(2, 2, 1, boundary_of({{"0", 0}, {"1", 1}}));
    CHECK_THROWS_AS(root_marginal(impossible, impossible.boundary), NonExtendibleError);

    // conflict below a conditioned vertex
    const auto conflict = instance_of(3, 2, 2, boundary_of({{"0", 1}, {"0.0", 1}}));
    CHECK_THROWS_AS(root_marginal(conflict, conflict.boundary), NonExtendibleError);
}

TEST_CASE("bp agrees with the exact oracle on random desk-scale instances") {
    Rng rng(101);
    double worst = 0.0;
    for (int i = 0; i < 60; ++i) {
        const int q = rng.uniform_int(3, 5);
        const int d = rng.uniform_int(1, 3);
        const int h = rng.uniform_int(1, 3);
        const auto inst = generate_random_boundary(q, d, h, rng.next(), rng.uniform_int(0, 4));
        const auto bp = root_marginal(inst, inst.boundary);
        const auto exact = exact_marginal(inst, inst.boundary);
        for (int c = 0; c < q; ++c) worst = std::max(worst, std::abs(bp[c] - exact.value(c)));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("sparse boundaries never force a full-tree walk") {
    // d^h vertices would be astronomically many; the walk must stay on the
    // conditioned prefixes and finish instantly
    auto inst = instance_of(5, 3, 40);
    inst.boundary = boundary_of({{"0", 1}, {"1.2", 2}, {"2.0.1", 3}});
    const auto deep = root_marginal(inst, inst.boundary);
    auto shallow = inst;
    shallow.h = 3;
    const auto reference = root_marginal(shallow, shallow.boundary);
    for (int c = 0; c < 5; ++c) CHECK(deep[c] == doctest::Approx(reference[c]).epsilon(1e-13));
}

TEST_CASE("free subtrees leave the root marginal unchanged") {
    Rng rng(202);
    for (int i = 0; i < 20; ++i) {
        const int q = rng.uniform_int(3, 5);
        const int d = rng.uniform_int(1, 3);
        const int h = rng.uniform_int(1, 2);
        const auto inst = generate_random_boundary(q, d, h, rng.next(), rng.uniform_int(1, 3));
        auto taller = inst;
        taller.h = h + 2;
        const auto a = root_marginal(inst, inst.boundary);
        const auto b = root_marginal(taller, taller.boundary);
        for (int c = 0; c < q; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-13));
    }
}

TEST_CASE("interpolation endpoints recover the two sides") {
    const auto inst = instance_of(4, 2, 3);
    const auto eta = boundary_of({{"0.0.0", 0}, {"1.1.1", 2}});
    const auto eta_prime = boundary_of({{"0.0.0", 1}, {"1.1.1", 2}});
    const auto kids = child_marginals(inst, eta);
    const auto kids_prime = child_marginals(inst, eta_prime);

    const auto at1 = interpolation_point(1.0, kids, kids_prime);
    const auto at0 = interpolation_point(0.0, kids, kids_prime);
    const auto pi = root_marginal(inst, eta);
    const auto pi_prime = root_marginal(inst, eta_prime);
    for (int c = 0; c < 4; ++c) {
        CHECK(at1.pi_hat[c] == doctest::Approx(pi[c]).epsilon(1e-14));
        CHECK(at0.pi_hat[c] == doctest::Approx(pi_prime[c]).epsilon(1e-14));
    }

    // degenerate segment: identical sides give a t-independent point
    const auto mid = interpolation_point(0.37, kids, kids);
    for (int c = 0; c < 4; ++c) CHECK(mid.pi_hat[c] == doctest::Approx(pi[c]).epsilon(1e-14));

    CHECK_THROWS_AS(interpolation_point(1.5, kids, kids_prime), PreconditionError);
}

TEST_CASE("bp_jacobian: uniform single-child values") {
    const auto u = ColorDistribution::uniform(3);
    const std::vector<ColorDistribution> kids{u};
    const auto point = interpolation_point(0.5, kids, kids);
    const auto jac = bp_jacobian(point);
    REQUIRE(jac.d == 1);
    for (int c = 0; c < 3; ++c) {
        for (int j = 0; j < 3; ++j) {
            const double expected = (c == j) ? -1.0 / 3 : 1.0 / 6;
            CHECK(jac.blocks[0](c, j) == doctest::Approx(expected).epsilon(1e-14));
        }
    }
}

TEST_CASE("bp_jacobian: frozen-child column raises DivisionByOne") {
    const std::vector<ColorDistribution> kids{ColorDistribution::point_mass(3, 1),
                                              ColorDistribution::uniform(3)};
    const auto point = interpolation_point(1.0, kids, kids);
    CHECK_THROWS_AS(bp_jacobian(point), DivisionByOneError);
}

TEST_CASE("bp_jacobian matches central finite differences") {
    Rng rng(303);
    const double step = 1e-6;
    double worst = 0.0;
    int points = 0;
    while (points < 20) {
        GeneratorConfig g;
        g.d = rng.uniform_int(1, 3);
        g.q = g.d + 2 + rng.uniform_int(0, 2);
        g.h = 3;
        g.depth = 3;
        g.style = PairStyle::Random;
        g.seed = rng.next();
        BoundaryPair pair;
        try {
            pair = generate_boundary_pair(g);
        } catch (const GenerationFailureError&) {
            continue;
        }
        bool frozen_child = false;
        for (const auto& [v, c] : pair.eta) frozen_child |= v.depth() == 1;
        if (frozen_child) continue;  // those columns have no derivative
        ++points;
        const auto kids = child_marginals(pair.instance, pair.eta);
        const auto kids_prime = child_marginals(pair.instance, pair.eta_prime);
        const auto point = interpolation_point(rng.uniform01(), kids, kids_prime);
        const auto jac = bp_jacobian(point);
        for (int i = 0; i < jac.d; ++i) {
            for (int j = 0; j < jac.q; ++j) {
                auto plus = point.z;
                auto minus = point.z;
                plus[i].probs[j] += step;
                minus[i].probs[j] -= step;
                const auto f_plus = bp_step(plus, jac.q);
                const auto f_minus = bp_step(minus, jac.q);
                for (int c = 0; c < jac.q; ++c) {
                    const double fd = (f_plus[c] - f_minus[c]) / (2 * step);
                    worst = std::max(worst, std::abs(fd - jac.blocks[i](c, j)));
                }
            }
        }
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("jacobian rows sum to zero for every fixed column") {
    const std::vector<ColorDistribution> kids{dist_of({0.2, 0.3, 0.4, 0.1}),
                                              dist_of({0.25, 0.25, 0.3, 0.2})};
    const std::vector<ColorDistribution> kids_prime{dist_of({0.1, 0.2, 0.3, 0.4}),
                                                    dist_of({0.4, 0.3, 0.2, 0.1})};
    for (double t : {0.0, 0.31, 0.77, 1.0}) {
        const auto jac = bp_jacobian(interpolation_point(t, kids, kids_prime));
        for (int i = 0; i < jac.d; ++i) {
            for (int j = 0; j < jac.q; ++j) {
                double sum = 0.0;
                for (int c = 0; c < jac.q; ++c) sum += jac.blocks[i](c, j);
                CHECK(std::abs(sum) <= 1e-14);
            }
        }
    }
}

TEST_CASE("non-frozen child marginals never exceed 1/(q-d)") {
    Rng rng(404);
    int tested = 0;
    while (tested < 15) {
        GeneratorConfig g;
        g.d = rng.uniform_int(1, 3);
        g.q = g.d + 2 + rng.uniform_int(0, 2);
        g.h = 3;
        g.depth = 3;
        g.style = PairStyle::FrozenRing;
        g.seed = rng.next();
        BoundaryPair pair;
        try {
            pair = generate_boundary_pair(g);
        } catch (const GenerationFailureError&) {
            continue;
        }
        ++tested;
        const double cap = 1.0 / (g.q - g.d);
        const auto profile = classify_children(pair.instance, pair.eta);
        const auto kids = child_marginals(pair.instance, pair.eta);
        const auto kids_prime = child_marginals(pair.instance, pair.eta_prime);
        for (double t : {0.0, 0.5, 1.0}) {
            const auto point = interpolation_point(t, kids, kids_prime);
            for (int i : profile.non_frozen) {
                for (int j = 0; j < g.q; ++j) {
                    CHECK(point.z[i][j] >= 0.0);
                    CHECK(point.z[i][j] <= cap + 1e-15);
                }
            }
        }
    }
}
