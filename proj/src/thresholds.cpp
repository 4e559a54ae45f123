#include "ssmtree/thresholds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ssmtree/errors.hpp"

namespace ssmtree {

double contraction_condition(double r) {
    if (r <= 1.0) throw std::domain_error("contraction condition defined for r > 1");
    return (1.0 / r) * std::exp(1.0 / r) * std::exp(-1.0 / (r - 1.0 + std::exp(1.0 / (r - 1.0))));
}

namespace {

// Bisect f (decreasing through its root) on [lo, hi]; returns the upper end
// of the final bracket, so the result always satisfies f < target.
template <class F>
double bisect_decreasing(F f, double lo, double hi, double target, int iterations) {
    if (!(f(lo) >= target && f(hi) < target)) {
        throw BracketFailureError("no sign change in (" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + ")");
    }
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

double solve_alpha_prime(int digits) {
    if (digits < 1 || digits > 12) throw std::domain_error("digits must be in [1, 12]");
    const double root =
        bisect_decreasing([](double r) { return contraction_condition(r); }, 1.01, 3.0, 1.0, 200);
    // Smallest grid value satisfying the condition: round the root up. The
    // condition is decreasing, so everything above the root qualifies.
    const double grid = std::pow(10.0, digits);
    double value = std::ceil(root * grid) / grid;
    if (contraction_condition(value) >= 1.0) value += 1.0 / grid;  // root landed on the grid
    return value;
}

double solve_alpha_star() {
    return bisect_decreasing([](double a) { return (1.0 / a) * std::exp(1.0 / a); }, 1.01, 3.0,
                             1.0, 200);
}

double ConstantPipeline::zeta(long long level) const {
    return 2.0 * std::pow(u, static_cast<double>(level - 2));
}

ConstantPipeline make_pipeline(double r) {
    ConstantPipeline pipeline;
    pipeline.r = r;
    pipeline.c = contraction_condition(r);
    if (pipeline.c >= 1.0) {
        throw std::domain_error("contraction condition is " + std::to_string(pipeline.c) +
                                " >= 1 at r = " + std::to_string(r));
    }
    pipeline.k_prime = (1.0 + pipeline.c) / 2.0;
    pipeline.u_prime = (1.0 + pipeline.k_prime) / 2.0;
    pipeline.u = pipeline.u_prime * pipeline.u_prime;
    return pipeline;
}

}  // namespace ssmtree
