#pragma once

namespace ssmtree {

// The quantity that must drop below 1 for the contraction argument to close:
//   C(r) = (1/r) exp(1/r) exp(-1 / (r - 1 + exp(1/(r-1)))).
// Strictly decreasing on the bracket used by the solvers. Requires r > 1.
double contraction_condition(double r);

// Smallest ratio r (to the given number of decimal digits, 1 <= digits <= 12)
// with contraction_condition(r) < 1. Bisection on (1.01, 3), then the root is
// rounded up to the digit grid so the returned value itself satisfies the
// condition. Four digits gives 1.5897.
double solve_alpha_prime(int digits = 4);

// The classical threshold ratio: the root of (1/a) exp(1/a) = 1, about 1.7632.
double solve_alpha_star();

// The constant pipeline assembled from a valid ratio:
//   C = contraction_condition(r) < 1, K' = (1+C)/2, U' = (1+K')/2, U = U'^2,
//   zeta(l) = 2 U^(l-2).
struct ConstantPipeline {
    double r = 0.0;
    double c = 0.0;
    double k_prime = 0.0;
    double u_prime = 0.0;
    double u = 0.0;

    double zeta(long long level) const;
};

// Throws std::domain_error when contraction_condition(r) >= 1.
ConstantPipeline make_pipeline(double r = 1.59);

}  // namespace ssmtree
