#pragma once

#include <cstddef>
#include <vector>

namespace ssmtree {

// Dense row-major matrix. Everything in this project is q x q with q <= a
// few dozen, so no attempt at blocking or expression templates.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    static Matrix identity(int n);
    Matrix transpose() const;
    Matrix multiply(const Matrix& other) const;
    std::vector<double> apply(const std::vector<double>& x) const;
    double max_abs() const;
};

// Largest singular value. Power iteration on M^T M with a deterministic
// start vector (normalized all-ones), relative tolerance 1e-12, one
// deterministic re-seed on stagnation, and a cyclic-Jacobi dense fallback
// when the iteration cap is hit (degenerate spectra).
double spectral_norm(const Matrix& m);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
// Exposed for tests; spectral_norm uses it as the fallback path.
std::vector<double> symmetric_eigenvalues(Matrix a);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
double l2_distance_sq(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ssmtree
