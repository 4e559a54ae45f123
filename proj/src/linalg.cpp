#include "ssmtree/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace ssmtree {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols, rows);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix Matrix::multiply(const Matrix& other) const {
    Matrix out(rows, other.cols);
    for (int r = 0; r < rows; ++r) {
        for (int k = 0; k < cols; ++k) {
            const double v = (*this)(r, k);
            if (v == 0.0) continue;
            for (int c = 0; c < other.cols; ++c) out(r, c) += v * other(k, c);
        }
    }
    return out;
}

std::vector<double> Matrix::apply(const std::vector<double>& x) const {
    std::vector<double> y(static_cast<std::size_t>(rows), 0.0);
    for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < cols; ++c) s += (*this)(r, c) * x[static_cast<std::size_t>(c)];
        y[static_cast<std::size_t>(r)] = s;
    }
    return y;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double l2_distance_sq(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::vector<double> symmetric_eigenvalues(Matrix a) {
    const int n = a.rows;
    const double scale = std::max(a.max_abs(), 1e-300);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= 1e-15 * scale) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) <= 1e-18 * scale) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

namespace {

struct PowerResult {
    enum class Status { Converged, NullStart, CapHit } status;
    double lambda = 0.0;
};

// One power-iteration run on M^T M starting from x.
PowerResult power_iterate(const Matrix& m, const Matrix& mt, std::vector<double> x, int cap) {
    const double nx = norm2(x);
    if (nx == 0.0) return {PowerResult::Status::NullStart, 0.0};
    for (auto& v : x) v /= nx;
    double lambda = 0.0;
    for (int it = 0; it < cap; ++it) {
        std::vector<double> y = mt.apply(m.apply(x));
        const double next = dot(x, y);  // Rayleigh quotient, since ||x|| = 1
        const double ny = norm2(y);
        // x can land exactly in the null space (e.g. the all-ones start for
        // gamma = 1, where M * 1 = 0); the caller re-seeds.
        if (ny == 0.0) return {PowerResult::Status::NullStart, 0.0};
        for (auto& v : y) v /= ny;
        x = std::move(y);
        if (it > 0 && std::abs(next - lambda) <= 1e-12 * std::max(std::abs(next), 1e-300)) {
            return {PowerResult::Status::Converged, next};
        }
        lambda = next;
    }
    return {PowerResult::Status::CapHit, lambda};
}

}  // namespace

double spectral_norm(const Matrix& m) {
    if (m.rows == 0 || m.cols == 0) return 0.0;
    if (m.max_abs() == 0.0) return 0.0;
    const Matrix mt = m.transpose();
    const int n = m.cols;
    // Clustered top eigenvalues stall the iteration long before the relative
    // tolerance is met; past a few hundred steps the dense path is cheaper.
    constexpr int kCap = 500;

    std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
    PowerResult result = power_iterate(m, mt, ones, kCap);
    if (result.status == PowerResult::Status::NullStart) {
        // Deterministic re-seed: harmonic ramp is not orthogonal to any
        // eigenvector the all-ones vector misses in the cases seen here.
        std::vector<double> ramp(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) ramp[static_cast<std::size_t>(i)] = 1.0 / (1.0 + i);
        result = power_iterate(m, mt, ramp, kCap);
    }
    if (result.status != PowerResult::Status::Converged) {
        // Degenerate or clustered spectrum: dense decomposition instead.
        const std::vector<double> eig = symmetric_eigenvalues(mt.multiply(m));
        result.lambda = eig.empty() ? 0.0 : eig.back();
    }
    return std::sqrt(std::max(result.lambda, 0.0));
}

}  // namespace ssmtree
