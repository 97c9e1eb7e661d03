#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include <space/space.hpp>

namespace testutil {

using space::Matrix;
using space::Vector;

inline Matrix gaussian(std::size_t n, std::size_t p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = z(rng);
    return m;
}

// Gaussian rows with a shared factor so columns are correlated.
inline Matrix correlated(std::size_t n, std::size_t p, double r, std::uint64_t seed) {
    Matrix z = gaussian(n, p + 1, seed);
    Matrix out = std::sqrt(1.0 - r) * z.leftCols(static_cast<Eigen::Index>(p));
    out.colwise() += std::sqrt(r) * z.col(static_cast<Eigen::Index>(p));
    return out;
}

inline space::DataMatrix standardized(std::size_t n, std::size_t p, double r, std::uint64_t seed) {
    return space::standardize(space::DataMatrix(correlated(n, p, r, seed)));
}

inline double lasso_objective(const Matrix& X, const Vector& y, const Vector& b, double gamma) {
    return 0.5 * (y - X * b).squaredNorm() + gamma * b.cwiseAbs().sum();
}

// Minimizes a convex f over a box by repeatedly zooming a 2-D grid.
inline std::pair<double, double> grid_minimize_2d(const std::function<double(double, double)>& f,
                                                  double half_width) {
    double cx = 0.0, cy = 0.0, h = half_width;
    const int k = 60;
    while (h > 1e-8) {
        double best = f(cx, cy), bx = cx, by = cy;
        for (int a = -k; a <= k; ++a)
            for (int b = -k; b <= k; ++b) {
                const double x = cx + h * a / k, y = cy + h * b / k;
                const double v = f(x, y);
                if (v < best) best = v, bx = x, by = y;
            }
        cx = bx;
        cy = by;
        h *= 4.0 / k;
    }
    return {cx, cy};
}

// Explicit joint loss 1/2 sum_i w_i ||Y_i - sum_j rho^{ij} sqrt(s_j/s_i) Y_j||^2 + lambda ||rho||_1,
// minimized by FISTA with backtracking. Written from the loss formula alone.
inline std::vector<double> fista_joint(const Matrix& Y, const std::vector<double>& sigma,
                                       const std::vector<double>& w, double lambda, int iters = 20000) {
    const auto p = static_cast<std::size_t>(Y.cols());
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) pairs.emplace_back(i, j);
    const std::size_t m = pairs.size();

    auto residuals = [&](const Vector& rho) {
        Matrix R = Y;
        for (std::size_t f = 0; f < m; ++f) {
            const auto [i, j] = pairs[f];
            const double r = rho(static_cast<Eigen::Index>(f));
            R.col(static_cast<Eigen::Index>(i)) -= r * std::sqrt(sigma[j] / sigma[i]) * Y.col(static_cast<Eigen::Index>(j));
            R.col(static_cast<Eigen::Index>(j)) -= r * std::sqrt(sigma[i] / sigma[j]) * Y.col(static_cast<Eigen::Index>(i));
        }
        return R;
    };
    auto smooth = [&](const Vector& rho) {
        const Matrix R = residuals(rho);
        double s = 0.0;
        for (std::size_t i = 0; i < p; ++i) s += 0.5 * w[i] * R.col(static_cast<Eigen::Index>(i)).squaredNorm();
        return s;
    };
    auto gradient = [&](const Vector& rho) {
        const Matrix R = residuals(rho);
        Vector g(static_cast<Eigen::Index>(m));
        for (std::size_t f = 0; f < m; ++f) {
            const auto [i, j] = pairs[f];
            const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
            g(static_cast<Eigen::Index>(f)) = -w[i] * std::sqrt(sigma[j] / sigma[i]) * R.col(a).dot(Y.col(b)) -
                                              w[j] * std::sqrt(sigma[i] / sigma[j]) * R.col(b).dot(Y.col(a));
        }
        return g;
    };
    auto prox = [&](const Vector& v, double t) {
        Vector out = v;
        for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = space::lasso::soft_threshold(v(k), t * lambda);
        return out;
    };

    Vector x = Vector::Zero(static_cast<Eigen::Index>(m)), yk = x;
    double t = 1.0, step = 1.0;
    for (int it = 0; it < iters; ++it) {
        const Vector g = gradient(yk);
        const double fy = smooth(yk);
        Vector next;
        while (true) {
            next = prox(yk - step * g, step);
            const Vector d = next - yk;
            if (smooth(next) <= fy + g.dot(d) + d.squaredNorm() / (2.0 * step) + 1e-15) break;
            step *= 0.5;
        }
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        yk = next + ((t - 1.0) / tn) * (next - x);
        x = next;
        t = tn;
    }
    return {x.data(), x.data() + x.size()};
}

// The np x p(p-1)/2 design of the joint loss, built explicitly: block i of the
// response is sqrt(w_i) Y_i and column (i, j) holds the pair's regressors.
inline std::pair<Matrix, Vector> materialize(const Matrix& Y, const std::vector<double>& sigma,
                                             const std::vector<double>& w) {
    const auto n = Y.rows();
    const auto p = static_cast<std::size_t>(Y.cols());
    Matrix X = Matrix::Zero(n * static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(space::pair_count(p)));
    Vector y(n * static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < p; ++i)
        y.segment(static_cast<Eigen::Index>(i) * n, n) = std::sqrt(w[i]) * Y.col(static_cast<Eigen::Index>(i));
    Eigen::Index f = 0;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j, ++f) {
            const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
            X.block(a * n, f, n, 1) = std::sqrt(w[i]) * std::sqrt(sigma[j] / sigma[i]) * Y.col(b);
            X.block(b * n, f, n, 1) = std::sqrt(w[j]) * std::sqrt(sigma[i] / sigma[j]) * Y.col(a);
        }
    return {X, y};
}

inline std::vector<double> positive_vector(std::size_t p, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(p);
    for (double& x : v) x = u(rng);
    return v;
}

}  // namespace testutil
