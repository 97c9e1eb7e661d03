#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <space/core.hpp>
#include <space/graph.hpp>
#include <space/lasso.hpp>

namespace space::mb {

/// Row i holds the lasso coefficients of Y_i regressed on Y_{-i}.
struct NeighborhoodFit {
    Matrix beta;  // p x p, zero diagonal
    std::vector<double> lambda_per_variable;
    std::vector<double> rss_per_variable;
    std::size_t iterations = 0;
    bool converged = true;
};

/// Smallest lambda at which every neighborhood regression is empty.
inline double lambda_max(const DataMatrix& standardized) {
    Matrix G = standardized.values().transpose() * standardized.values();
    G.diagonal().setZero();
    return G.cwiseAbs().maxCoeff();
}

inline std::vector<double> broadcast_lambdas(std::span<const double> lambdas, std::size_t p) {
    if (lambdas.size() == 1) return std::vector<double>(p, lambdas[0]);
    if (lambdas.size() != p) throw InvalidArgument("need one lambda or one per variable");
    return {lambdas.begin(), lambdas.end()};
}

/// Lasso of Y_i on the other columns; the regression behind row i of fit_mb.
inline lasso::SolverReport fit_row(const DataMatrix& standardized, std::size_t i, double lambda,
                                   const lasso::SolverConfig& config,
                                   const std::vector<double>* warm_start = nullptr) {
    const std::size_t p = standardized.p();
    std::vector<std::size_t> others;
    others.reserve(p - 1);
    for (std::size_t j = 0; j < p; ++j)
        if (j != i) others.push_back(j);
    const Vector yi = standardized.column(i);
    lasso::DenseLassoProblem prob(standardized.values(), yi, std::move(others));
    if (warm_start) return lasso::solve(prob, lambda, config, std::span<const double>(*warm_start));
    return lasso::solve(prob, lambda, config);
}

/// Scatter a row solution (p - 1 coefficients, index i skipped) into length p.
inline std::vector<double> expand_row(std::span<const double> compact, std::size_t i) {
    std::vector<double> row(compact.size() + 1, 0.0);
    for (std::size_t k = 0; k < compact.size(); ++k) row[k < i ? k : k + 1] = compact[k];
    return row;
}

/// p separate lasso regressions min_b 1/2 ||Y_i - Y_{-i} b||^2 + lambda_i ||b||_1.
inline NeighborhoodFit fit_mb(const DataMatrix& standardized, std::span<const double> lambdas,
                              const lasso::SolverConfig& config = {}) {
    const std::size_t p = standardized.p();
    NeighborhoodFit fit;
    fit.lambda_per_variable = broadcast_lambdas(lambdas, p);
    fit.beta = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    fit.rss_per_variable.resize(p);
    const Matrix& Y = standardized.values();
    for (std::size_t i = 0; i < p; ++i) {
        const auto report = fit_row(standardized, i, fit.lambda_per_variable[i], config);
        fit.iterations += report.iterations;
        fit.converged = fit.converged && report.converged;
        const auto row = expand_row(report.beta, i);
        for (std::size_t j = 0; j < p; ++j)
            fit.beta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        const Vector r = Y.col(static_cast<Eigen::Index>(i)) -
                         Y * fit.beta.row(static_cast<Eigen::Index>(i)).transpose();
        fit.rss_per_variable[i] = r.squaredNorm();
    }
    return fit;
}

enum class CombineRule { or_rule, and_rule };

/// or: edge if either regression selects the other variable; and: if both do.
inline NetworkGraph mb_edges(const NeighborhoodFit& fit, CombineRule rule = CombineRule::or_rule) {
    const auto p = static_cast<std::size_t>(fit.beta.rows());
    NetworkGraph g(p);
    for (std::size_t i = 0; i + 1 < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) {
            const bool a = fit.beta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0;
            const bool b = fit.beta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) != 0.0;
            if (rule == CombineRule::or_rule ? (a || b) : (a && b)) g.add_edge(i, j);
        }
    return g;
}

/// sigma^ii = n / RSS_i, the residual-variance estimate of each regression.
inline DiagPrecision mb_sigma(const NeighborhoodFit& fit, std::size_t n) {
    std::vector<double> s(fit.rss_per_variable.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(n) / fit.rss_per_variable[i];
    return DiagPrecision(std::move(s));
}

/// Partial correlations read off the two regressions of each pair:
/// rho = (beta_ij sqrt(s_ii/s_jj) + beta_ji sqrt(s_jj/s_ii)) / 2 on combined edges, else 0.
inline PartialCorrVector mb_theta(const NeighborhoodFit& fit, std::size_t n,
                                  CombineRule rule = CombineRule::or_rule) {
    const DiagPrecision s = mb_sigma(fit, n);
    const NetworkGraph g = mb_edges(fit, rule);
    PartialCorrVector theta(s.size());
    for (const auto& [e, w] : g.edges()) {
        const auto [i, j] = e;
        const double bij = fit.beta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const double bji = fit.beta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
        theta[PairIndex::from_pair(i, j, s.size()).flat] =
            0.5 * (bij * std::sqrt(s[i] / s[j]) + bji * std::sqrt(s[j] / s[i]));
    }
    return theta;
}

}  // namespace space::mb
