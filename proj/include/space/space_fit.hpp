#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <space/core.hpp>
#include <space/lasso.hpp>

namespace space {

class DegenerateResidual : public Error {
public:
    explicit DegenerateResidual(std::size_t index)
        : Error("residual of variable " + std::to_string(index) +
                " vanished (exact collinearity)"),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// The joint regression loss written as one lasso over the pair space.
///
/// Row block i of the stacked response is Y~_i = sqrt(w_i) Y_i; the column of
/// pair (i, j) carries sqrt(s~_jj / s~_ii) Y~_j in block i and
/// sqrt(s~_ii / s~_jj) Y~_i in block j, with s~ = sigma / w. The n x p matrix E
/// keeps the per-block residuals, so a coordinate touches only blocks i and j.
class PairSpaceProblem {
public:
    PairSpaceProblem(const Matrix& Y, const DiagPrecision& sigma, const Weights& weights)
        : table_(static_cast<std::size_t>(Y.cols())), Yw_(Y), E_(Y) {
        const std::size_t p = table_.p();
        if (sigma.size() != p) throw InvalidArgument("sigma length does not match data");
        if (weights.w.size() != p) throw InvalidArgument("weight length does not match data");
        weights.validate();
        root_.resize(p);
        xi_.resize(p);
        for (std::size_t i = 0; i < p; ++i) {
            const auto c = static_cast<Eigen::Index>(i);
            Yw_.col(c) *= std::sqrt(weights.w[i]);
            root_[i] = std::sqrt(sigma[i] / weights.w[i]);
            xi_[i] = Yw_.col(c).squaredNorm();
        }
        E_ = Yw_;
        gram_.resize(table_.size());
        for (std::size_t f = 0; f < table_.size(); ++f) {
            const auto [i, j] = table_[f];
            const double ratio = (root_[j] * root_[j]) / (root_[i] * root_[i]);
            gram_[f] = xi_[j] * ratio + xi_[i] / ratio;
        }
    }

    std::size_t dimension() const noexcept { return table_.size(); }
    double gram(std::size_t flat) const { return gram_[flat]; }

    /// E^T X_(i,j) = A_(j,i) + A_(i,j)
    double correlation(std::size_t flat) const {
        const auto [i, j] = table_[flat];
        return scale(i, j) * E_.col(ix(i)).dot(Yw_.col(ix(j))) +
               scale(j, i) * E_.col(ix(j)).dot(Yw_.col(ix(i)));
    }

    void shift(std::size_t flat, double d) {
        const auto [i, j] = table_[flat];
        E_.col(ix(i)).noalias() -= (d * scale(i, j)) * Yw_.col(ix(j));
        E_.col(ix(j)).noalias() -= (d * scale(j, i)) * Yw_.col(ix(i));
    }

    void reset(std::span<const double> theta) {
        E_ = Yw_;
        for (std::size_t f = 0; f < table_.size(); ++f)
            if (theta[f] != 0.0) shift(f, theta[f]);
    }

    /// Coefficient multiplying Y~_j in block i: sqrt(s~_jj / s~_ii).
    double scale(std::size_t i, std::size_t j) const { return root_[j] / root_[i]; }

    const Matrix& residuals() const noexcept { return E_; }
    const Matrix& weighted_data() const noexcept { return Yw_; }
    const std::vector<double>& xi() const noexcept { return xi_; }
    const PairTable& pairs() const noexcept { return table_; }

    /// 1/2 ||E||^2 + lambda ||theta||_1 at the held residual.
    double objective(std::span<const double> theta, double lambda) const {
        double l1 = 0.0;
        for (double r : theta) l1 += std::abs(r);
        return 0.5 * E_.squaredNorm() + lambda * l1;
    }

private:
    static Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

    PairTable table_;
    Matrix Yw_;
    Matrix E_;
    std::vector<double> root_;
    std::vector<double> xi_;
    std::vector<double> gram_;
};

static_assert(lasso::LassoProblem<PairSpaceProblem>);

/// Current iterate of the pair-space solve: theta together with the problem
/// that holds sigma, weights and the maintained residuals.
struct SpaceState {
    PartialCorrVector theta;
    DiagPrecision sigma;
    Weights weights;
    PairSpaceProblem problem;

    SpaceState(const DataMatrix& standardized, DiagPrecision s, Weights w,
               std::optional<PartialCorrVector> start = std::nullopt)
        : theta(start ? std::move(*start) : PartialCorrVector(standardized.p())),
          sigma(std::move(s)),
          weights(std::move(w)),
          problem(standardized.values(), sigma, weights) {
        if (theta.p() != standardized.p()) throw InvalidArgument("theta dimension mismatch");
        problem.reset(theta.values());
    }

    const Matrix& residuals() const noexcept { return problem.residuals(); }

    /// E rebuilt from (theta, sigma, weights, data) without the incremental path.
    Matrix recompute_residuals() const {
        PairSpaceProblem fresh = problem;
        fresh.reset(theta.values());
        return fresh.residuals();
    }
};

inline double pair_gram(std::size_t i, std::size_t j, const SpaceState& state) {
    return state.problem.gram(PairIndex::from_pair(i, j, state.theta.p()).flat);
}

/// Soft-threshold update of rho^{ij} from A_(i,j) + A_(j,i); residual blocks
/// i and j are corrected in place. Returns the new value.
inline double pair_correlation_update(std::size_t i, std::size_t j, SpaceState& state,
                                      double lambda) {
    const std::size_t f = PairIndex::from_pair(i, j, state.theta.p()).flat;
    return lasso::coordinate_update(state.problem, state.theta.values(), f, lambda);
}

/// Smallest lambda with an all-zero solution: max over pairs of |Y^T X_(i,j)|.
inline double lambda_max(const DataMatrix& standardized, const DiagPrecision& sigma,
                         const Weights& weights) {
    PairSpaceProblem prob(standardized.values(), sigma, weights);
    double m = 0.0;
    for (std::size_t f = 0; f < prob.dimension(); ++f) m = std::max(m, std::abs(prob.correlation(f)));
    return m;
}

/// lambda_max at the starting point of fit_space (sigma = 1, uniform weights).
inline double lambda_max(const DataMatrix& data) {
    const DataMatrix z = standardize(data);
    return lambda_max(z, DiagPrecision::ones(z.p()), Weights::uniform(z.p()));
}

struct ThetaFit {
    PartialCorrVector theta;
    lasso::SolverReport report;
};

/// Minimize 1/2 sum_i w_i ||Y_i - sum_j rho^{ij} sqrt(sigma^jj/sigma^ii) Y_j||^2 + lambda ||theta||_1
/// with sigma and w held fixed. Data must already be standardized.
inline ThetaFit solve_theta(const DataMatrix& standardized, const DiagPrecision& sigma,
                            const Weights& weights, double lambda, const lasso::SolverConfig& config,
                            const PartialCorrVector* warm_start = nullptr) {
    PairSpaceProblem prob(standardized.values(), sigma, weights);
    lasso::SolverReport report =
        warm_start ? lasso::solve(prob, lambda, config, std::span<const double>(warm_start->values()))
                   : lasso::solve(prob, lambda, config);
    PartialCorrVector theta(standardized.p(), report.beta);
    return {std::move(theta), std::move(report)};
}

/// p x p matrix B with B(i, j) = rho^{ij} sqrt(sigma^jj / sigma^ii), zero diagonal.
inline Matrix implied_coefficients(const PartialCorrVector& theta, const DiagPrecision& sigma) {
    const std::size_t p = theta.p();
    Matrix B = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    std::size_t f = 0;
    for (std::size_t i = 0; i + 1 < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j, ++f) {
            const double r = theta[f];
            if (r == 0.0) continue;
            const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
            B(a, b) = r * std::sqrt(sigma[j] / sigma[i]);
            B(b, a) = r * std::sqrt(sigma[i] / sigma[j]);
        }
    return B;
}

/// RSS_i = ||Y_i - sum_{j != i} beta_ij Y_j||^2 with beta from (theta, sigma).
inline std::vector<double> regression_rss(const DataMatrix& data, const PartialCorrVector& theta,
                                          const DiagPrecision& sigma) {
    const Matrix B = implied_coefficients(theta, sigma);
    const Matrix R = data.values() - data.values() * B.transpose();
    std::vector<double> rss(data.p());
    for (std::size_t i = 0; i < data.p(); ++i) rss[i] = R.col(static_cast<Eigen::Index>(i)).squaredNorm();
    return rss;
}

/// sigma^ii <- n / ||Y_i - sum_j beta_ij Y_j||^2, beta built from the current sigma.
inline DiagPrecision update_sigma(const DataMatrix& data, const PartialCorrVector& theta,
                                  const DiagPrecision& sigma_current) {
    const auto rss = regression_rss(data, theta, sigma_current);
    std::vector<double> next(rss.size());
    const double n = static_cast<double>(data.n());
    for (std::size_t i = 0; i < rss.size(); ++i) {
        if (std::sqrt(rss[i]) < 1e-12) throw DegenerateResidual(i);
        next[i] = n / rss[i];
    }
    return DiagPrecision(std::move(next));
}

inline Weights initial_weights(WeightScheme scheme, std::size_t p) {
    return {std::vector<double>(p, 1.0), scheme};
}

/// Shape of the degree-based weights. `proportional` is w_i ~ max(deg_i, 1);
/// `damped` is w_i ~ (deg_i + 1) + max_k (deg_k + 1), which keeps leaves from
/// being nearly ignored. Both are normalized to mean 1.
enum class DegreeForm { damped, proportional };

/// Weights for the next outer iteration from the previous (theta, sigma).
inline Weights compute_weights(WeightScheme scheme, const PartialCorrVector& theta,
                               const DiagPrecision& sigma,
                               DegreeForm form = DegreeForm::damped) {
    const std::size_t p = theta.p();
    switch (scheme) {
    case WeightScheme::uniform: return initial_weights(scheme, p);
    case WeightScheme::residual_variance: return {sigma.values(), scheme};
    case WeightScheme::degree: {
        const auto deg = theta.degrees();
        std::vector<double> w(p);
        const double top = static_cast<double>(*std::max_element(deg.begin(), deg.end())) + 1.0;
        double total = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            const double d = static_cast<double>(deg[i]);
            w[i] = form == DegreeForm::proportional ? std::max(d, 1.0) : d + 1.0 + top;
            total += w[i];
        }
        const double mean = total / static_cast<double>(p);
        for (double& x : w) x /= mean;
        return {std::move(w), scheme};
    }
    }
    return initial_weights(scheme, p);
}

struct SpaceConfig {
    lasso::SolverConfig solver;
    std::size_t outer_iterations = 3;
    DegreeForm degree_form = DegreeForm::damped;
};

struct SolverSummary {
    std::size_t iterations = 0;
    std::size_t sweeps = 0;
    bool converged = true;
};

struct SpaceFit {
    PartialCorrVector theta;
    DiagPrecision sigma;
    Weights weights;  // weights used by the last theta solve
    std::vector<double> rss_per_variable;
    std::size_t nonzero_count = 0;
    double lambda = 0.0;
    std::size_t outer_iterations = 0;
    SolverSummary solver;
};

/// Alternate theta and sigma: standardize, sigma = 1, uniform weights, then
/// outer_iterations rounds of {solve theta (warm), update sigma, reweight}.
inline SpaceFit fit_space(const DataMatrix& data, double lambda, WeightScheme scheme,
                          const SpaceConfig& config = {},
                          const PartialCorrVector* warm_start = nullptr) {
    if (config.outer_iterations < 1) throw InvalidArgument("outer_iterations must be >= 1");
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
    const DataMatrix z = standardize(data);
    const std::size_t p = z.p();

    DiagPrecision sigma = DiagPrecision::ones(p);
    Weights weights = initial_weights(scheme, p);
    std::optional<PartialCorrVector> theta;
    if (warm_start) {
        if (warm_start->p() != p) throw InvalidArgument("warm start dimension mismatch");
        theta = *warm_start;
    }

    SpaceFit fit;
    fit.lambda = lambda;
    for (std::size_t it = 0; it < config.outer_iterations; ++it) {
        ThetaFit tf = solve_theta(z, sigma, weights, lambda, config.solver, theta ? &*theta : nullptr);
        fit.solver.iterations += tf.report.iterations;
        fit.solver.sweeps += tf.report.sweeps;
        fit.solver.converged = fit.solver.converged && tf.report.converged;
        theta = std::move(tf.theta);
        fit.weights = weights;
        DiagPrecision next = update_sigma(z, *theta, sigma);
        weights = compute_weights(scheme, *theta, next, config.degree_form);
        sigma = std::move(next);
        ++fit.outer_iterations;
    }
    fit.theta = std::move(*theta);
    fit.sigma = std::move(sigma);
    fit.rss_per_variable = regression_rss(z, fit.theta, fit.sigma);
    fit.nonzero_count = fit.theta.nonzero_count();
    return fit;
}

struct PathEntry {
    double lambda = 0.0;
    std::optional<SpaceFit> fit;
    std::string error;  // non-empty when the fit at this lambda failed
};

struct FitPath {
    std::vector<PathEntry> entries;
};

inline void validate_descending_grid(std::span<const double> grid) {
    if (grid.empty()) throw InvalidArgument("lambda grid is empty");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] > 0.0)) throw InvalidArgument("lambda grid entries must be positive");
        if (k > 0 && !(grid[k] < grid[k - 1]))
            throw InvalidArgument("lambda grid must be strictly decreasing");
    }
}

/// Decreasing-lambda path; each fit starts theta from its predecessor.
inline FitPath fit_path(const DataMatrix& data, std::span<const double> grid, WeightScheme scheme,
                        const SpaceConfig& config = {}, bool warm = true) {
    validate_descending_grid(grid);
    FitPath path;
    std::optional<PartialCorrVector> previous;
    for (double lambda : grid) {
        PathEntry entry;
        entry.lambda = lambda;
        try {
            entry.fit = fit_space(data, lambda, scheme, config,
                                  warm && previous ? &*previous : nullptr);
            previous = entry.fit->theta;
        } catch (const Error& e) {
            entry.error = e.what();
        }
        path.entries.push_back(std::move(entry));
    }
    return path;
}

/// Log-spaced descending grid from hi to lo (inclusive).
inline std::vector<double> log_grid(double hi, double lo, std::size_t count) {
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("invalid grid bounds");
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = hi;
        return g;
    }
    const double a = std::log(hi), b = std::log(lo);
    for (std::size_t k = 0; k < count; ++k)
        g[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
    g.front() = hi;
    g.back() = lo;
    return g;
}

}  // namespace space
