#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <space/core.hpp>

namespace space::lasso {

/// sign(z) (|z| - gamma)_+
inline double soft_threshold(double z, double gamma) noexcept {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

enum class Mode { shooting, active_shooting };

struct SolverConfig {
    double tol = 1e-6;              // a sweep converges when max_j |delta beta_j| < tol
    std::size_t max_sweeps = 10000;
    Mode mode = Mode::active_shooting;

    void validate() const {
        if (!(tol > 0.0)) throw InvalidArgument("solver tol must be positive");
        if (max_sweeps < 1) throw InvalidArgument("solver max_sweeps must be >= 1");
    }
};

struct SolverReport {
    std::vector<double> beta;
    std::size_t iterations = 0;  // attempted single-coordinate updates
    std::size_t sweeps = 0;      // active-set sweeps plus full sweeps
    bool converged = false;
};

/// Quadratic-loss lasso problem min_b 1/2 ||Y - X b||^2 + gamma ||b||_1 seen
/// only through its columns: the solver never needs X itself.
///
///   dimension()     number of coefficients
///   gram(j)         X_j^T X_j
///   correlation(j)  eps^T X_j for the residual eps currently held
///   shift(j, d)     coefficient j moved by d, so eps -= d X_j
///   reset(beta)     recompute eps = Y - X beta from scratch
template <class P>
concept LassoProblem = requires(P& prob, const P& cprob, std::size_t j, double d,
                                std::span<const double> beta) {
    { cprob.dimension() } -> std::convertible_to<std::size_t>;
    { cprob.gram(j) } -> std::convertible_to<double>;
    { cprob.correlation(j) } -> std::convertible_to<double>;
    prob.shift(j, d);
    prob.reset(beta);
};

/// Univariate soft-shrinkage start: beta_j = sign(Y^T X_j)(|Y^T X_j| - gamma)_+ / X_j^T X_j.
/// Leaves the problem's residual at Y - X beta0.
template <LassoProblem P>
std::vector<double> init_coefficients(P& prob, double gamma) {
    const std::size_t dim = prob.dimension();
    std::vector<double> beta(dim, 0.0);
    prob.reset(beta);
    for (std::size_t j = 0; j < dim; ++j) {
        const double g = prob.gram(j);
        if (g > 0.0) beta[j] = soft_threshold(prob.correlation(j), gamma) / g;
    }
    prob.reset(beta);
    return beta;
}

/// One shooting update of coordinate j. Updates beta[j] and the residual;
/// returns the new value. Columns with X_j^T X_j = 0 stay frozen at 0.
template <LassoProblem P>
double coordinate_update(P& prob, std::vector<double>& beta, std::size_t j, double gamma) {
    const double g = prob.gram(j);
    if (!(g > 0.0)) return beta[j];
    const double old = beta[j];
    const double updated = soft_threshold(prob.correlation(j) / g + old, gamma / g);
    if (updated != old) {
        prob.shift(j, updated - old);
        beta[j] = updated;
    }
    return updated;
}

/// Largest violation of the lasso optimality conditions, measured in units
/// of X_j^T X_j so it is comparable with the coordinate-change tolerance:
/// active j: |eps^T X_j - gamma sign(b_j)| / g_j, inactive j: (|eps^T X_j| - gamma)_+ / g_j.
template <LassoProblem P>
double kkt_violation(const P& prob, std::span<const double> beta, double gamma) {
    double worst = 0.0;
    for (std::size_t j = 0; j < prob.dimension(); ++j) {
        const double g = prob.gram(j);
        if (!(g > 0.0)) continue;
        const double c = prob.correlation(j);
        double v;
        if (beta[j] != 0.0)
            v = std::abs(c - gamma * (beta[j] > 0.0 ? 1.0 : -1.0)) / g;
        else
            v = std::max(0.0, std::abs(c) - gamma) / g;
        worst = std::max(worst, v);
    }
    return worst;
}

template <LassoProblem P>
bool kkt_holds(const P& prob, std::span<const double> beta, double gamma, double tol) {
    return kkt_violation(prob, beta, gamma) <= tol;
}

/// Shooting / active-shooting coordinate descent.
///
/// active_shooting: start -> loop { sweep the nonzero set until max|delta| < tol;
/// one full sweep; stop if no coordinate moved by tol or more }. shooting runs
/// full sweeps only. A stop is reported as converged only when the KKT
/// certificate also holds; otherwise sweeping continues. When max_sweeps runs
/// out the last iterate is returned with converged = false.
template <LassoProblem P>
SolverReport solve(P& prob, double gamma, const SolverConfig& config,
                   std::optional<std::span<const double>> warm_start = std::nullopt) {
    config.validate();
    if (!(gamma >= 0.0)) throw InvalidArgument("lasso penalty must be nonnegative");
    const std::size_t dim = prob.dimension();

    SolverReport report;
    if (warm_start) {
        if (warm_start->size() != dim) throw InvalidArgument("warm start has wrong dimension");
        report.beta.assign(warm_start->begin(), warm_start->end());
        prob.reset(report.beta);
    } else {
        report.beta = init_coefficients(prob, gamma);
    }
    auto& beta = report.beta;

    auto sweep = [&](auto&& coords) {
        double max_change = 0.0;
        for (std::size_t j : coords) {
            const double old = beta[j];
            coordinate_update(prob, beta, j, gamma);
            ++report.iterations;
            max_change = std::max(max_change, std::abs(beta[j] - old));
        }
        ++report.sweeps;
        return max_change;
    };

    std::vector<std::size_t> all(dim);
    for (std::size_t j = 0; j < dim; ++j) all[j] = j;

    if (config.mode == Mode::shooting) {
        while (report.sweeps < config.max_sweeps) {
            if (sweep(all) < config.tol && kkt_holds(prob, beta, gamma, config.tol)) {
                report.converged = true;
                break;
            }
        }
        return report;
    }

    // The active set is re-read before every inner pass, so coordinates
    // that reach zero stop costing updates right away.
    std::vector<std::size_t> active;
    auto refresh = [&] {
        active.clear();
        for (std::size_t j = 0; j < dim; ++j)
            if (beta[j] != 0.0) active.push_back(j);
        return !active.empty();
    };
    while (report.sweeps < config.max_sweeps) {
        while (refresh() && report.sweeps < config.max_sweeps)
            if (sweep(active) < config.tol) break;
        if (report.sweeps >= config.max_sweeps) break;
        if (sweep(all) < config.tol && kkt_holds(prob, beta, gamma, config.tol)) {
            report.converged = true;
            break;
        }
    }
    return report;
}

/// Ordinary dense design: columns of X (optionally a subset of them) against Y.
class DenseLassoProblem {
    const Matrix* X_;
    const Vector* y_;
    std::vector<std::size_t> cols_;
    std::vector<double> gram_;
    Vector resid_;

    auto col(std::size_t k) const { return X_->col(static_cast<Eigen::Index>(cols_[k])); }

public:
    DenseLassoProblem(const Matrix& X, const Vector& y) : DenseLassoProblem(X, y, all_columns(X)) {}

    DenseLassoProblem(const Matrix& X, const Vector& y, std::vector<std::size_t> columns)
        : X_(&X), y_(&y), cols_(std::move(columns)), gram_(cols_.size()), resid_(y) {
        if (X.rows() != y.size()) throw InvalidArgument("design and response row counts differ");
        for (std::size_t k = 0; k < cols_.size(); ++k) gram_[k] = col(k).squaredNorm();
    }

    std::size_t dimension() const noexcept { return cols_.size(); }
    double gram(std::size_t j) const { return gram_[j]; }
    double correlation(std::size_t j) const { return resid_.dot(col(j)); }
    void shift(std::size_t j, double d) { resid_.noalias() -= d * col(j); }
    void reset(std::span<const double> beta) {
        resid_ = *y_;
        for (std::size_t k = 0; k < cols_.size(); ++k)
            if (beta[k] != 0.0) resid_.noalias() -= beta[k] * col(k);
    }

    const Vector& residual() const noexcept { return resid_; }

    /// 1/2 ||Y - X beta||^2 + gamma ||beta||_1 at the held residual.
    double objective(std::span<const double> beta, double gamma) const {
        double l1 = 0.0;
        for (double b : beta) l1 += std::abs(b);
        return 0.5 * resid_.squaredNorm() + gamma * l1;
    }

private:
    static std::vector<std::size_t> all_columns(const Matrix& X) {
        std::vector<std::size_t> c(static_cast<std::size_t>(X.cols()));
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = k;
        return c;
    }

};

static_assert(LassoProblem<DenseLassoProblem>);

}  // namespace space::lasso
