#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <space/core.hpp>
#include <space/lasso.hpp>
#include <space/mb.hpp>
#include <space/space_fit.hpp>

namespace space::tuning {

class DegenerateRSS : public Error {
public:
    explicit DegenerateRSS(std::size_t index)
        : Error("RSS of regression " + std::to_string(index) + " is not positive") {}
};

class InvalidAlpha : public Error {
public:
    using Error::Error;
};

struct BicRecord {
    double lambda = 0.0;
    std::vector<double> bic_per_variable;
    double bic_total = 0.0;
    std::vector<std::size_t> df_per_variable;
};

/// BIC_i = n log(RSS_i) + log(n) df_i, summed over i.
inline BicRecord bic_from_rss(double lambda, std::size_t n, std::span<const double> rss,
                              std::span<const std::size_t> df) {
    BicRecord rec;
    rec.lambda = lambda;
    rec.df_per_variable.assign(df.begin(), df.end());
    rec.bic_per_variable.resize(rss.size());
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < rss.size(); ++i) {
        if (!(rss[i] > 0.0)) throw DegenerateRSS(i);
        rec.bic_per_variable[i] = dn * std::log(rss[i]) + std::log(dn) * static_cast<double>(df[i]);
        rec.bic_total += rec.bic_per_variable[i];
    }
    return rec;
}

/// BIC-type criterion of a joint fit. RSS is evaluated on the standardized data.
inline BicRecord bic_space(const SpaceFit& fit, const DataMatrix& data) {
    const DataMatrix z = standardize(data);
    const auto rss = regression_rss(z, fit.theta, fit.sigma);
    const auto deg = fit.theta.degrees();
    return bic_from_rss(fit.lambda, z.n(), rss, deg);
}

struct Selection {
    double lambda = 0.0;
    BicRecord bic;
    std::size_t index = 0;  // position in the path
};

/// Path entry with the smallest total BIC; ties go to the larger lambda.
/// Failed entries are skipped.
inline Selection select_lambda_space(const FitPath& path, const DataMatrix& data) {
    if (path.entries.empty()) throw InvalidArgument("empty path");
    const DataMatrix z = standardize(data);
    std::optional<Selection> best;
    for (std::size_t k = 0; k < path.entries.size(); ++k) {
        const auto& e = path.entries[k];
        if (!e.fit) continue;
        BicRecord rec;
        try {
            rec = bic_space(*e.fit, z);
        } catch (const DegenerateRSS&) {
            continue;
        }
        const bool better = !best || rec.bic_total < best->bic.bic_total ||
                            (rec.bic_total == best->bic.bic_total && e.lambda > best->lambda);
        if (better) best = Selection{e.lambda, std::move(rec), k};
    }
    if (!best) throw Error("no usable fit on the path");
    return *best;
}

/// Per-variable lambda for neighborhood selection: regression i keeps the grid
/// value minimizing its own BIC_i (ties to the larger lambda). The grid is
/// visited in decreasing order with warm starts.
inline std::vector<double> select_lambda_mb_sep(const DataMatrix& standardized,
                                                std::span<const double> grid,
                                                const lasso::SolverConfig& config = {}) {
    if (grid.empty()) throw InvalidArgument("lambda grid is empty");
    const std::size_t p = standardized.p();
    if (grid.size() == 1) return std::vector<double>(p, grid[0]);
    std::vector<double> sorted(grid.begin(), grid.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    const double dn = static_cast<double>(standardized.n());
    const Matrix& Y = standardized.values();
    std::vector<double> chosen(p);
    for (std::size_t i = 0; i < p; ++i) {
        double best_bic = std::numeric_limits<double>::infinity();
        std::optional<std::vector<double>> warm;
        for (double lambda : sorted) {
            const auto report = mb::fit_row(standardized, i, lambda, config, warm ? &*warm : nullptr);
            const auto row = mb::expand_row(report.beta, i);
            Vector r = Y.col(static_cast<Eigen::Index>(i));
            std::size_t df = 0;
            for (std::size_t j = 0; j < p; ++j)
                if (row[j] != 0.0) {
                    r.noalias() -= row[j] * Y.col(static_cast<Eigen::Index>(j));
                    ++df;
                }
            const double rss = r.squaredNorm();
            warm = report.beta;
            if (!(rss > 0.0)) continue;
            const double bic = dn * std::log(rss) + std::log(dn) * static_cast<double>(df);
            if (bic < best_bic) {  // descending scan keeps the larger lambda on ties
                best_bic = bic;
                chosen[i] = lambda;
            }
        }
        if (!std::isfinite(best_bic)) throw DegenerateRSS(i);
    }
    return chosen;
}

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step on erfc; relative error well below 1e-12 over (0, 1).
inline double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw InvalidArgument("quantile probability must be in (0, 1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    // work in the lower half so the refinement never subtracts nearly equal numbers
    if (prob > 0.5) return -normal_quantile(1.0 - prob);

    double x;
    if (prob < p_low) {
        const double q = std::sqrt(-2.0 * std::log(prob));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = prob - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - prob;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

/// lambda(alpha) = sqrt(n) Phi^{-1}(1 - alpha / (2 p^2)), shared by every regression.
inline double mb_alpha_lambda(std::size_t n, std::size_t p, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidAlpha("alpha must lie in (0, 1)");
    if (p < 1 || n < 1) throw InvalidArgument("n and p must be positive");
    const double dp = static_cast<double>(p);
    const double upper_tail = alpha / (2.0 * dp * dp);
    return std::sqrt(static_cast<double>(n)) * -normal_quantile(upper_tail);
}

}  // namespace space::tuning
