#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include <space/core.hpp>
#include <space/graph.hpp>
#include <space/space_fit.hpp>

namespace space::eval {

/// sensitivity = correct / true edges, specificity = correct / detected edges.
/// No true edges gives sensitivity 1; no detections gives specificity 1.
struct RecoveryMetrics {
    std::size_t n_true = 0;
    std::size_t n_detected = 0;
    std::size_t n_correct = 0;
    double sensitivity = 1.0;
    double specificity = 1.0;
};

inline RecoveryMetrics recovery(const NetworkGraph& estimated, const NetworkGraph& truth) {
    if (estimated.p() != truth.p()) throw InvalidArgument("graphs have different vertex counts");
    RecoveryMetrics m;
    m.n_true = truth.edge_count();
    m.n_detected = estimated.edge_count();
    for (const auto& [e, w] : estimated.edges()) m.n_correct += truth.has_edge(e.first, e.second);
    if (m.n_true > 0) m.sensitivity = static_cast<double>(m.n_correct) / static_cast<double>(m.n_true);
    if (m.n_detected > 0)
        m.specificity = static_cast<double>(m.n_correct) / static_cast<double>(m.n_detected);
    return m;
}

/// Fractional ranks by decreasing degree (rank 1 = largest); tied vertices
/// share the mean of the positions they occupy.
inline std::vector<double> degree_ranks(std::span<const std::size_t> degree) {
    const std::size_t p = degree.size();
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return degree[a] > degree[b]; });
    std::vector<double> rank(p);
    for (std::size_t k = 0; k < p;) {
        std::size_t end = k;
        while (end < p && degree[order[end]] == degree[order[k]]) ++end;
        const double mean_rank = 0.5 * static_cast<double>(k + 1 + end);
        for (std::size_t t = k; t < end; ++t) rank[order[t]] = mean_rank;
        k = end;
    }
    return rank;
}

inline double hub_average_rank(std::span<const std::size_t> degree, const std::set<std::size_t>& hubs) {
    if (hubs.empty()) throw InvalidArgument("no hubs to rank");
    const auto rank = degree_ranks(degree);
    double total = 0.0;
    for (std::size_t h : hubs) total += rank.at(h);
    return total / static_cast<double>(hubs.size());
}

/// Mean rank of the true hubs when vertices are ordered by estimated degree.
inline double hub_average_rank(const PartialCorrVector& theta, const std::set<std::size_t>& hubs) {
    const auto deg = theta.degrees();
    return hub_average_rank(deg, hubs);
}

struct RocPoint {
    double lambda = 0.0;
    std::size_t n_detected = 0;
    std::size_t n_correct = 0;
    double sensitivity = 0.0;
    double specificity = 0.0;
};

struct RocTrace {
    std::vector<RocPoint> points;
};

/// One recovery point per successful path entry; (i, j) counts as detected
/// when |rho^{ij}| > threshold.
inline RocTrace roc_trace(const FitPath& path, const NetworkGraph& truth, double threshold = 0.0) {
    if (path.entries.empty()) throw InvalidArgument("empty path");
    RocTrace trace;
    for (const auto& e : path.entries) {
        if (!e.fit) continue;
        const auto m = recovery(edges_from_theta(e.fit->theta, threshold), truth);
        trace.points.push_back({e.lambda, m.n_detected, m.n_correct, m.sensitivity, m.specificity});
    }
    return trace;
}

/// Point whose detection count is closest to `target` (first one on ties).
inline const RocPoint& closest_to_edge_count(const RocTrace& trace, std::size_t target) {
    if (trace.points.empty()) throw InvalidArgument("empty trace");
    const RocPoint* best = &trace.points.front();
    auto gap = [target](std::size_t n) { return n > target ? n - target : target - n; };
    for (const auto& pt : trace.points)
        if (gap(pt.n_detected) < gap(best->n_detected)) best = &pt;
    return *best;
}

/// sqrt(mean_i (sigma_hat^ii - Omega_ii)^2) against the true concentration matrix.
inline double sigma_rmse(const DiagPrecision& estimated, const Matrix& true_concentration) {
    if (static_cast<Eigen::Index>(estimated.size()) != true_concentration.rows())
        throw InvalidArgument("dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        const double d = estimated[i] - true_concentration(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(estimated.size()));
}

/// Concentration matrix implied by (theta, sigma):
/// Omega_ii = sigma^ii, Omega_ij = -rho^{ij} sqrt(sigma^ii sigma^jj).
inline Matrix implied_concentration(const PartialCorrVector& theta, const DiagPrecision& sigma) {
    const auto p = static_cast<Eigen::Index>(theta.p());
    if (sigma.size() != theta.p()) throw InvalidArgument("dimension mismatch");
    Matrix W = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) W(i, i) = sigma[static_cast<std::size_t>(i)];
    std::size_t f = 0;
    for (Eigen::Index i = 0; i + 1 < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j, ++f)
            if (theta[f] != 0.0)
                W(i, j) = W(j, i) = -theta[f] * std::sqrt(W(i, i) * W(j, j));
    return W;
}

struct PdCheck {
    bool is_pd = false;
    double min_eigenvalue = 0.0;
};

inline PdCheck pd_check(const PartialCorrVector& theta, const DiagPrecision& sigma) {
    const Matrix W = implied_concentration(theta, sigma);
    Eigen::SelfAdjointEigenSolver<Matrix> es(W, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    return {lo > 0.0, lo};
}

struct EdgeCountMatch {
    double lambda = 0.0;
    std::size_t n_detected = 0;
};

/// Log-scale bisection for a lambda whose detected-edge count equals `target`
/// (edge counts shrink as lambda grows). Returns the closest count seen when
/// no probe hits the target exactly.
inline EdgeCountMatch match_edge_count(const std::function<std::size_t(double)>& edges_at,
                                       double lambda_lo, double lambda_hi, std::size_t target,
                                       int max_probes = 40) {
    if (!(lambda_lo > 0.0) || !(lambda_hi > lambda_lo)) throw InvalidArgument("invalid bracket");
    EdgeCountMatch best{lambda_hi, edges_at(lambda_hi)};
    auto gap = [target](std::size_t n) { return n > target ? n - target : target - n; };
    auto consider = [&](double lambda, std::size_t n) {
        if (gap(n) < gap(best.n_detected) || (gap(n) == gap(best.n_detected) && lambda > best.lambda))
            best = {lambda, n};
    };
    consider(lambda_lo, edges_at(lambda_lo));
    double lo = std::log(lambda_lo), hi = std::log(lambda_hi);
    for (int k = 0; k < max_probes && best.n_detected != target; ++k) {
        const double mid = 0.5 * (lo + hi);
        const std::size_t n = edges_at(std::exp(mid));
        consider(std::exp(mid), n);
        if (n > target) lo = mid;
        else hi = mid;
    }
    return best;
}

}  // namespace space::eval
