// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "helpers.hpp"

using namespace space;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

// Every fit produced along the way, for the sign check at the end.
std::vector<SpaceFit> all_fits;

struct HubReplicate {
    sim::CovarianceSpec cov;
    DataMatrix data;
};

HubReplicate hub_replicate(int rep, std::size_t n) {
    auto cov = sim::concentration_to_covariance(sim::build_concentration(sim::gen_hub_module(rep), rep));
    DataMatrix data = sim::sample_gaussian(cov.Sigma, n, 100 + rep + 1000 * n);
    return {std::move(cov), std::move(data)};
}

SpaceConfig dew_config() { return SpaceConfig{}; }

// BIC-selected space.dew fits; filled by criteria 5 and 9, checked by 10.
std::vector<std::pair<SpaceFit, DataMatrix>> bic_selected;

SpaceFit bic_select_dew(const DataMatrix& data) {
    const double hi = lambda_max(data);
    const auto grid = log_grid(hi, hi / 20.0, 20);
    const auto path = fit_path(data, grid, WeightScheme::degree, dew_config());
    const auto sel = tuning::select_lambda_space(path, data);
    return *path.entries[sel.index].fit;
}

double max_abs_corr(const Matrix& X, const Vector& y) { return (X.transpose() * y).cwiseAbs().maxCoeff(); }

Outcome solver_equivalence() {
    double worst_diff = 0.0;
    bool kkt = true, converged = true;
    int count = 0;
    for (std::size_t p : {50u, 200u})
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Matrix X = testutil::correlated(100, p, 0.3, seed * 31 + p);
            Vector beta = Vector::Zero(static_cast<Eigen::Index>(p));
            for (Eigen::Index j = 0; j < 10; ++j) beta(j * 3) = (j % 2 ? -1.0 : 1.0) * (1.0 + 0.2 * static_cast<double>(j));
            const Vector y = X * beta + 2.0 * testutil::gaussian(100, 1, seed + 7 * p).col(0);
            const double top = max_abs_corr(X, y);
            for (double frac : {0.8, 0.4, 0.2, 0.1, 0.03}) {
                const double gamma = frac * top;
                lasso::SolverConfig c;
                c.tol = 1e-12;
                c.mode = lasso::Mode::shooting;
                lasso::DenseLassoProblem a(X, y), b(X, y);
                const auto ra = lasso::solve(a, gamma, c);
                c.mode = lasso::Mode::active_shooting;
                const auto rb = lasso::solve(b, gamma, c);
                for (std::size_t j = 0; j < p; ++j) worst_diff = std::max(worst_diff, std::abs(ra.beta[j] - rb.beta[j]));
                kkt = kkt && lasso::kkt_holds(a, ra.beta, gamma, 1e-6) && lasso::kkt_holds(b, rb.beta, gamma, 1e-6);
                converged = converged && ra.converged && rb.converged;
                ++count;
            }
        }
    return {count == 50 && worst_diff < 1e-8 && kkt && converged,
            fmt("instances=%d max_diff=%.3g kkt=%s converged=%s", count, worst_diff, kkt ? "yes" : "no",
                converged ? "yes" : "no")};
}

Outcome update_ratio() {
    std::string detail;
    bool pass = true;
    for (std::size_t p : {200u, 500u, 1000u}) {
        const auto inst = sim::make_lasso_benchmark(100, p, 1);
        lasso::SolverConfig c;
        c.mode = lasso::Mode::shooting;
        lasso::DenseLassoProblem a(inst.X, inst.y), b(inst.X, inst.y);
        const auto ra = lasso::solve(a, 2.0, c);
        c.mode = lasso::Mode::active_shooting;
        const auto rb = lasso::solve(b, 2.0, c);
        const double ratio = static_cast<double>(rb.iterations) / static_cast<double>(ra.iterations);
        pass = pass && ratio < 0.5;
        if (!detail.empty()) detail += "; ";
        detail += fmt("p=%zu shooting=%zu active=%zu ratio=%.3f", p, ra.iterations, rb.iterations, ratio);
    }
    return {pass, detail};
}

Outcome small_oracle() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const DataMatrix z = testutil::standardized(50, 3, 0.5, 900 + seed);
        const auto s = testutil::positive_vector(3, 0.7, 2.0, 40 + seed);
        const auto w = testutil::positive_vector(3, 0.5, 1.5, 80 + seed);
        const Weights wt{w, WeightScheme::degree};
        const double lambda = (0.1 + 0.04 * static_cast<double>(seed)) * lambda_max(z, DiagPrecision(s), wt);
        const auto oracle = testutil::fista_joint(z.values(), s, w, lambda);
        lasso::SolverConfig c;
        c.tol = 1e-12;
        const auto fit = solve_theta(z, DiagPrecision(s), wt, lambda, c);
        for (std::size_t f = 0; f < 3; ++f) worst = std::max(worst, std::abs(fit.theta[f] - oracle[f]));
    }
    return {worst < 1e-3, fmt("problems=20 max_abs_diff=%.3g", worst)};
}

Outcome materialized_design() {
    double worst = 0.0;
    int count = 0;
    for (std::size_t p = 2; p <= 6; ++p)
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            const DataMatrix z = testutil::standardized(30, p, 0.4, 300 + 10 * p + seed);
            const auto s = testutil::positive_vector(p, 0.5, 2.5, 60 + 10 * p + seed);
            const auto w = testutil::positive_vector(p, 0.5, 2.0, 70 + 10 * p + seed);
            const Weights wt{w, WeightScheme::degree};
            const double lambda = 0.15 * static_cast<double>(seed) * lambda_max(z, DiagPrecision(s), wt);
            lasso::SolverConfig c;
            c.tol = 1e-13;
            const auto fit = solve_theta(z, DiagPrecision(s), wt, lambda, c);
            const auto [X, y] = testutil::materialize(z.values(), s, w);
            lasso::DenseLassoProblem dense(X, y);
            const auto ref = lasso::solve(dense, lambda, c);
            for (std::size_t f = 0; f < pair_count(p); ++f) worst = std::max(worst, std::abs(fit.theta[f] - ref.beta[f]));
            ++count;
        }
    return {worst < 1e-6, fmt("problems=%d max_abs_diff=%.3g", count, worst)};
}

struct HubStudy {
    double dew_sensitivity = 0.0;
    double dew_correct = 0.0;
    double mb_correct = 0.0;
    double hub_rank = 0.0;
    double true_edges = 0.0;
};

HubStudy hub_study;

Outcome matched_edge_count() {
    const int reps = 10;
    for (int rep = 0; rep < reps; ++rep) {
        const auto r = hub_replicate(rep, 250);
        const std::size_t target = r.cov.graph.edge_count();
        const double lmax = lambda_max(r.data);
        const auto m = eval::match_edge_count(
            [&](double l) { return fit_space(r.data, l, WeightScheme::degree, dew_config()).nonzero_count; },
            lmax / 100, lmax, target);
        const auto fit = fit_space(r.data, m.lambda, WeightScheme::degree, dew_config());
        all_fits.push_back(fit);
        const auto rec = eval::recovery(edges_from_theta(fit.theta), r.cov.graph);
        hub_study.dew_sensitivity += rec.sensitivity / reps;
        hub_study.dew_correct += static_cast<double>(rec.n_correct) / reps;
        hub_study.hub_rank += eval::hub_average_rank(fit.theta, r.cov.graph.hubs()) / reps;
        hub_study.true_edges += static_cast<double>(target) / reps;

        const DataMatrix z = standardize(r.data);
        const double mb_max = mb::lambda_max(z);
        auto mb_edges_at = [&](double l) {
            const double one[1] = {l};
            return mb::mb_edges(mb::fit_mb(z, one)).edge_count();
        };
        const auto mm = eval::match_edge_count(mb_edges_at, mb_max / 100, mb_max, target);
        const double one[1] = {mm.lambda};
        const auto mrec = eval::recovery(mb::mb_edges(mb::fit_mb(z, one)), r.cov.graph);
        hub_study.mb_correct += static_cast<double>(mrec.n_correct) / reps;

        bic_selected.emplace_back(bic_select_dew(r.data), r.data);
        all_fits.push_back(bic_selected.back().first);
    }
    const bool pass = hub_study.dew_sensitivity >= 0.80 && hub_study.dew_correct >= hub_study.mb_correct;
    return {pass, fmt("reps=10 mean_true_edges=%.1f dew_sensitivity=%.3f dew_correct=%.1f mb_correct=%.1f",
                      hub_study.true_edges, hub_study.dew_sensitivity, hub_study.dew_correct, hub_study.mb_correct)};
}

Outcome hub_rank() {
    return {hub_study.hub_rank <= 4.0, fmt("mean_hub_rank=%.3f (optimum 2.0)", hub_study.hub_rank)};
}

bool valid_concentration(const sim::PrecisionSpec& spec, double& min_eig) {
    const Matrix& A = spec.A;
    bool ok = (A - A.transpose()).cwiseAbs().maxCoeff() == 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) ok = ok && A(i, i) == 1.0;
    const double lo = sim::eigenvalues(A).minCoeff();
    min_eig = std::min(min_eig, lo);
    ok = ok && lo > 0.0;
    for (Eigen::Index i = 0; i < A.rows() && ok; ++i)
        for (Eigen::Index j = i + 1; j < A.cols(); ++j)
            if ((A(i, j) != 0.0) != spec.graph.has_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
                ok = false;
                break;
            }
    return ok;
}

Outcome generator_invariants() {
    int bad = 0;
    double min_eig = 1.0;
    for (std::uint64_t draw = 0; draw < 1000; ++draw) {
        NetworkGraph g;
        switch (draw % 3) {
        case 0: g = sim::gen_hub_module(draw); break;
        case 1: g = sim::gen_powerlaw_module(draw); break;
        default: g = sim::gen_uniform_module(draw);
        }
        bad += !valid_concentration(sim::build_concentration(g, draw), min_eig);
    }
    double spectral = 0.0;
    for (std::size_t p : {10u, 100u, 500u}) {
        auto closed = [&](bool circle) {
            std::vector<double> v;
            for (std::size_t k = 0; k < p; ++k) {
                const double kk = static_cast<double>(k);
                v.push_back(circle ? 1.0 + 0.6 * std::cos(2.0 * M_PI * kk / static_cast<double>(p))
                                   : 1.0 + 0.5 * std::cos((kk + 1.0) * M_PI / static_cast<double>(p + 1)));
            }
            std::sort(v.begin(), v.end());
            return v;
        };
        for (bool circle : {false, true}) {
            const Vector ev = sim::eigenvalues(circle ? sim::gen_circle_precision(p).A : sim::gen_ar_precision(p).A);
            const auto ref = closed(circle);
            for (std::size_t k = 0; k < p; ++k)
                spectral = std::max(spectral, std::abs(ev(static_cast<Eigen::Index>(k)) - ref[k]));
        }
    }
    return {bad == 0 && spectral < 1e-10,
            fmt("draws=1000 invalid=%d min_eigenvalue=%.4f spectrum_max_err=%.3g", bad, min_eig, spectral)};
}

Matrix sample_covariance(const DataMatrix& d) {
    Matrix Y = d.values();
    Y.rowwise() -= Y.colwise().mean();
    return Y.transpose() * Y / (static_cast<double>(Y.rows()) - 1.0);
}

Outcome sampling_fidelity() {
    const Matrix Sigma = sim::concentration_to_covariance(sim::gen_ar_precision(50)).Sigma;
    std::vector<double> medians;
    for (std::size_t n : {100u, 1000u, 10000u}) {
        std::vector<double> dist;
        for (std::uint64_t seed = 1; seed <= 20; ++seed)
            dist.push_back((sample_covariance(sim::sample_gaussian(Sigma, n, seed)) - Sigma).norm());
        std::nth_element(dist.begin(), dist.begin() + 10, dist.end());
        const double hi = dist[10];
        std::nth_element(dist.begin(), dist.begin() + 9, dist.end());
        medians.push_back(0.5 * (dist[9] + hi));
    }
    const bool monotone = medians[0] > medians[1] && medians[1] > medians[2];
    const Matrix target = 1.5 * Sigma;
    const double rel = (sample_covariance(sim::sample_t(Sigma, 100000, 6.0, 5)) - target).norm() / target.norm();
    return {monotone && rel < 0.05,
            fmt("median_frobenius n=100:%.4f n=1000:%.4f n=10000:%.4f t6_relative_error=%.4f", medians[0],
                medians[1], medians[2], rel)};
}

// BIC evaluated straight from the loss definition, without regression_rss.
double direct_bic(const SpaceFit& fit, const DataMatrix& data) {
    const DataMatrix z = standardize(data);
    const Matrix& Y = z.values();
    const std::size_t p = z.p();
    const double n = static_cast<double>(z.n());
    double total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        Vector r = Y.col(static_cast<Eigen::Index>(i));
        double df = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (j == i || fit.theta.at(i, j) == 0.0) continue;
            r -= fit.theta.at(i, j) * std::sqrt(fit.sigma[j] / fit.sigma[i]) * Y.col(static_cast<Eigen::Index>(j));
            df += 1.0;
        }
        total += n * std::log(r.squaredNorm()) + std::log(n) * df;
    }
    return total;
}

Outcome tuning_sanity() {
    double worst = 0.0;
    double detected = 0.0, truth = 0.0, sens = 0.0;
    const int reps = 10;
    for (int rep = 0; rep < reps; ++rep) {
        const auto r = hub_replicate(rep, 300);
        const auto fit = bic_select_dew(r.data);
        bic_selected.emplace_back(fit, r.data);
        all_fits.push_back(fit);
        const auto rec = eval::recovery(edges_from_theta(fit.theta), r.cov.graph);
        detected += static_cast<double>(rec.n_detected) / reps;
        truth += static_cast<double>(rec.n_true) / reps;
        sens += rec.sensitivity / reps;
    }
    for (const auto& [fit, data] : bic_selected) {
        const double a = tuning::bic_space(fit, data).bic_total, b = direct_bic(fit, data);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
    }
    return {worst < 1e-8 && detected > truth && sens >= 0.85,
            fmt("bic_rel_err=%.3g n=300 mean_detected=%.1f mean_true=%.1f sensitivity=%.3f", worst, detected, truth,
                sens)};
}

Outcome positive_definite() {
    int failures = 0;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& [fit, data] : bic_selected) {
        const auto pd = eval::pd_check(fit.theta, fit.sigma);
        failures += !pd.is_pd;
        lo = std::min(lo, pd.min_eigenvalue);
    }
    return {failures == 0 && !bic_selected.empty(),
            fmt("fits=%zu non_pd=%d min_eigenvalue=%.4f", bic_selected.size(), failures, lo)};
}

Outcome sign_consistency() {
    std::size_t pairs = 0, violations = 0;
    for (const auto& fit : all_fits) {
        const std::size_t p = fit.theta.p();
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) {
                const double a = implied_beta(fit.theta, fit.sigma, i, j);
                const double b = implied_beta(fit.theta, fit.sigma, j, i);
                ++pairs;
                violations += a * b < 0.0 || ((a == 0.0) != (b == 0.0));
            }
    }
    return {violations == 0 && !all_fits.empty(),
            fmt("fits=%zu pairs=%zu violations=%zu", all_fits.size(), pairs, violations)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"solver equivalence", solver_equivalence},
        {"active-shooting update ratio", update_ratio},
        {"three-variable loss oracle", small_oracle},
        {"materialized design", materialized_design},
        {"hub study matched edge count", matched_edge_count},
        {"hub rank", hub_rank},
        {"generator invariants", generator_invariants},
        {"sampling fidelity", sampling_fidelity},
        {"BIC tuning sanity", tuning_sanity},
        {"positive definiteness", positive_definite},
        {"sign consistency", sign_consistency},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu %s: %s (%s; %.1fs)\n", k + 1, criteria[k].first, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
