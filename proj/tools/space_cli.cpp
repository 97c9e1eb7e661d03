// Command-line front end: simulate, fit, path, tune, evaluate, bench.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <space/space.hpp>

namespace fs = std::filesystem;
using namespace space;

namespace {

enum class Method { space, space_sw, space_dew, mb_sep, mb_alpha };

const std::map<std::string, Method> method_names{{"space", Method::space},
                                                 {"space_sw", Method::space_sw},
                                                 {"space_dew", Method::space_dew},
                                                 {"mb_sep", Method::mb_sep},
                                                 {"mb_alpha", Method::mb_alpha}};

const std::map<std::string, sim::NetworkKind> kind_names{{"hub", sim::NetworkKind::hub},
                                                         {"powerlaw", sim::NetworkKind::powerlaw},
                                                         {"uniform", sim::NetworkKind::uniform},
                                                         {"ar", sim::NetworkKind::ar},
                                                         {"circle", sim::NetworkKind::circle}};

const std::map<std::string, DegreeForm> degree_form_names{{"damped", DegreeForm::damped},
                                                          {"proportional", DegreeForm::proportional}};

struct FitOptions {
    std::string input;
    std::string output;
    Method method = Method::space;
    std::optional<double> lambda;
    std::optional<double> lambda_min;
    std::optional<double> lambda_max;
    std::size_t lambda_count = 20;
    bool log_spaced = true;
    std::size_t iters = 3;
    double tol = 1e-6;
    std::size_t max_sweeps = 10000;
    double alpha = 0.05;
    DegreeForm degree_form = DegreeForm::damped;
};

struct Estimate {
    PartialCorrVector theta;
    DiagPrecision sigma;
    double lambda = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
    double bic = 0.0;
};

WeightScheme scheme_of(Method m) {
    switch (m) {
    case Method::space_sw: return WeightScheme::residual_variance;
    case Method::space_dew: return WeightScheme::degree;
    default: return WeightScheme::uniform;
    }
}

bool is_space(Method m) { return m == Method::space || m == Method::space_sw || m == Method::space_dew; }

SpaceConfig space_config(const FitOptions& o) {
    SpaceConfig c;
    c.solver.tol = o.tol;
    c.solver.max_sweeps = o.max_sweeps;
    c.outer_iterations = o.iters;
    c.degree_form = o.degree_form;
    return c;
}

Estimate from_space(const SpaceFit& fit, const DataMatrix& data) {
    return {fit.theta, fit.sigma, fit.lambda, fit.solver.iterations, fit.solver.converged,
            tuning::bic_space(fit, data).bic_total};
}

Estimate from_mb(const mb::NeighborhoodFit& fit, std::size_t n, double lambda) {
    const auto p = static_cast<std::size_t>(fit.beta.rows());
    std::vector<std::size_t> df(p);
    for (std::size_t i = 0; i < p; ++i)
        df[i] = static_cast<std::size_t>((fit.beta.row(static_cast<Eigen::Index>(i)).array() != 0.0).count());
    return {mb::mb_theta(fit, n), mb::mb_sigma(fit, n), lambda, fit.iterations, fit.converged,
            tuning::bic_from_rss(lambda, n, fit.rss_per_variable, df).bic_total};
}

Estimate fit_at(const DataMatrix& data, const FitOptions& o, double lambda) {
    if (is_space(o.method)) return from_space(fit_space(data, lambda, scheme_of(o.method), space_config(o)), data);
    const DataMatrix z = standardize(data);
    lasso::SolverConfig sc;
    sc.tol = o.tol;
    sc.max_sweeps = o.max_sweeps;
    const double one[1] = {lambda};
    return from_mb(mb::fit_mb(z, one, sc), z.n(), lambda);
}

std::vector<double> make_grid(const DataMatrix& data, const FitOptions& o) {
    if (o.lambda) return {*o.lambda};
    const double hi = o.lambda_max ? *o.lambda_max
                      : is_space(o.method) ? lambda_max(data)
                                           : mb::lambda_max(standardize(data));
    const double lo = o.lambda_min ? *o.lambda_min : hi / 100.0;
    if (o.lambda_count < 1) throw InvalidArgument("--lambda-count must be at least 1");
    if (!(lo > 0.0) || !(lo <= hi)) throw InvalidArgument("need 0 < lambda-min <= lambda-max");
    if (o.log_spaced) return log_grid(hi, lo, o.lambda_count);
    std::vector<double> g(o.lambda_count, hi);
    for (std::size_t k = 1; k < o.lambda_count; ++k)
        g[k] = hi - (hi - lo) * static_cast<double>(k) / static_cast<double>(o.lambda_count - 1);
    return g;
}

void warn_if_unconverged(bool converged) {
    if (!converged) std::cerr << "warning: solver hit max sweeps before converging\n";
}

void write_estimate(const std::string& prefix, const Estimate& e) {
    io::write_edges(fs::path(prefix + ".edges.tsv"), edges_from_theta(e.theta));
    io::write_sigma(fs::path(prefix + ".sigma.tsv"), e.sigma.values());
}

int cmd_fit(const FitOptions& o) {
    const DataMatrix data = io::read_data(fs::path(o.input));
    double lambda = 0.0;
    if (o.method == Method::mb_alpha) {
        lambda = tuning::mb_alpha_lambda(data.n(), data.p(), o.alpha);
    } else {
        if (!o.lambda) throw InvalidArgument("fit needs --lambda");
        lambda = *o.lambda;
    }
    const Estimate e = fit_at(data, o, lambda);
    write_estimate(o.output, e);
    std::printf("lambda: %.6g\nedges: %zu\n", e.lambda, e.theta.nonzero_count());
    warn_if_unconverged(e.converged);
    return 0;
}

int cmd_path(const FitOptions& o) {
    const DataMatrix data = io::read_data(fs::path(o.input));
    const auto grid = make_grid(data, o);
    validate_descending_grid(grid);

    std::ofstream file;
    if (!o.output.empty()) {
        file.open(o.output);
        if (!file) throw io::IoError("cannot write " + o.output);
    }
    std::ostream& out = o.output.empty() ? std::cout : file;
    out << "lambda\tedges\tbic\titerations\tconverged\n";
    char buf[160];
    bool all_converged = true;

    auto row = [&](const Estimate& e) {
        std::snprintf(buf, sizeof(buf), "%.6g\t%zu\t%.6f\t%zu\t%s\n", e.lambda, e.theta.nonzero_count(), e.bic,
                      e.iterations, e.converged ? "yes" : "no");
        out << buf;
        all_converged = all_converged && e.converged;
    };

    if (is_space(o.method)) {
        const FitPath path = fit_path(data, grid, scheme_of(o.method), space_config(o));
        for (const auto& entry : path.entries) {
            if (entry.fit) {
                row(from_space(*entry.fit, data));
            } else {
                std::snprintf(buf, sizeof(buf), "%.6g\tNA\tNA\tNA\tfailed\n", entry.lambda);
                out << buf;
                std::cerr << "warning: fit failed at lambda " << entry.lambda << ": " << entry.error << '\n';
            }
        }
    } else {
        for (double lambda : grid) row(fit_at(data, o, lambda));
    }
    warn_if_unconverged(all_converged);
    return 0;
}

int cmd_tune(const FitOptions& o) {
    const DataMatrix data = io::read_data(fs::path(o.input));
    Estimate e;
    if (o.method == Method::mb_alpha) {
        e = fit_at(data, o, tuning::mb_alpha_lambda(data.n(), data.p(), o.alpha));
        std::printf("lambda: %.6g\n", e.lambda);
    } else if (o.method == Method::mb_sep) {
        const DataMatrix z = standardize(data);
        lasso::SolverConfig sc;
        sc.tol = o.tol;
        sc.max_sweeps = o.max_sweeps;
        const auto lambdas = tuning::select_lambda_mb_sep(z, make_grid(data, o), sc);
        e = from_mb(mb::fit_mb(z, lambdas, sc), z.n(), 0.0);
        const auto [lo, hi] = std::minmax_element(lambdas.begin(), lambdas.end());
        std::printf("lambda_min: %.6g\nlambda_max: %.6g\n", *lo, *hi);
    } else {
        const FitPath path = fit_path(data, make_grid(data, o), scheme_of(o.method), space_config(o));
        const auto sel = tuning::select_lambda_space(path, data);
        e = from_space(*path.entries[sel.index].fit, data);
        std::printf("lambda: %.6g\n", e.lambda);
    }
    write_estimate(o.output, e);
    std::printf("edges: %zu\nbic: %.6f\n", e.theta.nonzero_count(), e.bic);
    warn_if_unconverged(e.converged);
    return 0;
}

struct SimOptions {
    sim::NetworkKind kind = sim::NetworkKind::hub;
    std::size_t modules = 1;
    std::size_t p = 100;
    std::size_t n = 250;
    std::uint64_t seed = 0;
    double df = 0.0;
    std::string output;
};

int cmd_simulate(const SimOptions& o) {
    if (o.n < 2) throw InvalidArgument("--n must be at least 2");
    if (o.df < 0.0 || (o.df > 0.0 && o.df <= 2.0)) throw InvalidArgument("--df must be 0 or greater than 2");
    sim::PrecisionSpec spec;
    switch (o.kind) {
    case sim::NetworkKind::ar: spec = sim::gen_ar_precision(o.p); break;
    case sim::NetworkKind::circle: spec = sim::gen_circle_precision(o.p); break;
    default: spec = sim::gen_module_network(o.kind, o.modules, o.seed);
    }
    const auto cov = sim::concentration_to_covariance(spec);
    DataMatrix sample = o.df == 0.0 ? sim::sample_gaussian(cov.Sigma, o.n, o.seed)
                                    : sim::sample_t(cov.Sigma, o.n, o.df, o.seed);
    std::vector<std::string> names(sample.p());
    for (std::size_t j = 0; j < names.size(); ++j) names[j] = "V" + std::to_string(j + 1);
    const DataMatrix data(sample.values(), std::move(names));

    io::write_data(fs::path(o.output + ".csv"), data);
    io::write_edges(fs::path(o.output + ".edges.tsv"), cov.graph);
    std::vector<double> diag(cov.concentration.diagonal().begin(), cov.concentration.diagonal().end());
    io::write_sigma(fs::path(o.output + ".sigma.tsv"), diag);
    io::write_hubs(fs::path(o.output + ".hubs.txt"), cov.graph.hubs());
    std::printf("p: %zu\nn: %zu\nedges: %zu\nhubs: %zu\n", data.p(), data.n(), cov.graph.edge_count(),
                cov.graph.hubs().size());
    return 0;
}

struct EvalOptions {
    std::string estimate;
    std::string truth;
    double threshold = 0.0;
};

int cmd_evaluate(const EvalOptions& o) {
    const auto true_sigma = io::read_sigma(fs::path(o.truth + ".sigma.tsv"));
    const std::size_t p = true_sigma.size();
    const NetworkGraph truth = io::read_edges(fs::path(o.truth + ".edges.tsv"), p);
    std::set<std::size_t> hubs;
    if (fs::exists(o.truth + ".hubs.txt")) hubs = io::read_hubs(fs::path(o.truth + ".hubs.txt"), p);

    const PartialCorrVector theta = io::theta_from_edges(io::read_edges(fs::path(o.estimate + ".edges.tsv"), p));
    const NetworkGraph est = edges_from_theta(theta, o.threshold);
    const auto m = eval::recovery(est, truth);

    std::printf("p: %zu\nn_true: %zu\nn_detected: %zu\nn_correct: %zu\nsensitivity: %.6f\nspecificity: %.6f\n", p,
                m.n_true, m.n_detected, m.n_correct, m.sensitivity, m.specificity);
    if (!hubs.empty()) std::printf("hub_average_rank: %.6f\n", eval::hub_average_rank(est.degrees(), hubs));
    if (fs::exists(o.estimate + ".sigma.tsv")) {
        const auto s = io::read_sigma(fs::path(o.estimate + ".sigma.tsv"));
        if (s.size() != p)
            throw io::DataFormatError("estimate sigma has " + std::to_string(s.size()) + " entries, truth has " +
                                      std::to_string(p));
        std::optional<DiagPrecision> sigma;
        try {
            sigma.emplace(s);
        } catch (const InvalidArgument& e) {
            throw io::DataFormatError(e.what());
        }
        const auto pd = eval::pd_check(theta, *sigma);
        std::printf("pd: %s\nmin_eigenvalue: %.6g\n", pd.is_pd ? "yes" : "no", pd.min_eigenvalue);
    }
    return 0;
}

struct BenchOptions {
    std::size_t n = 100;
    std::vector<std::size_t> p{200, 500, 1000};
    double lambda = 2.0;
    std::uint64_t seed = 1;
    double tol = 1e-6;
    double equicorrelation = 0.5;
};

int cmd_bench(const BenchOptions& o) {
    if (o.n < 2) throw InvalidArgument("--n must be at least 2");
    std::printf("p\tcoef\tshooting\tactive\tratio\tmax_diff\n");
    bool all_converged = true;
    for (std::size_t p : o.p) {
        if (p < 1) throw InvalidArgument("--p entries must be positive");
        const auto inst = sim::make_lasso_benchmark(o.n, p, o.seed, o.equicorrelation);
        lasso::SolverConfig c;
        c.tol = o.tol;
        c.mode = lasso::Mode::shooting;
        lasso::DenseLassoProblem plain(inst.X, inst.y), active(inst.X, inst.y);
        const auto a = lasso::solve(plain, o.lambda, c);
        c.mode = lasso::Mode::active_shooting;
        const auto b = lasso::solve(active, o.lambda, c);
        std::size_t nz = 0;
        double diff = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            nz += b.beta[j] != 0.0;
            diff = std::max(diff, std::abs(a.beta[j] - b.beta[j]));
        }
        std::printf("%zu\t%zu\t%zu\t%zu\t%.4f\t%.3g\n", p, nz, a.iterations, b.iterations,
                    static_cast<double>(b.iterations) / static_cast<double>(a.iterations), diff);
        all_converged = all_converged && a.converged && b.converged;
    }
    warn_if_unconverged(all_converged);
    return 0;
}

void add_fit_options(CLI::App* cmd, FitOptions& o, bool output_required) {
    cmd->add_option("--input", o.input, "data matrix (CSV)")->required();
    auto* out = cmd->add_option("--output", o.output,
                                output_required ? "output prefix (.edges.tsv, .sigma.tsv)" : "table file (default stdout)");
    if (output_required) out->required();
    cmd->add_option("--method", o.method, "space, space_sw, space_dew, mb_sep or mb_alpha")
        ->transform(CLI::CheckedTransformer(method_names));
    cmd->add_option("--lambda", o.lambda, "single penalty value");
    cmd->add_option("--lambda-min", o.lambda_min, "smallest grid value (default lambda-max / 100)");
    cmd->add_option("--lambda-max", o.lambda_max, "largest grid value (default: computed)");
    cmd->add_option("--lambda-count", o.lambda_count, "grid size")->check(CLI::PositiveNumber);
    cmd->add_flag("--log-grid,!--linear-grid", o.log_spaced, "log-spaced grid (default) or linear");
    cmd->add_option("--iters", o.iters, "outer sigma/theta iterations")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", o.tol, "coordinate descent tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-sweeps", o.max_sweeps, "sweep budget per lasso solve")->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", o.alpha, "level for mb_alpha")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--degree-weights", o.degree_form, "space_dew weight form: damped or proportional")
        ->transform(CLI::CheckedTransformer(degree_form_names));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse partial correlation estimation by joint sparse regression"};
    app.require_subcommand(1);

    SimOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic network and sample data");
    simulate->add_option("--kind", sim_opts.kind, "hub, powerlaw, uniform, ar or circle")
        ->transform(CLI::CheckedTransformer(kind_names))
        ->required();
    simulate->add_option("--modules", sim_opts.modules, "number of 100-node modules")->check(CLI::PositiveNumber);
    simulate->add_option("--p", sim_opts.p, "dimension for ar and circle");
    simulate->add_option("--n", sim_opts.n, "sample size");
    simulate->add_option("--seed", sim_opts.seed, "random seed")->required();
    simulate->add_option("--df", sim_opts.df, "0 for Gaussian, otherwise multivariate t degrees of freedom");
    simulate->add_option("--output", sim_opts.output, "output prefix")->required();

    FitOptions fit_opts, path_opts, tune_opts;
    auto* fit = app.add_subcommand("fit", "fit one penalty value");
    add_fit_options(fit, fit_opts, true);
    auto* path = app.add_subcommand("path", "fit a decreasing penalty grid and tabulate it");
    add_fit_options(path, path_opts, false);
    auto* tune = app.add_subcommand("tune", "select the penalty by BIC (or MB.alpha) and write that fit");
    add_fit_options(tune, tune_opts, true);

    EvalOptions eval_opts;
    auto* evaluate = app.add_subcommand("evaluate", "compare an estimate with the true network");
    evaluate->add_option("--input", eval_opts.estimate, "estimate prefix")->required();
    evaluate->add_option("--truth", eval_opts.truth, "truth prefix from simulate")->required();
    evaluate->add_option("--threshold", eval_opts.threshold, "ignore edges with |rho| at or below this");

    BenchOptions bench_opts;
    auto* bench = app.add_subcommand("bench", "shooting versus active-shooting iteration counts");
    bench->add_option("--n", bench_opts.n, "sample size");
    bench->add_option("--p", bench_opts.p, "dimensions")->delimiter(',');
    bench->add_option("--lambda", bench_opts.lambda, "lasso penalty")->check(CLI::NonNegativeNumber);
    bench->add_option("--seed", bench_opts.seed, "random seed");
    bench->add_option("--tol", bench_opts.tol, "coordinate descent tolerance")->check(CLI::PositiveNumber);
    bench->add_option("--rho", bench_opts.equicorrelation, "predictor equicorrelation")->check(CLI::Range(0.0, 0.999));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*simulate) return cmd_simulate(sim_opts);
        if (*fit) return cmd_fit(fit_opts);
        if (*path) return cmd_path(path_opts);
        if (*tune) return cmd_tune(tune_opts);
        if (*evaluate) return cmd_evaluate(eval_opts);
        if (*bench) return cmd_bench(bench_opts);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const tuning::InvalidAlpha& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const sim::GenerationFailed& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const sim::SingularA& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const sim::CholeskyFailed& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
