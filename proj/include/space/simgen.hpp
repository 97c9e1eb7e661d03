#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <space/core.hpp>
#include <space/graph.hpp>

namespace space::sim {

using Rng = std::mt19937_64;

class GenerationFailed : public Error {
public:
    using Error::Error;
};

class SingularA : public Error {
public:
    using Error::Error;
};

class CholeskyFailed : public Error {
public:
    using Error::Error;
};

/// Independent stream for (seed, stream) so modules and replicates never share draws.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

inline constexpr std::size_t module_size = 100;

namespace detail {

/// Configuration-model pairing of the remaining stubs; self-loops and
/// repeated pairs are dropped.
inline void pair_stubs(NetworkGraph& g, std::span<const std::size_t> stubs_per_node, Rng& rng) {
    std::vector<std::size_t> stubs;
    for (std::size_t v = 0; v < stubs_per_node.size(); ++v)
        stubs.insert(stubs.end(), stubs_per_node[v], v);
    std::shuffle(stubs.begin(), stubs.end(), rng);
    for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) g.add_edge(stubs[k], stubs[k + 1]);
}

}  // namespace detail

/// 100-node module: three hubs with degree uniform on {13..17} wired to
/// non-hub nodes, the other 97 nodes with degree at most four.
inline NetworkGraph gen_hub_module(std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x68756221);
    constexpr std::size_t n_hubs = 3;
    // non-hub target degree distribution on {0, ..., 4}
    std::discrete_distribution<std::size_t> target_deg{0.05, 0.35, 0.35, 0.15, 0.10};
    std::uniform_int_distribution<std::size_t> hub_deg(13, 17);

    for (int attempt = 0; attempt < 100; ++attempt) {
        NetworkGraph g(module_size);
        std::vector<std::size_t> order(module_size);
        for (std::size_t v = 0; v < module_size; ++v) order[v] = v;
        std::shuffle(order.begin(), order.end(), rng);
        const std::vector<std::size_t> hubs(order.begin(), order.begin() + n_hubs);
        const std::vector<std::size_t> others(order.begin() + n_hubs, order.end());

        std::vector<std::size_t> capacity(module_size, 0);
        for (std::size_t v : others) capacity[v] = target_deg(rng);

        bool ok = true;
        for (std::size_t h : hubs) {
            const std::size_t d = hub_deg(rng);
            std::vector<std::size_t> candidates;
            for (std::size_t v : others)
                if (capacity[v] > 0) candidates.push_back(v);
            if (candidates.size() < d) {
                ok = false;
                break;
            }
            std::shuffle(candidates.begin(), candidates.end(), rng);
            for (std::size_t k = 0; k < d; ++k) {
                g.add_edge(h, candidates[k]);
                --capacity[candidates[k]];
            }
            g.add_hub(h);
        }
        if (!ok) continue;
        detail::pair_stubs(g, capacity, rng);

        const auto deg = g.degrees();
        bool valid = true;
        for (std::size_t h : hubs) valid = valid && deg[h] >= 13 && deg[h] <= 17;
        for (std::size_t v : others) valid = valid && deg[v] <= 4;
        if (valid) return g;
    }
    throw GenerationFailed("hub module: no feasible degree sequence after 100 draws");
}

/// Discrete power law P(d) ~ d^-alpha on {1, ..., 99}.
inline std::vector<double> powerlaw_pmf(double alpha, std::size_t max_degree = module_size - 1) {
    std::vector<double> w(max_degree);
    double total = 0.0;
    for (std::size_t d = 1; d <= max_degree; ++d) total += (w[d - 1] = std::pow(static_cast<double>(d), -alpha));
    for (double& x : w) x /= total;
    return w;
}

/// 100-node configuration-model module with power-law degrees. Vertices of
/// realized degree >= 20 are labelled hubs.
inline NetworkGraph gen_powerlaw_module(std::uint64_t seed, double alpha = 2.3) {
    if (!(alpha > 1.0)) throw InvalidArgument("power-law exponent must exceed 1");
    Rng rng = make_rng(seed, 0x706f7721);
    const auto pmf = powerlaw_pmf(alpha);
    std::discrete_distribution<std::size_t> draw(pmf.begin(), pmf.end());
    std::uniform_int_distribution<std::size_t> pick(0, module_size - 1);

    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<std::size_t> deg(module_size);
        std::size_t total = 0;
        for (auto& d : deg) total += (d = draw(rng) + 1);
        if (total % 2 == 1) {
            std::size_t v = pick(rng);
            while (deg[v] >= module_size - 1) v = pick(rng);
            ++deg[v];
        }
        NetworkGraph g(module_size);
        detail::pair_stubs(g, deg, rng);
        if (g.edge_count() == 0) continue;
        const auto realized = g.degrees();
        for (std::size_t v = 0; v < module_size; ++v)
            if (realized[v] >= 20) g.add_hub(v);
        return g;
    }
    throw GenerationFailed("power-law module: every draw collapsed to an empty graph");
}

/// 100-node module with target degrees uniform on {0, ..., 4}.
inline NetworkGraph gen_uniform_module(std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x756e6921);
    std::uniform_int_distribution<std::size_t> draw(0, 4);
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<std::size_t> deg(module_size);
        std::size_t total = 0;
        for (auto& d : deg) total += (d = draw(rng));
        if (total % 2 == 1) {
            // drop one stub from a random node that has any
            std::vector<std::size_t> nonzero;
            for (std::size_t v = 0; v < module_size; ++v)
                if (deg[v] > 0) nonzero.push_back(v);
            --deg[nonzero[std::uniform_int_distribution<std::size_t>(0, nonzero.size() - 1)(rng)]];
        }
        NetworkGraph g(module_size);
        detail::pair_stubs(g, deg, rng);
        if (g.edge_count() > 0) return g;
    }
    throw GenerationFailed("uniform module: every draw collapsed to an empty graph");
}

/// Final concentration-like matrix A (unit diagonal) with its graph.
struct PrecisionSpec {
    Matrix A;
    NetworkGraph graph;
    double condition_estimate = 1.0;
};

inline double condition_number(const Matrix& A) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return ev.maxCoeff() / ev.minCoeff();
}

inline Vector eigenvalues(const Matrix& A) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// Tridiagonal precision: unit diagonal, 0.25 on the first off-diagonals.
inline PrecisionSpec gen_ar_precision(std::size_t p) {
    if (p < 2) throw InvalidArgument("AR network needs p >= 2");
    PrecisionSpec spec{Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)),
                       NetworkGraph(p), 1.0};
    for (std::size_t i = 1; i < p; ++i) {
        const auto a = static_cast<Eigen::Index>(i);
        spec.A(a - 1, a) = spec.A(a, a - 1) = 0.25;
        spec.graph.add_edge(i - 1, i, 0.25);
    }
    spec.condition_estimate = condition_number(spec.A);
    return spec;
}

/// Circle precision: unit diagonal, 0.3 between neighbours and between 1 and p.
inline PrecisionSpec gen_circle_precision(std::size_t p) {
    if (p < 3) throw InvalidArgument("circle network needs p >= 3");
    PrecisionSpec spec{Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)),
                       NetworkGraph(p), 1.0};
    for (std::size_t i = 0; i < p; ++i) {
        const std::size_t j = (i + 1) % p;
        const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
        spec.A(a, b) = spec.A(b, a) = 0.3;
        spec.graph.add_edge(i, j, 0.3);
    }
    spec.condition_estimate = condition_number(spec.A);
    return spec;
}

/// Smallest eigenvalue build_concentration lets through before shrinking.
inline constexpr double min_concentration_eigenvalue = 0.05;

/// Random concentration matrix on a graph: entries +-U[0.5, 1] on edges,
/// each row's off-diagonals divided by 1.5 times their absolute sum, averaged
/// with the transpose, unit diagonal.
///
/// Averaging with the transpose mixes in column sums, which are unbounded
/// around a hub whose neighbours have low degree, so the result can be
/// indefinite. In that case every off-diagonal entry is multiplied by the one
/// factor that lifts the smallest eigenvalue to min_concentration_eigenvalue;
/// support, signs and relative sizes are kept.
inline PrecisionSpec build_concentration(const NetworkGraph& graph, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x636f6e21);
    std::uniform_real_distribution<double> magnitude(0.5, 1.0);
    std::bernoulli_distribution negative(0.5);
    const auto p = static_cast<Eigen::Index>(graph.p());

    Matrix S = Matrix::Identity(p, p);
    for (const auto& [e, w] : graph.edges()) {
        const double v = negative(rng) ? -magnitude(rng) : magnitude(rng);
        const auto i = static_cast<Eigen::Index>(e.first), j = static_cast<Eigen::Index>(e.second);
        S(i, j) = S(j, i) = v;
    }
    for (Eigen::Index i = 0; i < p; ++i) {
        const double off = S.row(i).cwiseAbs().sum() - std::abs(S(i, i));
        if (off > 0.0)
            for (Eigen::Index j = 0; j < p; ++j)
                if (j != i) S(i, j) /= 1.5 * off;
    }
    Matrix A = 0.5 * (S + S.transpose());
    A.diagonal().setOnes();
    if (p > 1) {
        Matrix off = A;
        off.diagonal().setZero();
        const double mu = eigenvalues(off).minCoeff();
        if (1.0 + mu < min_concentration_eigenvalue) {
            A = off * ((1.0 - min_concentration_eigenvalue) / -mu);
            A.diagonal().setOnes();
        }
    }

    PrecisionSpec spec{std::move(A), graph, 1.0};
    for (const auto& [e, w] : graph.edges())
        spec.graph.set_weight(e.first, e.second,
                              spec.A(static_cast<Eigen::Index>(e.first), static_cast<Eigen::Index>(e.second)));
    spec.condition_estimate = condition_number(spec.A);
    return spec;
}

/// Block-diagonal concatenation; graphs are joined with shifted indices.
inline PrecisionSpec assemble_modules(std::span<const PrecisionSpec> modules) {
    if (modules.empty()) throw InvalidArgument("no modules to assemble");
    std::size_t p = 0;
    for (const auto& m : modules) p += m.graph.p();
    PrecisionSpec out{Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)),
                      NetworkGraph(p), 1.0};
    std::size_t offset = 0;
    for (const auto& m : modules) {
        const auto o = static_cast<Eigen::Index>(offset);
        const auto k = static_cast<Eigen::Index>(m.graph.p());
        out.A.block(o, o, k, k) = m.A;
        for (const auto& [e, w] : m.graph.edges()) out.graph.add_edge(e.first + offset, e.second + offset, w);
        for (std::size_t h : m.graph.hubs()) out.graph.add_hub(h + offset);
        offset += m.graph.p();
    }
    out.condition_estimate = condition_number(out.A);
    return out;
}

enum class NetworkKind { hub, powerlaw, uniform, ar, circle };

/// `modules` random modules of one kind, each with its own concentration draw.
inline PrecisionSpec gen_module_network(NetworkKind kind, std::size_t modules, std::uint64_t seed) {
    if (modules < 1) throw InvalidArgument("need at least one module");
    std::vector<PrecisionSpec> parts;
    for (std::size_t m = 0; m < modules; ++m) {
        const std::uint64_t s = seed * 1000003ULL + m;
        NetworkGraph g;
        switch (kind) {
        case NetworkKind::hub: g = gen_hub_module(s); break;
        case NetworkKind::powerlaw: g = gen_powerlaw_module(s); break;
        case NetworkKind::uniform: g = gen_uniform_module(s); break;
        default: throw InvalidArgument("AR and circle networks are not modular");
        }
        parts.push_back(build_concentration(g, s));
    }
    return assemble_modules(parts);
}

struct CovarianceSpec {
    Matrix Sigma;                       // unit-diagonal covariance
    Matrix concentration;               // Sigma^{-1}
    PartialCorrVector true_partial_corr;
    NetworkGraph graph;                 // edges weighted by the true partial correlation
};

/// Sigma(i, j) = A^{-1}(i, j) / sqrt(A^{-1}(i, i) A^{-1}(j, j)) and the partial
/// correlations -Omega_ij / sqrt(Omega_ii Omega_jj) of Omega = Sigma^{-1}.
inline CovarianceSpec concentration_to_covariance(const PrecisionSpec& spec) {
    const auto p = spec.A.rows();
    Eigen::LLT<Matrix> llt(spec.A);
    if (llt.info() != Eigen::Success) throw SingularA("concentration matrix is not positive definite");
    const Matrix Ainv = llt.solve(Matrix::Identity(p, p));
    const Vector d = Ainv.diagonal().cwiseSqrt().cwiseInverse();
    CovarianceSpec out;
    out.Sigma = d.asDiagonal() * Ainv * d.asDiagonal();
    out.Sigma = 0.5 * (out.Sigma + out.Sigma.transpose());
    out.Sigma.diagonal().setOnes();

    Eigen::LLT<Matrix> llt_sigma(out.Sigma);
    if (llt_sigma.info() != Eigen::Success) throw SingularA("covariance matrix is not positive definite");
    out.concentration = llt_sigma.solve(Matrix::Identity(p, p));
    out.concentration = 0.5 * (out.concentration + out.concentration.transpose());

    const auto np = static_cast<std::size_t>(p);
    out.true_partial_corr = PartialCorrVector(np);
    out.graph = NetworkGraph(np);
    for (std::size_t h : spec.graph.hubs()) out.graph.add_hub(h);
    std::size_t f = 0;
    for (Eigen::Index i = 0; i + 1 < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j, ++f) {
            const auto& W = out.concentration;
            double r = -W(i, j) / std::sqrt(W(i, i) * W(j, j));
            if (std::abs(r) < 1e-10) r = 0.0;
            out.true_partial_corr[f] = r;
            const bool edge = spec.graph.has_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if ((r != 0.0) != edge) throw Error("partial-correlation support differs from the graph");
            if (edge) out.graph.add_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j), r);
        }
    return out;
}

namespace detail {

inline Matrix lower_cholesky(const Matrix& Sigma) {
    Eigen::LLT<Matrix> llt(Sigma);
    if (llt.info() != Eigen::Success) throw CholeskyFailed("covariance is not positive definite");
    return llt.matrixL();
}

inline Matrix standard_normal(std::size_t n, std::size_t p, Rng& rng) {
    std::normal_distribution<double> z;
    Matrix Z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index r = 0; r < Z.rows(); ++r)
        for (Eigen::Index c = 0; c < Z.cols(); ++c) Z(r, c) = z(rng);
    return Z;
}

}  // namespace detail

/// n rows of N(0, Sigma): each row is L z with L the lower Cholesky factor.
inline DataMatrix sample_gaussian(const Matrix& Sigma, std::size_t n, std::uint64_t seed) {
    const Matrix L = detail::lower_cholesky(Sigma);
    Rng rng = make_rng(seed, 0x67617521);
    const Matrix Z = detail::standard_normal(n, static_cast<std::size_t>(Sigma.rows()), rng);
    return DataMatrix(Z * L.transpose());
}

/// Multivariate t with scale matrix Sigma: a Gaussian row divided by sqrt(chi2_df / df).
inline DataMatrix sample_t(const Matrix& Sigma, std::size_t n, double df, std::uint64_t seed) {
    if (!(df > 0.0)) throw InvalidArgument("degrees of freedom must be positive");
    const Matrix L = detail::lower_cholesky(Sigma);
    Rng rng = make_rng(seed, 0x74647321);
    Matrix Y = detail::standard_normal(n, static_cast<std::size_t>(Sigma.rows()), rng) * L.transpose();
    std::chi_squared_distribution<double> chi2(df);
    for (Eigen::Index r = 0; r < Y.rows(); ++r) Y.row(r) /= std::sqrt(chi2(rng) / df);
    return DataMatrix(std::move(Y));
}

/// Design and response of one lasso timing instance.
struct LassoInstance {
    Matrix X;
    Vector y;
};

/// Equicorrelated Gaussian predictors, beta_j = (-1)^j exp(-2(j-1)/20),
/// Y = X beta + k Z with signal-to-noise ratio 3, then X columns scaled to
/// unit norm (Y is left as is).
inline LassoInstance make_lasso_benchmark(std::size_t n, std::size_t p, std::uint64_t seed,
                                          double equicorrelation = 0.5) {
    if (n < 2 || p < 1) throw InvalidArgument("benchmark needs n >= 2 and p >= 1");
    if (!(equicorrelation >= 0.0 && equicorrelation < 1.0))
        throw InvalidArgument("equicorrelation must lie in [0, 1)");
    Rng rng = make_rng(seed, 0x62656e21);
    const Matrix shared = detail::standard_normal(n, 1, rng);
    LassoInstance inst{std::sqrt(1.0 - equicorrelation) * detail::standard_normal(n, p, rng), Vector()};
    inst.X.colwise() += std::sqrt(equicorrelation) * shared.col(0);
    Vector beta(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        beta(j) = ((j + 1) % 2 == 0 ? 1.0 : -1.0) * std::exp(-2.0 * static_cast<double>(j) / 20.0);
    const Vector signal = inst.X * beta;
    const double centered = (signal.array() - signal.mean()).matrix().norm();
    const double sd = centered / std::sqrt(static_cast<double>(n) - 1.0);
    const Matrix noise = detail::standard_normal(n, 1, rng);
    inst.y = signal + (sd / 3.0) * noise.col(0);
    for (Eigen::Index j = 0; j < inst.X.cols(); ++j) inst.X.col(j).normalize();
    return inst;
}

}  // namespace space::sim
