#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace space {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class NonFiniteData : public Error {
public:
    using Error::Error;
};

class ZeroVarianceColumn : public Error {
public:
    explicit ZeroVarianceColumn(std::size_t index)
        : Error("column " + std::to_string(index) + " has zero sample variance"),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class InvalidPair : public Error {
public:
    using Error::Error;
};

/// n x p matrix of observations (rows = samples, columns = variables).
/// Construction rejects non-finite entries and fewer than 2 rows or columns.
class DataMatrix {
public:
    DataMatrix() = default;

    explicit DataMatrix(Matrix values, std::vector<std::string> names = {})
        : values_(std::move(values)), names_(std::move(names)) {
        if (values_.rows() < 2) throw InvalidArgument("DataMatrix needs n >= 2 samples");
        if (values_.cols() < 2) throw InvalidArgument("DataMatrix needs p >= 2 variables");
        if (!values_.allFinite()) throw NonFiniteData("DataMatrix contains non-finite entries");
        if (!names_.empty() && names_.size() != static_cast<std::size_t>(values_.cols()))
            throw InvalidArgument("variable name count does not match column count");
    }

    const Matrix& values() const noexcept { return values_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::size_t n() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    auto column(std::size_t j) const { return values_.col(static_cast<Eigen::Index>(j)); }

private:
    Matrix values_;
    std::vector<std::string> names_;
};

/// Center each column and scale it to unit sample standard deviation
/// (denominator n - 1).
inline DataMatrix standardize(const DataMatrix& data) {
    Matrix out = data.values();
    const double n = static_cast<double>(data.n());
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        auto col = out.col(j);
        const double scale = 1.0 + col.cwiseAbs().maxCoeff();
        col.array() -= col.mean();
        const double sd = std::sqrt(col.squaredNorm() / (n - 1.0));
        if (!(sd > 1e-12 * scale)) throw ZeroVarianceColumn(static_cast<std::size_t>(j));
        col /= sd;
        // second pass absorbs the rounding left by the first
        col.array() -= col.mean();
        col /= std::sqrt(col.squaredNorm() / (n - 1.0));
    }
    return DataMatrix(std::move(out), data.names());
}

inline std::size_t pair_count(std::size_t p) noexcept { return p * (p - 1) / 2; }

/// Position of the unordered pair (i, j), i < j, in the lexicographic
/// enumeration (0,1), (0,2), ..., (p-2,p-1). Indices are zero-based.
struct PairIndex {
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t flat = 0;

    static PairIndex from_pair(std::size_t i, std::size_t j, std::size_t p) {
        if (i >= j || j >= p)
            throw InvalidPair("invalid pair (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") for p = " + std::to_string(p));
        return {i, j, i * (2 * p - i - 1) / 2 + (j - i - 1)};
    }

    static PairIndex from_flat(std::size_t flat, std::size_t p) {
        if (p < 2 || flat >= pair_count(p))
            throw InvalidPair("flat index " + std::to_string(flat) + " out of range for p = " +
                              std::to_string(p));
        // row start offsets are i(2p - i - 1)/2; invert the quadratic, then fix rounding
        const double b = 2.0 * static_cast<double>(p) - 1.0;
        auto i = static_cast<std::size_t>(
            std::floor((b - std::sqrt(b * b - 8.0 * static_cast<double>(flat))) / 2.0));
        auto start = [p](std::size_t r) { return r * (2 * p - r - 1) / 2; };
        while (i > 0 && start(i) > flat) --i;
        while (i + 1 < p - 1 && start(i + 1) <= flat) ++i;
        return {i, i + 1 + (flat - start(i)), flat};
    }
};

/// Precomputed flat -> (i, j) table for tight loops over the pair space.
class PairTable {
public:
    explicit PairTable(std::size_t p) : p_(p) {
        pairs_.reserve(pair_count(p));
        for (std::size_t i = 0; i + 1 < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) pairs_.emplace_back(i, j);
    }
    std::size_t p() const noexcept { return p_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    const std::pair<std::size_t, std::size_t>& operator[](std::size_t flat) const {
        return pairs_[flat];
    }

private:
    std::size_t p_;
    std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

/// The p(p-1)/2 partial correlations, one stored value per unordered pair.
class PartialCorrVector {
public:
    PartialCorrVector() = default;
    explicit PartialCorrVector(std::size_t p) : p_(p), rho_(pair_count(p), 0.0) {}
    PartialCorrVector(std::size_t p, std::vector<double> rho) : p_(p), rho_(std::move(rho)) {
        if (rho_.size() != pair_count(p))
            throw InvalidArgument("partial correlation vector has wrong length");
    }

    std::size_t p() const noexcept { return p_; }
    std::size_t size() const noexcept { return rho_.size(); }
    double operator[](std::size_t flat) const { return rho_[flat]; }
    double& operator[](std::size_t flat) { return rho_[flat]; }
    const std::vector<double>& values() const noexcept { return rho_; }
    std::vector<double>& values() noexcept { return rho_; }

    /// Symmetric access; at(i, i) is 0.
    double at(std::size_t i, std::size_t j) const {
        if (i == j) return 0.0;
        if (i > j) std::swap(i, j);
        return rho_[PairIndex::from_pair(i, j, p_).flat];
    }

    std::size_t nonzero_count() const {
        std::size_t c = 0;
        for (double r : rho_) c += (r != 0.0);
        return c;
    }

    /// Number of nonzero partners of every vertex.
    std::vector<std::size_t> degrees() const {
        std::vector<std::size_t> deg(p_, 0);
        std::size_t flat = 0;
        for (std::size_t i = 0; i + 1 < p_; ++i)
            for (std::size_t j = i + 1; j < p_; ++j, ++flat)
                if (rho_[flat] != 0.0) {
                    ++deg[i];
                    ++deg[j];
                }
        return deg;
    }

    bool within_unit_interval() const {
        for (double r : rho_)
            if (r < -1.0 || r > 1.0) return false;
        return true;
    }

private:
    std::size_t p_ = 0;
    std::vector<double> rho_;
};

/// Diagonal of the concentration matrix, sigma^{ii} > 0.
class DiagPrecision {
public:
    DiagPrecision() = default;
    explicit DiagPrecision(std::vector<double> sigma) : sigma_(std::move(sigma)) {
        for (double s : sigma_)
            if (!(s > 0.0) || !std::isfinite(s))
                throw InvalidArgument("diagonal precision entries must be finite and positive");
    }
    static DiagPrecision ones(std::size_t p) { return DiagPrecision(std::vector<double>(p, 1.0)); }

    std::size_t size() const noexcept { return sigma_.size(); }
    double operator[](std::size_t i) const { return sigma_[i]; }
    const std::vector<double>& values() const noexcept { return sigma_; }

private:
    std::vector<double> sigma_;
};

enum class WeightScheme { uniform, residual_variance, degree };

inline const char* to_string(WeightScheme s) {
    switch (s) {
    case WeightScheme::uniform: return "uniform";
    case WeightScheme::residual_variance: return "residual_variance";
    case WeightScheme::degree: return "degree";
    }
    return "?";
}

/// Per-regression weights of the joint loss. All entries strictly positive.
struct Weights {
    std::vector<double> w;
    WeightScheme scheme = WeightScheme::uniform;

    static Weights uniform(std::size_t p) { return {std::vector<double>(p, 1.0), WeightScheme::uniform}; }

    void validate() const {
        for (double x : w)
            if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("weights must be positive");
    }
};

/// beta_{ij} = rho^{ij} sqrt(sigma^{jj} / sigma^{ii}): coefficient of Y_j when regressing Y_i.
inline double implied_beta(const PartialCorrVector& theta, const DiagPrecision& sigma,
                           std::size_t i, std::size_t j) {
    return theta.at(i, j) * std::sqrt(sigma[j] / sigma[i]);
}

}  // namespace space
