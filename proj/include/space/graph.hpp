#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <space/core.hpp>

namespace space {

/// Undirected simple graph on vertices 0..p-1. Each edge (i, j), i < j,
/// carries a weight (a partial correlation when one is known, else 0).
class NetworkGraph {
public:
    using Edge = std::pair<std::size_t, std::size_t>;

    NetworkGraph() = default;
    explicit NetworkGraph(std::size_t p) : p_(p) {}

    std::size_t p() const noexcept { return p_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::map<Edge, double>& edges() const noexcept { return edges_; }
    const std::set<std::size_t>& hubs() const noexcept { return hubs_; }

    /// Inserts (min, max); returns false for self-loops and existing edges.
    bool add_edge(std::size_t i, std::size_t j, double weight = 0.0) {
        if (i >= p_ || j >= p_)
            throw InvalidArgument("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") out of range for p = " + std::to_string(p_));
        if (i == j) return false;
        if (i > j) std::swap(i, j);
        return edges_.emplace(Edge{i, j}, weight).second;
    }

    bool has_edge(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return edges_.count(Edge{i, j}) != 0;
    }

    void set_weight(std::size_t i, std::size_t j, double weight) {
        if (i > j) std::swap(i, j);
        edges_.at(Edge{i, j}) = weight;
    }

    void add_hub(std::size_t v) {
        if (v >= p_) throw InvalidArgument("hub index out of range");
        hubs_.insert(v);
    }

    std::vector<std::size_t> degrees() const {
        std::vector<std::size_t> deg(p_, 0);
        for (const auto& [e, w] : edges_) {
            ++deg[e.first];
            ++deg[e.second];
        }
        return deg;
    }

private:
    std::size_t p_ = 0;
    std::map<Edge, double> edges_;
    std::set<std::size_t> hubs_;
};

/// Edges where |rho^{ij}| > threshold, weighted by rho.
inline NetworkGraph edges_from_theta(const PartialCorrVector& theta, double threshold = 0.0) {
    NetworkGraph g(theta.p());
    std::size_t f = 0;
    for (std::size_t i = 0; i + 1 < theta.p(); ++i)
        for (std::size_t j = i + 1; j < theta.p(); ++j, ++f)
            if (std::abs(theta[f]) > threshold) g.add_edge(i, j, theta[f]);
    return g;
}

}  // namespace space
