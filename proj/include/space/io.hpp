#pragma once

#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <space/core.hpp>
#include <space/graph.hpp>

// Plain-text interchange formats. Indices in files are 1-based.
//   data:   comma-separated, optional header of names, n rows x p numbers
//   edges:  "i\tj\trho" header, one i < j pair per line, rho to 6 significant digits
//   sigma:  "index\tsigma_ii" per line, no header
//   hubs:   one vertex index per line
namespace space::io {

class IoError : public Error {
public:
    using Error::Error;
};

class DataFormatError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool parse_index(std::string_view s, std::size_t& out) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string shortest(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

inline bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

inline DataMatrix read_data(std::istream& in) {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line)) continue;
        const auto fields = detail::split(line, ',');
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t k = 0; k < fields.size() && numeric; ++k) numeric = detail::parse_double(fields[k], row[k]);
        if (!numeric) {
            if (rows.empty() && names.empty()) {
                for (auto f : fields) {
                    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.remove_suffix(1);
                    names.emplace_back(f);
                }
                continue;
            }
            throw DataFormatError("non-numeric field on line " + std::to_string(lineno));
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataFormatError("line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                                  " fields, expected " + std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataFormatError("no data rows");
    const std::size_t p = rows.front().size();
    if (!names.empty() && names.size() != p) throw DataFormatError("header width differs from data width");
    Matrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < p; ++c)
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    try {
        return DataMatrix(std::move(values), std::move(names));
    } catch (const Error& e) {
        throw DataFormatError(e.what());
    }
}

inline void write_data(std::ostream& out, const DataMatrix& data) {
    if (!data.names().empty()) {
        for (std::size_t c = 0; c < data.p(); ++c) out << (c ? "," : "") << data.names()[c];
        out << '\n';
    }
    const Matrix& v = data.values();
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        for (Eigen::Index c = 0; c < v.cols(); ++c) out << (c ? "," : "") << detail::shortest(v(r, c));
        out << '\n';
    }
}

/// Edge list over p vertices (p comes from the caller, usually the sigma sidecar).
inline NetworkGraph read_edges(std::istream& in, std::size_t p) {
    NetworkGraph g(p);
    std::string line;
    if (!std::getline(in, line)) throw DataFormatError("edge list is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "i\tj\trho") throw DataFormatError("edge list header must be i<TAB>j<TAB>rho");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line)) continue;
        const auto f = detail::split(line, '\t');
        std::size_t i = 0, j = 0;
        double rho = 0.0;
        if (f.size() != 3 || !detail::parse_index(f[0], i) || !detail::parse_index(f[1], j) ||
            !detail::parse_double(f[2], rho))
            throw DataFormatError("malformed edge on line " + std::to_string(lineno));
        if (i < 1 || i >= j || j > p)
            throw DataFormatError("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") invalid for p = " + std::to_string(p));
        if (!g.add_edge(i - 1, j - 1, rho)) throw DataFormatError("duplicate edge on line " + std::to_string(lineno));
    }
    return g;
}

inline void write_edges(std::ostream& out, const NetworkGraph& g) {
    out << "i\tj\trho\n";
    char buf[64];
    for (const auto& [e, w] : g.edges()) {
        std::snprintf(buf, sizeof(buf), "%.6g", w);
        out << e.first + 1 << '\t' << e.second + 1 << '\t' << buf << '\n';
    }
}

inline std::vector<double> read_sigma(std::istream& in) {
    std::vector<double> s;
    std::string line;
    while (std::getline(in, line)) {
        if (detail::blank(line)) continue;
        const auto f = detail::split(line, '\t');
        std::size_t idx = 0;
        double v = 0.0;
        if (f.size() != 2 || !detail::parse_index(f[0], idx) || !detail::parse_double(f[1], v))
            throw DataFormatError("malformed sigma line " + std::to_string(s.size() + 1));
        if (idx != s.size() + 1) throw DataFormatError("sigma indices must run 1..p in order");
        s.push_back(v);
    }
    if (s.empty()) throw DataFormatError("sigma file is empty");
    return s;
}

inline void write_sigma(std::ostream& out, std::span<const double> sigma) {
    for (std::size_t i = 0; i < sigma.size(); ++i) out << i + 1 << '\t' << detail::shortest(sigma[i]) << '\n';
}

inline std::set<std::size_t> read_hubs(std::istream& in, std::size_t p) {
    std::set<std::size_t> hubs;
    std::string line;
    while (std::getline(in, line)) {
        if (detail::blank(line)) continue;
        std::size_t v = 0;
        if (!detail::parse_index(line, v) || v < 1 || v > p) throw DataFormatError("bad hub index: " + line);
        hubs.insert(v - 1);
    }
    return hubs;
}

inline void write_hubs(std::ostream& out, const std::set<std::size_t>& hubs) {
    for (std::size_t h : hubs) out << h + 1 << '\n';
}

// path overloads

inline DataMatrix read_data(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    return read_data(in);
}
inline void write_data(const std::filesystem::path& path, const DataMatrix& data) {
    auto out = detail::open_out(path);
    write_data(out, data);
}
inline NetworkGraph read_edges(const std::filesystem::path& path, std::size_t p) {
    auto in = detail::open_in(path);
    return read_edges(in, p);
}
inline void write_edges(const std::filesystem::path& path, const NetworkGraph& g) {
    auto out = detail::open_out(path);
    write_edges(out, g);
}
inline std::vector<double> read_sigma(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    return read_sigma(in);
}
inline void write_sigma(const std::filesystem::path& path, std::span<const double> sigma) {
    auto out = detail::open_out(path);
    write_sigma(out, sigma);
}
inline std::set<std::size_t> read_hubs(const std::filesystem::path& path, std::size_t p) {
    auto in = detail::open_in(path);
    return read_hubs(in, p);
}
inline void write_hubs(const std::filesystem::path& path, const std::set<std::size_t>& hubs) {
    auto out = detail::open_out(path);
    write_hubs(out, hubs);
}

/// Sparse theta back from an edge list.
inline PartialCorrVector theta_from_edges(const NetworkGraph& g) {
    PartialCorrVector theta(g.p());
    for (const auto& [e, w] : g.edges()) theta[PairIndex::from_pair(e.first, e.second, g.p()).flat] = w;
    return theta;
}

}  // namespace space::io
