// PGF1 grid-file reader/writer and CSV export.
//
// Format: text header lines
//   PGF1
//   ndim <k>
//   shape <n1 ... nk>
//   origin <o1 ... ok>
//   spacing <h1 ... hk>
//   domain <polydisk|ball|disk|custom> [radius]
//   floor <F>
//   <blank line>
// followed by a row-major little-endian 8-byte IEEE-754 payload.
#pragma once

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pluripot/grid_function.hpp"

namespace pluripot {

static_assert(std::endian::native == std::endian::little,
              "PGF1 payload I/O assumes a little-endian host");

inline void write_grid(const GridFunction& u, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot open for writing: " + path);
    const Grid& g = u.grid();
    out << "PGF1\n";
    out << "ndim " << g.dim() << "\n";
    std::ostringstream shape, origin, spacing;
    shape.precision(17);
    origin.precision(17);
    spacing.precision(17);
    for (int a = 0; a < g.dim(); ++a) {
        shape << (a ? " " : "") << g.shape()[a];
        origin << (a ? " " : "") << g.origin()[a];
        spacing << (a ? " " : "") << g.spacing()[a];
    }
    out << "shape " << shape.str() << "\n";
    out << "origin " << origin.str() << "\n";
    out << "spacing " << spacing.str() << "\n";
    out << "domain " << to_string(u.domain().kind());
    if (u.domain().kind() == DomainKind::ball && u.domain().radius() != 1.0) {
        std::ostringstream r;
        r.precision(17);
        r << u.domain().radius();
        out << " " << r.str();
    }
    out << "\n";
    std::ostringstream fl;
    fl.precision(17);
    fl << u.floor();
    out << "floor " << fl.str() << "\n\n";
    out.write(reinterpret_cast<const char*>(u.values().data()),
              static_cast<std::streamsize>(u.size() * sizeof(double)));
    if (!out) throw parse_error("short write: " + path);
}

namespace detail {

inline std::vector<std::string> tokens(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> t;
    std::string w;
    while (in >> w) t.push_back(w);
    return t;
}

inline std::string read_header_line(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw parse_error("truncated PGF1 header: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

} // namespace detail

inline GridFunction read_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open: " + path);

    if (detail::read_header_line(in, path) != "PGF1")
        throw parse_error("bad magic, expected PGF1: " + path);

    auto expect_key = [&](const std::string& key) {
        auto t = detail::tokens(detail::read_header_line(in, path));
        if (t.empty() || t[0] != key)
            throw parse_error("malformed PGF1 header, expected '" + key + "': " + path);
        t.erase(t.begin());
        return t;
    };

    const auto nd = expect_key("ndim");
    if (nd.size() != 1) throw parse_error("malformed ndim line: " + path);
    int dim = 0;
    try {
        dim = std::stoi(nd[0]);
    } catch (...) {
        throw parse_error("malformed ndim value: " + path);
    }
    if (dim < 1 || dim > 16) throw parse_error("unsupported ndim: " + path);

    auto parse_ints = [&](const std::vector<std::string>& t, const char* what) {
        if (static_cast<int>(t.size()) != dim)
            throw parse_error(std::string("PGF1 ") + what + " entry count does not match ndim: " + path);
        std::vector<int> v(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            try {
                v[i] = std::stoi(t[i]);
            } catch (...) {
                throw parse_error(std::string("malformed ") + what + " entry: " + path);
            }
        }
        return v;
    };
    auto parse_doubles = [&](const std::vector<std::string>& t, const char* what) {
        if (static_cast<int>(t.size()) != dim)
            throw parse_error(std::string("PGF1 ") + what + " entry count does not match ndim: " + path);
        std::vector<double> v(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            try {
                v[i] = std::stod(t[i]);
            } catch (...) {
                throw parse_error(std::string("malformed ") + what + " entry: " + path);
            }
        }
        return v;
    };

    const auto shape = parse_ints(expect_key("shape"), "shape");
    const auto origin = parse_doubles(expect_key("origin"), "origin");
    const auto spacing = parse_doubles(expect_key("spacing"), "spacing");

    const auto dom_tokens = expect_key("domain");
    if (dom_tokens.empty()) throw parse_error("malformed domain line: " + path);
    const DomainKind kind = domain_kind_from_string(dom_tokens[0]);
    double radius = 1.0;
    if (dom_tokens.size() > 1) radius = std::stod(dom_tokens[1]);

    const auto fl = expect_key("floor");
    if (fl.size() != 1) throw parse_error("malformed floor line: " + path);
    const double floor = std::stod(fl[0]);

    if (!detail::read_header_line(in, path).empty())
        throw parse_error("missing blank line before payload: " + path);

    Domain domain = [&] {
        switch (kind) {
            case DomainKind::polydisk: return Domain::polydisk(dim);
            case DomainKind::ball: return Domain::ball(dim, radius);
            case DomainKind::disk: return Domain::disk();
            case DomainKind::custom:
                return Domain::custom(dim, [](const std::vector<double>&) { return true; });
        }
        return Domain::polydisk(dim);
    }();

    GridFunction u(Grid(shape, origin, spacing), domain, floor);
    in.read(reinterpret_cast<char*>(u.values().data()),
            static_cast<std::streamsize>(u.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != u.size() * sizeof(double))
        throw parse_error("payload shorter than shape requires: " + path);
    for (std::size_t k = 0; k < u.size(); ++k)
        if (!std::isfinite(u[k])) throw parse_error("non-finite payload value: " + path);
    return u;
}

// Plotting sidecar: one "coord...,value" row per in-domain node.
inline void write_csv(const GridFunction& u, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open for writing: " + path);
    out.precision(17);
    for (int a = 0; a < u.grid().dim(); ++a) out << "t" << (a + 1) << ",";
    out << "value\n";
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!u.in_domain(k)) continue;
        const auto x = u.grid().coords(u.grid().unflat(k));
        for (double c : x) out << c << ",";
        out << u[k] << "\n";
    }
}

} // namespace pluripot
