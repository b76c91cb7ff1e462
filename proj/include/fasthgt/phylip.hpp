#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fasthgt/distance_matrix.hpp"
#include "fasthgt/errors.hpp"

namespace fasthgt {

namespace detail {

inline std::string phylip_value(double d) {
    if (is_infinite_distance(d)) return "Inf";
    if (d == 0.0) return "0";  // avoid "-0" for the diagonal (-ln of closeness 1)
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

struct Tokenizer {
    std::string_view text;
    std::size_t pos = 0;

    std::optional<std::pair<std::string_view, std::size_t>> next() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos >= text.size()) return std::nullopt;
        const std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        return std::make_pair(text.substr(start, pos - start), start);
    }
};

}  // namespace detail

// Square distance matrix: first line is the taxon count, then one row per
// taxon as `name  d0 d1 ...`. Pairs without a usable estimate print as Inf.
inline void write_phylip(std::ostream& os, const DistanceMatrix& d) {
    const int n = d.size();
    for (const std::string& name : d.names()) {
        for (const char c : name)
            if (std::isspace(static_cast<unsigned char>(c)))
                throw ValidationError("taxon name contains whitespace: '" + name + "'");
    }
    os << n << '\n';
    for (int i = 0; i < n; ++i) {
        os << d.names()[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) os << "  " << detail::phylip_value(d.distance(i, j));
        os << '\n';
    }
    if (!os) throw IoError("failed writing distance matrix");
}

inline DistanceMatrix read_phylip(std::istream& is) {
    const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    detail::Tokenizer tok{text};

    const auto header = tok.next();
    if (!header) throw ParseError("empty distance matrix", 0);
    int n = 0;
    {
        const auto [sv, off] = *header;
        const auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), n);
        if (ec != std::errc{} || p != sv.data() + sv.size() || n < 2)
            throw ParseError("first token must be the taxon count (>= 2)", off);
    }

    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(n));
    std::vector<double> closeness(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto nameTok = tok.next();
        if (!nameTok) throw ParseError("matrix ends before row " + std::to_string(i), text.size());
        names.emplace_back(nameTok->first);
        for (int j = 0; j < n; ++j) {
            const auto valTok = tok.next();
            if (!valTok)
                throw ParseError("row '" + names.back() + "' has fewer than " + std::to_string(n) + " values",
                                 text.size());
            const auto [sv, off] = *valTok;
            double v = 0.0;
            const auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
            if (ec != std::errc{} || p != sv.data() + sv.size() || std::isnan(v) || v < 0.0)
                throw ParseError("invalid distance '" + std::string(sv) + "'", off);
            if (i == j && v != 0.0) throw ParseError("diagonal distances must be 0", off);
            closeness[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] =
                std::isinf(v) ? 0.0 : std::exp(-v);
        }
    }
    if (const auto extra = tok.next())
        throw ParseError("trailing content after the matrix", extra->second);
    return DistanceMatrix::from_closeness(std::move(names), std::move(closeness));
}

inline DistanceMatrix load_phylip(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_phylip(in);
}

inline void save_phylip(const std::string& path, const DistanceMatrix& d) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_phylip(out, d);
    out.flush();
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace fasthgt
