#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>
#include <vector>

#include "fasthgt/errors.hpp"
#include "fasthgt/simulate.hpp"

namespace fasthgt {

// Writes records as `>name` followed by symbol text wrapped near 70 columns.
// Lines break only between whole symbols, so multi-character symbols (the
// S0..S(m-1) alphabet used when m != 4) never split across lines.
inline void write_fasta(std::ostream& os, const SequenceSet& s) {
    const std::vector<std::string> sym = s.model.alphabet();
    for (std::size_t i = 0; i < s.seqs.size(); ++i) {
        os << '>' << s.names[i] << '\n';
        std::string line;
        line.reserve(80);
        for (const std::uint8_t id : s.seqs[i]) {
            line += sym[id];
            if (line.size() >= 70) {
                os << line << '\n';
                line.clear();
            }
        }
        if (!line.empty()) os << line << '\n';
    }
    if (!os) throw IoError("failed writing sequence data");
}

// Reads aligned records; `m` selects the alphabet (A,C,G,T when m = 4,
// otherwise concatenated S<id> tokens). The returned model carries only m;
// mutation bounds are unknown for parsed data and stay 0.
inline SequenceSet read_fasta(std::istream& is, int m) {
    if (m < 2 || m > 256) throw ValidationError("alphabet size m must be in [2, 256]");
    const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

    SequenceSet out;
    out.model = EvoModel{m, 0.0, 0.0};

    std::size_t pos = 0;
    const std::size_t size = text.size();
    auto isSpace = [&](std::size_t at) { return std::isspace(static_cast<unsigned char>(text[at])) != 0; };
    while (pos < size && isSpace(pos)) ++pos;
    if (pos < size && text[pos] != '>') throw ParseError("expected '>' to start a record", pos);

    while (pos < size) {
        ++pos;  // consume '>'
        std::size_t nameEnd = pos;
        while (nameEnd < size && text[nameEnd] != '\n') ++nameEnd;
        std::string name = text.substr(pos, nameEnd - pos);
        while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();
        if (name.empty()) throw ParseError("record has an empty name", pos);
        pos = nameEnd;

        std::vector<std::uint8_t> seq;
        while (pos < size && text[pos] != '>') {
            const char c = text[pos];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
                continue;
            }
            if (m == 4) {
                std::uint8_t id = 0;
                switch (std::toupper(static_cast<unsigned char>(c))) {
                    case 'A': id = 0; break;
                    case 'C': id = 1; break;
                    case 'G': id = 2; break;
                    case 'T': id = 3; break;
                    default: throw ParseError(std::string("unexpected symbol '") + c + "'", pos);
                }
                seq.push_back(id);
                ++pos;
            } else {
                if (c != 'S') throw ParseError(std::string("expected 'S' symbol token, got '") + c + "'", pos);
                std::size_t digits = pos + 1;
                unsigned long id = 0;
                while (digits < size && text[digits] >= '0' && text[digits] <= '9') {
                    id = id * 10 + static_cast<unsigned long>(text[digits] - '0');
                    if (id >= 256) throw ParseError("symbol id out of range", pos);
                    ++digits;
                }
                if (digits == pos + 1) throw ParseError("symbol token 'S' lacks digits", pos);
                if (id >= static_cast<unsigned long>(m))
                    throw ParseError("symbol S" + std::to_string(id) + " outside alphabet of size " + std::to_string(m), pos);
                seq.push_back(static_cast<std::uint8_t>(id));
                pos = digits;
            }
        }
        out.names.push_back(std::move(name));
        out.seqs.push_back(std::move(seq));
    }

    if (out.seqs.empty()) throw ValidationError("no sequence records found");
    const std::size_t len = out.seqs.front().size();
    if (len == 0) throw ValidationError("sequences must be non-empty");
    for (std::size_t i = 0; i < out.seqs.size(); ++i) {
        if (out.seqs[i].size() != len)
            throw ValidationError("record '" + out.names[i] + "' length differs from the first record");
        for (std::size_t j = 0; j < i; ++j)
            if (out.names[j] == out.names[i])
                throw ValidationError("duplicate record name: " + out.names[i]);
    }
    return out;
}

inline SequenceSet load_fasta(const std::string& path, int m) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_fasta(in, m);
}

inline void save_fasta(const std::string& path, const SequenceSet& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_fasta(out, s);
    out.flush();
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace fasthgt
