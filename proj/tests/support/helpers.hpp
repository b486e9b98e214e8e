#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "scrawl/ink.hpp"
#include "scrawl/matrix.hpp"
#include "scrawl/rng.hpp"

namespace scrawl::test {

inline num::Matrix random_matrix(int rows, int cols, Rng& rng, double lo = -0.5, double hi = 0.5) {
    num::Matrix m(rows, cols);
    for (int i = 0; i < m.size(); ++i) m[i] = uniform(rng, lo, hi);
    return m;
}

// Random multi-stroke character (a jittered random walk per stroke),
// guaranteed to have horizontal extent.
inline ink::InkSequence random_ink(Rng& rng, int max_strokes = 3, int max_points = 12) {
    ink::InkSequence seq;
    const int strokes = uniform_int(rng, 1, max_strokes);
    for (int s = 0; s < strokes; ++s) {
        const int points = uniform_int(rng, 2, max_points);
        double x = uniform(rng, -1.0, 1.0);
        double y = uniform(rng, -1.0, 1.0);
        for (int i = 0; i < points; ++i) {
            seq.points.push_back({x, y, s});
            x += uniform(rng, 0.05, 0.4) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0);
            y += uniform(rng, -0.3, 0.3);
        }
    }
    return seq;
}

// Minimal well-formedness check for the SVG documents this project emits:
// an optional XML declaration, properly nested tags, quoted attributes.
inline bool is_well_formed_xml(const std::string& text) {
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\n' || text[i] == '\t' || text[i] == '\r')) ++i;
    };
    skip_ws();
    if (text.compare(i, 5, "<?xml") == 0) {
        const std::size_t end = text.find("?>", i);
        if (end == std::string::npos) return false;
        i = end + 2;
    }
    std::vector<std::string> stack;
    bool seen_root = false;
    while (i < text.size()) {
        skip_ws();
        if (i >= text.size()) break;
        if (text[i] != '<') { // character data, no raw '<' or '&' allowed
            if (text[i] == '&') return false;
            ++i;
            continue;
        }
        if (seen_root && stack.empty()) return false; // trailing content after root
        std::size_t j = i + 1;
        const bool closing = j < text.size() && text[j] == '/';
        if (closing) ++j;
        std::size_t name_start = j;
        while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == ':' ||
                                   text[j] == '_' || text[j] == '-'))
            ++j;
        if (j == name_start) return false;
        const std::string name = text.substr(name_start, j - name_start);
        if (closing) {
            while (j < text.size() && text[j] != '>') ++j;
            if (j >= text.size()) return false;
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
            i = j + 1;
            continue;
        }
        // attributes: name="value" pairs until '>' or '/>'
        bool self_closed = false;
        while (j < text.size() && text[j] != '>') {
            if (text[j] == '/' && j + 1 < text.size() && text[j + 1] == '>') {
                self_closed = true;
                ++j;
                break;
            }
            if (text[j] == '"') {
                ++j;
                while (j < text.size() && text[j] != '"') {
                    if (text[j] == '<') return false;
                    ++j;
                }
                if (j >= text.size()) return false;
            }
            ++j;
        }
        if (j >= text.size()) return false;
        seen_root = true;
        if (!self_closed) stack.push_back(name);
        i = j + 1;
    }
    return stack.empty() && seen_root;
}

} // namespace scrawl::test
