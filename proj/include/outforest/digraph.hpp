#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "outforest/matrix.hpp"
#include "outforest/rational.hpp"

namespace outforest {

// One weighted arc, 0-based vertex indices. The arc tail->head means the tail
// agent influences the head agent.
struct Arc {
    int tail = 0;
    int head = 0;
    Rational weight;

    friend bool operator==(const Arc& a, const Arc& b) {
        return a.tail == b.tail && a.head == b.head && a.weight == b.weight;
    }
};

inline bool arc_order(const Arc& a, const Arc& b) {
    return std::tie(a.tail, a.head) < std::tie(b.tail, b.head);
}

// An influence entry a_ij > 0: agent i weighs its discrepancy with agent j.
struct InfluenceEntry {
    int agent = 0;     // i
    int neighbor = 0;  // j
    Rational weight;
};

// Communication digraph of the consensus model. The influence matrix A and
// the digraph are two views of the same data: entry a_ij > 0 corresponds to
// the arc j->i carrying weight a_ij. That reversal happens exactly once, in
// this constructor.
class WeightedDigraph {
  public:
    WeightedDigraph(int n, const std::vector<InfluenceEntry>& entries) : n_(n) {
        if (n < 1) throw std::invalid_argument("digraph requires at least one vertex");
        arcs_.reserve(entries.size());
        for (const auto& e : entries) {
            check_vertex(e.agent);
            check_vertex(e.neighbor);
            if (e.agent == e.neighbor)
                throw std::invalid_argument("self-influence entries are not allowed");
            if (e.weight <= 0) throw std::invalid_argument("influence weights must be positive");
            arcs_.push_back(Arc{e.neighbor, e.agent, e.weight});
        }
        normalize();
    }

    // Builds directly from arcs; used for derived digraphs (induced subgraphs,
    // arc removals) where the influence reversal has already been applied.
    static WeightedDigraph from_arcs(int n, std::vector<Arc> arcs) {
        WeightedDigraph g;
        g.n_ = n;
        if (n < 1) throw std::invalid_argument("digraph requires at least one vertex");
        for (const auto& a : arcs) {
            g.check_vertex(a.tail);
            g.check_vertex(a.head);
            if (a.tail == a.head) throw std::invalid_argument("self-loops are not allowed");
            if (a.weight <= 0) throw std::invalid_argument("arc weights must be positive");
        }
        g.arcs_ = std::move(arcs);
        g.normalize();
        return g;
    }

    int vertex_count() const { return n_; }
    const std::vector<Arc>& arcs() const { return arcs_; }

    // The influence matrix A: a_ij = weight of arc j->i (0 when absent).
    Matrix<Rational> influence_matrix() const {
        Matrix<Rational> a(static_cast<std::size_t>(n_), static_cast<std::size_t>(n_));
        for (const auto& arc : arcs_) a(arc.head, arc.tail) = arc.weight;
        return a;
    }

    friend bool operator==(const WeightedDigraph&, const WeightedDigraph&) = default;

  private:
    WeightedDigraph() = default;

    void check_vertex(int v) const {
        if (v < 0 || v >= n_) throw std::invalid_argument("vertex index out of range");
    }

    void normalize() {
        std::sort(arcs_.begin(), arcs_.end(), arc_order);
        for (std::size_t k = 1; k < arcs_.size(); ++k)
            if (arcs_[k - 1].tail == arcs_[k].tail && arcs_[k - 1].head == arcs_[k].head)
                throw std::invalid_argument("duplicate arc");
    }

    int n_ = 0;
    std::vector<Arc> arcs_;
};

struct parse_error : std::runtime_error {
    parse_error(int line_number, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + what),
          line(line_number) {}
    int line;
};

// Digraph file format: '#' comments and blank lines ignored; first significant
// line "n <count>"; then "a <i> <j> <weight>" lines declaring a_ij = weight
// with 1-based i != j and weight a positive "p/q" or decimal literal.
inline WeightedDigraph parse_digraph(std::istream& in) {
    int n = -1;
    std::vector<InfluenceEntry> entries;
    std::map<std::pair<int, int>, int> seen;  // (i,j) -> first line
    std::string line;
    int line_number = 0;

    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream fields(line);
        std::string tag;
        if (!(fields >> tag) || tag.front() == '#') continue;

        if (tag == "n") {
            if (n >= 0) throw parse_error(line_number, "repeated 'n' line");
            std::string count;
            if (!(fields >> count) || !detail::all_digits(count))
                throw parse_error(line_number, "expected 'n <count>'");
            n = std::stoi(count);
            if (n < 1) throw parse_error(line_number, "vertex count must be at least 1");
        } else if (tag == "a") {
            if (n < 0) throw parse_error(line_number, "'a' line before 'n' line");
            long i = 0, j = 0;
            std::string weight_text;
            if (!(fields >> i >> j >> weight_text))
                throw parse_error(line_number, "expected 'a <i> <j> <weight>'");
            if (i < 1 || i > n || j < 1 || j > n)
                throw parse_error(line_number, "vertex index out of 1.." + std::to_string(n));
            if (i == j) throw parse_error(line_number, "self-influence entry (i == j)");
            Rational w;
            try {
                w = rational_from_string(weight_text);
            } catch (const std::invalid_argument& e) {
                throw parse_error(line_number, e.what());
            }
            if (w <= 0) throw parse_error(line_number, "weight must be positive");
            auto [it, inserted] = seen.emplace(std::make_pair(int(i), int(j)), line_number);
            if (!inserted)
                throw parse_error(line_number,
                                  "duplicate entry for a(" + std::to_string(i) + "," +
                                      std::to_string(j) + "), first seen on line " +
                                      std::to_string(it->second));
            entries.push_back(InfluenceEntry{int(i) - 1, int(j) - 1, w});
        } else {
            throw parse_error(line_number, "unrecognized directive '" + tag + "'");
        }
        std::string rest;
        if (fields >> rest && rest.front() != '#')
            throw parse_error(line_number, "trailing content '" + rest + "'");
    }
    if (n < 0) throw parse_error(line_number, "missing 'n' line");
    return WeightedDigraph(n, entries);
}

inline WeightedDigraph parse_digraph(const std::string& text) {
    std::istringstream in(text);
    return parse_digraph(in);
}

inline WeightedDigraph parse_digraph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    return parse_digraph(in);
}

// Inverse of parse_digraph up to comment lines: emits influence entries in
// (i, j) order.
inline std::string serialize_digraph(const WeightedDigraph& g) {
    std::vector<std::tuple<int, int, Rational>> entries;
    entries.reserve(g.arcs().size());
    for (const auto& arc : g.arcs()) entries.emplace_back(arc.head, arc.tail, arc.weight);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) {
                  return std::tie(std::get<0>(a), std::get<1>(a)) <
                         std::tie(std::get<0>(b), std::get<1>(b));
              });
    std::ostringstream out;
    out << "n " << g.vertex_count() << "\n";
    for (const auto& [i, j, w] : entries)
        out << "a " << i + 1 << " " << j + 1 << " " << to_string(w) << "\n";
    return out.str();
}

}  // namespace outforest
