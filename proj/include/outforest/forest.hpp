#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "outforest/bicomponents.hpp"
#include "outforest/digraph.hpp"
#include "outforest/matrix.hpp"

namespace outforest {

// A spanning diverging forest: every vertex has indegree at most one and the
// arc set is acyclic, so each weak component is a tree diverging from its
// root. |roots| + |arcs| = n.
struct OutForest {
    std::vector<Arc> arcs;   // sorted by (tail, head)
    Rational weight;         // product of arc weights; 1 for the empty forest
    std::vector<int> roots;  // sorted, 0-based

    friend bool operator==(const OutForest&, const OutForest&) = default;
};

// Aggregate data of the maximum out-forests of a digraph.
struct ForestCensus {
    int dimension = 0;              // components in any maximum out-forest (d)
    int max_arc_count = 0;          // n - d
    std::size_t count = 0;          // number of maximum out-forests
    Rational total_weight;          // f: summed weight of all of them
    Matrix<Rational> weight_matrix; // entry (i,j): weight of those with i in a tree rooted at j
};

// Row-stochastic matrix of maximum out-forests: entry (i,j) is the fraction
// of total forest weight carried by forests in which i belongs to a tree
// diverging from j. Idempotent, annihilates the Laplacian on both sides.
class ForestMatrix {
  public:
    ForestMatrix(Matrix<Rational> entries, ForestCensus census)
        : entries_(std::move(entries)), census_(std::move(census)) {}

    const Matrix<Rational>& entries() const { return entries_; }
    const ForestCensus& census() const { return census_; }
    int size() const { return static_cast<int>(entries_.rows()); }
    Matrix<double> to_double() const { return outforest::to_double(entries_); }

  private:
    Matrix<Rational> entries_;
    ForestCensus census_;
};

struct enumeration_cap_error : std::runtime_error {
    enumeration_cap_error(int n, int cap)
        : std::runtime_error("forest enumeration refused: digraph has " + std::to_string(n) +
                             " vertices, enumeration cap is " + std::to_string(cap) +
                             " (enumeration is exponential; raise the cap explicitly to force)"),
          vertex_count(n), cap(cap) {}
    int vertex_count;
    int cap;
};

inline constexpr int kDefaultEnumerationCap = 12;

namespace detail {

// Depth-first enumeration of all out-forests with exactly `target_arcs` arcs,
// visiting arcs in (tail, head) order so forests are produced in lexicographic
// order of their sorted arc lists. An arc is rejected when its head already
// has a parent or when it would close a cycle; branches that cannot reach the
// target size any more are cut.
class MaxForestEnumerator {
  public:
    // parent[v] is the tail of the chosen arc into v, or -1.
    using Callback = std::function<void(const std::vector<int>& chosen_arcs,
                                        const std::vector<int>& parent,
                                        const Rational& weight)>;

    MaxForestEnumerator(const WeightedDigraph& g, int target_arcs)
        : arcs_(g.arcs()), target_(target_arcs), parent_(g.vertex_count(), -1) {}

    void run(const Callback& emit) {
        emit_ = &emit;
        chosen_.clear();
        weight_stack_.assign(1, Rational(1));
        descend(0);
    }

  private:
    bool closes_cycle(int tail, int head) const {
        for (int v = tail; v != -1; v = parent_[v])
            if (v == head) return true;
        return false;
    }

    void descend(std::size_t first) {
        if (static_cast<int>(chosen_.size()) == target_) {
            (*emit_)(chosen_, parent_, weight_stack_.back());
            return;
        }
        const std::size_t needed = static_cast<std::size_t>(target_) - chosen_.size();
        for (std::size_t k = first; k + needed <= arcs_.size(); ++k) {
            const Arc& arc = arcs_[k];
            if (parent_[arc.head] != -1 || closes_cycle(arc.tail, arc.head)) continue;
            parent_[arc.head] = arc.tail;
            chosen_.push_back(static_cast<int>(k));
            weight_stack_.push_back(Rational(weight_stack_.back() * arc.weight));
            descend(k + 1);
            weight_stack_.pop_back();
            chosen_.pop_back();
            parent_[arc.head] = -1;
        }
    }

    const std::vector<Arc>& arcs_;
    int target_;
    std::vector<int> parent_;
    std::vector<int> chosen_;
    std::vector<Rational> weight_stack_;
    const Callback* emit_ = nullptr;
};

inline void check_cap(const WeightedDigraph& g, int cap) {
    if (g.vertex_count() > cap) throw enumeration_cap_error(g.vertex_count(), cap);
}

inline OutForest build_forest(const WeightedDigraph& g, const std::vector<int>& chosen_arcs,
                              const std::vector<int>& parent, const Rational& weight) {
    OutForest f;
    f.arcs.reserve(chosen_arcs.size());
    for (int k : chosen_arcs) f.arcs.push_back(g.arcs()[k]);
    f.weight = weight;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (parent[v] == -1) f.roots.push_back(v);
    return f;
}

// Walks parent links from v to the root of its tree.
inline int tree_root(const std::vector<int>& parent, int v) {
    while (parent[v] != -1) v = parent[v];
    return v;
}

inline void for_each_max_forest(const WeightedDigraph& g, int cap,
                                const MaxForestEnumerator::Callback& emit) {
    check_cap(g, cap);
    const int target = g.vertex_count() - max_forest_dimension(g);
    MaxForestEnumerator(g, target).run(emit);
}

}  // namespace detail

// All maximum out-forests in lexicographic order of their sorted arc lists.
inline std::vector<OutForest> enumerate_max_forests(const WeightedDigraph& g,
                                                    int cap = kDefaultEnumerationCap) {
    std::vector<OutForest> forests;
    detail::for_each_max_forest(g, cap, [&](const std::vector<int>& chosen,
                                            const std::vector<int>& parent, const Rational& w) {
        forests.push_back(detail::build_forest(g, chosen, parent, w));
    });
    return forests;
}

// Forest matrix plus census, streamed over the enumeration without
// materializing the forests.
inline ForestMatrix forest_matrix(const WeightedDigraph& g, int cap = kDefaultEnumerationCap) {
    detail::check_cap(g, cap);
    const int n = g.vertex_count();
    ForestCensus census;
    census.dimension = max_forest_dimension(g);
    census.max_arc_count = n - census.dimension;
    census.total_weight = 0;
    census.weight_matrix = Matrix<Rational>(n, n);

    detail::MaxForestEnumerator enumerator(g, census.max_arc_count);
    enumerator.run([&](const std::vector<int>&, const std::vector<int>& parent, const Rational& w) {
        ++census.count;
        census.total_weight += w;
        for (int v = 0; v < n; ++v)
            census.weight_matrix(v, detail::tree_root(parent, v)) += w;
    });

    if (census.count == 0)
        throw std::logic_error("no maximum out-forest found; structural dimension is inconsistent");

    Matrix<Rational> entries = census.weight_matrix;
    for (std::size_t i = 0; i < entries.rows(); ++i)
        for (std::size_t j = 0; j < entries.cols(); ++j) entries(i, j) /= census.total_weight;
    return ForestMatrix(std::move(entries), std::move(census));
}

// Second construction of the same forest set: cross all spanning diverging
// trees of each basic bicomponent with all maximum out-forests of the digraph
// stripped of the bicomponent-internal arcs. Serves as an independent oracle
// for enumerate_max_forests.
inline std::vector<OutForest> compose_max_forests(const WeightedDigraph& g,
                                                  int cap = kDefaultEnumerationCap) {
    detail::check_cap(g, cap);
    const int n = g.vertex_count();
    const BicomponentDecomposition decomposition = bicomponents(g);

    // Tree sets are enumerated on the digraph restricted to one bicomponent's
    // internal arcs; a maximum out-forest there is a spanning diverging tree
    // of the bicomponent plus isolated vertices elsewhere.
    std::vector<std::vector<OutForest>> tree_sets;
    for (int b : decomposition.basic_components) {
        const auto& members = decomposition.components[b];
        std::vector<Arc> internal;
        for (const auto& arc : g.arcs())
            if (decomposition.component_of[arc.tail] == b &&
                decomposition.component_of[arc.head] == b)
                internal.push_back(arc);
        WeightedDigraph restricted = WeightedDigraph::from_arcs(n, std::move(internal));
        const int target = static_cast<int>(members.size()) - 1;
        std::vector<OutForest> trees;
        detail::MaxForestEnumerator(restricted, target)
            .run([&](const std::vector<int>& chosen, const std::vector<int>& parent,
                     const Rational& w) {
                trees.push_back(detail::build_forest(restricted, chosen, parent, w));
            });
        tree_sets.push_back(std::move(trees));
    }

    std::vector<Arc> external;
    for (const auto& arc : g.arcs()) {
        int ct = decomposition.component_of[arc.tail];
        if (ct == decomposition.component_of[arc.head] && decomposition.is_basic[ct]) continue;
        external.push_back(arc);
    }
    WeightedDigraph stripped = WeightedDigraph::from_arcs(n, std::move(external));
    std::vector<OutForest> outer = enumerate_max_forests(stripped, cap);

    std::vector<OutForest> combined;
    std::vector<std::size_t> pick(tree_sets.size(), 0);
    for (const auto& outer_forest : outer) {
        std::fill(pick.begin(), pick.end(), 0);
        while (true) {
            OutForest f;
            f.arcs = outer_forest.arcs;
            f.weight = outer_forest.weight;
            for (std::size_t t = 0; t < tree_sets.size(); ++t) {
                const OutForest& tree = tree_sets[t][pick[t]];
                f.arcs.insert(f.arcs.end(), tree.arcs.begin(), tree.arcs.end());
                f.weight *= tree.weight;
            }
            std::sort(f.arcs.begin(), f.arcs.end(), arc_order);
            std::vector<bool> has_parent(n, false);
            for (const auto& arc : f.arcs) has_parent[arc.head] = true;
            for (int v = 0; v < n; ++v)
                if (!has_parent[v]) f.roots.push_back(v);
            combined.push_back(std::move(f));

            std::size_t t = 0;
            while (t < pick.size() && ++pick[t] == tree_sets[t].size()) pick[t++] = 0;
            if (t == pick.size()) break;
        }
    }

    std::sort(combined.begin(), combined.end(), [](const OutForest& a, const OutForest& b) {
        return std::lexicographical_compare(a.arcs.begin(), a.arcs.end(), b.arcs.begin(),
                                            b.arcs.end(), arc_order);
    });
    return combined;
}

// One forest per line: `#<index> weight=<w> arcs=(t1->h1,t2->h2,...)` with
// 1-based vertices and arcs sorted by (tail, head).
inline std::string format_forest_listing(const std::vector<OutForest>& forests) {
    std::ostringstream out;
    for (std::size_t k = 0; k < forests.size(); ++k) {
        out << "#" << k + 1 << " weight=" << to_string(forests[k].weight) << " arcs=(";
        for (std::size_t a = 0; a < forests[k].arcs.size(); ++a) {
            if (a > 0) out << ",";
            out << forests[k].arcs[a].tail + 1 << "->" << forests[k].arcs[a].head + 1;
        }
        out << ")\n";
    }
    return out.str();
}

}  // namespace outforest
