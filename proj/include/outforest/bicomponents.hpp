#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "outforest/digraph.hpp"

namespace outforest {

// Strongly connected components of the communication digraph, the subset of
// them with no incoming arcs from outside (the basic bicomponents, i.e. the
// sources of the condensation), and per-vertex reachability from those.
struct BicomponentDecomposition {
    std::vector<std::vector<int>> components;  // each sorted; ordered by smallest vertex
    std::vector<int> component_of;             // vertex -> index into components
    std::vector<bool> is_basic;                // per component
    std::vector<int> basic_components;         // indices of basic components, ascending
    std::vector<std::vector<int>> reachable_from;  // vertex -> basic component indices

    // The out-forest dimension of the digraph equals the number of basic
    // bicomponents.
    int dimension() const { return static_cast<int>(basic_components.size()); }

    bool vertex_in_basic(int v) const { return is_basic[component_of[v]]; }
};

namespace detail {

// Iterative Tarjan; deterministic because vertices and arc lists are visited
// in increasing order.
inline std::vector<std::vector<int>> strongly_connected_components(int n,
                                                                   const std::vector<std::vector<int>>& out) {
    std::vector<int> index(n, -1), lowlink(n, 0), frame_arc;
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack, call_stack;
    std::vector<std::vector<int>> components;
    int next_index = 0;

    for (int start = 0; start < n; ++start) {
        if (index[start] != -1) continue;
        call_stack.push_back(start);
        frame_arc.push_back(0);
        while (!call_stack.empty()) {
            int v = call_stack.back();
            if (frame_arc.back() == 0) {
                index[v] = lowlink[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            bool descended = false;
            for (std::size_t k = frame_arc.back(); k < out[v].size(); ++k) {
                int w = out[v][k];
                if (index[w] == -1) {
                    frame_arc.back() = static_cast<int>(k) + 1;
                    call_stack.push_back(w);
                    frame_arc.push_back(0);
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                std::vector<int> comp;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
            call_stack.pop_back();
            frame_arc.pop_back();
            if (!call_stack.empty()) {
                int parent = call_stack.back();
                lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
            }
        }
    }
    return components;
}

}  // namespace detail

inline BicomponentDecomposition bicomponents(const WeightedDigraph& g) {
    const int n = g.vertex_count();
    std::vector<std::vector<int>> out(n);
    for (const auto& arc : g.arcs()) out[arc.tail].push_back(arc.head);

    BicomponentDecomposition d;
    d.components = detail::strongly_connected_components(n, out);
    std::sort(d.components.begin(), d.components.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    const int c = static_cast<int>(d.components.size());
    d.component_of.assign(n, -1);
    for (int k = 0; k < c; ++k)
        for (int v : d.components[k]) d.component_of[v] = k;

    // Condensation arcs; a component with an incoming condensation arc is not
    // basic.
    std::set<std::pair<int, int>> cond_arcs;
    d.is_basic.assign(c, true);
    for (const auto& arc : g.arcs()) {
        int from = d.component_of[arc.tail], to = d.component_of[arc.head];
        if (from != to) {
            cond_arcs.emplace(from, to);
            d.is_basic[to] = false;
        }
    }
    for (int k = 0; k < c; ++k)
        if (d.is_basic[k]) d.basic_components.push_back(k);

    // Reachability over the condensation, seeded at each basic component.
    std::vector<std::vector<int>> cond_out(c);
    for (const auto& [from, to] : cond_arcs) cond_out[from].push_back(to);
    d.reachable_from.assign(n, {});
    for (int b : d.basic_components) {
        std::vector<bool> seen(c, false);
        std::vector<int> worklist{b};
        seen[b] = true;
        while (!worklist.empty()) {
            int k = worklist.back();
            worklist.pop_back();
            for (int next : cond_out[k])
                if (!seen[next]) {
                    seen[next] = true;
                    worklist.push_back(next);
                }
        }
        for (int v = 0; v < n; ++v)
            if (seen[d.component_of[v]]) d.reachable_from[v].push_back(b);
    }
    return d;
}

// The number of components in any maximum out-forest, read off structurally
// as the number of basic bicomponents.
inline int max_forest_dimension(const WeightedDigraph& g) {
    return bicomponents(g).dimension();
}

}  // namespace outforest
