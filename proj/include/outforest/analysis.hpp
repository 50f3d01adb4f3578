#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "outforest/bicomponents.hpp"
#include "outforest/dynamics.hpp"
#include "outforest/forest.hpp"
#include "outforest/laplacian.hpp"
#include "outforest/matrix.hpp"

namespace outforest {

using RationalVector = std::vector<Rational>;

inline RationalVector rational_state(const StateVector& x) {
    RationalVector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]))
            throw std::invalid_argument("state vector entries must be finite");
        r[i] = rational_from_double(x[i]);
    }
    return r;
}

// J x0, the limiting state of the flow started at x0. Exact when x0 is given
// exactly.
inline RationalVector limiting_state(const ForestMatrix& j, const RationalVector& x0) {
    if (x0.size() != j.entries().rows())
        throw std::invalid_argument("state vector length does not match the forest matrix");
    return j.entries() * x0;
}

inline StateVector limiting_state(const ForestMatrix& j, const StateVector& x0) {
    return to_double(limiting_state(j, rational_state(x0)));
}

// Outcome of one checked clause. `applicable` is false when no vertex
// qualifies (the check is then vacuous rather than passed).
struct ClauseResult {
    bool applicable = false;
    bool pass = true;
    std::vector<std::string> witnesses;
};

// Instance-level verification of the three structural facts about the
// limiting state: shared values inside a basic bicomponent (and its exclusive
// followers), betweenness for vertices fed by several bicomponents, and
// irrelevance of initial values at vertices outside every basic bicomponent.
struct LimitStructureReport {
    ClauseResult shared_value;    // clause (i)
    ClauseResult betweenness;     // clause (ii)
    ClauseResult free_vertices;   // clause (iii)
    bool all_pass() const {
        return shared_value.pass && betweenness.pass && free_vertices.pass;
    }
};

namespace detail {

// Consensus value of one strongly connected component considered alone:
// restrict the digraph to the component, take any row of its forest matrix as
// the left eigenvector, and average the initial values with those weights.
inline Rational standalone_consensus_value(const WeightedDigraph& g,
                                           const std::vector<int>& members,
                                           const RationalVector& x0) {
    std::vector<int> position(g.vertex_count(), -1);
    for (std::size_t k = 0; k < members.size(); ++k) position[members[k]] = static_cast<int>(k);
    std::vector<Arc> internal;
    for (const auto& arc : g.arcs())
        if (position[arc.tail] >= 0 && position[arc.head] >= 0)
            internal.push_back(Arc{position[arc.tail], position[arc.head], arc.weight});
    WeightedDigraph restricted =
        WeightedDigraph::from_arcs(static_cast<int>(members.size()), std::move(internal));
    ForestMatrix j = forest_matrix(restricted, restricted.vertex_count());
    Rational value = 0;
    for (std::size_t k = 0; k < members.size(); ++k) value += j.entries()(0, k) * x0[members[k]];
    return value;
}

inline std::string vertex_list(const std::vector<int>& vertices) {
    std::ostringstream out;
    out << "{";
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        if (k) out << ",";
        out << vertices[k] + 1;
    }
    out << "}";
    return out.str();
}

}  // namespace detail

inline LimitStructureReport check_limit_structure(const WeightedDigraph& g, const ForestMatrix& j,
                                         const RationalVector& x0) {
    if (x0.size() != j.entries().rows())
        throw std::invalid_argument("state vector length does not match the forest matrix");
    const BicomponentDecomposition decomposition = bicomponents(g);
    const RationalVector limit = j.entries() * x0;
    const int n = g.vertex_count();

    LimitStructureReport report;

    // Clause: every vertex of a basic bicomponent, and every vertex reachable
    // from it alone, carries that bicomponent's standalone consensus value.
    for (int b : decomposition.basic_components) {
        const auto& members = decomposition.components[b];
        const Rational value = detail::standalone_consensus_value(g, members, x0);
        report.shared_value.applicable = true;
        for (int v : members) {
            const bool ok = limit[v] == value;
            if (!ok) report.shared_value.pass = false;
            report.shared_value.witnesses.push_back(
                "vertex " + std::to_string(v + 1) + " in " + detail::vertex_list(members) +
                " limit " + to_string(limit[v]) + (ok ? " == " : " != ") +
                "standalone consensus " + to_string(value));
        }
        for (int v = 0; v < n; ++v) {
            if (decomposition.vertex_in_basic(v)) continue;
            if (decomposition.reachable_from[v].size() == 1 &&
                decomposition.reachable_from[v][0] == b) {
                const bool ok = limit[v] == value;
                if (!ok) report.shared_value.pass = false;
                report.shared_value.witnesses.push_back(
                    "vertex " + std::to_string(v + 1) + " reachable only from " +
                    detail::vertex_list(members) + " limit " + to_string(limit[v]) +
                    (ok ? " == " : " != ") + to_string(value));
            }
        }
    }

    // Clause: a vertex fed by several basic bicomponents lies between their
    // values, strictly when those differ.
    for (int v = 0; v < n; ++v) {
        if (decomposition.vertex_in_basic(v)) continue;
        const auto& sources = decomposition.reachable_from[v];
        if (sources.size() < 2) continue;
        report.betweenness.applicable = true;
        Rational low = limit[decomposition.components[sources[0]].front()];
        Rational high = low;
        for (int b : sources) {
            const Rational value = limit[decomposition.components[b].front()];
            low = std::min(low, value);
            high = std::max(high, value);
        }
        bool ok;
        std::string relation;
        if (low == high) {
            ok = limit[v] == low;
            relation = ok ? "equals the common source value" : "differs from the common source value";
        } else {
            ok = low < limit[v] && limit[v] < high;
            relation = ok ? "strictly between" : "not strictly between";
        }
        if (!ok) report.betweenness.pass = false;
        report.betweenness.witnesses.push_back("vertex " + std::to_string(v + 1) + " limit " +
                                               to_string(limit[v]) + " " + relation + " " +
                                               to_string(low) + " and " + to_string(high));
    }

    // Clause: vertices outside every basic bicomponent have zero columns in J,
    // so perturbing their initial values leaves the limit untouched.
    for (int v = 0; v < n; ++v) {
        if (decomposition.vertex_in_basic(v)) continue;
        report.free_vertices.applicable = true;
        bool column_zero = true;
        for (int i = 0; i < n; ++i)
            if (j.entries()(i, v) != 0) column_zero = false;
        RationalVector perturbed = x0;
        perturbed[v] += 1;
        const bool unchanged = (j.entries() * perturbed) == limit;
        const bool ok = column_zero && unchanged;
        if (!ok) report.free_vertices.pass = false;
        report.free_vertices.witnesses.push_back(
            "vertex " + std::to_string(v + 1) + ": column " +
            (column_zero ? "zero" : "nonzero") + ", limit " +
            (unchanged ? "unchanged" : "changed") + " under perturbation");
    }

    return report;
}

// Residuals of the time-shift identity J x(t) = J x(0) at the requested
// times, plus the pairwise variant J (x(t1) - x(t2)) = 0.
struct TimeShiftReport {
    std::vector<std::pair<double, double>> residuals;            // (t, |J x(t) - J x0|_inf)
    std::vector<std::pair<std::pair<double, double>, double>> pair_residuals;
    double tolerance = 1e-8;
    bool pass = true;
};

inline TimeShiftReport check_time_shift(const LaplacianMatrix& l, const ForestMatrix& j,
                                        const StateVector& x0, const std::vector<double>& times,
                                        double tolerance = 1e-8) {
    check_state(l, x0);
    for (double t : times)
        if (!std::isfinite(t)) throw std::invalid_argument("times must be finite");

    TimeShiftReport report;
    report.tolerance = tolerance;
    const Matrix<double> jf = j.to_double();
    const StateVector base = jf * x0;

    std::vector<StateVector> states;
    states.reserve(times.size());
    for (double t : times) states.push_back(matrix_exponential_action(l, t, x0));

    for (std::size_t k = 0; k < times.size(); ++k) {
        const double residual = max_abs_diff(jf * states[k], base);
        if (residual > tolerance) report.pass = false;
        report.residuals.emplace_back(times[k], residual);
    }
    for (std::size_t a = 0; a < times.size(); ++a)
        for (std::size_t b = a + 1; b < times.size(); ++b) {
            StateVector difference(x0.size());
            for (std::size_t i = 0; i < x0.size(); ++i)
                difference[i] = states[a][i] - states[b][i];
            StateVector projected = jf * difference;
            double residual = 0.0;
            for (double v : projected) residual = std::max(residual, std::abs(v));
            if (residual > tolerance) report.pass = false;
            report.pair_residuals.push_back({{times[a], times[b]}, residual});
        }
    return report;
}

// Consensus diagnosis of the limiting state. With d = 1 the digraph has a
// spanning diverging tree, every row of J equals the normalized left null
// vector of L, and every initial state reaches consensus.
struct ConsensusVerdict {
    int dimension = 0;
    bool has_spanning_diverging_tree = false;
    std::optional<RationalVector> left_eigenvector;  // set when d = 1
    std::optional<bool> consensus_reached;           // set when x0 given
    std::optional<Rational> consensus_value;         // set when reached
    // One entry per basic bicomponent: (vertices, common limit value).
    std::vector<std::pair<std::vector<int>, Rational>> per_bicomponent_values;
};

inline ConsensusVerdict consensus_verdict(const WeightedDigraph& g, const ForestMatrix& j,
                                          const std::optional<RationalVector>& x0 = std::nullopt) {
    const BicomponentDecomposition decomposition = bicomponents(g);
    ConsensusVerdict verdict;
    verdict.dimension = decomposition.dimension();
    verdict.has_spanning_diverging_tree = verdict.dimension == 1;

    if (verdict.has_spanning_diverging_tree) {
        RationalVector row(j.entries().cols());
        Rational sum = 0;
        for (std::size_t k = 0; k < row.size(); ++k) {
            row[k] = j.entries()(0, k);
            sum += row[k];
        }
        if (sum != 1) throw std::logic_error("forest matrix row does not sum to 1");
        verdict.left_eigenvector = std::move(row);
    }

    if (x0) {
        const RationalVector limit = limiting_state(j, *x0);
        bool equal = true;
        for (const auto& v : limit)
            if (v != limit.front()) equal = false;
        verdict.consensus_reached = equal;
        if (equal) verdict.consensus_value = limit.front();
        for (int b : decomposition.basic_components)
            verdict.per_bicomponent_values.emplace_back(
                decomposition.components[b], limit[decomposition.components[b].front()]);
    }
    return verdict;
}

// Float-mode verdict: consensus decided within the tolerance instead of
// exactly.
inline ConsensusVerdict consensus_verdict(const WeightedDigraph& g, const ForestMatrix& j,
                                          const StateVector& x0, double tolerance) {
    ConsensusVerdict verdict = consensus_verdict(g, j, rational_state(x0));
    const RationalVector limit = limiting_state(j, rational_state(x0));
    double low = to_double(limit.front()), high = low;
    for (const auto& v : limit) {
        low = std::min(low, to_double(v));
        high = std::max(high, to_double(v));
    }
    verdict.consensus_reached = high - low <= tolerance;
    if (*verdict.consensus_reached && !verdict.consensus_value)
        verdict.consensus_value = limit.front();
    return verdict;
}

}  // namespace outforest
