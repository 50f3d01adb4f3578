#pragma once

#include <json.hpp>

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "outforest/analysis.hpp"
#include "outforest/bicomponents.hpp"
#include "outforest/dynamics.hpp"
#include "outforest/eigenprojection.hpp"
#include "outforest/forest.hpp"
#include "outforest/format.hpp"
#include "outforest/matrix.hpp"
#include "outforest/rational.hpp"

namespace outforest {

using nlohmann::json;

// Rationals serialize as {"num": p, "den": q}; components that do not fit a
// 64-bit integer fall back to decimal strings.
inline json json_rational(const Rational& q) {
    json j;
    const mpz_class num = q.get_num(), den = q.get_den();
    if (num.fits_slong_p())
        j["num"] = static_cast<std::int64_t>(num.get_si());
    else
        j["num"] = num.get_str();
    if (den.fits_slong_p())
        j["den"] = static_cast<std::int64_t>(den.get_si());
    else
        j["den"] = den.get_str();
    return j;
}

inline json json_matrix(const Matrix<Rational>& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(json_rational(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json json_matrix(const Matrix<double>& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json json_vector(const std::vector<double>& v) { return json(v); }

inline json json_vector(const RationalVector& v) {
    json a = json::array();
    for (const auto& q : v) a.push_back(json_rational(q));
    return a;
}

// Right-aligned columns, one matrix row per line.
inline std::string render_matrix(const Matrix<Rational>& m) {
    std::vector<std::vector<std::string>> cells(m.rows(), std::vector<std::string>(m.cols()));
    std::vector<std::size_t> width(m.cols(), 0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            cells[i][j] = to_string(m(i, j));
            width[j] = std::max(width[j], cells[i][j].size());
        }
    std::ostringstream out;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << "  ";
            out << std::string(width[j] - cells[i][j].size(), ' ') << cells[i][j];
        }
        out << "\n";
    }
    return out.str();
}

inline std::string render_matrix(const Matrix<double>& m) {
    std::vector<std::vector<std::string>> cells(m.rows(), std::vector<std::string>(m.cols()));
    std::vector<std::size_t> width(m.cols(), 0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            cells[i][j] = format_double(m(i, j));
            width[j] = std::max(width[j], cells[i][j].size());
        }
    std::ostringstream out;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << "  ";
            out << std::string(width[j] - cells[i][j].size(), ' ') << cells[i][j];
        }
        out << "\n";
    }
    return out.str();
}

inline std::string render_vector(const std::vector<double>& v) {
    std::ostringstream out;
    out << "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ", ";
        out << format_double(v[i]);
    }
    out << ")";
    return out.str();
}

inline std::string render_vector(const RationalVector& v) {
    std::ostringstream out;
    out << "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ", ";
        out << to_string(v[i]);
    }
    out << ")";
    return out.str();
}

inline json json_projection(const ProjectionEstimate& estimate) {
    json j;
    j["method"] = to_string(estimate.method);
    j["exact"] = estimate.exact_entries.has_value();
    if (estimate.exact_entries)
        j["entries"] = json_matrix(*estimate.exact_entries);
    else
        j["entries"] = json_matrix(estimate.entries);
    j["residuals"] = {{"max_row_sum_error", estimate.residuals.max_row_sum_error},
                      {"annihilation", estimate.residuals.annihilation},
                      {"idempotency", estimate.residuals.idempotency}};
    if (!estimate.convergence.empty()) {
        json c = json::array();
        for (const auto& [alpha, diff] : estimate.convergence)
            c.push_back({{"alpha", alpha}, {"step_diff", diff}});
        j["convergence"] = std::move(c);
    }
    if (!estimate.notes.empty()) j["notes"] = estimate.notes;
    return j;
}

inline json json_census(const ForestCensus& census) {
    return {{"count", census.count},
            {"d", census.dimension},
            {"max_arc_count", census.max_arc_count},
            {"f", json_rational(census.total_weight)}};
}

inline json json_forest(const OutForest& forest) {
    json arcs = json::array();
    for (const auto& a : forest.arcs) arcs.push_back({a.tail + 1, a.head + 1});
    json roots = json::array();
    for (int r : forest.roots) roots.push_back(r + 1);
    return {{"weight", json_rational(forest.weight)}, {"arcs", std::move(arcs)},
            {"roots", std::move(roots)}};
}

inline json json_clause(const ClauseResult& clause) {
    return {{"applicable", clause.applicable},
            {"pass", clause.pass},
            {"witnesses", clause.witnesses}};
}

inline json json_verdict(const ConsensusVerdict& verdict,
                         const BicomponentDecomposition& decomposition) {
    json j;
    j["d"] = verdict.dimension;
    j["has_spanning_diverging_tree"] = verdict.has_spanning_diverging_tree;
    json comps = json::array();
    for (std::size_t k = 0; k < decomposition.components.size(); ++k) {
        json vertices = json::array();
        for (int v : decomposition.components[k]) vertices.push_back(v + 1);
        comps.push_back({{"vertices", std::move(vertices)}, {"basic", bool(decomposition.is_basic[k])}});
    }
    j["components"] = std::move(comps);
    if (verdict.left_eigenvector) j["left_eigenvector"] = json_vector(*verdict.left_eigenvector);
    if (verdict.consensus_reached) j["consensus_reached"] = *verdict.consensus_reached;
    if (verdict.consensus_value) j["consensus_value"] = json_rational(*verdict.consensus_value);
    if (!verdict.per_bicomponent_values.empty()) {
        json values = json::array();
        for (const auto& [vertices, value] : verdict.per_bicomponent_values) {
            json vs = json::array();
            for (int v : vertices) vs.push_back(v + 1);
            values.push_back({{"vertices", std::move(vs)}, {"value", json_rational(value)}});
        }
        j["per_bicomponent_values"] = std::move(values);
    }
    return j;
}

}  // namespace outforest
