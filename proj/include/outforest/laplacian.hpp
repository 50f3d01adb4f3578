#pragma once

#include <utility>

#include "outforest/digraph.hpp"
#include "outforest/matrix.hpp"

namespace outforest {

// Laplacian L = diag(A*1) - A of the consensus model, stored exactly. Every
// row sums to zero; off-diagonal entries are nonpositive. Keeps the digraph it
// was built from so structural queries stay available downstream.
class LaplacianMatrix {
  public:
    const Matrix<Rational>& entries() const { return entries_; }
    const WeightedDigraph& graph() const { return graph_; }
    int size() const { return graph_.vertex_count(); }

    Matrix<double> to_double() const { return outforest::to_double(entries_); }

    // Largest off-diagonal row sum of A, i.e. the largest diagonal entry of L.
    // The reciprocal bounds the Perron step.
    Rational max_influence_row_sum() const {
        Rational m = 0;
        for (std::size_t i = 0; i < entries_.rows(); ++i)
            if (entries_(i, i) > m) m = entries_(i, i);
        return m;
    }

    friend LaplacianMatrix laplacian(const WeightedDigraph& g);

  private:
    LaplacianMatrix(Matrix<Rational> entries, WeightedDigraph graph)
        : entries_(std::move(entries)), graph_(std::move(graph)) {}

    Matrix<Rational> entries_;
    WeightedDigraph graph_;
};

inline LaplacianMatrix laplacian(const WeightedDigraph& g) {
    const auto n = static_cast<std::size_t>(g.vertex_count());
    Matrix<Rational> l(n, n);
    for (const auto& arc : g.arcs()) {
        // arc tail->head came from the influence entry a_{head,tail}
        l(arc.head, arc.tail) -= arc.weight;
        l(arc.head, arc.head) += arc.weight;
    }
    return LaplacianMatrix(std::move(l), g);
}

}  // namespace outforest
