#pragma once

// Test-only helpers: a blind power-set oracle for maximum out-forests,
// deterministic random digraph generators, and a minimal-polynomial root
// estimator. These stay independent of the library's enumeration path.

#include <complex>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "outforest/analysis.hpp"
#include "outforest/eigenprojection.hpp"
#include "outforest/forest.hpp"

namespace test_support {

using namespace outforest;

// Checks an arc subset directly against the out-forest definition: indegree
// at most one everywhere and no directed cycle.
inline bool is_out_forest(int n, const std::vector<Arc>& arcs) {
    std::vector<int> indegree(n, 0), parent(n, -1);
    for (const auto& arc : arcs) {
        if (++indegree[arc.head] > 1) return false;
        parent[arc.head] = arc.tail;
    }
    for (int v = 0; v < n; ++v) {
        int slow = v, fast = v;
        while (parent[fast] != -1 && parent[parent[fast]] != -1) {
            slow = parent[slow];
            fast = parent[parent[fast]];
            if (slow == fast) return false;
        }
    }
    return true;
}

// Power-set sweep over all arc subsets. Exponential in the arc count; callers
// keep instances small.
inline std::vector<OutForest> brute_force_max_forests(const WeightedDigraph& g) {
    const int n = g.vertex_count();
    const auto& arcs = g.arcs();
    const std::size_t m = arcs.size();
    std::size_t best = 0;
    std::vector<std::uint64_t> winners;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << m); ++mask) {
        std::vector<Arc> subset;
        for (std::size_t k = 0; k < m; ++k)
            if (mask & (std::uint64_t(1) << k)) subset.push_back(arcs[k]);
        if (subset.size() < best || !is_out_forest(n, subset)) continue;
        if (subset.size() > best) {
            best = subset.size();
            winners.clear();
        }
        winners.push_back(mask);
    }
    std::vector<OutForest> forests;
    for (std::uint64_t mask : winners) {
        OutForest f;
        f.weight = 1;
        std::vector<bool> has_parent(n, false);
        for (std::size_t k = 0; k < m; ++k)
            if (mask & (std::uint64_t(1) << k)) {
                f.arcs.push_back(arcs[k]);
                f.weight *= arcs[k].weight;
                has_parent[arcs[k].head] = true;
            }
        for (int v = 0; v < n; ++v)
            if (!has_parent[v]) f.roots.push_back(v);
        forests.push_back(std::move(f));
    }
    std::sort(forests.begin(), forests.end(), [](const OutForest& a, const OutForest& b) {
        return std::lexicographical_compare(a.arcs.begin(), a.arcs.end(), b.arcs.begin(),
                                            b.arcs.end(), arc_order);
    });
    return forests;
}

inline Rational random_weight(std::mt19937& rng) {
    static const Rational pool[] = {make_rational(1), make_rational(2), make_rational(3),
                                    make_rational(1, 2), make_rational(3, 2)};
    return pool[std::uniform_int_distribution<int>(0, 4)(rng)];
}

inline WeightedDigraph random_digraph(std::mt19937& rng, int min_n = 2, int max_n = 8) {
    const int n = std::uniform_int_distribution<int>(min_n, max_n)(rng);
    const double p = std::uniform_real_distribution<double>(0.15, 0.45)(rng);
    std::vector<Arc> arcs;
    std::bernoulli_distribution keep(p);
    for (int t = 0; t < n; ++t)
        for (int h = 0; h < n; ++h)
            if (t != h && keep(rng)) arcs.push_back(Arc{t, h, random_weight(rng)});
    return WeightedDigraph::from_arcs(n, std::move(arcs));
}

// Random digraph containing a spanning diverging tree, so its out-forest
// dimension is 1.
inline WeightedDigraph random_rooted_digraph(std::mt19937& rng, int min_n = 2, int max_n = 8) {
    const int n = std::uniform_int_distribution<int>(min_n, max_n)(rng);
    std::vector<int> order(n);
    for (int v = 0; v < n; ++v) order[v] = v;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Arc> arcs;
    for (int k = 1; k < n; ++k) {
        const int parent = order[std::uniform_int_distribution<int>(0, k - 1)(rng)];
        arcs.push_back(Arc{parent, order[k], random_weight(rng)});
    }
    std::bernoulli_distribution keep(0.2);
    for (int t = 0; t < n; ++t)
        for (int h = 0; h < n; ++h) {
            if (t == h || keep(rng) == false) continue;
            bool present = false;
            for (const auto& a : arcs)
                if (a.tail == t && a.head == h) present = true;
            if (!present) arcs.push_back(Arc{t, h, random_weight(rng)});
        }
    return WeightedDigraph::from_arcs(n, std::move(arcs));
}

inline RationalVector random_rational_state(std::mt19937& rng, int n) {
    RationalVector x(n);
    std::uniform_int_distribution<int> num(-10, 10);
    for (int i = 0; i < n; ++i) x[i] = make_rational(num(rng));
    return x;
}

inline StateVector random_state(std::mt19937& rng, int n) {
    StateVector x(n);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    for (int i = 0; i < n; ++i) x[i] = value(rng);
    return x;
}

inline std::size_t rank_with_threshold(const Matrix<double>& m, double relative_threshold) {
    Eigen::MatrixXd em(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) em(i, j) = m(i, j);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(em);
    const auto& sigma = svd.singularValues();
    if (sigma.size() == 0) return 0;
    std::size_t rank = 0;
    for (Eigen::Index k = 0; k < sigma.size(); ++k)
        if (sigma(k) > relative_threshold * sigma(0)) ++rank;
    return rank;
}

// Eigen-solver roots with indices from repeated rank tests on L - lambda I:
// cluster the reported spectrum, drop the zero cluster, and for each nonzero
// cluster find the smallest power at which the rank of (L - lambda I)^k
// stabilizes.
inline std::vector<std::pair<std::complex<double>, int>> estimate_minpoly_roots(
    const LaplacianMatrix& l, const SpectrumReport& spectrum) {
    const Matrix<double> lf = l.to_double();
    const std::size_t n = lf.rows();
    const double scale = std::max(1.0, max_abs(lf));
    const double cluster_tol = 1e-6 * scale;

    std::vector<std::pair<std::complex<double>, int>> clusters;  // (centroid, count)
    for (const auto& z : spectrum.eigenvalues) {
        bool merged = false;
        for (auto& [centroid, count] : clusters)
            if (std::abs(z - centroid) <= cluster_tol) {
                centroid = (centroid * double(count) + z) / double(count + 1);
                ++count;
                merged = true;
                break;
            }
        if (!merged) clusters.emplace_back(z, 1);
    }

    std::vector<std::pair<std::complex<double>, int>> roots;
    for (const auto& [centroid, count] : clusters) {
        if (std::abs(centroid) <= 1e-9 * scale) continue;  // the zero eigenvalue
        int index = 1;
        if (count > 1) {
            // complex shift: work in the complexified matrix via [re, -im; im, re]
            // is overkill here; the corpus only produces real repeated roots.
            Matrix<double> shifted = lf;
            for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= centroid.real();
            Matrix<double> power = shifted;
            std::size_t prev = rank_with_threshold(power, 1e-8);
            for (int k = 1; k <= count; ++k) {
                power = power * shifted;
                const std::size_t r = rank_with_threshold(power, 1e-8);
                if (r == prev) break;
                prev = r;
                index = k + 1;
            }
        }
        roots.emplace_back(centroid, index);
    }
    return roots;
}

}  // namespace test_support
