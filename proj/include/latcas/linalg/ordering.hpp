#pragma once

#include <array>
#include <span>
#include <vector>

#include "latcas/sparse_operator.hpp"

namespace latcas::linalg {

/// Undirected adjacency graph in compressed row form, no self loops.
struct Graph {
  Index n = 0;
  std::vector<Index> ptr{0};
  std::vector<Index> adj;
};

/// Graph of the symmetric pattern of `a` restricted to the vertices in
/// `vertices` (renumbered 0..k-1 in the given order).
Graph induced_graph(const SparseOperator& a, std::span<const Index> vertices);
Graph full_graph(const SparseOperator& a);

/// Approximate minimum degree ordering on a quotient graph with supervariable
/// detection, element absorption and approximate external degrees.
/// Returns the elimination order: order[k] = vertex eliminated k-th.
std::vector<Index> approximate_minimum_degree(const Graph& g);

/// Geometric nested dissection: recursive median bisection along the widest
/// coordinate, vertex separators ordered last, minimum degree on small pieces.
/// `xyz` holds one position per vertex.
std::vector<Index> nested_dissection(const Graph& g, std::span<const std::array<double, 3>> xyz,
                                     Index leaf_size = 256);

/// Subgraph induced by `vertices` of g (renumbered in the given order).
Graph subgraph(const Graph& g, std::span<const Index> vertices);

}  // namespace latcas::linalg
