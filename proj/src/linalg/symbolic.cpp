#include "latcas/linalg/symbolic.hpp"

#include <algorithm>
#include <numeric>

#include "latcas/linalg/ordering.hpp"

namespace latcas::linalg {

std::vector<Index> elimination_tree(Index n, std::span<const Index> upper_ptr,
                                    std::span<const Index> upper_idx) {
  std::vector<Index> parent(static_cast<std::size_t>(n), -1);
  std::vector<Index> ancestor(static_cast<std::size_t>(n), -1);
  for (Index k = 0; k < n; ++k) {
    for (Index p = upper_ptr[k]; p < upper_ptr[k + 1]; ++p) {
      Index i = upper_idx[p];
      while (i != -1 && i < k) {
        const Index next = ancestor[i];
        ancestor[i] = k;
        if (next == -1) {
          parent[i] = k;
          break;
        }
        i = next;
      }
    }
  }
  return parent;
}

std::vector<Index> postorder(std::span<const Index> parent) {
  const Index n = static_cast<Index>(parent.size());
  std::vector<Index> head(static_cast<std::size_t>(n), -1), next(static_cast<std::size_t>(n), -1);
  for (Index j = n - 1; j >= 0; --j) {
    if (parent[j] == -1) continue;
    next[j] = head[parent[j]];
    head[parent[j]] = j;
  }
  std::vector<Index> post;
  post.reserve(static_cast<std::size_t>(n));
  std::vector<Index> stack;
  for (Index root = 0; root < n; ++root) {
    if (parent[root] != -1) continue;
    stack.push_back(root);
    while (!stack.empty()) {
      const Index top = stack.back();
      const Index child = head[top];
      if (child == -1) {
        stack.pop_back();
        post.push_back(top);
      } else {
        head[top] = next[child];
        stack.push_back(child);
      }
    }
  }
  return post;
}

namespace {

// Strict upper pattern (rows i < k in column k) of P A P^T, restricted to the
// leading n permuted unknowns.
void permuted_upper(const SparseOperator& a, std::span<const Index> iperm, Index n,
                    std::vector<Index>& ptr, std::vector<Index>& idx) {
  const Index cols = a.cols();
  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (Index c = 0; c < cols; ++c) {
    for (Index p = cp[c]; p < cp[c + 1]; ++p) {
      const Index i = iperm[ri[p]], k = iperm[c];
      if (i < k && k < n) ++ptr[k + 1];
    }
  }
  for (Index k = 0; k < n; ++k) ptr[k + 1] += ptr[k];
  idx.assign(static_cast<std::size_t>(ptr[n]), 0);
  std::vector<Index> fill(ptr.begin(), ptr.end() - 1);
  for (Index c = 0; c < cols; ++c) {
    for (Index p = cp[c]; p < cp[c + 1]; ++p) {
      const Index i = iperm[ri[p]], k = iperm[c];
      if (i < k && k < n) idx[fill[k]++] = i;
    }
  }
}

}  // namespace

Index SymbolicAnalysis::factor_entries() const {
  Index total = 0;
  for (const auto& s : supernodes) {
    const Index w = s.width();
    total += w * (w + 1) / 2 + w * static_cast<Index>(s.rows.size());
  }
  return total;
}

Index SymbolicAnalysis::factor_nonzeros() const {
  Index total = 0;
  for (Index j = 0; j < bulk(); ++j) total += column_counts[j];
  return total;
}

double SymbolicAnalysis::factor_flops() const {
  double total = 0;
  for (Index j = 0; j < bulk(); ++j) {
    const double c = static_cast<double>(column_counts[j]);
    total += c * c;
  }
  return total;
}

bool SymbolicAnalysis::matches(const SparseOperator& a) const {
  if (a.rows() != n || a.cols() != n) return false;
  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  return std::equal(cp.begin(), cp.end(), pattern_col_ptr.begin(), pattern_col_ptr.end()) &&
         std::equal(ri.begin(), ri.end(), pattern_row_idx.begin(), pattern_row_idx.end());
}

std::shared_ptr<const SymbolicAnalysis> analyze(const SparseOperator& a,
                                                std::span<const Index> retained,
                                                const AnalysisOptions& opts) {
  if (a.rows() != a.cols()) throw Error("factorization requires a square matrix");
  std::vector<char> is_retained(static_cast<std::size_t>(a.rows()), 0);
  for (const Index r : retained) {
    if (r < 0 || r >= a.rows()) throw Error("retained index out of range");
    is_retained[r] = 1;
  }
  std::vector<Index> bulk;
  bulk.reserve(static_cast<std::size_t>(a.rows()));
  for (Index i = 0; i < a.rows(); ++i) {
    if (!is_retained[i]) bulk.push_back(i);
  }
  const Graph g = induced_graph(a, bulk);
  std::vector<Index> local;
  if (!opts.positions.empty()) {
    if (static_cast<Index>(opts.positions.size()) != a.rows()) {
      throw Error("analysis positions must cover every unknown");
    }
    std::vector<std::array<double, 3>> xyz;
    xyz.reserve(bulk.size());
    for (const Index i : bulk) xyz.push_back(opts.positions[i]);
    local = nested_dissection(g, xyz);
  } else {
    local = approximate_minimum_degree(g);
  }
  std::vector<Index> order(local.size());
  for (std::size_t k = 0; k < local.size(); ++k) order[k] = bulk[local[k]];
  return analyze_with_order(a, std::move(order), retained, opts);
}

std::shared_ptr<const SymbolicAnalysis> analyze_with_order(const SparseOperator& a,
                                                           std::vector<Index> bulk_order,
                                                           std::span<const Index> retained,
                                                           const AnalysisOptions& opts) {
  const Index n = a.rows();
  if (a.rows() != a.cols()) throw Error("factorization requires a square matrix");
  if (!a.symmetric()) throw Error("factorization requires an operator flagged symmetric");

  auto sa = std::make_shared<SymbolicAnalysis>();
  sa->n = n;
  sa->retained = static_cast<Index>(retained.size());
  const Index nx = n - sa->retained;
  if (static_cast<Index>(bulk_order.size()) != nx) throw Error("bulk ordering has the wrong size");

  std::vector<Index> seen(static_cast<std::size_t>(n), 0);
  for (const Index i : bulk_order) {
    if (i < 0 || i >= n || seen[i]++) throw Error("bulk ordering is not a permutation");
  }
  for (const Index i : retained) {
    if (i < 0 || i >= n || seen[i]++) throw Error("retained set overlaps bulk or repeats");
  }

  // Postorder the bulk elimination tree so supernodes are contiguous.
  {
    std::vector<Index> iperm(static_cast<std::size_t>(n), n);
    for (Index k = 0; k < nx; ++k) iperm[bulk_order[k]] = k;
    std::vector<Index> ptr, idx;
    permuted_upper(a, iperm, nx, ptr, idx);
    const auto parent = elimination_tree(nx, ptr, idx);
    const auto post = postorder(parent);
    std::vector<Index> reordered(static_cast<std::size_t>(nx));
    for (Index k = 0; k < nx; ++k) reordered[k] = bulk_order[post[k]];
    bulk_order = std::move(reordered);
  }

  sa->perm = std::move(bulk_order);
  sa->perm.insert(sa->perm.end(), retained.begin(), retained.end());
  sa->iperm.assign(static_cast<std::size_t>(n), 0);
  for (Index k = 0; k < n; ++k) sa->iperm[sa->perm[k]] = k;

  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  sa->pattern_col_ptr.assign(cp.begin(), cp.end());
  sa->pattern_row_idx.assign(ri.begin(), ri.end());

  // Lower assembly map.
  sa->amap_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (Index c = 0; c < n; ++c) {
    for (Index p = cp[c]; p < cp[c + 1]; ++p) {
      const Index i = sa->iperm[ri[p]], j = sa->iperm[c];
      if (i >= j) ++sa->amap_ptr[j + 1];
    }
  }
  for (Index j = 0; j < n; ++j) sa->amap_ptr[j + 1] += sa->amap_ptr[j];
  sa->amap_row.resize(static_cast<std::size_t>(sa->amap_ptr[n]));
  sa->amap_src.resize(static_cast<std::size_t>(sa->amap_ptr[n]));
  {
    std::vector<Index> fill(sa->amap_ptr.begin(), sa->amap_ptr.end() - 1);
    for (Index c = 0; c < n; ++c) {
      for (Index p = cp[c]; p < cp[c + 1]; ++p) {
        const Index i = sa->iperm[ri[p]], j = sa->iperm[c];
        if (i >= j) {
          sa->amap_row[fill[j]] = i;
          sa->amap_src[fill[j]] = p;
          ++fill[j];
        }
      }
    }
    std::vector<std::pair<Index, Index>> tmp;
    for (Index j = 0; j < n; ++j) {
      tmp.clear();
      for (Index k = sa->amap_ptr[j]; k < sa->amap_ptr[j + 1]; ++k) {
        tmp.emplace_back(sa->amap_row[k], sa->amap_src[k]);
      }
      std::sort(tmp.begin(), tmp.end());
      Index k = sa->amap_ptr[j];
      for (const auto& [r, s] : tmp) {
        sa->amap_row[k] = r;
        sa->amap_src[k] = s;
        ++k;
      }
    }
  }

  // Elimination tree and column counts of the full permuted matrix.
  std::vector<Index> uptr, uidx;
  permuted_upper(a, sa->iperm, n, uptr, uidx);
  sa->etree = elimination_tree(n, uptr, uidx);
  sa->column_counts.assign(static_cast<std::size_t>(n), 1);
  {
    std::vector<Index> mark(static_cast<std::size_t>(n), -1);
    for (Index k = 0; k < n; ++k) {
      mark[k] = k;
      for (Index p = uptr[k]; p < uptr[k + 1]; ++p) {
        for (Index j = uidx[p]; j != -1 && mark[j] != k; j = sa->etree[j]) {
          mark[j] = k;
          ++sa->column_counts[j];
        }
      }
    }
  }

  // Fundamental supernodes over the bulk columns.
  std::vector<Index> nchild(static_cast<std::size_t>(n), 0);
  for (Index j = 0; j < n; ++j) {
    if (sa->etree[j] >= 0) ++nchild[sa->etree[j]];
  }
  std::vector<Index> starts;
  for (Index j = 0; j < nx; ++j) {
    const bool extend = j > 0 && sa->etree[j - 1] == j &&
                        sa->column_counts[j - 1] == sa->column_counts[j] + 1 && nchild[j] == 1;
    if (!extend) starts.push_back(j);
  }
  starts.push_back(nx);

  // Relaxed amalgamation: fold a supernode into its contiguous parent when
  // the padding stays small. Walks from the top so merges chain downwards.
  if (opts.amalgamate && starts.size() > 2) {
    const std::size_t ns = starts.size() - 1;
    std::vector<Index> first(ns), last(ns), below(ns), stored(ns), exact(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      first[s] = starts[s];
      last[s] = starts[s + 1];
      const Index w = last[s] - first[s];
      below[s] = sa->column_counts[first[s]] - w;
      stored[s] = w * (w + 1) / 2 + w * below[s];
      exact[s] = 0;
      for (Index j = first[s]; j < last[s]; ++j) exact[s] += sa->column_counts[j];
    }
    std::vector<char> absorbed(ns, 0);
    // group[s]: index of the supernode currently owning the columns after s.
    std::size_t top = ns - 1;
    for (std::size_t s = ns - 1; s-- > 0;) {
      const Index tail = last[s] - 1;
      const bool contiguous = sa->etree[tail] == last[s] && last[s] < nx;
      if (contiguous) {
        const std::size_t g = top;  // the group starting at last[s]
        const Index w = last[g] - first[s];
        const Index st = w * (w + 1) / 2 + w * below[g];
        const Index ex = exact[s] + exact[g];
        const double pad = static_cast<double>(st - ex) / static_cast<double>(st);
        const bool merge = (w <= 4) || (w <= 16 && pad < 0.5) || (w <= 48 && pad < 0.15) ||
                           (pad < 0.05);
        if (merge) {
          first[g] = first[s];
          stored[g] = st;
          exact[g] = ex;
          absorbed[s] = 1;
          continue;
        }
      }
      top = s;
    }
    std::vector<Index> merged;
    for (std::size_t s = 0; s < ns; ++s) {
      if (!absorbed[s]) merged.push_back(first[s]);
    }
    merged.push_back(nx);
    starts = std::move(merged);
  }

  const std::size_t ns = starts.size() - 1;
  std::vector<Index> snode_of(static_cast<std::size_t>(n), -1);
  sa->supernodes.resize(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    sa->supernodes[s].first = starts[s];
    sa->supernodes[s].last = starts[s + 1];
    for (Index j = starts[s]; j < starts[s + 1]; ++j) snode_of[j] = static_cast<Index>(s);
  }
  std::vector<std::vector<Index>> kids(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const Index p = sa->etree[sa->supernodes[s].last - 1];
    if (p >= 0 && p < nx) {
      sa->supernodes[s].parent = snode_of[p];
      kids[snode_of[p]].push_back(static_cast<Index>(s));
    }
  }
  std::vector<Index> mark(static_cast<std::size_t>(n), -1);
  for (std::size_t s = 0; s < ns; ++s) {
    Supernode& sn = sa->supernodes[s];
    sn.children = static_cast<Index>(kids[s].size());
    std::vector<Index>& rows = sn.rows;
    for (Index j = sn.first; j < sn.last; ++j) {
      for (Index k = sa->amap_ptr[j]; k < sa->amap_ptr[j + 1]; ++k) {
        const Index i = sa->amap_row[k];
        if (i >= sn.last && mark[i] != static_cast<Index>(s)) {
          mark[i] = static_cast<Index>(s);
          rows.push_back(i);
        }
      }
    }
    for (const Index c : kids[s]) {
      for (const Index i : sa->supernodes[c].rows) {
        if (i >= sn.last && mark[i] != static_cast<Index>(s)) {
          mark[i] = static_cast<Index>(s);
          rows.push_back(i);
        }
      }
    }
    std::sort(rows.begin(), rows.end());
  }
  return sa;
}

}  // namespace latcas::linalg
