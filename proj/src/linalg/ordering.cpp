#include "latcas/linalg/ordering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace latcas::linalg {

Graph induced_graph(const SparseOperator& a, std::span<const Index> vertices) {
  if (a.rows() != a.cols()) throw Error("ordering requires a square pattern");
  std::vector<Index> local(static_cast<std::size_t>(a.rows()), -1);
  for (std::size_t k = 0; k < vertices.size(); ++k) local[vertices[k]] = static_cast<Index>(k);
  Graph g;
  g.n = static_cast<Index>(vertices.size());
  g.ptr.assign(static_cast<std::size_t>(g.n) + 1, 0);
  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  for (Index k = 0; k < g.n; ++k) {
    const Index c = vertices[k];
    for (Index p = cp[c]; p < cp[c + 1]; ++p) {
      const Index r = local[ri[p]];
      if (r >= 0 && r != k) g.adj.push_back(r);
    }
    g.ptr[k + 1] = static_cast<Index>(g.adj.size());
  }
  return g;
}

Graph full_graph(const SparseOperator& a) {
  std::vector<Index> all(static_cast<std::size_t>(a.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  return induced_graph(a, all);
}

namespace {

enum class State : char { variable, element, absorbed, merged };

// Doubly linked degree buckets.
class DegreeLists {
 public:
  explicit DegreeLists(Index n)
      : head_(static_cast<std::size_t>(n) + 1, -1),
        next_(static_cast<std::size_t>(n), -1),
        prev_(static_cast<std::size_t>(n), -1) {}

  void insert(Index i, Index d) {
    next_[i] = head_[d];
    prev_[i] = -1;
    if (head_[d] >= 0) prev_[head_[d]] = i;
    head_[d] = i;
    if (d < min_) min_ = d;
  }
  void remove(Index i, Index d) {
    if (prev_[i] >= 0) {
      next_[prev_[i]] = next_[i];
    } else {
      head_[d] = next_[i];
    }
    if (next_[i] >= 0) prev_[next_[i]] = prev_[i];
  }
  Index pop_min() {
    while (head_[min_] < 0) ++min_;
    const Index i = head_[min_];
    remove(i, min_);
    return i;
  }

 private:
  std::vector<Index> head_, next_, prev_;
  Index min_ = 0;
};

}  // namespace

std::vector<Index> approximate_minimum_degree(const Graph& g) {
  const Index n = g.n;
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  if (n == 0) return order;

  std::vector<State> state(static_cast<std::size_t>(n), State::variable);
  std::vector<Index> weight(static_cast<std::size_t>(n), 1);  // supervariable size
  std::vector<Index> degree(static_cast<std::size_t>(n));
  std::vector<std::vector<Index>> vars(static_cast<std::size_t>(n));   // A_i
  std::vector<std::vector<Index>> elems(static_cast<std::size_t>(n));  // E_i
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(n));
  std::vector<std::vector<Index>> element_vars(static_cast<std::size_t>(n));  // L_e
  std::vector<Index> element_weight(static_cast<std::size_t>(n), 0);
  std::vector<Index> external(static_cast<std::size_t>(n), 0);  // |L_e \ L_p|
  std::vector<Index> ext_stamp(static_cast<std::size_t>(n), -1);
  std::vector<Index> mark(static_cast<std::size_t>(n), -1);
  std::vector<std::uint64_t> hash(static_cast<std::size_t>(n), 0);

  DegreeLists lists(n);
  for (Index i = 0; i < n; ++i) {
    vars[i].assign(g.adj.begin() + g.ptr[i], g.adj.begin() + g.ptr[i + 1]);
    std::sort(vars[i].begin(), vars[i].end());
    vars[i].erase(std::unique(vars[i].begin(), vars[i].end()), vars[i].end());
    degree[i] = static_cast<Index>(vars[i].size());
    members[i] = {i};
    lists.insert(i, degree[i]);
  }

  Index eliminated = 0;
  Index step = 0;
  std::vector<Index> lp;
  while (eliminated < n) {
    const Index p = lists.pop_min();
    ++step;
    mark[p] = step;

    // New element L_p: union of absorbed elements and remaining variable
    // neighbours of the pivot.
    lp.clear();
    for (const Index e : elems[p]) {
      if (state[e] != State::element) continue;
      for (const Index i : element_vars[e]) {
        if (state[i] == State::variable && mark[i] != step) {
          mark[i] = step;
          lp.push_back(i);
        }
      }
      state[e] = State::absorbed;
      std::vector<Index>().swap(element_vars[e]);
    }
    for (const Index i : vars[p]) {
      if (state[i] == State::variable && mark[i] != step) {
        mark[i] = step;
        lp.push_back(i);
      }
    }
    std::vector<Index>().swap(vars[p]);
    std::vector<Index>().swap(elems[p]);
    state[p] = State::element;
    eliminated += weight[p];
    order.insert(order.end(), members[p].begin(), members[p].end());
    std::vector<Index>().swap(members[p]);

    Index lp_weight = 0;
    for (const Index i : lp) {
      lists.remove(i, degree[i]);
      lp_weight += weight[i];
    }

    // |L_e \ L_p| for every element adjacent to L_p.
    for (const Index i : lp) {
      for (const Index e : elems[i]) {
        if (state[e] != State::element) continue;
        if (ext_stamp[e] != step) {
          ext_stamp[e] = step;
          external[e] = element_weight[e];
        }
        external[e] -= weight[i];
      }
    }

    // Prune lists, absorb covered elements, approximate degrees.
    for (const Index i : lp) {
      Index deg_elements = 0;
      std::vector<Index>& ei = elems[i];
      std::size_t keep = 0;
      for (const Index e : ei) {
        if (state[e] != State::element) continue;
        if (external[e] == 0) {
          state[e] = State::absorbed;  // L_e is a subset of L_p
          std::vector<Index>().swap(element_vars[e]);
          continue;
        }
        deg_elements += external[e];
        ei[keep++] = e;
      }
      ei.resize(keep);
      ei.push_back(p);

      Index deg_vars = 0;
      std::vector<Index>& vi = vars[i];
      keep = 0;
      for (const Index j : vi) {
        if (state[j] != State::variable || mark[j] == step) continue;
        deg_vars += weight[j];
        vi[keep++] = j;
      }
      vi.resize(keep);

      const Index remaining = n - eliminated - weight[i];
      const Index approx = deg_vars + deg_elements + lp_weight - weight[i];
      const Index bound = degree[i] + lp_weight - weight[i];
      degree[i] = std::max<Index>(0, std::min({remaining, approx, bound}));

      std::sort(ei.begin(), ei.end());
      std::sort(vi.begin(), vi.end());
      std::uint64_t h = 0;
      for (const Index e : ei) h += static_cast<std::uint64_t>(e) * 0x9E3779B97F4A7C15ull;
      for (const Index j : vi) h += static_cast<std::uint64_t>(j) * 0xC2B2AE3D27D4EB4Full + 1;
      hash[i] = h;
    }

    // Supervariable detection: indistinguishable variables share E_i and A_i.
    std::sort(lp.begin(), lp.end(), [&](Index a, Index b) {
      return hash[a] != hash[b] ? hash[a] < hash[b] : a < b;
    });
    for (std::size_t a = 0; a < lp.size(); ++a) {
      const Index i = lp[a];
      if (state[i] != State::variable) continue;
      for (std::size_t b = a + 1; b < lp.size() && hash[lp[b]] == hash[i]; ++b) {
        const Index j = lp[b];
        if (state[j] != State::variable) continue;
        if (elems[i] != elems[j] || vars[i] != vars[j]) continue;
        weight[i] += weight[j];
        degree[i] = std::max<Index>(0, degree[i] - weight[j]);
        weight[j] = 0;
        state[j] = State::merged;
        members[i].insert(members[i].end(), members[j].begin(), members[j].end());
        std::vector<Index>().swap(members[j]);
        std::vector<Index>().swap(elems[j]);
        std::vector<Index>().swap(vars[j]);
      }
    }

    Index alive_weight = 0;
    std::vector<Index> alive;
    alive.reserve(lp.size());
    for (const Index i : lp) {
      if (state[i] != State::variable) continue;
      alive.push_back(i);
      alive_weight += weight[i];
      lists.insert(i, std::min(degree[i], n));
    }
    element_vars[p] = std::move(alive);
    element_weight[p] = alive_weight;
  }
  return order;
}

Graph subgraph(const Graph& g, std::span<const Index> vertices) {
  std::vector<Index> local(static_cast<std::size_t>(g.n), -1);
  for (std::size_t k = 0; k < vertices.size(); ++k) local[vertices[k]] = static_cast<Index>(k);
  Graph out;
  out.n = static_cast<Index>(vertices.size());
  out.ptr.assign(static_cast<std::size_t>(out.n) + 1, 0);
  for (Index k = 0; k < out.n; ++k) {
    const Index v = vertices[k];
    for (Index p = g.ptr[v]; p < g.ptr[v + 1]; ++p) {
      const Index r = local[g.adj[p]];
      if (r >= 0) out.adj.push_back(r);
    }
    out.ptr[k + 1] = static_cast<Index>(out.adj.size());
  }
  return out;
}

namespace {

class Dissector {
 public:
  Dissector(const Graph& g, std::span<const std::array<double, 3>> xyz, Index leaf)
      : g_(g), xyz_(xyz), leaf_(std::max<Index>(leaf, 8)),
        side_(static_cast<std::size_t>(g.n), 0) {}

  void run(std::vector<Index> part) {
    if (static_cast<Index>(part.size()) <= leaf_) {
      leaf_order(part);
      return;
    }
    std::vector<Index> a, b, sep;
    if (!split(part, a, b, sep)) {
      leaf_order(part);
      return;
    }
    part.clear();
    part.shrink_to_fit();
    run(std::move(a));
    run(std::move(b));
    order.insert(order.end(), sep.begin(), sep.end());
  }

  std::vector<Index> order;

 private:
  void leaf_order(const std::vector<Index>& part) {
    const Graph sub = subgraph(g_, part);
    for (const Index k : approximate_minimum_degree(sub)) order.push_back(part[k]);
  }

  bool split(const std::vector<Index>& part, std::vector<Index>& a, std::vector<Index>& b,
             std::vector<Index>& sep) {
    std::array<double, 3> lo{}, hi{};
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (const Index v : part) {
      for (int d = 0; d < 3; ++d) {
        lo[d] = std::min(lo[d], xyz_[v][d]);
        hi[d] = std::max(hi[d], xyz_[v][d]);
      }
    }
    std::array<int, 3> axes{0, 1, 2};
    std::sort(axes.begin(), axes.end(), [&](int x, int y) { return hi[x] - lo[x] > hi[y] - lo[y]; });
    for (const int ax : axes) {
      if (!(hi[ax] > lo[ax])) break;
      std::vector<double> c;
      c.reserve(part.size());
      for (const Index v : part) c.push_back(xyz_[v][ax]);
      auto mid = c.begin() + static_cast<std::ptrdiff_t>(c.size() / 2);
      std::nth_element(c.begin(), mid, c.end());
      double cut = *mid;
      if (!(cut > lo[ax])) {
        // Ties at the bottom: cut just above the minimum instead.
        double next = std::numeric_limits<double>::infinity();
        for (const double x : c) {
          if (x > lo[ax]) next = std::min(next, x);
        }
        cut = next;
      }
      a.clear();
      b.clear();
      for (const Index v : part) (xyz_[v][ax] < cut ? a : b).push_back(v);
      if (a.empty() || b.empty()) continue;

      // Boundary vertices on each side; the smaller set becomes the separator.
      for (const Index v : a) side_[v] = 1;
      for (const Index v : b) side_[v] = 2;
      std::vector<Index> ba, bb;
      for (const Index v : a) {
        for (Index p = g_.ptr[v]; p < g_.ptr[v + 1]; ++p) {
          if (side_[g_.adj[p]] == 2) {
            ba.push_back(v);
            break;
          }
        }
      }
      for (const Index v : b) {
        for (Index p = g_.ptr[v]; p < g_.ptr[v + 1]; ++p) {
          if (side_[g_.adj[p]] == 1) {
            bb.push_back(v);
            break;
          }
        }
      }
      const bool take_a = ba.size() <= bb.size();
      sep = take_a ? ba : bb;
      std::vector<Index>& host = take_a ? a : b;
      for (const Index v : sep) side_[v] = 3;
      host.erase(std::remove_if(host.begin(), host.end(), [&](Index v) { return side_[v] == 3; }),
                 host.end());
      for (const Index v : part) side_[v] = 0;
      return true;
    }
    return false;
  }

  const Graph& g_;
  std::span<const std::array<double, 3>> xyz_;
  Index leaf_;
  std::vector<char> side_;
};

}  // namespace

std::vector<Index> nested_dissection(const Graph& g, std::span<const std::array<double, 3>> xyz,
                                     Index leaf_size) {
  if (static_cast<Index>(xyz.size()) != g.n) throw Error("nested dissection needs one position per vertex");
  Dissector d(g, xyz, leaf_size);
  std::vector<Index> all(static_cast<std::size_t>(g.n));
  std::iota(all.begin(), all.end(), Index{0});
  d.run(std::move(all));
  return std::move(d.order);
}

}  // namespace latcas::linalg
