#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/topology.hpp"

namespace qforge {

// Injective placement of logical qubits on physical nodes.
struct Layout {
  std::vector<std::uint32_t> phys;  // phys[logical] = physical node

  static Layout identity(std::uint32_t n) {
    Layout l;
    l.phys.resize(n);
    for (std::uint32_t q = 0; q < n; ++q) l.phys[q] = q;
    return l;
  }

  std::uint32_t operator()(std::uint32_t logical) const {
    return phys.at(logical);
  }

  // physical -> logical, node_count entries, UINT32_MAX marks a free node.
  std::vector<std::uint32_t> inverse(std::uint32_t node_count) const {
    std::vector<std::uint32_t> inv(node_count, UINT32_MAX);
    for (std::uint32_t q = 0; q < phys.size(); ++q) inv[phys[q]] = q;
    return inv;
  }

  bool operator==(const Layout&) const = default;
};

struct MappingResult {
  Program program;
  Layout initial;
  Layout final_layout;
  std::size_t swap_count = 0;
};

namespace detail {

// Interaction graph of one subcircuit: the logical qubits its 2-qubit gates
// touch, plus those coupling edges.
struct InteractionGraph {
  std::set<std::uint32_t> vertices;
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;  // a < b

  void add(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    vertices.insert(a);
    vertices.insert(b);
    edges.insert({a, b});
  }
};

// Subgraph-monomorphism search (interaction graph into the topology).
// Vertices are assigned in descending-degree order (ties by index); physical
// candidates are tried in ascending order, so the enumeration is
// deterministic.  Collects at most `cap` embeddings; returns true if at
// least one exists.
struct EmbeddingSearch {
  const Topology& topo;
  std::vector<std::vector<std::uint32_t>> adj;
  std::vector<std::uint32_t> order;                 // interaction vertices
  std::vector<std::vector<std::uint32_t>> h_edges;  // per order-index: earlier
                                                    // order-indices adjacent
  std::size_t cap;
  std::vector<std::map<std::uint32_t, std::uint32_t>> found;

  EmbeddingSearch(const InteractionGraph& h, const Topology& t, std::size_t c)
      : topo(t), adj(t.adjacency()), cap(c) {
    std::vector<std::uint32_t> verts(h.vertices.begin(), h.vertices.end());
    std::map<std::uint32_t, std::uint32_t> degree;
    for (auto& [a, b] : h.edges) {
      degree[a]++;
      degree[b]++;
    }
    std::stable_sort(verts.begin(), verts.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       if (degree[a] != degree[b]) return degree[a] > degree[b];
                       return a < b;
                     });
    order = verts;
    h_edges.resize(order.size());
    std::map<std::uint32_t, std::uint32_t> pos;
    for (std::uint32_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (auto& [a, b] : h.edges) {
      std::uint32_t ia = pos[a], ib = pos[b];
      if (ia > ib) std::swap(ia, ib);
      h_edges[ib].push_back(ia);
    }
  }

  bool search() {
    std::vector<std::uint32_t> assign(order.size(), UINT32_MAX);
    std::vector<bool> used(topo.node_count, false);
    dfs(0, assign, used);
    return !found.empty();
  }

  void dfs(std::size_t i, std::vector<std::uint32_t>& assign,
           std::vector<bool>& used) {
    if (found.size() >= cap) return;
    if (i == order.size()) {
      std::map<std::uint32_t, std::uint32_t> emb;
      for (std::uint32_t k = 0; k < order.size(); ++k) emb[order[k]] = assign[k];
      found.push_back(std::move(emb));
      return;
    }
    for (std::uint32_t p = 0; p < topo.node_count; ++p) {
      if (used[p]) continue;
      if (adj[p].size() < h_edges[i].size()) continue;
      bool ok = true;
      for (auto earlier : h_edges[i])
        if (!topo.has_edge(p, assign[earlier])) {
          ok = false;
          break;
        }
      if (!ok) continue;
      assign[i] = p;
      used[p] = true;
      dfs(i + 1, assign, used);
      used[p] = false;
      assign[i] = UINT32_MAX;
      if (found.size() >= cap) return;
    }
  }
};

inline constexpr std::size_t kMaxEmbeddings = 4096;

// One maximal topology-embeddable run of instructions.
struct Prefix {
  std::vector<Instruction> body;
  InteractionGraph graph;
};

inline std::vector<Prefix> split_embeddable(const Program& p,
                                            const Topology& topo) {
  std::vector<Prefix> prefixes(1);
  for (const auto& ins : p.body) {
    const auto* op = std::get_if<GateOp>(&ins);
    if (!op) {
      prefixes.back().body.push_back(ins);
      continue;
    }
    const auto qs = op->gate.qubits();
    if (qs.size() > 2)
      throw UnsupportedError(
          "topology mapping handles 1-/2-qubit gates; decompose first");
    if (qs.size() == 2 && !prefixes.back().graph.edges.count(
                              {std::min(qs[0], qs[1]), std::max(qs[0], qs[1])})) {
      InteractionGraph trial = prefixes.back().graph;
      trial.add(qs[0], qs[1]);
      EmbeddingSearch probe(trial, topo, 1);
      if (!probe.search()) {
        prefixes.emplace_back();
        prefixes.back().graph.add(qs[0], qs[1]);
        prefixes.back().body.push_back(ins);
        continue;
      }
      prefixes.back().graph = std::move(trial);
    } else if (qs.size() == 2) {
      // edge already present, stays embeddable
    }
    prefixes.back().body.push_back(ins);
  }
  return prefixes;
}

// Chooses the embedding with (1) highest fidelity product over interaction
// edges, (2) lowest total displacement from `prev`, (3) lexicographically
// smallest assignment, then extends it over the remaining logical qubits,
// each taking the free node nearest its previous position (lowest index on
// ties).
inline Layout choose_layout(const Prefix& pre, const Topology& topo,
                            const Layout& prev, std::uint32_t n_logical,
                            const std::vector<std::vector<std::uint32_t>>& dist) {
  EmbeddingSearch search(pre.graph, topo, kMaxEmbeddings);
  if (!search.search())
    throw ValidationError("interaction edge cannot be embedded; topology too small");

  const auto score_fidelity = [&](const std::map<std::uint32_t, std::uint32_t>& emb) {
    double f = 1.0;
    for (auto& [a, b] : pre.graph.edges) f *= topo.edge_fidelity(emb.at(a), emb.at(b));
    return f;
  };
  const auto score_move = [&](const std::map<std::uint32_t, std::uint32_t>& emb) {
    std::uint64_t cost = 0;
    for (auto& [q, p] : emb) cost += dist[prev(q)][p];
    return cost;
  };
  const auto lex = [&](const std::map<std::uint32_t, std::uint32_t>& emb) {
    std::vector<std::uint32_t> v;
    for (auto& [q, p] : emb) v.push_back(p);  // keys ascending in a map
    return v;
  };

  std::size_t best = 0;
  double best_f = score_fidelity(search.found[0]);
  std::uint64_t best_m = score_move(search.found[0]);
  std::vector<std::uint32_t> best_l = lex(search.found[0]);
  for (std::size_t i = 1; i < search.found.size(); ++i) {
    const double f = score_fidelity(search.found[i]);
    const std::uint64_t m = score_move(search.found[i]);
    const auto l = lex(search.found[i]);
    if (f > best_f || (f == best_f && (m < best_m || (m == best_m && l < best_l)))) {
      best = i;
      best_f = f;
      best_m = m;
      best_l = l;
    }
  }

  const auto& emb = search.found[best];
  Layout layout;
  layout.phys.assign(n_logical, UINT32_MAX);
  std::vector<bool> used(topo.node_count, false);
  for (auto& [q, p] : emb) {
    layout.phys[q] = p;
    used[p] = true;
  }
  for (std::uint32_t q = 0; q < n_logical; ++q) {
    if (layout.phys[q] != UINT32_MAX) continue;
    std::uint32_t pick = UINT32_MAX, pick_d = UINT32_MAX;
    for (std::uint32_t p = 0; p < topo.node_count; ++p) {
      if (used[p]) continue;
      const std::uint32_t d = dist[prev(q)][p];
      if (d < pick_d) {
        pick = p;
        pick_d = d;
      }
    }
    layout.phys[q] = pick;
    used[pick] = true;
  }
  return layout;
}

// Realizes the relabeling `from` -> `to` with SWAPs on edges of a BFS
// spanning tree.  The partial move (only logical tokens have destinations)
// is first completed into a full node permutation: each unassigned node
// keeps its place when free, otherwise takes the nearest free destination.
// Then leaves are fixed one at a time, walking each leaf's token to it along
// the unique tree path; with a total permutation no token is ever stranded
// on a finished node.  Emits onto `out`; returns the number of SWAPs.
inline std::size_t route_tokens(const Layout& from, const Layout& to,
                                const Topology& topo,
                                const std::vector<std::vector<std::uint32_t>>& dist,
                                Program& out) {
  const std::uint32_t n = topo.node_count;

  // dest[p] = node where the token starting at p must end.
  std::vector<std::uint32_t> dest(n, UINT32_MAX);
  std::vector<bool> claimed(n, false);
  for (std::uint32_t q = 0; q < from.phys.size(); ++q) {
    dest[from.phys[q]] = to.phys[q];
    claimed[to.phys[q]] = true;
  }
  for (std::uint32_t p = 0; p < n; ++p)
    if (dest[p] == UINT32_MAX && !claimed[p]) {
      dest[p] = p;
      claimed[p] = true;
    }
  for (std::uint32_t p = 0; p < n; ++p) {
    if (dest[p] != UINT32_MAX) continue;
    std::uint32_t pick = UINT32_MAX, pick_d = UINT32_MAX;
    for (std::uint32_t c = 0; c < n; ++c)
      if (!claimed[c] && dist[p][c] < pick_d) {
        pick = c;
        pick_d = dist[p][c];
      }
    dest[p] = pick;
    claimed[pick] = true;
  }

  // BFS spanning tree rooted at node 0.
  auto adj = topo.adjacency();
  std::vector<std::uint32_t> parent(n, UINT32_MAX);
  std::vector<bool> seen(n, false);
  std::vector<std::uint32_t> queue{0};
  seen[0] = true;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t v = queue[head];
    for (auto w : adj[v])
      if (!seen[w]) {
        seen[w] = true;
        parent[w] = v;
        queue.push_back(w);
      }
  }
  std::vector<std::vector<std::uint32_t>> tree(n);
  for (std::uint32_t v = 1; v < n; ++v) {
    tree[v].push_back(parent[v]);
    tree[parent[v]].push_back(v);
  }
  for (auto& t : tree) std::sort(t.begin(), t.end());

  // Tokens are named by their starting node.
  std::vector<std::uint32_t> token_at(n), pos(n);
  for (std::uint32_t p = 0; p < n; ++p) token_at[p] = pos[p] = p;
  std::vector<std::uint32_t> want(n);  // node -> token that must end there
  for (std::uint32_t p = 0; p < n; ++p) want[dest[p]] = p;

  std::vector<bool> remaining(n, true);
  std::vector<std::uint32_t> tree_degree(n);
  for (std::uint32_t v = 0; v < n; ++v)
    tree_degree[v] = static_cast<std::uint32_t>(tree[v].size());

  std::size_t swaps = 0;
  auto emit_swap = [&](std::uint32_t a, std::uint32_t b) {
    out.add(GateKind::SWAP, {a, b});
    ++swaps;
    std::swap(token_at[a], token_at[b]);
    pos[token_at[a]] = a;
    pos[token_at[b]] = b;
  };

  for (std::uint32_t left = n; left > 1; --left) {
    // Prefer a leaf already holding its token (free removal); otherwise the
    // lowest-index leaf.
    std::uint32_t leaf = UINT32_MAX;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (!remaining[v] || tree_degree[v] > 1) continue;
      if (token_at[v] == want[v]) {
        leaf = v;
        break;
      }
      if (leaf == UINT32_MAX) leaf = v;
    }
    const std::uint32_t token = want[leaf];
    if (pos[token] != leaf) {
      // Unique tree path from the token's node to the leaf, within the
      // remaining subtree.
      std::vector<std::uint32_t> via(n, UINT32_MAX);
      std::vector<std::uint32_t> bfs{pos[token]};
      via[pos[token]] = pos[token];
      for (std::size_t h = 0; h < bfs.size() && via[leaf] == UINT32_MAX; ++h)
        for (auto w : tree[bfs[h]])
          if (remaining[w] && via[w] == UINT32_MAX) {
            via[w] = bfs[h];
            bfs.push_back(w);
          }
      std::vector<std::uint32_t> path{leaf};
      while (path.back() != pos[token]) path.push_back(via[path.back()]);
      for (std::size_t i = path.size(); i-- > 1;)
        emit_swap(path[i], path[i - 1]);
    }
    remaining[leaf] = false;
    for (auto w : tree[leaf])
      if (remaining[w]) --tree_degree[w];
  }
  return swaps;
}

inline Gate relabel(const Gate& g, const Layout& layout) {
  Gate out = g;
  for (auto& q : out.targets) q = layout(q);
  for (auto& q : out.controls) q = layout(q);
  return out;
}

}  // namespace detail

// Inserts SWAPs and relabels qubits so every 2-qubit gate acts on a topology
// edge.  The circuit is split into maximal subcircuits whose interaction
// graphs embed into the topology without routing; each subcircuit gets the
// best-scoring embedding (edge-fidelity product, then least movement from
// the previous placement, then lowest indices), and consecutive placements
// are stitched with SWAP chains along a spanning tree.  The mapped program
// acts on all topology nodes; logical qubit q starts at node initial(q) and
// ends at node final_layout(q).
inline MappingResult map_to_topology(const Program& p, const Topology& topo) {
  if (!p.is_flat())
    throw FlatCircuitRequired("topology mapping requires a flat program");
  topo.validate();
  if (p.qubit_count > topo.node_count)
    throw ValidationError("program needs " + std::to_string(p.qubit_count) +
                          " qubits but topology has " +
                          std::to_string(topo.node_count) + " nodes");

  const auto dist = topo.all_pairs_distance();
  auto prefixes = detail::split_embeddable(p, topo);

  MappingResult result;
  result.program = Program(topo.node_count, p.cbit_count);

  Layout prev = Layout::identity(p.qubit_count);
  for (std::size_t k = 0; k < prefixes.size(); ++k) {
    const Layout layout =
        detail::choose_layout(prefixes[k], topo, prev, p.qubit_count, dist);
    if (k == 0) {
      result.initial = layout;
    } else {
      result.swap_count +=
          detail::route_tokens(prev, layout, topo, dist, result.program);
    }
    for (const auto& ins : prefixes[k].body) {
      if (auto* op = std::get_if<GateOp>(&ins)) {
        result.program.add(detail::relabel(op->gate, layout));
      } else if (auto* m = std::get_if<MeasureOp>(&ins)) {
        result.program.measure(layout(m->qubit), m->cbit);
      } else {
        result.program.body.push_back(ins);
      }
    }
    prev = layout;
  }
  result.final_layout = prev;
  return result;
}

}  // namespace qforge
