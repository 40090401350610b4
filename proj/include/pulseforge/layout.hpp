#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulseforge/common.hpp"

namespace pulseforge {

// Undirected device connectivity. An optional per-edge direction flag marks
// the native CR orientation (control -> target); it is informational only.
class CouplingGraph {
 public:
  CouplingGraph() = default;
  explicit CouplingGraph(int num_qubits) : adj_(num_qubits) {}

  int num_qubits() const { return static_cast<int>(adj_.size()); }

  void add_edge(int a, int b, bool directed_native = false) {
    if (a < 0 || b < 0 || a >= num_qubits() || b >= num_qubits())
      throw SchemaError("edge endpoint out of range");
    if (a == b) throw SchemaError("self-loops are not allowed");
    if (has_edge(a, b)) return;
    adj_[a].push_back(b);
    adj_[b].push_back(a);
    std::sort(adj_[a].begin(), adj_[a].end());
    std::sort(adj_[b].begin(), adj_[b].end());
    edges_.insert(key(a, b));
    if (directed_native) native_direction_.insert({a, b});
  }

  bool has_edge(int a, int b) const { return edges_.count(key(a, b)) != 0; }

  const std::vector<int>& neighbors(int v) const { return adj_.at(v); }

  int degree(int v) const { return static_cast<int>(adj_.at(v).size()); }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (auto k : edges_) out.push_back({int(k >> 32), int(k & 0xffffffffu)});
    std::sort(out.begin(), out.end());
    return out;
  }

  std::size_t num_edges() const { return edges_.size(); }

  bool connected() const {
    if (num_qubits() == 0) return true;
    std::vector<bool> seen(num_qubits(), false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int count = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int u : adj_[v])
        if (!seen[u]) {
          seen[u] = true;
          ++count;
          q.push(u);
        }
    }
    return count == num_qubits();
  }

 private:
  static std::uint64_t key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (std::uint64_t(a) << 32) | std::uint64_t(b);
  }
  std::vector<std::vector<int>> adj_;
  std::set<std::uint64_t> edges_;
  std::set<std::pair<int, int>> native_direction_;
};

// --- builtin layouts ---

inline CouplingGraph lattice_layout(int width, int height) {
  if (width < 1 || height < 1) throw SchemaError("lattice dimensions must be positive");
  CouplingGraph g(width * height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const int v = r * width + c;
      if (c + 1 < width) g.add_edge(v, v + 1);
      if (r + 1 < height) g.add_edge(v, v + width);
    }
  return g;
}

// Honeycomb lattice (degree <= 3), built as two triangular sublattices A/B
// with every edge joining A to B. `radius` counts rings of sites kept around
// the center in axial coordinates.
inline CouplingGraph hexagonal_layout(int radius) {
  if (radius < 1) throw SchemaError("hexagonal radius must be at least 1");
  std::map<std::tuple<int, int, int>, int> index;  // (q, r, sublattice) -> vertex
  auto hexdist = [](int q, int r) { return (std::abs(q) + std::abs(r) + std::abs(q + r)) / 2; };
  int next = 0;
  for (int q = -radius; q <= radius; ++q)
    for (int r = -radius; r <= radius; ++r)
      if (hexdist(q, r) <= radius) {
        index[{q, r, 0}] = next++;
        index[{q, r, 1}] = next++;
      }
  CouplingGraph g(next);
  for (const auto& [site, v] : index) {
    auto [q, r, sub] = site;
    if (sub != 1) continue;
    // B(q,r) couples to A(q,r), A(q+1,r), A(q,r+1)
    for (auto [dq, dr] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{0, 1}}) {
      auto it = index.find({q + dq, r + dr, 0});
      if (it != index.end()) g.add_edge(v, it->second);
    }
  }
  return g;
}

// Heavy-hex lattice in the style of IBM's Eagle processors: long rows of
// qubits joined by sparse vertical rungs whose column offsets alternate
// between 0 and 2 (mod 4) from gap to gap.
inline CouplingGraph heavy_hex_eagle_layout(int rows, int cols) {
  if (rows < 1 || cols < 1) throw SchemaError("heavy-hex dimensions must be positive");
  const int width = 4 * cols + 3;
  const int rungs_per_gap = cols + 1;
  const int n = rows * width + (rows - 1) * rungs_per_gap;
  CouplingGraph g(n);
  auto row_base = [&](int r) { return r * (width + rungs_per_gap); };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c + 1 < width; ++c) g.add_edge(row_base(r) + c, row_base(r) + c + 1);
  for (int gap = 0; gap + 1 < rows; ++gap) {
    const int offset = gap % 2 == 0 ? 0 : 2;
    for (int i = 0; i < rungs_per_gap; ++i) {
      const int col = offset + 4 * i;
      if (col >= width) continue;
      const int rung = row_base(gap) + width + i;
      g.add_edge(row_base(gap) + col, rung);
      g.add_edge(rung, row_base(gap + 1) + col);
    }
  }
  return g;
}

// The 13-qubit heavy-hex fragment used for the depth-3 layout comparison:
// center c with three branches, each a middle vertex m, a branching vertex b,
// and two leaves.
inline CouplingGraph heavy_hex_fragment() {
  CouplingGraph g(13);
  const int c = 0;
  const int m[3] = {1, 2, 3};
  const int b[3] = {4, 5, 6};
  const int leaves[3][2] = {{7, 8}, {9, 10}, {11, 12}};
  for (int i = 0; i < 3; ++i) {
    g.add_edge(c, m[i]);
    g.add_edge(m[i], b[i]);
    g.add_edge(b[i], leaves[i][0]);
    g.add_edge(b[i], leaves[i][1]);
  }
  return g;
}

inline CouplingGraph layout_from_json(const nlohmann::ordered_json& j) {
  CouplingGraph g(j.at("num_qubits").get<int>());
  for (const auto& e : j.at("edges")) {
    if (e.size() != 2) throw SchemaError("layout edge must have two endpoints");
    g.add_edge(e[0].get<int>(), e[1].get<int>());
  }
  return g;
}

inline nlohmann::ordered_json layout_to_json(const CouplingGraph& g) {
  nlohmann::ordered_json j;
  j["num_qubits"] = g.num_qubits();
  auto arr = nlohmann::ordered_json::array();
  for (auto [a, b] : g.edges()) arr.push_back(nlohmann::ordered_json::array({a, b}));
  j["edges"] = std::move(arr);
  return j;
}

// --- parity trees ---

enum class ScheduleMode { Serial, ParallelMerged };

// Rooted CNOT collection tree with one time slot per edge. The edge owned by
// vertex v (v as control, parent(v) as target) fires at slot(v); it must fire
// strictly after every edge in v's own subtree.
struct ParityTree {
  int root = 0;
  std::map<int, int> parent;  // non-root vertex -> parent
  std::map<int, int> slot;    // non-root vertex -> slot in 1..depth

  std::vector<int> vertices() const {
    std::vector<int> out{root};
    for (const auto& [v, p] : parent) out.push_back(v);
    std::sort(out.begin(), out.end());
    return out;
  }
  int size() const { return static_cast<int>(parent.size()) + 1; }
  int depth() const {
    int d = 0;
    for (const auto& [v, s] : slot) d = std::max(d, s);
    return d;
  }
};

// Independent replay of the scheduling constraints; used by tests and by the
// search postconditions.
inline std::vector<std::string> tree_violations(const CouplingGraph& g, const ParityTree& t,
                                                ScheduleMode mode, int max_depth) {
  std::vector<std::string> out;
  std::map<int, std::vector<int>> children;
  for (const auto& [v, p] : t.parent) children[p].push_back(v);
  for (const auto& [v, p] : t.parent) {
    if (!g.has_edge(v, p)) out.push_back("tree edge not in coupling graph");
    auto it = t.slot.find(v);
    if (it == t.slot.end()) {
      out.push_back("tree edge without slot");
      continue;
    }
    const int s = it->second;
    if (s < 1 || s > max_depth) out.push_back("slot out of range");
    for (int u : children.count(v) ? children[v] : std::vector<int>{})
      if (t.slot.at(u) >= s) out.push_back("child fires at or after its parent edge");
  }
  // reachability (acyclic by construction if every chain ends at root)
  for (const auto& [v, p] : t.parent) {
    int cur = v;
    std::set<int> seen;
    while (cur != t.root) {
      if (!seen.insert(cur).second) {
        out.push_back("cycle in parent map");
        break;
      }
      auto it = t.parent.find(cur);
      if (it == t.parent.end()) {
        out.push_back("vertex not connected to root");
        break;
      }
      cur = it->second;
    }
  }
  // per-slot occupancy
  std::map<int, std::map<int, int>> control_slots, target_slots;  // vertex -> slot -> count
  for (const auto& [v, p] : t.parent) {
    const int s = t.slot.at(v);
    control_slots[v][s] += 1;
    target_slots[p][s] += 1;
  }
  auto busy = [&](const std::map<int, std::map<int, int>>& m, int v, int s) {
    auto it = m.find(v);
    if (it == m.end()) return 0;
    auto jt = it->second.find(s);
    return jt == it->second.end() ? 0 : jt->second;
  };
  for (const auto& [v, p] : t.parent) {
    const int s = t.slot.at(v);
    if (busy(target_slots, v, s) > 0)
      out.push_back("vertex is control and target in the same slot");
    if (mode == ScheduleMode::Serial) {
      if (busy(target_slots, v, s) + busy(control_slots, v, s) > 1)
        out.push_back("serial: vertex in more than one edge per slot");
      if (busy(target_slots, p, s) + busy(control_slots, p, s) > 1)
        out.push_back("serial: target vertex in more than one edge per slot");
    }
  }
  return out;
}

struct MaxTermResult {
  int size = 0;
  ParityTree tree;
  bool exact = true;
};

namespace detail {

// Branch-and-bound search for the largest serial-schedulable tree. Vertices
// are claimed globally; each expansion assigns at most one child per slot.
class SerialSearch {
 public:
  SerialSearch(const CouplingGraph& g, int root, int depth)
      : graph_(g), root_(root), depth_(depth), claimed_(g.num_qubits(), false) {}

  MaxTermResult run() {
    claimed_[root_] = true;
    best_count_ = 1;
    best_parent_.clear();
    best_slot_.clear();
    std::vector<WorkItem> work{{root_, depth_}};
    count_ = 1;
    explore(work, 0, depth_);
    MaxTermResult res;
    res.size = best_count_;
    res.tree.root = root_;
    res.tree.parent = best_parent_;
    res.tree.slot = best_slot_;
    res.exact = true;
    return res;
  }

 private:
  struct WorkItem {
    int vertex;
    int budget;
  };

  // Upper bound on vertices a budget-b expansion can still add.
  static int potential(int b) { return (1 << b) - 1; }

  void explore(std::vector<WorkItem>& work, std::size_t idx, int slot) {
    // bound: current count plus everything the pending work could add
    int bound = count_;
    for (std::size_t i = idx + 1; i < work.size(); ++i) bound += potential(work[i].budget);
    if (idx < work.size()) bound += potential(std::min(slot, work[idx].budget));
    if (bound <= best_count_) return;

    if (idx >= work.size()) {
      if (count_ > best_count_) snapshot(work);
      return;
    }
    WorkItem item = work[idx];
    if (slot == 0) {
      explore(work, idx + 1, idx + 1 < work.size() ? work[idx + 1].budget : 0);
      return;
    }
    // each free neighbor may fire into item.vertex at this slot
    for (int u : graph_.neighbors(item.vertex)) {
      if (claimed_[u]) continue;
      claimed_[u] = true;
      ++count_;
      work.push_back({u, slot - 1});
      parent_[u] = item.vertex;
      slot_[u] = slot;
      explore(work, idx, slot - 1);
      work.pop_back();
      parent_.erase(u);
      slot_.erase(u);
      claimed_[u] = false;
      --count_;
    }
    // or leave the slot unused
    explore(work, idx, slot - 1);
  }

  void snapshot(const std::vector<WorkItem>&) {
    best_count_ = count_;
    best_parent_ = parent_;
    best_slot_ = slot_;
  }

  const CouplingGraph& graph_;
  int root_;
  int depth_;
  std::vector<bool> claimed_;
  int count_ = 0;
  int best_count_ = 0;
  std::map<int, int> parent_, slot_;
  std::map<int, int> best_parent_, best_slot_;
};

inline MaxTermResult serial_greedy(const CouplingGraph& g, int root, int depth) {
  // Non-optimal fallback for large instances: expand highest budgets first,
  // preferring high-degree neighbors.
  MaxTermResult res;
  res.exact = false;
  res.tree.root = root;
  std::vector<bool> claimed(g.num_qubits(), false);
  claimed[root] = true;
  std::vector<std::pair<int, int>> work{{root, depth}};  // (vertex, budget)
  while (!work.empty()) {
    auto [v, b] = work.front();
    work.erase(work.begin());
    for (int s = b; s >= 1; --s) {
      int pick = -1, pick_deg = -1;
      for (int u : g.neighbors(v))
        if (!claimed[u] && g.degree(u) > pick_deg) {
          pick = u;
          pick_deg = g.degree(u);
        }
      if (pick < 0) break;
      claimed[pick] = true;
      res.tree.parent[pick] = v;
      res.tree.slot[pick] = s;
      work.push_back({pick, s - 1});
    }
  }
  res.size = res.tree.size();
  return res;
}

}  // namespace detail

inline constexpr int kExactSearchMaxQubits = 40;
inline constexpr int kExactSearchMaxDepth = 4;

// Largest Pauli-term support collectable into `root` within `depth` slots.
//
// Scheduling model: an edge at slot s is a CNOT with the child as control and
// the parent as target; a child's subtree must finish before its own edge
// fires. Serial mode allows one incident edge per vertex per slot. Merged
// mode allows a vertex to absorb any number of same-slot edges as the target
// (a common-target parallel group), but it may not be control and target in
// the same slot.
//
// Instances beyond `exact_limit` vertices (or depth > 4) fall back to a
// greedy heuristic and report exact = false.
inline MaxTermResult max_pauli_term(const CouplingGraph& g, int root, int depth,
                                    ScheduleMode mode,
                                    int exact_limit = kExactSearchMaxQubits) {
  if (root < 0 || root >= g.num_qubits()) throw DomainError("root not in graph");
  if (depth < 0) throw DomainError("depth must be non-negative");
  if (mode == ScheduleMode::ParallelMerged) {
    // With unlimited target fan-in the optimum is exactly the radius-d ball:
    // every vertex at BFS depth k fires at slot depth-k+1.
    MaxTermResult res;
    res.tree.root = root;
    std::vector<int> dist(g.num_qubits(), -1);
    std::queue<int> q;
    q.push(root);
    dist[root] = 0;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      if (dist[v] == depth) continue;
      for (int u : g.neighbors(v))
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          res.tree.parent[u] = v;
          res.tree.slot[u] = depth - dist[u] + 1;
          q.push(u);
        }
    }
    res.size = res.tree.size();
    res.exact = true;
    return res;
  }
  if (g.num_qubits() > exact_limit || depth > kExactSearchMaxDepth)
    return detail::serial_greedy(g, root, depth);
  detail::SerialSearch search(g, root, depth);
  return search.run();
}

struct GainPoint {
  int depth = 0;
  int serial = 0;
  int parallel = 0;
  int gain = 0;
};

// Best serial and merged sizes over all roots, per depth.
inline std::vector<GainPoint> gain_curve(const CouplingGraph& g, const std::vector<int>& depths,
                                         int exact_limit = kExactSearchMaxQubits) {
  std::vector<GainPoint> out;
  for (int d : depths) {
    GainPoint p;
    p.depth = d;
    for (int root = 0; root < g.num_qubits(); ++root) {
      p.serial = std::max(p.serial, max_pauli_term(g, root, d, ScheduleMode::Serial, exact_limit).size);
      p.parallel =
          std::max(p.parallel, max_pauli_term(g, root, d, ScheduleMode::ParallelMerged).size);
    }
    p.gain = p.parallel - p.serial;
    out.push_back(p);
  }
  return out;
}

// Spanning parity tree over a given support set (BFS from root, smallest
// neighbor index first), with ASAP slot assignment under the mode's rules.
inline ParityTree spanning_parity_tree(const CouplingGraph& g, const std::vector<int>& support,
                                       int root, ScheduleMode mode) {
  std::set<int> in_support(support.begin(), support.end());
  if (!in_support.count(root)) throw DomainError("root must belong to the term support");
  ParityTree t;
  t.root = root;
  std::set<int> visited{root};
  std::queue<int> q;
  q.push(root);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int u : g.neighbors(v)) {  // neighbors are sorted ascending
      if (!in_support.count(u) || visited.count(u)) continue;
      visited.insert(u);
      t.parent[u] = v;
      q.push(u);
    }
  }
  if (visited.size() != in_support.size()) throw DomainError("no parity tree: support is disconnected");

  // ASAP slots: an edge is ready once the child's subtree has fired.
  std::map<int, std::vector<int>> children;
  for (const auto& [v, p] : t.parent) children[p].push_back(v);
  std::map<int, int> pending;  // vertex -> children edges not yet fired
  for (const auto& [v, p] : t.parent)
    pending[v] = children.count(v) ? static_cast<int>(children[v].size()) : 0;
  std::set<int> unfired;
  for (const auto& [v, p] : t.parent) unfired.insert(v);
  int slot = 0;
  while (!unfired.empty()) {
    ++slot;
    std::vector<int> fire;
    std::set<int> busy;  // serial occupancy within this slot
    for (int v : unfired) {
      if (pending[v] > 0) continue;
      const int p = t.parent[v];
      if (mode == ScheduleMode::Serial && (busy.count(v) || busy.count(p))) continue;
      fire.push_back(v);
      busy.insert(v);
      busy.insert(p);
    }
    if (fire.empty()) throw DomainError("parity tree scheduling stalled");
    for (int v : fire) {
      t.slot[v] = slot;
      unfired.erase(v);
      pending[t.parent[v]] -= 1;
    }
  }
  return t;
}

}  // namespace pulseforge
