#include "actdiag/network.hpp"

#include <algorithm>
#include <deque>
#include <fmt/format.h>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace actdiag::network {

namespace {

NodePair normalized(NodePair p) { return p.first < p.second ? p : NodePair{p.second, p.first}; }

}  // namespace

TreeTopology::TreeTopology(std::size_t n_nodes, std::vector<NodePair> edges, std::vector<NodePair> extra_pairs)
    : n_nodes_(n_nodes), edges_(std::move(edges)), extra_pairs_(std::move(extra_pairs)) {
  if (n_nodes_ < 2) throw Error("topology needs at least two nodes");
  if (edges_.size() != n_nodes_ - 1) {
    throw Error(fmt::format("a tree on {} nodes needs {} edges, got {}", n_nodes_, n_nodes_ - 1, edges_.size()));
  }
  auto check_node = [this](int v) {
    if (v < 0 || static_cast<std::size_t>(v) >= n_nodes_) throw Error(fmt::format("node {} out of range", v));
  };
  std::vector<std::vector<std::pair<int, std::size_t>>> adj(n_nodes_);
  std::set<NodePair> edge_set;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto [u, v] = edges_[e];
    check_node(u);
    check_node(v);
    if (u == v || !edge_set.insert(normalized(edges_[e])).second) throw Error(fmt::format("bad edge ({}, {})", u, v));
    adj[static_cast<std::size_t>(u)].emplace_back(v, e);
    adj[static_cast<std::size_t>(v)].emplace_back(u, e);
  }

  // root at node 0
  std::vector<int> parent(n_nodes_, -1);
  std::vector<std::size_t> parent_edge(n_nodes_, 0);
  std::vector<std::size_t> depth(n_nodes_, 0);
  std::vector<bool> seen(n_nodes_, false);
  std::vector<int> bfs_order;
  std::deque<int> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    bfs_order.push_back(u);
    for (const auto& [v, e] : adj[static_cast<std::size_t>(u)]) {
      const auto vi = static_cast<std::size_t>(v);
      if (seen[vi]) continue;
      seen[vi] = true;
      parent[vi] = u;
      parent_edge[vi] = e;
      depth[vi] = depth[static_cast<std::size_t>(u)] + 1;
      queue.push_back(v);
    }
  }
  if (bfs_order.size() != n_nodes_) throw Error("topology edges do not form a connected tree");

  std::vector<std::size_t> subtree(n_nodes_, 1);
  below_.assign(edges_.size(), 0);
  for (auto it = bfs_order.rbegin(); it != bfs_order.rend(); ++it) {
    const auto v = static_cast<std::size_t>(*it);
    if (parent[v] < 0) continue;
    subtree[static_cast<std::size_t>(parent[v])] += subtree[v];
    below_[parent_edge[v]] = subtree[v];
  }

  std::set<NodePair> pair_set;
  for (const auto& p : extra_pairs_) {
    check_node(p.first);
    check_node(p.second);
    const auto key = normalized(p);
    if (p.first == p.second || edge_set.contains(key) || !pair_set.insert(key).second) {
      throw Error(fmt::format("extra pair ({}, {}) is a self pair, a direct link or a duplicate", p.first, p.second));
    }
  }

  paths_.reserve(n_observations());
  for (std::size_t e = 0; e < edges_.size(); ++e) paths_.push_back({e});
  for (const auto& [a, b] : extra_pairs_) {
    std::vector<std::size_t> path;
    auto u = static_cast<std::size_t>(a);
    auto v = static_cast<std::size_t>(b);
    while (u != v) {
      if (depth[u] < depth[v]) std::swap(u, v);
      path.push_back(parent_edge[u]);
      u = static_cast<std::size_t>(parent[u]);
    }
    std::sort(path.begin(), path.end());
    paths_.push_back(std::move(path));
  }
}

std::pair<std::size_t, std::size_t> TreeTopology::split_sizes(std::size_t edge) const {
  if (edge >= edges_.size()) throw Error(fmt::format("edge index {} out of range", edge));
  return {below_[edge], n_nodes_ - below_[edge]};
}

std::size_t FaultState::failure_count() const {
  return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), true));
}

TreeTopology generate_topology(Rng& rng, std::size_t n_nodes, std::size_t n_extra) {
  std::vector<NodePair> edges;
  std::set<NodePair> edge_set;
  for (std::size_t k = 1; k < n_nodes; ++k) {
    const int parent = static_cast<int>(uniform_below(rng, k));
    edges.emplace_back(parent, static_cast<int>(k));
    edge_set.insert({parent, static_cast<int>(k)});
  }
  std::vector<NodePair> candidates;
  for (std::size_t u = 0; u < n_nodes; ++u) {
    for (std::size_t v = u + 1; v < n_nodes; ++v) {
      NodePair p{static_cast<int>(u), static_cast<int>(v)};
      if (!edge_set.contains(p)) candidates.push_back(p);
    }
  }
  if (n_extra > candidates.size()) throw Error("not enough non-adjacent pairs for the requested extras");
  // partial Fisher-Yates
  for (std::size_t i = 0; i < n_extra; ++i) {
    std::swap(candidates[i], candidates[i + uniform_below(rng, candidates.size() - i)]);
  }
  std::vector<NodePair> extras(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n_extra));
  std::sort(extras.begin(), extras.end());
  return TreeTopology(n_nodes, std::move(edges), std::move(extras));
}

FaultState sample_fault(const TreeTopology& topo, double p_fail, Rng& rng) {
  if (!(p_fail >= 0.0 && p_fail <= 1.0)) throw Error(fmt::format("p_fail {} not in [0,1]", p_fail));
  FaultState f;
  f.failed.resize(topo.n_links());
  for (std::size_t e = 0; e < topo.n_links(); ++e) f.failed[e] = uniform01(rng) < p_fail;
  return f;
}

ObservationVector fault_observations(const TreeTopology& topo, const FaultState& fault) {
  if (fault.failed.size() != topo.n_links()) throw Error("fault state does not match the topology");
  ObservationVector v(topo.n_observations());
  for (std::size_t i = 0; i < topo.n_observations(); ++i) {
    const auto& path = topo.path(i);
    const bool up = std::none_of(path.begin(), path.end(), [&](std::size_t e) { return fault.failed[e]; });
    v.set(i, from_bool(up));
  }
  return v;
}

double dependency_coefficient(const TreeTopology& topo, std::size_t edge) {
  const auto [m, n] = topo.split_sizes(edge);
  const double total = static_cast<double>(m + n);
  return static_cast<double>(m) * static_cast<double>(n) / (total * (total - 1.0));
}

ObservationLog rand_link_baseline(const QueryOracle& oracle, std::size_t budget, Rng& rng, std::size_t n_links) {
  if (budget > n_links) throw Error(fmt::format("rand_link budget {} exceeds {} links", budget, n_links));
  std::vector<std::size_t> order(n_links);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  ObservationLog log;
  for (std::size_t k = 0; k < budget; ++k) log.append(order[k], oracle(order[k]));
  return log;
}

std::vector<bool> default_functional_guess(const ObservationLog& log, std::size_t n_links) {
  std::vector<bool> failed(n_links, false);
  for (const auto& e : log.entries()) {
    if (e.index < n_links) failed[e.index] = e.value == ObservationValue::Zero;
  }
  return failed;
}

double link_accuracy(const std::vector<bool>& predicted_failed, const FaultState& truth) {
  if (predicted_failed.size() != truth.failed.size()) throw Error("prediction and truth cover different link counts");
  std::size_t correct = 0;
  for (std::size_t e = 0; e < truth.failed.size(); ++e) correct += predicted_failed[e] == truth.failed[e] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(truth.failed.size());
}

void write_topology(const std::filesystem::path& path, const TreeTopology& topo) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  out << "V=" << topo.n_nodes() << '\n';
  for (const auto& [u, v] : topo.edges()) out << "edge " << u << ' ' << v << '\n';
  for (const auto& [u, v] : topo.extra_pairs()) out << "pair " << u << ' ' << v << '\n';
}

TreeTopology read_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open topology file '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line) || line.rfind("V=", 0) != 0) {
    throw Error(fmt::format("{}: first line must be 'V=<nodes>'", path.string()));
  }
  std::size_t n_nodes = 0;
  try {
    n_nodes = static_cast<std::size_t>(std::stoul(line.substr(2)));
  } catch (const std::exception&) {
    throw Error(fmt::format("{}: bad node count '{}'", path.string(), line));
  }
  std::vector<NodePair> edges;
  std::vector<NodePair> pairs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    int u = 0;
    int v = 0;
    std::string rest;
    if (!(ss >> u >> v) || (ss >> rest)) throw Error(fmt::format("{}:{}: malformed line '{}'", path.string(), line_no, line));
    if (kind == "edge") {
      edges.emplace_back(u, v);
    } else if (kind == "pair") {
      pairs.emplace_back(u, v);
    } else {
      throw Error(fmt::format("{}:{}: unknown record '{}'", path.string(), line_no, kind));
    }
  }
  return TreeTopology(n_nodes, std::move(edges), std::move(pairs));
}

}  // namespace actdiag::network
