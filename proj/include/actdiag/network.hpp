#pragma once

#include <cstddef>
#include <filesystem>
#include <utility>
#include <vector>

#include "actdiag/collector.hpp"
#include "actdiag/core.hpp"
#include "actdiag/rng.hpp"

namespace actdiag::network {

inline constexpr std::size_t kNodes = 100;
inline constexpr std::size_t kLinks = kNodes - 1;  // 99 direct links
inline constexpr std::size_t kExtraPairs = 300;
inline constexpr std::size_t kObservations = kLinks + kExtraPairs;  // 399

using NodePair = std::pair<int, int>;

/// Spanning tree plus fixed measurement pairs. Observation i < E checks link i
/// directly; observation E + k checks extra pair k.
class TreeTopology {
 public:
  TreeTopology(std::size_t n_nodes, std::vector<NodePair> edges, std::vector<NodePair> extra_pairs);

  std::size_t n_nodes() const { return n_nodes_; }
  std::size_t n_links() const { return edges_.size(); }
  std::size_t n_observations() const { return edges_.size() + extra_pairs_.size(); }
  const std::vector<NodePair>& edges() const { return edges_; }
  const std::vector<NodePair>& extra_pairs() const { return extra_pairs_; }

  /// Edge indices on the tree path measured by observation `obs`.
  const std::vector<std::size_t>& path(std::size_t obs) const { return paths_.at(obs); }
  /// Sizes of the two components left after removing edge `edge` alone.
  std::pair<std::size_t, std::size_t> split_sizes(std::size_t edge) const;

  friend bool operator==(const TreeTopology& a, const TreeTopology& b) {
    return a.n_nodes_ == b.n_nodes_ && a.edges_ == b.edges_ && a.extra_pairs_ == b.extra_pairs_;
  }

 private:
  std::size_t n_nodes_;
  std::vector<NodePair> edges_;
  std::vector<NodePair> extra_pairs_;
  std::vector<std::vector<std::size_t>> paths_;
  std::vector<std::size_t> below_;  // per edge: nodes on the child side
};

struct FaultState {
  std::vector<bool> failed;  // per edge

  std::size_t failure_count() const;
};

/// Random recursive tree (node k hangs off a uniform earlier node) plus
/// `n_extra` distinct non-adjacent pairs drawn without replacement.
TreeTopology generate_topology(Rng& rng, std::size_t n_nodes = kNodes, std::size_t n_extra = kExtraPairs);

FaultState sample_fault(const TreeTopology& topo, double p_fail, Rng& rng);

/// One iff every edge on the measured path is functional.
ObservationVector fault_observations(const TreeTopology& topo, const FaultState& fault);

/// M*N / ((M+N)(M+N-1)) for the split created by removing `edge`.
double dependency_coefficient(const TreeTopology& topo, std::size_t edge);

/// Uniform without replacement over the direct-link observations only.
ObservationLog rand_link_baseline(const QueryOracle& oracle, std::size_t budget, Rng& rng,
                                  std::size_t n_links = kLinks);

/// Baseline prediction: a link is failed iff its direct check was logged Zero.
std::vector<bool> default_functional_guess(const ObservationLog& log, std::size_t n_links = kLinks);

/// Fraction of links whose predicted failed/functional state matches.
double link_accuracy(const std::vector<bool>& predicted_failed, const FaultState& truth);

// "V=<n>", then "edge u v" lines, then "pair u v" lines.
void write_topology(const std::filesystem::path& path, const TreeTopology& topo);
TreeTopology read_topology(const std::filesystem::path& path);

}  // namespace actdiag::network
