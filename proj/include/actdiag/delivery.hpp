#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "actdiag/battleship.hpp"
#include "actdiag/core.hpp"
#include "actdiag/network.hpp"

namespace actdiag {

/// Model beliefs with every logged position forced to its logged value.
struct DeliveredBelief {
  BeliefVector merged;
  std::vector<bool> forced;
};

DeliveredBelief deliver(const BeliefVector& model_beliefs, const ObservationLog& log);

/// One where the merged probability is >= 0.5.
ObservationVector ml_guess(const DeliveredBelief& belief);

/// Borda count over pairwise preference probabilities; ties go to the lower id.
Ranking ranking_from_beliefs(const DeliveredBelief& belief, std::size_t n_items = 10);

/// Per-link failed flags: a link is functional iff its direct entry is >= 0.5.
std::vector<bool> network_diagnosis(const DeliveredBelief& belief, const network::TreeTopology& topo);

namespace battleship {

enum class SolveStatus { Solved, Unsat, Timeout };

struct SolveResult {
  SolveStatus status = SolveStatus::Unsat;
  std::optional<Board> board;
  std::size_t expansions = 0;
};

inline constexpr std::size_t kDefaultExpansionLimit = 10'000'000;

/// First board, in fleet order with placements scanned row-major and
/// horizontal before vertical, that covers every logged hit and no logged
/// miss. Interchangeable ships are kept in increasing placement order.
SolveResult battleship_solve(const ObservationLog& observations,
                             std::size_t expansion_limit = kDefaultExpansionLimit);

/// Truth placements matched by an identical predicted placement (same
/// dimensions, position and orientation), ignoring ship labels.
int ships_correct(const Board& predicted, const Board& truth);

}  // namespace battleship

}  // namespace actdiag
