#include "actdiag/delivery.hpp"

#include <algorithm>
#include <bitset>
#include <fmt/format.h>
#include <map>
#include <numeric>
#include <tuple>

namespace actdiag {

DeliveredBelief deliver(const BeliefVector& model_beliefs, const ObservationLog& log) {
  DeliveredBelief out{model_beliefs, std::vector<bool>(model_beliefs.size(), false)};
  for (const auto& e : log.entries()) {
    if (e.index >= out.merged.size()) throw Error(fmt::format("logged index {} outside the belief vector", e.index));
    out.merged.probs[e.index] = e.value == ObservationValue::One ? 1.0 : 0.0;
    out.forced[e.index] = true;
  }
  return out;
}

ObservationVector ml_guess(const DeliveredBelief& belief) {
  ObservationVector v(belief.merged.size());
  for (std::size_t i = 0; i < v.size(); ++i) v.set(i, from_bool(belief.merged[i] >= 0.5));
  return v;
}

Ranking ranking_from_beliefs(const DeliveredBelief& belief, std::size_t n_items) {
  if (belief.merged.size() != pair_count(n_items)) {
    throw Error(fmt::format("ranking delivery expects {} pairwise beliefs, got {}", pair_count(n_items),
                            belief.merged.size()));
  }
  std::vector<double> score(n_items, 0.0);
  for (std::size_t i = 0; i < n_items; ++i) {
    for (std::size_t j = i + 1; j < n_items; ++j) {
      const double p = belief.merged[pair_index(i, j, n_items)];
      score[i] += p;
      score[j] += 1.0 - p;
    }
  }
  std::vector<int> order(n_items);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&score](int a, int b) {
    return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
  });
  return Ranking(std::move(order));
}

std::vector<bool> network_diagnosis(const DeliveredBelief& belief, const network::TreeTopology& topo) {
  if (belief.merged.size() != topo.n_observations()) {
    throw Error(fmt::format("network delivery expects {} beliefs, got {}", topo.n_observations(),
                            belief.merged.size()));
  }
  std::vector<bool> failed(topo.n_links());
  for (std::size_t e = 0; e < topo.n_links(); ++e) failed[e] = belief.merged[e] < 0.5;
  return failed;
}

namespace battleship {

namespace {

using Cells = std::bitset<kCells>;
constexpr std::size_t kShips = kFleet.size();

struct Candidate {
  Placement placement;
  Cells cells;
};

class FleetSolver {
 public:
  FleetSolver(const ObservationLog& log, std::size_t limit) : limit_(limit) {
    Cells misses;
    for (const auto& e : log.entries()) {
      if (e.index >= kCells) throw Error(fmt::format("battleship observation index {} out of range", e.index));
      (e.value == ObservationValue::One ? hits_ : misses).set(e.index);
    }
    for (std::size_t s = 0; s < kShips; ++s) {
      for (int y = 0; y < kBoardSize; ++y) {
        for (int x = 0; x < kBoardSize; ++x) {
          for (Orientation o : {Orientation::Horizontal, Orientation::Vertical}) {
            const Placement p{static_cast<int>(s), x, y, o};
            if (!p.in_bounds()) continue;
            Cells c;
            for (std::size_t cell : p.cells()) c.set(cell);
            if ((c & misses).any()) continue;
            for (std::size_t cell : p.cells()) covering_[s][cell].push_back(candidates_[s].size());
            candidates_[s].push_back({p, c});
          }
        }
      }
    }
    for (std::size_t s = kShips; s-- > 0;) {
      cells_from_[s] = cells_from_[s + 1] + static_cast<std::size_t>(kFleet[s].cells());
    }
  }

  SolveResult run() {
    SolveResult r;
    if (hits_.count() <= cells_from_[0] && search(0, Cells{})) {
      std::vector<Placement> placements;
      for (std::size_t s = 0; s < kShips; ++s) placements.push_back(candidates_[s][chosen_[s]].placement);
      r.status = SolveStatus::Solved;
      r.board = Board(std::move(placements));
    } else {
      r.status = timed_out_ ? SolveStatus::Timeout : SolveStatus::Unsat;
    }
    r.expansions = expansions_;
    return r;
  }

 private:
  bool search(std::size_t ship, const Cells& occupied) {
    if (++expansions_ > limit_) {
      timed_out_ = true;
      return false;
    }
    const Cells open_hits = hits_ & ~occupied;
    if (ship == kShips) return open_hits.none();
    if (open_hits.count() > cells_from_[ship]) return false;
    if (!hits_coverable(ship, open_hits, occupied)) return false;

    std::size_t start = 0;
    if (ship > 0 && kFleet[ship] == kFleet[ship - 1]) start = chosen_[ship - 1] + 1;
    const auto& cands = candidates_[ship];
    for (std::size_t i = start; i < cands.size(); ++i) {
      if ((cands[i].cells & occupied).any()) continue;
      chosen_[ship] = i;
      if (search(ship + 1, occupied | cands[i].cells)) return true;
      if (timed_out_) return false;
    }
    return false;
  }

  // Every uncovered hit must be reachable by some free placement of a
  // remaining ship.
  bool hits_coverable(std::size_t ship, const Cells& open_hits, const Cells& occupied) const {
    for (std::size_t cell = 0; cell < kCells; ++cell) {
      if (!open_hits.test(cell)) continue;
      bool reachable = false;
      for (std::size_t s = ship; s < kShips && !reachable; ++s) {
        for (std::size_t idx : covering_[s][cell]) {
          if ((candidates_[s][idx].cells & occupied).none()) {
            reachable = true;
            break;
          }
        }
      }
      if (!reachable) return false;
    }
    return true;
  }

  Cells hits_;
  std::array<std::vector<Candidate>, kShips> candidates_;
  std::array<std::array<std::vector<std::size_t>, kCells>, kShips> covering_;
  std::array<std::size_t, kShips + 1> cells_from_{};
  std::array<std::size_t, kShips> chosen_{};
  std::size_t limit_;
  std::size_t expansions_ = 0;
  bool timed_out_ = false;
};

}  // namespace

SolveResult battleship_solve(const ObservationLog& observations, std::size_t expansion_limit) {
  return FleetSolver(observations, expansion_limit).run();
}

int ships_correct(const Board& predicted, const Board& truth) {
  // Placement equality is an equivalence relation, so a maximum matching is
  // the size of the multiset intersection.
  using Key = std::tuple<int, int, int, int, int>;
  auto key = [](const Placement& p) {
    const auto s = p.spec();
    return Key{s.width, s.height, p.x, p.y, static_cast<int>(p.orientation)};
  };
  std::map<Key, int> available;
  for (const auto& p : predicted.placements()) ++available[key(p)];
  int matched = 0;
  for (const auto& p : truth.placements()) {
    auto it = available.find(key(p));
    if (it != available.end() && it->second > 0) {
      --it->second;
      ++matched;
    }
  }
  return matched;
}

}  // namespace battleship

}  // namespace actdiag
