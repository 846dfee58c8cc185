#include "actdiag/battleship.hpp"

#include <algorithm>
#include <deque>
#include <fmt/format.h>
#include <numeric>

namespace actdiag::battleship {

namespace {

constexpr int kMaxRetriesPerShip = 10000;

bool try_place_fleet(Rng& rng, std::vector<Placement>& out) {
  std::array<bool, kCells> taken{};
  out.clear();
  for (int ship = 0; ship < static_cast<int>(kFleet.size()); ++ship) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxRetriesPerShip && !placed; ++attempt) {
      Placement p;
      p.ship = ship;
      p.orientation = bernoulli(rng, 0.5) ? Orientation::Vertical : Orientation::Horizontal;
      p.x = static_cast<int>(uniform_below(rng, static_cast<std::size_t>(kBoardSize - p.extent_x() + 1)));
      p.y = static_cast<int>(uniform_below(rng, static_cast<std::size_t>(kBoardSize - p.extent_y() + 1)));
      const auto cells = p.cells();
      bool clash = false;
      for (std::size_t c : cells) clash = clash || taken[c];
      if (clash) continue;
      for (std::size_t c : cells) taken[c] = true;
      out.push_back(p);
      placed = true;
    }
    if (!placed) return false;
  }
  return true;
}

}  // namespace

int Placement::extent_x() const {
  const auto s = spec();
  return orientation == Orientation::Vertical ? s.width : s.height;
}

int Placement::extent_y() const {
  const auto s = spec();
  return orientation == Orientation::Vertical ? s.height : s.width;
}

bool Placement::in_bounds() const {
  return ship >= 0 && ship < static_cast<int>(kFleet.size()) && x >= 0 && y >= 0 &&
         x + extent_x() <= kBoardSize && y + extent_y() <= kBoardSize;
}

std::vector<std::size_t> Placement::cells() const {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(extent_x() * extent_y()));
  for (int dy = 0; dy < extent_y(); ++dy) {
    for (int dx = 0; dx < extent_x(); ++dx) out.push_back(cell_index(x + dx, y + dy));
  }
  return out;
}

Board::Board(std::vector<Placement> placements) : placements_(std::move(placements)) {
  for (const auto& p : placements_) {
    if (!p.in_bounds()) throw Error(fmt::format("ship {} at ({}, {}) is out of bounds", p.ship, p.x, p.y));
    for (std::size_t c : p.cells()) {
      overlap_ = overlap_ || grid_[c];
      grid_[c] = true;
    }
  }
}

int Board::occupied_count() const { return static_cast<int>(std::count(grid_.begin(), grid_.end(), true)); }

bool Board::is_valid() const {
  if (overlap_ || placements_.size() != kFleet.size()) return false;
  std::array<bool, kFleet.size()> used{};
  for (const auto& p : placements_) {
    if (used[static_cast<std::size_t>(p.ship)]) return false;
    used[static_cast<std::size_t>(p.ship)] = true;
  }
  return occupied_count() == kFleetCells;
}

Board generate_board(Rng& rng) {
  std::vector<Placement> placements;
  while (!try_place_fleet(rng, placements)) {
  }
  return Board(std::move(placements));
}

ObservationVector board_observations(const Board& board) {
  ObservationVector v(kCells);
  for (std::size_t c = 0; c < kCells; ++c) v.set(c, from_bool(board.occupied(c)));
  return v;
}

ObservationLog sink_baseline(const QueryOracle& oracle, std::size_t budget, Rng& rng) {
  if (budget > kCells) throw Error(fmt::format("sink budget {} exceeds {}", budget, kCells));
  std::vector<std::size_t> random_order(kCells);
  std::iota(random_order.begin(), random_order.end(), std::size_t{0});
  shuffle(random_order, rng);
  std::size_t next_random = 0;

  ObservationLog log;
  std::deque<std::size_t> frontier;
  std::array<bool, kCells> queued{};
  while (log.size() < budget) {
    std::size_t cell = kCells;
    while (!frontier.empty() && cell == kCells) {
      const std::size_t c = frontier.front();
      frontier.pop_front();
      if (!log.contains(c)) cell = c;
    }
    while (cell == kCells) {
      const std::size_t c = random_order[next_random++];
      if (!log.contains(c)) cell = c;
    }
    const ObservationValue v = oracle(cell);
    log.append(cell, v);
    if (v != ObservationValue::One) continue;

    const int x = static_cast<int>(cell % kBoardSize);
    const int y = static_cast<int>(cell / kBoardSize);
    // neighbours in ascending index order: up, left, right, down
    const std::array<std::pair<int, int>, 4> nbrs = {{{x, y - 1}, {x - 1, y}, {x + 1, y}, {x, y + 1}}};
    for (const auto& [nx, ny] : nbrs) {
      if (nx < 0 || ny < 0 || nx >= kBoardSize || ny >= kBoardSize) continue;
      const std::size_t n = cell_index(nx, ny);
      if (log.contains(n) || queued[n]) continue;
      queued[n] = true;
      frontier.push_back(n);
    }
  }
  return log;
}

ObservationLog rand_baseline(const QueryOracle& oracle, std::size_t budget, Rng& rng) {
  if (budget > kCells) throw Error(fmt::format("rand budget {} exceeds {}", budget, kCells));
  std::vector<std::size_t> order(kCells);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  ObservationLog log;
  for (std::size_t k = 0; k < budget; ++k) log.append(order[k], oracle(order[k]));
  return log;
}

ObservationVector default_miss_guess(const ObservationLog& log) {
  ObservationVector guess(kCells, ObservationValue::Zero);
  for (const auto& e : log.entries()) guess.set(e.index, e.value);
  return guess;
}

double coordinate_accuracy(const ObservationVector& guess, const Board& truth) {
  if (guess.size() != kCells) throw Error("battleship guess must cover 100 cells");
  int correct = 0;
  for (std::size_t c = 0; c < kCells; ++c) {
    correct += (guess[c] == from_bool(truth.occupied(c))) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(kCells);
}

}  // namespace actdiag::battleship
