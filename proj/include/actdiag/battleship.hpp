#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "actdiag/collector.hpp"
#include "actdiag/core.hpp"
#include "actdiag/rng.hpp"

namespace actdiag::battleship {

inline constexpr int kBoardSize = 10;
inline constexpr std::size_t kCells = kBoardSize * kBoardSize;

struct ShipSpec {
  int width = 0;
  int height = 0;

  int cells() const { return width * height; }
  friend bool operator==(const ShipSpec&, const ShipSpec&) = default;
};

/// Fleet in placement order: 2x4, 1x5, 1x3, 1x3, 1x3 (22 cells).
inline constexpr std::array<ShipSpec, 5> kFleet = {{{2, 4}, {1, 5}, {1, 3}, {1, 3}, {1, 3}}};
inline constexpr int kFleetCells = 22;

enum class Orientation { Horizontal, Vertical };

/// Vertical keeps the ship's listed (width, height) footprint; Horizontal swaps it.
struct Placement {
  int ship = 0;  // index into the fleet
  int x = 0;
  int y = 0;
  Orientation orientation = Orientation::Horizontal;

  ShipSpec spec() const { return kFleet[static_cast<std::size_t>(ship)]; }
  int extent_x() const;
  int extent_y() const;
  bool in_bounds() const;
  /// Row-major cell indices y * 10 + x covered by this placement.
  std::vector<std::size_t> cells() const;

  friend bool operator==(const Placement&, const Placement&) = default;
};

class Board {
 public:
  Board() = default;
  explicit Board(std::vector<Placement> placements);

  const std::vector<Placement>& placements() const { return placements_; }
  bool occupied(std::size_t cell) const { return grid_[cell]; }
  const std::array<bool, kCells>& grid() const { return grid_; }
  int occupied_count() const;
  /// Full fleet, every ship exactly once, in bounds and non-overlapping.
  bool is_valid() const;

 private:
  std::vector<Placement> placements_;
  std::array<bool, kCells> grid_{};
  bool overlap_ = false;
};

inline std::size_t cell_index(int x, int y) { return static_cast<std::size_t>(y * kBoardSize + x); }

/// Ships placed in fleet order, each with uniform orientation and uniform
/// top-left by rejection sampling against earlier ships.
Board generate_board(Rng& rng);

ObservationVector board_observations(const Board& board);

/// Random unseen coordinates; on a hit, breadth-first expansion over the
/// 4-neighbours of known hits until the frontier is exhausted.
ObservationLog sink_baseline(const QueryOracle& oracle, std::size_t budget, Rng& rng);

/// Uniform sampling without replacement.
ObservationLog rand_baseline(const QueryOracle& oracle, std::size_t budget, Rng& rng);

/// Baselines' prediction: everything is a miss unless logged as a hit.
ObservationVector default_miss_guess(const ObservationLog& log);

/// Fraction of the 100 cells where `guess` matches the board.
double coordinate_accuracy(const ObservationVector& guess, const Board& truth);

}  // namespace actdiag::battleship
