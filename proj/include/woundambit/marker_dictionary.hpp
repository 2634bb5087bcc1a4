#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "woundambit/error.hpp"

namespace woundambit {

/// Square bit pattern packed row-major into a 64-bit word; bit (row * n + col) set means a
/// white module. Supports n up to 8.
using MarkerCode = std::uint64_t;

inline bool code_bit(MarkerCode code, int n, int row, int col) {
  return (code >> (row * n + col)) & 1u;
}

/// Rotates a code 90 degrees clockwise as displayed.
inline MarkerCode rotate_code_cw(MarkerCode code, int n) {
  MarkerCode out = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (code_bit(code, n, n - 1 - c, r)) out |= MarkerCode{1} << (r * n + c);
    }
  }
  return out;
}

inline MarkerCode rotate_code_cw(MarkerCode code, int n, int times) {
  for (int i = 0; i < (times % 4 + 4) % 4; ++i) code = rotate_code_cw(code, n);
  return code;
}

inline int hamming(MarkerCode a, MarkerCode b) { return std::popcount(a ^ b); }

/// Minimum distance between `a` and any rotation of `b`.
inline int rotated_distance(MarkerCode a, MarkerCode b, int n) {
  int best = std::numeric_limits<int>::max();
  for (int r = 0; r < 4; ++r) best = std::min(best, hamming(a, rotate_code_cw(b, n, r)));
  return best;
}

/// Minimum distance between a code and its own non-trivial rotations.
inline int self_rotation_distance(MarkerCode a, int n) {
  int best = std::numeric_limits<int>::max();
  for (int r = 1; r < 4; ++r) best = std::min(best, hamming(a, rotate_code_cw(a, n, r)));
  return best;
}

/// Code book of square fiducials; the ID of an entry is its index.
class MarkerDictionary {
 public:
  MarkerDictionary(int grid_size, std::vector<MarkerCode> entries)
      : grid_size_(grid_size), entries_(std::move(entries)) {
    if (grid_size_ < 2 || grid_size_ > 8) {
      throw invalid_input_error("marker grid size must lie in [2, 8]");
    }
    if (entries_.empty()) throw invalid_input_error("marker dictionary is empty");
    min_hamming_ = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      min_hamming_ = std::min(min_hamming_, self_rotation_distance(entries_[i], grid_size_));
      for (std::size_t j = i + 1; j < entries_.size(); ++j) {
        min_hamming_ =
            std::min(min_hamming_, rotated_distance(entries_[i], entries_[j], grid_size_));
      }
    }
    if (min_hamming_ < 1) {
      throw invalid_input_error("dictionary entries must be distinct under rotation");
    }
  }

  int grid_size() const noexcept { return grid_size_; }
  int size() const noexcept { return static_cast<int>(entries_.size()); }
  bool contains(int id) const noexcept { return id >= 0 && id < size(); }
  /// Minimum Hamming distance over all entry pairs and rotations, self-rotations included.
  int min_hamming() const noexcept { return min_hamming_; }

  MarkerCode code(int id) const {
    if (!contains(id)) throw invalid_input_error("unknown marker id " + std::to_string(id));
    return entries_[static_cast<std::size_t>(id)];
  }
  const std::vector<MarkerCode>& entries() const noexcept { return entries_; }

 private:
  int grid_size_;
  std::vector<MarkerCode> entries_;
  int min_hamming_ = 0;
};

/// Deterministic greedy construction of a dictionary.
///
/// Candidates are visited in the order `(i * 40503) mod 2^(n*n)` (an odd multiplier, so
/// every code is visited once). A candidate is accepted when its white-module count lies
/// within [3/8, 5/8] of the grid, its distance to its own rotations is at least
/// `min_distance`, and its rotated distance to every accepted entry is at least
/// `min_distance`. The built-in dictionary is this procedure's output for (4, 8, 5).
inline std::vector<MarkerCode> generate_dictionary(int n, int count, int min_distance) {
  if (n < 2 || n > 4) throw invalid_input_error("generator supports grid sizes 2 to 4");
  const std::uint64_t space = std::uint64_t{1} << (n * n);
  const int bits = n * n;
  std::vector<MarkerCode> out;
  for (std::uint64_t i = 0; i < space && static_cast<int>(out.size()) < count; ++i) {
    const MarkerCode c = (i * 40503u) & (space - 1);
    const int ones = std::popcount(c);
    if (8 * ones < 3 * bits || 8 * ones > 5 * bits) continue;
    if (self_rotation_distance(c, n) < min_distance) continue;
    const bool far = std::ranges::all_of(
        out, [&](MarkerCode e) { return rotated_distance(c, e, n) >= min_distance; });
    if (far) out.push_back(c);
  }
  if (static_cast<int>(out.size()) < count) {
    throw invalid_input_error("requested dictionary is not attainable");
  }
  return out;
}

// Output of generate_dictionary(4, 8, 5); pinned by a unit test.
inline constexpr MarkerCode kBuiltinCodes[] = {
    0x9e37, 0x3c6e, 0xdaa5, 0x78dc, 0x1713, 0x5381, 0xf1b8, 0xa702};

/// Built-in 4x4 dictionary with 8 entries. Reference-object sheets use ids 0-3.
inline const MarkerDictionary& builtin_dictionary() {
  static const MarkerDictionary dict(
      4, std::vector<MarkerCode>(std::begin(kBuiltinCodes), std::end(kBuiltinCodes)));
  return dict;
}

}  // namespace woundambit
