#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "gossip/rng.hpp"

namespace gossip {

/// One row of the system: S = e_i.
struct RowSample {
  std::size_t row = 0;
};

/// A set of rows: S = I_{:C}. Indices are sorted and distinct.
struct BlockSample {
  std::vector<std::size_t> rows;
};

using SketchSample = std::variant<RowSample, BlockSample>;

/// Distribution over sketches of an m-row system.
class SketchDistribution {
 public:
  enum class Kind { Rows, UniformBlocks };

  /// Row i with probability p[i]. Entries must be non-negative and sum to 1
  /// within 1e-12; zero-probability rows are never drawn.
  static SketchDistribution row_probabilities(std::vector<double> p);
  static SketchDistribution uniform_rows(std::size_t m);
  /// Uniformly random tau-subsets of the m rows, without replacement.
  static SketchDistribution uniform_blocks(std::size_t m, std::size_t tau);

  Kind kind() const noexcept { return kind_; }
  bool is_block() const noexcept { return kind_ == Kind::UniformBlocks; }
  bool is_uniform() const noexcept { return uniform_; }
  std::size_t rows() const noexcept { return m_; }
  std::size_t tau() const noexcept { return tau_; }
  /// Per-row probabilities (Rows kind only).
  const std::vector<double>& probabilities() const noexcept { return p_; }

  SketchSample sample(Rng& rng) const;

 private:
  SketchDistribution() = default;

  Kind kind_ = Kind::Rows;
  std::size_t m_ = 0;
  std::size_t tau_ = 1;
  bool uniform_ = false;
  std::vector<double> p_;
  std::vector<double> cdf_;
  std::size_t last_positive_ = 0;
};

inline SketchSample sample(const SketchDistribution& dist, Rng& rng) { return dist.sample(rng); }

/// Sorted uniformly random k-subset of {0, ..., m-1} (Floyd's algorithm).
/// For k == 1 this consumes exactly one rng.uniform_index(m) draw.
std::vector<std::size_t> sample_subset(std::size_t m, std::size_t k, Rng& rng);

}  // namespace gossip
