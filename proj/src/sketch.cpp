#include "gossip/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gossip/error.hpp"

namespace gossip {

SketchDistribution SketchDistribution::row_probabilities(std::vector<double> p) {
  if (p.empty()) throw InvalidParameter("row distribution needs at least one row");
  double total = 0.0;
  for (double pi : p) {
    if (!(pi >= 0.0)) throw InvalidParameter("row probabilities must be non-negative");
    total += pi;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidParameter("row probabilities sum to " + std::to_string(total) + ", expected 1");
  }
  SketchDistribution d;
  d.kind_ = Kind::Rows;
  d.m_ = p.size();
  d.cdf_.resize(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    d.cdf_[i] = acc;
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) d.last_positive_ = i;
  }
  d.p_ = std::move(p);
  return d;
}

SketchDistribution SketchDistribution::uniform_rows(std::size_t m) {
  if (m == 0) throw InvalidParameter("row distribution needs at least one row");
  SketchDistribution d;
  d.kind_ = Kind::Rows;
  d.m_ = m;
  d.uniform_ = true;
  d.last_positive_ = m - 1;
  d.p_.assign(m, 1.0 / static_cast<double>(m));
  d.cdf_.resize(m);
  for (std::size_t i = 0; i < m; ++i) d.cdf_[i] = static_cast<double>(i + 1) / static_cast<double>(m);
  return d;
}

SketchDistribution SketchDistribution::uniform_blocks(std::size_t m, std::size_t tau) {
  if (m == 0) throw InvalidParameter("block distribution needs at least one row");
  if (tau < 1 || tau > m) {
    throw InvalidParameter("block size " + std::to_string(tau) + " outside [1, " + std::to_string(m) + "]");
  }
  SketchDistribution d;
  d.kind_ = Kind::UniformBlocks;
  d.m_ = m;
  d.tau_ = tau;
  d.uniform_ = true;
  return d;
}

SketchSample SketchDistribution::sample(Rng& rng) const {
  if (kind_ == Kind::UniformBlocks) return BlockSample{sample_subset(m_, tau_, rng)};
  if (uniform_) return RowSample{rng.uniform_index(m_)};
  const double u = rng.uniform01();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  // u can exceed the last cdf entry by rounding; fall back to the last row
  // with positive probability.
  const std::size_t i = it == cdf_.end() ? last_positive_ : static_cast<std::size_t>(it - cdf_.begin());
  return RowSample{i};
}

std::vector<std::size_t> sample_subset(std::size_t m, std::size_t k, Rng& rng) {
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  // Linear membership scans for small blocks, a mark array otherwise.
  std::vector<char> marked(k > 32 ? m : 0, 0);
  const auto contains = [&](std::size_t t) {
    return k > 32 ? marked[t] != 0 : std::find(chosen.begin(), chosen.end(), t) != chosen.end();
  };
  for (std::size_t j = m - k; j < m; ++j) {
    const std::size_t t = rng.uniform_index(j + 1);
    const std::size_t pick = contains(t) ? j : t;
    chosen.push_back(pick);
    if (k > 32) marked[pick] = 1;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace gossip
