#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "gossip/sketch.hpp"
#include "gossip/solver.hpp"
#include "gossip/topology.hpp"

namespace gossip {

struct ExpectationOptions {
  /// Block expectations are enumerated exactly when C(m, tau) <= exact_limit.
  double exact_limit = 1e5;
  std::size_t mc_samples = 10000;
  std::uint64_t seed = 0;
  bool force_monte_carlo = false;
};

/// W = E[A^T H A] for a sketch distribution.
struct WEstimate {
  Eigen::MatrixXd W;
  bool approximate = false;
  std::size_t samples = 0;       // Monte Carlo draws, 0 when exact
  Eigen::MatrixXd std_error;     // per-entry standard error of the mean; empty when exact
};

/// General path: projectors A_C^T (A_C A_C^T)^+ A_C from an SVD of each block.
WEstimate expected_W(const LinearSystemd& sys, const SketchDistribution& dist, const ExpectationOptions& opts = {});

/// Average-consensus path on the graph directly. For an incidence block the
/// projector is sum over components V_r of (I_{V_r} - 1 1^T / |V_r|), so no
/// factorization is needed.
WEstimate expected_W_ac(const Graph& g, const SketchDistribution& dist, const ExpectationOptions& opts = {});

/// Binomial coefficient as a double (saturates to +inf).
double binomial(std::size_t m, std::size_t k);

struct Spectrum {
  double lambda_min_plus = 0.0;
  double lambda_max = 0.0;
};

/// Extreme spectrum of a symmetric PSD matrix. Eigenvalues below
/// 1e-9 * lambda_max count as zero.
Spectrum extreme_spectrum(const Eigen::MatrixXd& W);

/// rho = 1 - lambda_min_plus, for lambda_min_plus in (0, 1].
double rate_basic(double lambda_min_plus);

struct ShbRate {
  double a1 = 0.0;
  double a2 = 0.0;
  double q = 0.0;
  double delta = 0.0;
  bool valid = false;  // a1 + a2 < 1
};

/// Second-moment rate constants of the stochastic heavy ball method:
///   a1 = 1 + 3b + 2b^2 - (w(2 - w) + w b) lmin
///   a2 = b + 2b^2 + w b lmax
///   q  = (a1 + sqrt(a1^2 + 4 a2)) / 2,  delta = q - a1
/// E|x^k - x*|^2 <= q^k (1 + delta) |x^0 - x*|^2 whenever valid.
ShbRate rate_shb(double lambda_min_plus, double lambda_max, double omega, double beta);

struct BetaRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// Momentum range (lo, hi) = ((1 - sqrt(w lmin))^2, 1) on which the expected
/// iterates converge at rate beta^k. Requires 0 < omega <= 1 / lambda_max.
BetaRange accelerated_beta_range(double omega, double lambda_min_plus, double lambda_max);

struct Preset {
  double omega = 1.0;
  double beta = 0.0;
  std::string complexity;
};

/// The two accelerated (omega, beta) choices:
///   unit step:    omega = 1,        beta = (1 - sqrt(0.99 lmin))^2
///   scaled step:  omega = 1 / lmax, beta = (1 - sqrt(0.99 lmin / lmax))^2
std::array<Preset, 2> accelerated_presets(double lambda_min_plus, double lambda_max);

struct RateReport {
  double lambda_min_plus = 0.0;
  double lambda_max = 0.0;
  double rho = 0.0;
  double omega = 1.0;
  double beta = 0.0;
  ShbRate shb;
  bool beta_range_defined = false;
  BetaRange beta_range;
  std::array<Preset, 2> presets;
  bool approximate = false;
};

RateReport make_rate_report(const Spectrum& spec, double omega, double beta, bool approximate);

/// Flat `key = value` lines, numbers with 17 significant digits.
void write_rate_report(std::ostream& out, const RateReport& report);

}  // namespace gossip
