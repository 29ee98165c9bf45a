#include "gossip/theory.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "gossip/error.hpp"
#include "gossip/rng.hpp"

namespace gossip {

namespace {

// Projector onto the row space of A_C.
Eigen::MatrixXd block_projector(const Eigen::MatrixXd& A, const std::vector<std::size_t>& rows) {
  const Eigen::MatrixXd block = A(rows, Eigen::all);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(block, Eigen::ComputeThinV);
  svd.setThreshold(kPinvCutoff);
  const Eigen::Index rank = svd.rank();
  const auto V = svd.matrixV().leftCols(rank);
  return V * V.transpose();
}

// Adds sum over components V_r of (I - 1 1^T / |V_r|) restricted to V_r.
void add_component_projector(const Graph& g, const std::vector<std::size_t>& edges, double weight,
                             Eigen::MatrixXd& acc) {
  const Partition parts = connected_components(g, edges);
  for (std::size_t r = 0; r < parts.size(); ++r) {
    const auto comp = parts.component(r);
    if (comp.size() < 2) continue;
    const double inv = 1.0 / static_cast<double>(comp.size());
    for (int a : comp) {
      for (int b : comp) acc(a, b) -= weight * inv;
      acc(a, a) += weight;
    }
  }
}

// Calls f(C) for every k-subset of {0..m-1} in lexicographic order.
template <typename F>
void for_each_subset(std::size_t m, std::size_t k, F&& f) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    f(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

template <typename Projector>
WEstimate block_expectation(Eigen::Index n, const SketchDistribution& dist, const ExpectationOptions& opts,
                            Projector&& add_projector) {
  const std::size_t m = dist.rows();
  const std::size_t tau = dist.tau();
  const double count = binomial(m, tau);
  WEstimate est;
  est.W = Eigen::MatrixXd::Zero(n, n);

  if (!opts.force_monte_carlo && count <= opts.exact_limit) {
    const double weight = 1.0 / count;
    for_each_subset(m, tau, [&](const std::vector<std::size_t>& C) { add_projector(C, weight, est.W); });
    return est;
  }

  if (opts.mc_samples < 2) throw InvalidParameter("Monte Carlo estimate needs at least 2 samples");
  Rng rng(opts.seed);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd draw(n, n);
  for (std::size_t s = 0; s < opts.mc_samples; ++s) {
    const auto C = sample_subset(m, tau, rng);
    draw.setZero();
    add_projector(C, 1.0, draw);
    est.W += draw;
    sum_sq += draw.cwiseProduct(draw);
  }
  const double N = static_cast<double>(opts.mc_samples);
  est.W /= N;
  const Eigen::MatrixXd var = ((sum_sq / N - est.W.cwiseProduct(est.W)) * (N / (N - 1.0))).cwiseMax(0.0);
  est.std_error = (var / N).cwiseSqrt();
  est.approximate = true;
  est.samples = opts.mc_samples;
  return est;
}

}  // namespace

double binomial(std::size_t m, std::size_t k) {
  if (k > m) return 0.0;
  k = std::min(k, m - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(m - k + i) / static_cast<double>(i);
    if (!std::isfinite(c)) return std::numeric_limits<double>::infinity();
  }
  return std::round(c);
}

WEstimate expected_W(const LinearSystemd& sys, const SketchDistribution& dist, const ExpectationOptions& opts) {
  if (dist.rows() != static_cast<std::size_t>(sys.rows())) {
    throw InvalidParameter("distribution covers " + std::to_string(dist.rows()) + " rows, system has " +
                           std::to_string(sys.rows()));
  }
  const Eigen::MatrixXd& A = sys.matrix();
  if (!dist.is_block()) {
    WEstimate est;
    est.W = Eigen::MatrixXd::Zero(sys.cols(), sys.cols());
    const auto& p = dist.probabilities();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      const double norm2 = A.row(i).squaredNorm();
      if (norm2 == 0.0) throw SingularRow("row " + std::to_string(i) + " is zero");
      est.W.noalias() += (p[static_cast<std::size_t>(i)] / norm2) * A.row(i).transpose() * A.row(i);
    }
    return est;
  }
  return block_expectation(sys.cols(), dist, opts,
                           [&](const std::vector<std::size_t>& C, double weight, Eigen::MatrixXd& acc) {
                             acc += weight * block_projector(A, C);
                           });
}

WEstimate expected_W_ac(const Graph& g, const SketchDistribution& dist, const ExpectationOptions& opts) {
  if (dist.rows() != g.num_edges()) {
    throw InvalidParameter("distribution covers " + std::to_string(dist.rows()) + " edges, graph has " +
                           std::to_string(g.num_edges()));
  }
  const Eigen::Index n = g.num_nodes();
  if (!dist.is_block()) {
    // Each incidence row has squared norm 2.
    WEstimate est;
    est.W = Eigen::MatrixXd::Zero(n, n);
    const auto& p = dist.probabilities();
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      const auto [u, v] = g.edge(e);
      const double w = p[e] / 2.0;
      est.W(u, u) += w;
      est.W(v, v) += w;
      est.W(u, v) -= w;
      est.W(v, u) -= w;
    }
    return est;
  }
  return block_expectation(n, dist, opts,
                           [&](const std::vector<std::size_t>& C, double weight, Eigen::MatrixXd& acc) {
                             add_component_projector(g, C, weight, acc);
                           });
}

Spectrum extreme_spectrum(const Eigen::MatrixXd& W) {
  if (W.rows() != W.cols() || W.rows() == 0) throw InvalidParameter("spectrum needs a non-empty square matrix");
  const double scale = W.cwiseAbs().maxCoeff();
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1.0)) {
    throw InvalidParameter("matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw DegenerateSpectrum("eigensolver did not converge");
  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  const double lambda_max = values(values.size() - 1);
  if (!(lambda_max > 0.0)) throw DegenerateSpectrum("matrix has no positive eigenvalue");
  const double cutoff = 1e-9 * lambda_max;
  if (values(0) < -cutoff) {
    throw InvalidParameter("matrix is not positive semi-definite (eigenvalue " + std::to_string(values(0)) + ")");
  }
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) >= cutoff) return {values(i), lambda_max};
  }
  throw DegenerateSpectrum("all eigenvalues below cutoff");
}

double rate_basic(double lambda_min_plus) {
  if (!(lambda_min_plus > 0.0 && lambda_min_plus <= 1.0)) {
    throw InvalidParameter("lambda_min_plus must lie in (0, 1], got " + std::to_string(lambda_min_plus));
  }
  return 1.0 - lambda_min_plus;
}

ShbRate rate_shb(double lambda_min_plus, double lambda_max, double omega, double beta) {
  if (!(omega > 0.0 && omega < 2.0)) throw InvalidParameter("relaxation must lie in (0, 2)");
  if (!(beta >= 0.0)) throw InvalidParameter("momentum must be >= 0");
  if (!(lambda_min_plus > 0.0 && lambda_min_plus <= lambda_max)) {
    throw InvalidParameter("need 0 < lambda_min_plus <= lambda_max");
  }
  ShbRate r;
  r.a1 = 1.0 + 3.0 * beta + 2.0 * beta * beta - (omega * (2.0 - omega) + omega * beta) * lambda_min_plus;
  r.a2 = beta + 2.0 * beta * beta + omega * beta * lambda_max;
  r.q = 0.5 * (r.a1 + std::sqrt(r.a1 * r.a1 + 4.0 * r.a2));
  r.delta = r.q - r.a1;
  r.valid = r.a1 + r.a2 < 1.0;
  return r;
}

BetaRange accelerated_beta_range(double omega, double lambda_min_plus, double lambda_max) {
  if (!(lambda_min_plus > 0.0 && lambda_min_plus <= lambda_max)) {
    throw InvalidParameter("need 0 < lambda_min_plus <= lambda_max");
  }
  if (!(omega > 0.0 && omega <= 1.0 / lambda_max)) {
    throw InvalidParameter("relaxation must lie in (0, 1/lambda_max] = (0, " + std::to_string(1.0 / lambda_max) +
                           "], got " + std::to_string(omega));
  }
  const double root = 1.0 - std::sqrt(omega * lambda_min_plus);
  return {root * root, 1.0};
}

std::array<Preset, 2> accelerated_presets(double lambda_min_plus, double lambda_max) {
  if (!(lambda_min_plus > 0.0 && lambda_min_plus <= lambda_max)) {
    throw InvalidParameter("need 0 < lambda_min_plus <= lambda_max");
  }
  const double r1 = 1.0 - std::sqrt(0.99 * lambda_min_plus);
  const double r2 = 1.0 - std::sqrt(0.99 * lambda_min_plus / lambda_max);
  return {Preset{1.0, r1 * r1, "O~(sqrt(1/lambda_min_plus))"},
          Preset{1.0 / lambda_max, r2 * r2, "O~(sqrt(lambda_max/lambda_min_plus))"}};
}

RateReport make_rate_report(const Spectrum& spec, double omega, double beta, bool approximate) {
  RateReport r;
  r.lambda_min_plus = spec.lambda_min_plus;
  r.lambda_max = spec.lambda_max;
  r.rho = rate_basic(std::min(spec.lambda_min_plus, 1.0));
  r.omega = omega;
  r.beta = beta;
  r.shb = rate_shb(spec.lambda_min_plus, spec.lambda_max, omega, beta);
  if (omega <= 1.0 / spec.lambda_max) {
    r.beta_range_defined = true;
    r.beta_range = accelerated_beta_range(omega, spec.lambda_min_plus, spec.lambda_max);
  }
  r.presets = accelerated_presets(spec.lambda_min_plus, spec.lambda_max);
  r.approximate = approximate;
  return r;
}

void write_rate_report(std::ostream& out, const RateReport& r) {
  const auto flags = out.flags();
  const auto precision = out.precision(17);
  out << "lambda_min_plus = " << r.lambda_min_plus << '\n'
      << "lambda_max = " << r.lambda_max << '\n'
      << "rho = " << r.rho << '\n'
      << "approximate = " << (r.approximate ? "true" : "false") << '\n'
      << "omega = " << r.omega << '\n'
      << "beta = " << r.beta << '\n'
      << "a1 = " << r.shb.a1 << '\n'
      << "a2 = " << r.shb.a2 << '\n'
      << "q = " << r.shb.q << '\n'
      << "delta = " << r.shb.delta << '\n'
      << "shb_valid = " << (r.shb.valid ? "true" : "false") << '\n';
  if (r.beta_range_defined) {
    out << "mean_beta_lo = " << r.beta_range.lo << '\n' << "mean_beta_hi = " << r.beta_range.hi << '\n';
  } else {
    out << "mean_beta_lo = nan\n" << "mean_beta_hi = nan\n";
  }
  for (std::size_t i = 0; i < r.presets.size(); ++i) {
    out << "preset" << i + 1 << "_omega = " << r.presets[i].omega << '\n'
        << "preset" << i + 1 << "_beta = " << r.presets[i].beta << '\n'
        << "preset" << i + 1 << "_complexity = " << r.presets[i].complexity << '\n';
  }
  out.precision(precision);
  out.flags(flags);
}

}  // namespace gossip
