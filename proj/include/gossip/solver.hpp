#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gossip/error.hpp"
#include "gossip/sketch.hpp"
#include "gossip/topology.hpp"

namespace gossip {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Relative singular-value cutoff for every pseudoinverse in the library.
inline constexpr double kPinvCutoff = 1e-10;

/// Consistent linear system A x = b.
template <typename Scalar>
class LinearSystem {
 public:
  LinearSystem(Matrix<Scalar> A, Vector<Scalar> b) : A_(std::move(A)), b_(std::move(b)) {
    if (A_.rows() < 1 || A_.cols() < 1) throw InvalidParameter("linear system needs m >= 1 and n >= 1");
    if (b_.size() != A_.rows()) {
      throw InvalidParameter("rhs has " + std::to_string(b_.size()) + " entries for " + std::to_string(A_.rows()) +
                             " rows");
    }
  }

  /// Incidence-matrix system A x = 0 of a connected graph. Its solution set is
  /// the span of the all-ones vector.
  static LinearSystem average_consensus(const Graph& g) {
    LinearSystem sys(incidence_matrix(g).template cast<Scalar>(),
                     Vector<Scalar>::Zero(static_cast<Eigen::Index>(g.num_edges())));
    sys.average_consensus_ = true;
    return sys;
  }

  const Matrix<Scalar>& matrix() const noexcept { return A_; }
  const Vector<Scalar>& rhs() const noexcept { return b_; }
  Eigen::Index rows() const noexcept { return A_.rows(); }
  Eigen::Index cols() const noexcept { return A_.cols(); }
  bool is_average_consensus() const noexcept { return average_consensus_; }

 private:
  Matrix<Scalar> A_;
  Vector<Scalar> b_;
  bool average_consensus_ = false;
};

using LinearSystemd = LinearSystem<double>;

/// Current and previous iterate, the two registers heavy-ball momentum needs.
template <typename Scalar>
struct IterateState {
  Vector<Scalar> current;
  Vector<Scalar> previous;

  /// x^0 = x^1 = x0.
  static IterateState start(const Vector<Scalar>& x0) { return {x0, x0}; }
};

namespace detail {

template <typename Scalar>
void check_row(const LinearSystem<Scalar>& sys, std::size_t i) {
  if (i >= static_cast<std::size_t>(sys.rows())) {
    throw InvalidParameter("row index " + std::to_string(i) + " out of range for " + std::to_string(sys.rows()) +
                           " rows");
  }
}

template <typename Scalar>
void check_block(const LinearSystem<Scalar>& sys, const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw InvalidParameter("block sample is empty");
  for (std::size_t i : rows) check_row(sys, i);
}

template <typename Derived>
auto min_norm_solve(const Eigen::MatrixBase<Derived>& M, const Vector<typename Derived::Scalar>& rhs) {
  using Scalar = typename Derived::Scalar;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(Scalar(kPinvCutoff));
  return Vector<Scalar>(svd.solve(rhs));
}

/// Displacement of the single-row projection: -((a_i x - b_i)/|a_i|^2) a_i.
template <typename Scalar>
Vector<Scalar> rk_displacement(const LinearSystem<Scalar>& sys, const Vector<Scalar>& x, std::size_t i) {
  check_row(sys, i);
  const auto row = sys.matrix().row(static_cast<Eigen::Index>(i));
  const Scalar norm2 = row.squaredNorm();
  if (norm2 == Scalar(0)) throw SingularRow("row " + std::to_string(i) + " is zero");
  const Scalar residual = row.dot(x) - sys.rhs()(static_cast<Eigen::Index>(i));
  return -(residual / norm2) * row.transpose();
}

/// Displacement of the block projection: -A_C^T (A_C A_C^T)^+ (A_C x - b_C),
/// computed as the minimum-norm least-squares solution of A_C d = -(A_C x - b_C).
template <typename Scalar>
Vector<Scalar> rbk_displacement(const LinearSystem<Scalar>& sys, const Vector<Scalar>& x,
                                const std::vector<std::size_t>& rows) {
  check_block(sys, rows);
  const Matrix<Scalar> block = sys.matrix()(rows, Eigen::all);
  const Vector<Scalar> residual = block * x - sys.rhs()(rows);
  return -min_norm_solve(block, residual);
}

template <typename Scalar>
Vector<Scalar> displacement(const LinearSystem<Scalar>& sys, const Vector<Scalar>& x, const SketchSample& s) {
  return std::visit(
      [&](const auto& smp) -> Vector<Scalar> {
        if constexpr (std::is_same_v<std::decay_t<decltype(smp)>, RowSample>) {
          return rk_displacement(sys, x, smp.row);
        } else {
          return rbk_displacement(sys, x, smp.rows);
        }
      },
      s);
}

}  // namespace detail

/// Randomized Kaczmarz step: projection of x onto the hyperplane of row i.
template <typename Scalar>
Vector<Scalar> rk_step(const LinearSystem<Scalar>& sys, const Vector<Scalar>& x, std::size_t i) {
  return x + detail::rk_displacement(sys, x, i);
}

/// Randomized block Kaczmarz step: Euclidean projection of x onto
/// {z : A_C z = b_C}. Rank-deficient blocks are handled by the pseudoinverse.
template <typename Scalar>
Vector<Scalar> rbk_step(const LinearSystem<Scalar>& sys, const Vector<Scalar>& x, const std::vector<std::size_t>& rows) {
  return x + detail::rbk_displacement(sys, x, rows);
}

/// Stochastic gradient A^T H_S (A x - b) of the sketched objective.
template <typename Scalar>
Vector<Scalar> sketched_gradient(const LinearSystem<Scalar>& sys, const Vector<Scalar>& x, const SketchSample& s) {
  return -detail::displacement(sys, x, s);
}

/// f_S(x) = 1/2 (A x - b)^T H_S (A x - b). Diagnostic only; the iteration
/// never forms H.
template <typename Scalar>
Scalar sketched_objective(const LinearSystem<Scalar>& sys, const Vector<Scalar>& x, const SketchSample& s) {
  return std::visit(
      [&](const auto& smp) -> Scalar {
        if constexpr (std::is_same_v<std::decay_t<decltype(smp)>, RowSample>) {
          detail::check_row(sys, smp.row);
          const auto i = static_cast<Eigen::Index>(smp.row);
          const Scalar norm2 = sys.matrix().row(i).squaredNorm();
          if (norm2 == Scalar(0)) throw SingularRow("row " + std::to_string(smp.row) + " is zero");
          const Scalar r = sys.matrix().row(i).dot(x) - sys.rhs()(i);
          return Scalar(0.5) * r * r / norm2;
        } else {
          detail::check_block(sys, smp.rows);
          const Matrix<Scalar> block = sys.matrix()(smp.rows, Eigen::all);
          const Vector<Scalar> r = block * x - sys.rhs()(smp.rows);
          const Matrix<Scalar> gram = block * block.transpose();
          return Scalar(0.5) * r.dot(detail::min_norm_solve(gram, r));
        }
      },
      s);
}

/// Stochastic heavy ball step
///   x+ = x + omega (K(x) - x) + beta (x - x_prev)
/// where K is the row or block projection selected by the sample. With
/// omega = 1 and beta = 0 the result is bit-identical to K(x).
template <typename Scalar>
IterateState<Scalar> shb_step(const LinearSystem<Scalar>& sys, const IterateState<Scalar>& st, const SketchSample& s,
                              Scalar omega, Scalar beta) {
  if (!(omega > Scalar(0) && omega < Scalar(2))) {
    throw InvalidParameter("relaxation must lie in (0, 2), got " + std::to_string(static_cast<double>(omega)));
  }
  if (!(beta >= Scalar(0))) {
    throw InvalidParameter("momentum must be >= 0, got " + std::to_string(static_cast<double>(beta)));
  }
  if (st.current.size() != sys.cols() || st.previous.size() != sys.cols()) {
    throw InvalidParameter("iterate length does not match system width");
  }
  const Vector<Scalar> d = detail::displacement(sys, st.current, s);
  IterateState<Scalar> next;
  next.current = (st.current + omega * d) + beta * (st.current - st.previous);
  next.previous = st.current;
  return next;
}

/// Euclidean projection of x onto the solution set via x - A^+ (A x - b).
/// Throws NoSolution if the least-squares residual exceeds 1e-8.
template <typename Scalar>
Vector<Scalar> project_least_squares(const LinearSystem<Scalar>& sys, const Vector<Scalar>& x) {
  const Vector<Scalar> residual = sys.matrix() * x - sys.rhs();
  const Vector<Scalar> projected = x - detail::min_norm_solve(sys.matrix(), residual);
  const Scalar leftover = (sys.matrix() * projected - sys.rhs()).norm();
  const Scalar scale = std::max(Scalar(1), sys.rhs().norm());
  if (leftover > Scalar(1e-8) * scale) {
    throw NoSolution("system is inconsistent: residual " + std::to_string(static_cast<double>(leftover)));
  }
  return projected;
}

/// Solution of min 1/2 |z - x|^2 s.t. A z = b. Average-consensus systems
/// take the mean(x) * 1 shortcut.
template <typename Scalar>
Vector<Scalar> project_to_solution(const LinearSystem<Scalar>& sys, const Vector<Scalar>& x) {
  if (x.size() != sys.cols()) throw InvalidParameter("vector length does not match system width");
  if (sys.is_average_consensus()) return Vector<Scalar>::Constant(x.size(), x.mean());
  return project_least_squares(sys, x);
}

}  // namespace gossip
