#pragma once

// Perron-Frobenius data of nonnegative matrices: spectral radius, positive
// left/right eigenvectors, stationary and quasi-stationary distributions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "markov_rank/chain_core.hpp"

namespace markov_rank {

struct PerronOptions {
  double tol = 1e-12;
  long max_iter = 100000;
  /// Power iteration hands over to the dense solver after this many
  /// iterations without a new best residual.
  long stall_window = 50;
};

template <typename Scalar>
struct PerronData {
  Scalar mu{};
  /// Left eigenvector, normalized to sum 1.
  RowVector<Scalar> left;
  /// Right eigenvector, normalized to max component 1.
  Vector<Scalar> right;
  /// -ln(mu); +infinity when mu == 0.
  Scalar lambda{};
  long iterations = 0;
  Scalar residual{};
  /// False for a nilpotent matrix (mu == 0): left and right are left empty.
  bool eigenvectors_defined = true;
  bool used_dense_fallback = false;
};

namespace detail {

template <typename Scalar>
Scalar escape_rate_of(Scalar mu) {
  return mu > Scalar(0) ? -std::log(mu) : std::numeric_limits<Scalar>::infinity();
}

template <typename Scalar>
struct PerronIterate {
  Scalar mu{};
  RowVector<Scalar> left;
  Vector<Scalar> right;
  Scalar residual = std::numeric_limits<Scalar>::infinity();
};

// Common eigenvalue estimate and the larger of the two residuals.
template <typename Scalar>
void score(const Matrix<Scalar>& q, PerronIterate<Scalar>& it) {
  const RowVector<Scalar> xq = it.left * q;
  const Vector<Scalar> qy = q * it.right;
  const Scalar xy = it.left.dot(it.right.transpose());
  it.mu = std::abs(xy) > std::numeric_limits<Scalar>::epsilon()
              ? Scalar(xq.dot(it.right.transpose()) / xy)
              : xq.sum() / it.left.sum();
  it.residual = std::max((xq - it.mu * it.left).cwiseAbs().maxCoeff(),
                         (qy - it.mu * it.right).cwiseAbs().maxCoeff());
}

template <typename Scalar>
void normalize_left(RowVector<Scalar>& x) {
  if (x.sum() < Scalar(0)) x = -x;
  x /= x.sum();
}

template <typename Scalar>
void normalize_right(Vector<Scalar>& y) {
  Index arg = 0;
  y.cwiseAbs().maxCoeff(&arg);
  y /= y(arg);
}

// Dense fallback: pick the spectral radius from the full spectrum, then
// polish both eigenvectors by shifted inverse iteration.
template <typename Scalar>
PerronIterate<Scalar> dense_perron(const Matrix<Scalar>& q) {
  const Index n = q.rows();
  Eigen::EigenSolver<Matrix<Scalar>> solver(q, false);
  const auto& ev = solver.eigenvalues();
  const Scalar scale = std::max(Scalar(1), q.cwiseAbs().maxCoeff());
  const Scalar imag_tol = std::sqrt(std::numeric_limits<Scalar>::epsilon()) * scale;
  Scalar rho = -1;
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).imag()) <= imag_tol && ev(i).real() > rho) rho = ev(i).real();
  }
  rho = std::max(rho, Scalar(0));

  PerronIterate<Scalar> it;
  it.left = RowVector<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  it.right = Vector<Scalar>::Ones(n);
  Scalar shift = rho + Scalar(1e-10) * scale;
  for (int pass = 0; pass < 3; ++pass) {
    const Matrix<Scalar> shifted = q - shift * Matrix<Scalar>::Identity(n, n);
    Eigen::PartialPivLU<Matrix<Scalar>> lu(shifted);
    Eigen::PartialPivLU<Matrix<Scalar>> lut(shifted.transpose());
    for (int k = 0; k < 4; ++k) {
      it.right = lu.solve(it.right);
      normalize_right(it.right);
      Vector<Scalar> lt = lut.solve(it.left.transpose());
      it.left = lt.transpose();
      it.left /= it.left.cwiseAbs().maxCoeff();
    }
    normalize_left(it.left);
    score(q, it);
    shift = it.mu + Scalar(1e-13) * scale;
  }
  return it;
}

}  // namespace detail

/// Spectral radius of a square nonnegative matrix with its left and right
/// Perron vectors. Power iteration first; dense eigensolver when it stalls.
template <typename Derived>
PerronData<typename Derived::Scalar> perron(const Eigen::MatrixBase<Derived>& matrix,
                                            const PerronOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> q = matrix;
  if (q.rows() != q.cols() || q.rows() == 0) throw ValidationError("perron needs a square matrix");
  if ((q.array() < Scalar(0)).any()) throw ValidationError("perron needs a nonnegative matrix");
  const Index n = q.rows();

  PerronData<Scalar> out;
  const auto structure = analyze_structure(q);
  const bool acyclic = std::all_of(structure.component_periods.begin(),
                                   structure.component_periods.end(),
                                   [](long p) { return p == 0; });
  if (acyclic) {
    out.mu = Scalar(0);
    out.lambda = std::numeric_limits<Scalar>::infinity();
    out.eigenvectors_defined = false;
    return out;
  }

  const Scalar tol = static_cast<Scalar>(opts.tol);
  detail::PerronIterate<Scalar> cur;
  cur.left = RowVector<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  cur.right = Vector<Scalar>::Ones(n);
  detail::PerronIterate<Scalar> best;
  long last_improvement = 0;
  long iter = 0;
  bool converged = false;
  for (; iter < opts.max_iter; ++iter) {
    detail::score(q, cur);
    if (cur.residual < best.residual) {
      best = cur;
      last_improvement = iter;
    }
    if (cur.residual <= tol) {
      converged = true;
      break;
    }
    if (iter - last_improvement >= opts.stall_window) break;
    RowVector<Scalar> xq = cur.left * q;
    Vector<Scalar> qy = q * cur.right;
    if (xq.sum() <= Scalar(0) || qy.maxCoeff() <= Scalar(0)) break;
    cur.left = xq / xq.sum();
    cur.right = qy / qy.maxCoeff();
  }
  out.iterations = iter;

  if (!converged) {
    auto dense = detail::dense_perron(q);
    out.used_dense_fallback = true;
    if (dense.residual < best.residual) best = dense;
    if (best.residual > tol) {
      throw ConvergenceFailure("Perron solver did not reach the residual tolerance",
                               static_cast<double>(best.residual), iter);
    }
  }

  out.mu = best.mu;
  out.left = best.left;
  out.right = best.right;
  out.residual = best.residual;
  out.lambda = detail::escape_rate_of(out.mu);
  return out;
}

template <typename Scalar>
PerronData<Scalar> perron(const TransitionMatrix<Scalar>& p, const PerronOptions& opts = {}) {
  return perron(p.entries(), opts);
}

template <typename Scalar>
PerronData<Scalar> perron(const SubMarkovMatrix<Scalar>& q, const PerronOptions& opts = {}) {
  return perron(q.entries(), opts);
}

template <typename Scalar>
struct StationaryDistribution {
  Distribution<Scalar> pi;
  Scalar residual{};
};

/// Invariant distribution of an irreducible stochastic matrix, by a direct
/// linear solve of pi (P - I) = 0 with the normalization row.
template <typename Scalar>
StationaryDistribution<Scalar> stationary(const TransitionMatrix<Scalar>& p, double tol = 1e-12) {
  if (!p.is_stochastic()) throw ValidationError("stationary requires a stochastic matrix");
  if (!analyze_structure(p).irreducible) throw NotIrreducible("stationary requires an irreducible matrix");
  const Index n = p.size();
  Matrix<Scalar> a = p.entries().transpose() - Matrix<Scalar>::Identity(n, n);
  a.row(n - 1).setOnes();
  Vector<Scalar> b = Vector<Scalar>::Zero(n);
  b(n - 1) = Scalar(1);
  Eigen::FullPivLU<Matrix<Scalar>> lu(a);
  Vector<Scalar> x = lu.solve(b);
  x += lu.solve(b - a * x);
  RowVector<Scalar> pi = x.transpose();
  pi /= pi.sum();
  const Scalar residual = (pi * p.entries() - pi).cwiseAbs().maxCoeff();
  if (residual > static_cast<Scalar>(tol)) {
    throw ConvergenceFailure("stationary solve residual exceeds tolerance",
                             static_cast<double>(residual), 0);
  }
  return {Distribution<Scalar>(std::move(pi)), residual};
}

template <typename Scalar>
struct EscapeRate {
  Hole hole;
  Scalar mu{};
  Scalar lambda{};
  /// Quasi-stationary distribution on the survivors (compact order).
  RowVector<Scalar> qsd;
  std::vector<Index> survivors;
  PerronData<Scalar> perron;
  /// The punched matrix is reducible; mu is its spectral radius but the
  /// escape rate may depend on the initial distribution.
  bool reducible_after_removal = false;
};

/// Leading eigenvalue, escape rate and quasi-stationary distribution of the
/// chain killed on `hole`.
template <typename Scalar>
EscapeRate<Scalar> escape_rate(const TransitionMatrix<Scalar>& p, const Hole& hole,
                               const PerronOptions& opts = {}) {
  require_ergodic(p);
  const auto q = remove_states(p, hole);
  auto data = perron(q, opts);
  EscapeRate<Scalar> out{hole, data.mu, data.lambda, data.left, q.survivors(), data, false};
  out.reducible_after_removal = !analyze_structure(q).irreducible;
  return out;
}

using PerronDatad = PerronData<double>;
using EscapeRated = EscapeRate<double>;

}  // namespace markov_rank
