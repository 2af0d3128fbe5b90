#pragma once

// Transition matrices, distributions, holes, and the structural analysis of
// the positive-entry digraph. All types are immutable after construction.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "markov_rank/errors.hpp"

namespace markov_rank {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Row-sum and distribution-mass tolerance.
inline constexpr double kStochasticTol = 1e-12;

enum class MatrixKind { Stochastic, Nonnegative };

inline const char* to_string(MatrixKind kind) {
  return kind == MatrixKind::Stochastic ? "stochastic" : "nonnegative";
}

/// Square nonnegative matrix, row-stochastic when kind == Stochastic.
template <typename Scalar>
class TransitionMatrix {
 public:
  TransitionMatrix(Matrix<Scalar> entries, MatrixKind kind = MatrixKind::Stochastic)
      : entries_(std::move(entries)), kind_(kind) {
    if (entries_.rows() != entries_.cols()) {
      throw ValidationError("transition matrix must be square, got " +
                            std::to_string(entries_.rows()) + "x" +
                            std::to_string(entries_.cols()));
    }
    if (entries_.rows() < 2) {
      throw ValidationError("transition matrix needs at least 2 states");
    }
    for (Index i = 0; i < entries_.rows(); ++i) {
      for (Index j = 0; j < entries_.cols(); ++j) {
        const Scalar x = entries_(i, j);
        if (!std::isfinite(static_cast<double>(x)) || x < Scalar(0)) {
          std::ostringstream msg;
          msg << "entry (" << i + 1 << "," << j + 1 << ") = " << static_cast<double>(x)
              << " is not a finite nonnegative number";
          throw ValidationError(msg.str());
        }
      }
      if (kind_ == MatrixKind::Stochastic) {
        const Scalar s = entries_.row(i).sum();
        if (std::abs(static_cast<double>(s) - 1.0) > kStochasticTol) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "row " << i + 1 << " sums to " << static_cast<double>(s) << ", expected 1";
          throw ValidationError(msg.str());
        }
      }
    }
  }

  Index size() const { return entries_.rows(); }
  const Matrix<Scalar>& entries() const { return entries_; }
  MatrixKind kind() const { return kind_; }
  bool is_stochastic() const { return kind_ == MatrixKind::Stochastic; }
  Scalar operator()(Index i, Index j) const { return entries_(i, j); }

 private:
  Matrix<Scalar> entries_;
  MatrixKind kind_;
};

/// Probability vector over the states, stored as a row vector.
template <typename Scalar>
class Distribution {
 public:
  explicit Distribution(RowVector<Scalar> weights) : weights_(std::move(weights)) {
    if (weights_.size() == 0) throw ValidationError("distribution is empty");
    for (Index i = 0; i < weights_.size(); ++i) {
      if (!std::isfinite(static_cast<double>(weights_(i))) || weights_(i) < Scalar(0)) {
        throw ValidationError("distribution weight " + std::to_string(i + 1) +
                              " is negative or not finite");
      }
    }
    if (std::abs(static_cast<double>(weights_.sum()) - 1.0) > kStochasticTol) {
      throw ValidationError("distribution weights do not sum to 1");
    }
  }

  static Distribution uniform(Index n) {
    return Distribution(RowVector<Scalar>::Constant(n, Scalar(1) / Scalar(n)));
  }

  /// Point mass at state k (0-based).
  static Distribution point(Index n, Index k) {
    if (k < 0 || k >= n) throw ValidationError("state index out of range");
    RowVector<Scalar> w = RowVector<Scalar>::Zero(n);
    w(k) = Scalar(1);
    return Distribution(std::move(w));
  }

  Index size() const { return weights_.size(); }
  const RowVector<Scalar>& weights() const { return weights_; }
  Scalar operator()(Index i) const { return weights_(i); }

 private:
  RowVector<Scalar> weights_;
};

/// Nonempty proper subset of the states where the chain is killed.
class Hole {
 public:
  Hole(std::vector<Index> states, Index n) : states_(std::move(states)), n_(n) {
    std::sort(states_.begin(), states_.end());
    states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
    if (states_.empty()) throw ValidationError("hole must contain at least one state");
    if (static_cast<Index>(states_.size()) >= n) {
      throw ValidationError("hole must leave at least one surviving state");
    }
    if (states_.front() < 0 || states_.back() >= n) {
      throw ValidationError("hole state index out of range");
    }
  }

  static Hole single(Index k, Index n) { return Hole({k}, n); }

  const std::vector<Index>& states() const { return states_; }
  Index dimension() const { return n_; }
  Index size() const { return static_cast<Index>(states_.size()); }

  bool contains(Index i) const {
    return std::binary_search(states_.begin(), states_.end(), i);
  }

  std::vector<Index> survivors() const {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(n_ - size()));
    for (Index i = 0; i < n_; ++i) {
      if (!contains(i)) out.push_back(i);
    }
    return out;
  }

  friend bool operator==(const Hole& a, const Hole& b) {
    return a.n_ == b.n_ && a.states_ == b.states_;
  }

 private:
  std::vector<Index> states_;
  Index n_;
};

/// Initial mass sitting on the hole.
template <typename Scalar>
Scalar mass_on(const Distribution<Scalar>& p, const Hole& hole) {
  Scalar m(0);
  for (Index k : hole.states()) m += p(k);
  return m;
}

/// Restriction of a distribution (or any row vector) to the surviving states.
template <typename Scalar>
RowVector<Scalar> restrict_to(const RowVector<Scalar>& v, const std::vector<Index>& survivors) {
  RowVector<Scalar> out(static_cast<Index>(survivors.size()));
  for (std::size_t i = 0; i < survivors.size(); ++i) out(static_cast<Index>(i)) = v(survivors[i]);
  return out;
}

/// P with the hole rows and columns crossed out; `survivors[i]` is the original
/// index of compact row i.
template <typename Scalar>
class SubMarkovMatrix {
 public:
  SubMarkovMatrix(Matrix<Scalar> entries, Hole hole, std::vector<Index> survivors)
      : entries_(std::move(entries)), hole_(std::move(hole)), survivors_(std::move(survivors)) {}

  const Matrix<Scalar>& entries() const { return entries_; }
  const Hole& hole() const { return hole_; }
  const std::vector<Index>& survivors() const { return survivors_; }
  Index size() const { return entries_.rows(); }

  Vector<Scalar> row_sums() const { return entries_.rowwise().sum(); }

  /// Compact rows whose mass is strictly below 1, i.e. rows that leak.
  std::vector<Index> deficient_rows() const {
    std::vector<Index> rows;
    const Vector<Scalar> s = row_sums();
    for (Index i = 0; i < s.size(); ++i) {
      if (s(i) < Scalar(1)) rows.push_back(i);
    }
    return rows;
  }

  /// Full-size matrix with zero hole rows and columns.
  Matrix<Scalar> embed() const {
    const Index n = hole_.dimension();
    Matrix<Scalar> out = Matrix<Scalar>::Zero(n, n);
    for (std::size_t i = 0; i < survivors_.size(); ++i) {
      for (std::size_t j = 0; j < survivors_.size(); ++j) {
        out(survivors_[i], survivors_[j]) =
            entries_(static_cast<Index>(i), static_cast<Index>(j));
      }
    }
    return out;
  }

 private:
  Matrix<Scalar> entries_;
  Hole hole_;
  std::vector<Index> survivors_;
};

struct StructureReport {
  bool irreducible = false;
  /// Period of the whole graph when irreducible; otherwise the largest
  /// component period, so `period == 1` still means every component is aperiodic.
  long period = 1;
  /// Strongly connected components, each sorted, ordered by smallest member.
  std::vector<std::vector<Index>> components;
  /// Period per component; 0 for a single state without a self-loop.
  std::vector<long> component_periods;

  bool aperiodic() const { return period == 1; }
  bool primitive() const { return irreducible && period == 1; }
};

namespace detail {

inline std::vector<std::vector<Index>> positive_adjacency(const auto& m) {
  const Index n = m.rows();
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (m(i, j) > 0) adj[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  return adj;
}

// Iterative Tarjan; returns a component id per vertex.
inline std::vector<Index> strongly_connected(const std::vector<std::vector<Index>>& adj,
                                             Index& count) {
  const Index n = static_cast<Index>(adj.size());
  std::vector<Index> index(adj.size(), -1), low(adj.size(), 0), comp(adj.size(), -1);
  std::vector<char> on_stack(adj.size(), 0);
  std::vector<Index> stack;
  std::vector<std::pair<Index, std::size_t>> call;
  Index next = 0;
  count = 0;
  for (Index root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    call.emplace_back(root, 0);
    while (!call.empty()) {
      auto& [v, edge] = call.back();
      const auto vs = static_cast<std::size_t>(v);
      if (edge == 0 && index[vs] < 0) {
        index[vs] = low[vs] = next++;
        stack.push_back(v);
        on_stack[vs] = 1;
      }
      if (edge < adj[vs].size()) {
        const Index w = adj[vs][edge++];
        const auto ws = static_cast<std::size_t>(w);
        if (index[ws] < 0) {
          call.emplace_back(w, 0);
        } else if (on_stack[ws]) {
          low[vs] = std::min(low[vs], index[ws]);
        }
        continue;
      }
      if (low[vs] == index[vs]) {
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = 0;
          comp[static_cast<std::size_t>(w)] = count;
        } while (w != v);
        ++count;
      }
      const Index finished = v;
      call.pop_back();
      if (!call.empty()) {
        const auto ps = static_cast<std::size_t>(call.back().first);
        low[ps] = std::min(low[ps], low[static_cast<std::size_t>(finished)]);
      }
    }
  }
  return comp;
}

}  // namespace detail

/// Strong connectivity and period of the digraph with an edge i -> j iff
/// m(i, j) > 0 exactly.
template <typename Derived>
StructureReport analyze_structure(const Eigen::MatrixBase<Derived>& m) {
  const auto adj = detail::positive_adjacency(m.derived());
  const Index n = m.rows();
  Index count = 0;
  const auto comp = detail::strongly_connected(adj, count);

  StructureReport report;
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(count));
  for (Index v = 0; v < n; ++v) members[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])].push_back(v);
  std::sort(members.begin(), members.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  std::vector<long> level(static_cast<std::size_t>(n), -1);
  for (const auto& group : members) {
    const Index cid = comp[static_cast<std::size_t>(group.front())];
    std::vector<Index> queue{group.front()};
    level[static_cast<std::size_t>(group.front())] = 0;
    long g = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Index u = queue[head];
      for (Index v : adj[static_cast<std::size_t>(u)]) {
        if (comp[static_cast<std::size_t>(v)] != cid) continue;
        auto& lv = level[static_cast<std::size_t>(v)];
        if (lv < 0) {
          lv = level[static_cast<std::size_t>(u)] + 1;
          queue.push_back(v);
        } else {
          g = std::gcd(g, std::labs(level[static_cast<std::size_t>(u)] + 1 - lv));
        }
      }
    }
    report.component_periods.push_back(g);
  }
  report.components = std::move(members);

  report.irreducible = report.components.size() == 1 && report.component_periods.front() > 0;
  long period = 0;
  for (long p : report.component_periods) period = std::max(period, p);
  report.period = std::max(period, 1L);
  return report;
}

template <typename Scalar>
StructureReport analyze_structure(const TransitionMatrix<Scalar>& p) {
  return analyze_structure(p.entries());
}

template <typename Scalar>
StructureReport analyze_structure(const SubMarkovMatrix<Scalar>& q) {
  return analyze_structure(q.entries());
}

/// Crosses out the hole rows and columns.
template <typename Scalar>
SubMarkovMatrix<Scalar> remove_states(const TransitionMatrix<Scalar>& p, const Hole& hole) {
  if (hole.dimension() != p.size()) throw ValidationError("hole dimension does not match matrix");
  auto survivors = hole.survivors();
  const auto m = static_cast<Index>(survivors.size());
  Matrix<Scalar> q(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      q(i, j) = p(survivors[static_cast<std::size_t>(i)], survivors[static_cast<std::size_t>(j)]);
    }
  }
  return SubMarkovMatrix<Scalar>(std::move(q), hole, std::move(survivors));
}

/// Makes every hole state absorbing: its row becomes the coordinate row.
template <typename Scalar>
TransitionMatrix<Scalar> absorbing_matrix(const TransitionMatrix<Scalar>& p, const Hole& hole) {
  if (!p.is_stochastic()) throw ValidationError("absorbing_matrix requires a stochastic matrix");
  if (hole.dimension() != p.size()) throw ValidationError("hole dimension does not match matrix");
  Matrix<Scalar> a = p.entries();
  for (Index k : hole.states()) {
    a.row(k).setZero();
    a(k, k) = Scalar(1);
  }
  return TransitionMatrix<Scalar>(std::move(a), MatrixKind::Stochastic);
}

/// Throws unless P is irreducible and aperiodic.
template <typename Scalar>
StructureReport require_ergodic(const TransitionMatrix<Scalar>& p) {
  auto report = analyze_structure(p);
  if (!report.irreducible) {
    throw NotIrreducible("transition matrix is reducible (" +
                         std::to_string(report.components.size()) + " components)");
  }
  if (report.period != 1) {
    throw AperiodicityViolation("transition matrix is periodic with period " +
                                std::to_string(report.period));
  }
  return report;
}

using TransitionMatrixd = TransitionMatrix<double>;
using Distributiond = Distribution<double>;
using SubMarkovMatrixd = SubMarkovMatrix<double>;

}  // namespace markov_rank
