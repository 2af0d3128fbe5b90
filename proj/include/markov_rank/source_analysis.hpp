#pragma once

// Real canonical (Jordan) basis of a stochastic matrix acting on row
// vectors, projections onto (modulus, chain index) groups, the
// faster-convergence comparator, source ranking, and distance-to-stationarity
// curves.
//
// Basis conventions:
//   * rows w_1..w_{N-1} span the non-stationary generalized eigenspaces and
//     the last row is the stationary distribution (sum 1);
//   * a Jordan chain satisfies w_r (P - lambda I) = w_{r-1}, w_1 (P - lambda I) = 0,
//     and its top vector has largest-magnitude component equal to 1;
//   * a non-real eigenvalue lambda = mu e^{i phi} (phi in (0, pi)) with complex
//     chain vector x contributes the pair (Re x, -Im x).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "markov_rank/chain_core.hpp"
#include "markov_rank/spectral.hpp"

namespace markov_rank {

enum class Norm { L1, L2, Linf };

inline const char* to_string(Norm norm) {
  switch (norm) {
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    case Norm::Linf: return "linf";
  }
  return "?";
}

template <typename Derived>
typename Derived::RealScalar norm_of(const Eigen::MatrixBase<Derived>& v, Norm norm) {
  switch (norm) {
    case Norm::L1: return v.template lpNorm<1>();
    case Norm::L2: return v.norm();
    case Norm::Linf: return v.template lpNorm<Eigen::Infinity>();
  }
  return 0;
}

struct EigenOptions {
  /// Rank threshold (relative to ||P^T - lambda I||^r) and zero-projection tolerance.
  double tol = 1e-8;
  /// Eigenvalues closer than this are treated as one cluster. A defective
  /// eigenvalue of a double matrix splits by about sqrt(machine epsilon).
  double cluster_tol = 1e-6;
  /// Basis condition numbers above this set `ill_conditioned`.
  double cond_limit = 1e12;
};

template <typename Scalar>
struct ProjectionKey {
  Scalar mu{};
  int r = 1;
};

template <typename Scalar>
struct EigenStructure {
  /// Rows are basis vectors; the last row is the stationary distribution.
  Matrix<Scalar> basis;
  Matrix<Scalar> basis_inverse;
  /// Per basis vector: eigenvalue with nonnegative imaginary part.
  std::vector<std::complex<Scalar>> eigenvalues;
  std::vector<Scalar> modulus;
  std::vector<Scalar> argument;
  /// Per basis vector: modulus shared by every vector in its projection key.
  std::vector<Scalar> key_modulus;
  std::vector<int> chain_index;
  /// Partner row of a non-real pair, or -1.
  std::vector<Index> pair_link;
  /// Vectors of one Jordan chain (and its conjugate partner) share an id.
  std::vector<Index> chain_id;
  RowVector<Scalar> pi;
  Scalar condition{};
  /// Smallest distance between distinct eigenvalue clusters.
  Scalar min_cluster_gap{};
  bool ill_conditioned = false;
  /// Jordan chains could not be resolved consistently; plain eigenvectors used.
  bool jordan_fallback = false;
  EigenOptions options;

  Index size() const { return basis.rows(); }
  Index stationary_row() const { return basis.rows() - 1; }

  /// Coordinates c with v = sum_i c_i w_i.
  RowVector<Scalar> coefficients(const RowVector<Scalar>& v) const { return v * basis_inverse; }

  /// Rows belonging to a key; (1, 1) selects the stationary row.
  std::vector<Index> rows_of(const ProjectionKey<Scalar>& key) const {
    std::vector<Index> rows;
    const Scalar ctol = static_cast<Scalar>(options.cluster_tol);
    if (key.r == 1 && std::abs(key.mu - Scalar(1)) <= ctol) {
      rows.push_back(stationary_row());
      return rows;
    }
    for (Index i = 0; i < stationary_row(); ++i) {
      const auto s = static_cast<std::size_t>(i);
      if (chain_index[s] == key.r && std::abs(key_modulus[s] - key.mu) <= ctol) rows.push_back(i);
    }
    return rows;
  }

  /// Distinct non-stationary keys in decreasing (mu, r) order.
  std::vector<ProjectionKey<Scalar>> keys() const {
    std::vector<ProjectionKey<Scalar>> out;
    for (Index i = 0; i < stationary_row(); ++i) {
      const auto s = static_cast<std::size_t>(i);
      const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& k) {
        return k.r == chain_index[s] && k.mu == key_modulus[s];
      });
      if (!seen) out.push_back({key_modulus[s], chain_index[s]});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return a.mu != b.mu ? a.mu > b.mu : a.r > b.r;
    });
    return out;
  }
};

namespace detail {

template <typename F>
using FMatrix = Eigen::Matrix<F, Eigen::Dynamic, Eigen::Dynamic>;
template <typename F>
using FVector = Eigen::Matrix<F, Eigen::Dynamic, 1>;

// Orthonormal basis of the null space of m: right singular vectors with
// singular value <= threshold.
template <typename F, typename Real>
FMatrix<F> null_basis(const FMatrix<F>& m, Real threshold) {
  Eigen::JacobiSVD<FMatrix<F>> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Index nullity = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= threshold) ++nullity;
  }
  return svd.matrixV().rightCols(nullity);
}

// Orthonormal basis of the column span.
template <typename F>
FMatrix<F> span_basis(const FMatrix<F>& m) {
  if (m.cols() == 0) return FMatrix<F>(m.rows(), 0);
  Eigen::JacobiSVD<FMatrix<F>> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  using Real = typename Eigen::NumTraits<F>::Real;
  const Real cut = Real(1e-8) * std::max(Real(1), sv(0));
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  return svd.matrixU().leftCols(rank);
}

// Jordan chains of the generalized eigenspace of size m of the column
// operator b = P^T - lambda I. Each chain is returned bottom (eigenvector)
// first; the top vector has largest-magnitude component 1. Returns an empty
// list when the nullity pattern is inconsistent.
template <typename F, typename Real>
std::vector<std::vector<FVector<F>>> jordan_chains(const FMatrix<F>& b, Index m, Real tol) {
  const Index n = b.rows();
  FMatrix<F> bm = FMatrix<F>::Identity(n, n);
  for (Index k = 0; k < m; ++k) bm = bm * b;
  Eigen::JacobiSVD<FMatrix<F>> svd(bm, Eigen::ComputeFullV);
  const FMatrix<F> g = svd.matrixV().rightCols(m);
  const FMatrix<F> t = g.adjoint() * b * g;
  const Real norm_b = std::max(Real(1), b.cwiseAbs().rowwise().sum().maxCoeff());

  // null[r] spans ker(t^r) for r = 0..m.
  std::vector<FMatrix<F>> null(static_cast<std::size_t>(m) + 1);
  null[0] = FMatrix<F>(m, 0);
  FMatrix<F> tr = FMatrix<F>::Identity(m, m);
  Index top = m;
  for (Index r = 1; r <= m; ++r) {
    tr = tr * t;
    null[static_cast<std::size_t>(r)] = null_basis<F>(tr, tol * std::pow(norm_b, Real(r)));
    if (null[static_cast<std::size_t>(r)].cols() < null[static_cast<std::size_t>(r - 1)].cols()) {
      return {};
    }
    if (null[static_cast<std::size_t>(r)].cols() == m) {
      top = r;
      break;
    }
  }
  if (null[static_cast<std::size_t>(top)].cols() != m) return {};

  // Walk down from the top level: chains started above are continued by t,
  // new chain tops complete ker(t^r) modulo ker(t^{r-1}) + continued chains.
  std::vector<FVector<F>> tops;
  std::vector<Index> lengths;
  std::vector<FVector<F>> level;
  Index prev_count = m;
  for (Index r = top; r >= 1; --r) {
    const auto& nr = null[static_cast<std::size_t>(r)];
    const auto& nr1 = null[static_cast<std::size_t>(r - 1)];
    const Index count_ge_r = nr.cols() - nr1.cols();
    const Index fresh = count_ge_r - static_cast<Index>(level.size());
    if (fresh < 0 || count_ge_r > prev_count) return {};
    prev_count = count_ge_r;

    FMatrix<F> y(m, nr1.cols() + static_cast<Index>(level.size()));
    y.leftCols(nr1.cols()) = nr1;
    for (std::size_t i = 0; i < level.size(); ++i) {
      y.col(nr1.cols() + static_cast<Index>(i)) = level[i].normalized();
    }
    const FMatrix<F> q = span_basis<F>(y);
    const FMatrix<F> residual = nr - q * (q.adjoint() * nr);
    if (fresh > 0) {
      Eigen::JacobiSVD<FMatrix<F>> rs(residual, Eigen::ComputeThinU);
      if (rs.singularValues().size() < fresh || rs.singularValues()(fresh - 1) <= Real(1e-6)) {
        return {};
      }
      for (Index k = 0; k < fresh; ++k) {
        level.push_back(rs.matrixU().col(k));
        tops.push_back(level.back());
        lengths.push_back(r);
      }
    }
    for (auto& v : level) v = t * v;
  }

  // Rebuild every chain in full coordinates from its normalized top vector.
  std::vector<std::vector<FVector<F>>> out;
  for (std::size_t c = 0; c < tops.size(); ++c) {
    FVector<F> x = g * tops[c];
    Index arg = 0;
    x.cwiseAbs().maxCoeff(&arg);
    x /= x(arg);
    auto& chain = out.emplace_back();
    chain.push_back(x);
    for (Index k = 1; k < lengths[c]; ++k) chain.push_back(b * chain.back());
    std::reverse(chain.begin(), chain.end());
  }
  return out;
}

template <typename Scalar>
std::vector<std::vector<Index>> cluster_values(const std::vector<std::complex<Scalar>>& values,
                                               Scalar tol) {
  const std::size_t n = values.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(values[i] - values[j]) <= tol) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<Index>> groups;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[root])].push_back(static_cast<Index>(i));
  }
  return groups;
}

template <typename Scalar>
struct BasisVector {
  RowVector<Scalar> w;
  std::complex<Scalar> lambda;
  int r = 1;
  Index chain = 0;
  int pair_slot = -1;  // 0 for the real part, 1 for the imaginary part
};

}  // namespace detail

/// Real canonical basis of P (acting on row vectors) with the stationary
/// distribution as last basis vector.
template <typename Scalar>
EigenStructure<Scalar> eigen_structure(const TransitionMatrix<Scalar>& p,
                                       const EigenOptions& opts = {}) {
  using Complex = std::complex<Scalar>;
  if (!p.is_stochastic()) throw ValidationError("eigen_structure requires a stochastic matrix");
  require_ergodic(p);
  const Index n = p.size();
  const Scalar tol = static_cast<Scalar>(opts.tol);
  const Scalar ctol = static_cast<Scalar>(opts.cluster_tol);

  EigenStructure<Scalar> es;
  es.options = opts;
  es.pi = stationary(p).pi.weights();

  const Matrix<Scalar> at = p.entries().transpose();
  Eigen::EigenSolver<Matrix<Scalar>> solver(at, false);
  std::vector<Complex> values(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  const auto clusters = detail::cluster_values(values, ctol);

  std::vector<Complex> means;
  for (const auto& c : clusters) {
    Complex s(0);
    for (Index i : c) s += values[static_cast<std::size_t>(i)];
    means.push_back(s / Scalar(c.size()));
  }
  es.min_cluster_gap = std::numeric_limits<Scalar>::infinity();
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      es.min_cluster_gap = std::min(es.min_cluster_gap, std::abs(means[a] - means[b]));
    }
  }

  std::vector<detail::BasisVector<Scalar>> vecs;
  Index chain_counter = 0;
  bool found_unit = false;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const Complex lambda = means[c];
    const Index m = static_cast<Index>(clusters[c].size());
    if (std::abs(lambda - Complex(1)) <= ctol) {
      if (m != 1) throw AperiodicityViolation("eigenvalue 1 is not simple");
      found_unit = true;
      continue;
    }
    if (std::abs(lambda) >= Scalar(1) - ctol) {
      throw AperiodicityViolation("non-unit eigenvalue on the unit circle");
    }
    if (std::abs(lambda.imag()) <= ctol) {
      const Matrix<Scalar> b = at - lambda.real() * Matrix<Scalar>::Identity(n, n);
      auto chains = detail::jordan_chains<Scalar, Scalar>(b, m, tol);
      if (chains.empty()) {
        es.jordan_fallback = true;
        Eigen::JacobiSVD<Matrix<Scalar>> svd(b, Eigen::ComputeFullV);
        for (Index k = 0; k < m; ++k) {
          Vector<Scalar> x = svd.matrixV().col(n - 1 - k);
          Index arg = 0;
          x.cwiseAbs().maxCoeff(&arg);
          chains.push_back({x / x(arg)});
        }
      }
      for (const auto& chain : chains) {
        for (std::size_t r = 0; r < chain.size(); ++r) {
          vecs.push_back({chain[r].transpose(), Complex(lambda.real(), 0), static_cast<int>(r + 1),
                          chain_counter, -1});
        }
        ++chain_counter;
      }
    } else if (lambda.imag() > 0) {
      using CM = detail::FMatrix<Complex>;
      const CM b = at.template cast<Complex>() - lambda * CM::Identity(n, n);
      auto chains = detail::jordan_chains<Complex, Scalar>(b, m, tol);
      if (chains.empty()) {
        es.jordan_fallback = true;
        Eigen::JacobiSVD<CM> svd(b, Eigen::ComputeFullV);
        for (Index k = 0; k < m; ++k) {
          detail::FVector<Complex> x = svd.matrixV().col(n - 1 - k);
          Index arg = 0;
          x.cwiseAbs().maxCoeff(&arg);
          chains.push_back({x / x(arg)});
        }
      }
      for (const auto& chain : chains) {
        for (std::size_t r = 0; r < chain.size(); ++r) {
          const int idx = static_cast<int>(r + 1);
          vecs.push_back({chain[r].real().transpose(), lambda, idx, chain_counter, 0});
          vecs.push_back({(-chain[r].imag()).transpose(), lambda, idx, chain_counter, 1});
        }
        ++chain_counter;
      }
    }
  }
  if (!found_unit) throw AperiodicityViolation("no eigenvalue equal to 1 found");

  std::stable_sort(vecs.begin(), vecs.end(), [](const auto& a, const auto& b) {
    const Scalar ma = std::abs(a.lambda), mb = std::abs(b.lambda);
    if (ma != mb) return ma > mb;
    const Scalar pa = std::arg(a.lambda), pb = std::arg(b.lambda);
    if (pa != pb) return pa < pb;
    if (a.chain != b.chain) return a.chain < b.chain;
    if (a.r != b.r) return a.r < b.r;
    return a.pair_slot < b.pair_slot;
  });
  if (static_cast<Index>(vecs.size()) != n - 1) {
    throw ValidationError("canonical basis has wrong dimension");
  }

  es.basis.resize(n, n);
  std::vector<Complex> mods;
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    const auto& v = vecs[i];
    es.basis.row(static_cast<Index>(i)) = v.w;
    es.eigenvalues.push_back(v.lambda);
    es.modulus.push_back(std::abs(v.lambda));
    es.argument.push_back(std::abs(std::arg(v.lambda)));
    es.chain_index.push_back(v.r);
    es.chain_id.push_back(v.chain);
    Index partner = -1;
    if (v.pair_slot >= 0) partner = static_cast<Index>(v.pair_slot == 0 ? i + 1 : i - 1);
    es.pair_link.push_back(partner);
    mods.emplace_back(std::abs(v.lambda), Scalar(0));
  }
  es.basis.row(n - 1) = es.pi;
  es.eigenvalues.emplace_back(Scalar(1), Scalar(0));
  es.modulus.push_back(Scalar(1));
  es.argument.push_back(Scalar(0));
  es.chain_index.push_back(1);
  es.chain_id.push_back(chain_counter);
  es.pair_link.push_back(-1);

  // Moduli within cluster_tol form one projection key.
  es.key_modulus.assign(static_cast<std::size_t>(n), Scalar(1));
  for (const auto& group : detail::cluster_values(mods, ctol)) {
    Scalar s(0);
    for (Index i : group) s += mods[static_cast<std::size_t>(i)].real();
    for (Index i : group) es.key_modulus[static_cast<std::size_t>(i)] = s / Scalar(group.size());
  }

  Eigen::JacobiSVD<Matrix<Scalar>> svd(es.basis);
  const auto& sv = svd.singularValues();
  es.condition = sv(sv.size() - 1) > Scalar(0) ? sv(0) / sv(sv.size() - 1)
                                                : std::numeric_limits<Scalar>::infinity();
  es.ill_conditioned = !(es.condition <= static_cast<Scalar>(opts.cond_limit));
  es.basis_inverse = Eigen::FullPivLU<Matrix<Scalar>>(es.basis).inverse();
  return es;
}

/// Component of v along the basis rows of `key`, taken along all other rows.
/// Unknown keys project to zero.
template <typename Scalar>
RowVector<Scalar> project(const EigenStructure<Scalar>& es, const RowVector<Scalar>& v,
                          const ProjectionKey<Scalar>& key) {
  const RowVector<Scalar> c = es.coefficients(v);
  RowVector<Scalar> out = RowVector<Scalar>::Zero(es.size());
  for (Index i : es.rows_of(key)) out += c(i) * es.basis.row(i);
  return out;
}

enum class Verdict { Faster, Slower, Equal, Incomparable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Faster: return "faster";
    case Verdict::Slower: return "slower";
    case Verdict::Equal: return "equal";
    case Verdict::Incomparable: return "incomparable";
  }
  return "?";
}

template <typename Scalar>
struct DominanceResult {
  Verdict verdict = Verdict::Incomparable;
  std::optional<ProjectionKey<Scalar>> witness_key;
  /// Faster: Pi u = a Pi v. Slower: Pi v = a Pi u. |a| < 1.
  std::optional<Scalar> scalar_a;
};

namespace detail {

// Upper bound on the size of any projection of v.
template <typename Scalar>
Scalar expansion_magnitude(const EigenStructure<Scalar>& es, const RowVector<Scalar>& v) {
  const RowVector<Scalar> c = es.coefficients(v);
  Scalar m(0);
  for (Index i = 0; i < es.size(); ++i) {
    m += std::abs(c(i)) * es.basis.row(i).cwiseAbs().maxCoeff();
  }
  return m;
}

// a with x = a y when y != 0 and x is a multiple of y within threshold.
template <typename Scalar>
std::optional<Scalar> multiple_of(const RowVector<Scalar>& x, const RowVector<Scalar>& y,
                                  Scalar threshold) {
  const Scalar a = x.dot(y) / y.dot(y);
  if ((x - a * y).cwiseAbs().maxCoeff() <= threshold) return a;
  return std::nullopt;
}

}  // namespace detail

/// Decides whether u converges to stationarity faster than v in every norm,
/// via the leading (modulus, chain index) projection where they differ from zero.
template <typename Scalar>
DominanceResult<Scalar> compare_convergence(const EigenStructure<Scalar>& es,
                                            const Distribution<Scalar>& u,
                                            const Distribution<Scalar>& v,
                                            std::optional<double> tol_opt = std::nullopt) {
  const Scalar tol = static_cast<Scalar>(tol_opt.value_or(es.options.tol));
  if (u.size() != es.size() || v.size() != es.size()) {
    throw ValidationError("distribution length does not match the chain");
  }
  DominanceResult<Scalar> out;
  if ((u.weights() - v.weights()).cwiseAbs().maxCoeff() <= tol) {
    out.verdict = Verdict::Equal;
    return out;
  }
  const Scalar threshold = tol * std::max(detail::expansion_magnitude(es, u.weights()),
                                          detail::expansion_magnitude(es, v.weights()));
  for (const auto& key : es.keys()) {
    const RowVector<Scalar> pu = project(es, u.weights(), key);
    const RowVector<Scalar> pv = project(es, v.weights(), key);
    const bool zu = pu.cwiseAbs().maxCoeff() <= threshold;
    const bool zv = pv.cwiseAbs().maxCoeff() <= threshold;
    if (zu && zv) continue;
    out.witness_key = key;
    if (!zv) {
      const auto a = zu ? std::optional<Scalar>(Scalar(0)) : detail::multiple_of(pu, pv, threshold);
      if (a && std::abs(*a) < Scalar(1) - tol) {
        out.verdict = Verdict::Faster;
        out.scalar_a = *a;
        return out;
      }
    }
    if (!zu) {
      const auto a = zv ? std::optional<Scalar>(Scalar(0)) : detail::multiple_of(pv, pu, threshold);
      if (a && std::abs(*a) < Scalar(1) - tol) {
        out.verdict = Verdict::Slower;
        out.scalar_a = *a;
        return out;
      }
    }
    out.verdict = Verdict::Incomparable;
    return out;
  }
  out.verdict = Verdict::Equal;
  return out;
}

template <typename Scalar>
struct SourceRanking {
  std::optional<ProjectionKey<Scalar>> key;
  /// q[i] = L1 norm of the dominant projection of e_i.
  std::vector<Scalar> q;
  /// States sorted by ascending q; empty when degenerate.
  std::vector<Index> sigma;
  /// Number of basis vectors in the dominant key.
  Index image_dimension = 0;
  bool degenerate = false;
};

/// Ranks the states as sources by their dominant projection.
template <typename Scalar>
SourceRanking<Scalar> rank_sources(const EigenStructure<Scalar>& es,
                                   std::optional<double> tol_opt = std::nullopt) {
  const Scalar tol = static_cast<Scalar>(tol_opt.value_or(es.options.tol));
  const Index n = es.size();
  SourceRanking<Scalar> out;
  std::vector<Scalar> thresholds;
  for (Index i = 0; i < n; ++i) {
    const RowVector<Scalar> e = RowVector<Scalar>::Unit(n, i);
    thresholds.push_back(tol * detail::expansion_magnitude(es, e));
  }
  for (const auto& key : es.keys()) {
    std::vector<Scalar> q;
    bool any = false;
    for (Index i = 0; i < n; ++i) {
      const RowVector<Scalar> proj = project(es, RowVector<Scalar>(RowVector<Scalar>::Unit(n, i)), key);
      any = any || proj.cwiseAbs().maxCoeff() > thresholds[static_cast<std::size_t>(i)];
      q.push_back(proj.template lpNorm<1>());
    }
    if (!any) continue;
    out.key = key;
    out.q = std::move(q);
    out.image_dimension = static_cast<Index>(es.rows_of(key).size());
    break;
  }
  if (!out.key || out.image_dimension != 1) {
    out.degenerate = true;
    return out;
  }
  out.sigma.resize(static_cast<std::size_t>(n));
  std::iota(out.sigma.begin(), out.sigma.end(), Index{0});
  std::stable_sort(out.sigma.begin(), out.sigma.end(), [&](Index a, Index b) {
    return out.q[static_cast<std::size_t>(a)] < out.q[static_cast<std::size_t>(b)];
  });
  return out;
}

template <typename Scalar>
struct TVCurve {
  Distribution<Scalar> start;
  Norm norm = Norm::L1;
  std::vector<Scalar> values;
};

/// values[n] = H(start P^n - pi). The deviation d_n = (start - pi) P^n is
/// propagated directly and its rounding drift along pi removed every step,
/// so the curve keeps full relative precision far below machine epsilon.
template <typename Scalar>
TVCurve<Scalar> tv_curve(const TransitionMatrix<Scalar>& p, const Distribution<Scalar>& start,
                         Norm norm, long n_max) {
  if (!p.is_stochastic()) throw ValidationError("tv_curve requires a stochastic matrix");
  require_ergodic(p);
  if (start.size() != p.size()) throw ValidationError("start distribution has wrong length");
  const RowVector<Scalar> pi = stationary(p).pi.weights();
  TVCurve<Scalar> curve{start, norm, {}};
  RowVector<Scalar> d = start.weights() - pi;
  d -= d.sum() * pi;
  for (long k = 0; k <= n_max; ++k) {
    curve.values.push_back(norm_of(d, norm));
    d = d * p.entries();
    d -= d.sum() * pi;
  }
  return curve;
}

/// Leading magnitude binom(n, r-1) mu^(n-r+1) |coeff| of a chain-top
/// component under n steps.
template <typename Scalar>
Scalar predicted_decay(const EigenStructure<Scalar>& es, const ProjectionKey<Scalar>& key,
                       Scalar coeff, long n) {
  if (es.rows_of(key).empty()) throw ValidationError("projection key not present");
  const long d = key.r - 1;
  if (n < d) return Scalar(0);
  Scalar binom(1);
  for (long k = 1; k <= d; ++k) binom = binom * Scalar(n - d + k) / Scalar(k);
  return binom * std::pow(key.mu, static_cast<Scalar>(n - d)) * std::abs(coeff);
}

using EigenStructured = EigenStructure<double>;
using ProjectionKeyd = ProjectionKey<double>;
using DominanceResultd = DominanceResult<double>;
using SourceRankingd = SourceRanking<double>;
using TVCurved = TVCurve<double>;

}  // namespace markov_rank
