#pragma once

// Survival mass through a hole, exponential envelopes, sink ranking, and
// certified tail-crossing times.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "markov_rank/chain_core.hpp"
#include "markov_rank/spectral.hpp"

namespace markov_rank {

/// Curves stop once the surviving mass falls below this value.
inline constexpr double kUnderflowFloor = 1e-300;

template <typename Scalar>
struct SurvivalCurve {
  Hole hole;
  Distribution<Scalar> init;
  /// values[n] = mass still off the hole after n steps.
  std::vector<Scalar> values;
  /// True when the curve stopped early because the mass underflowed.
  bool truncated = false;
};

template <typename Scalar>
struct Envelope {
  Scalar c1{};
  Scalar c2{};
  Scalar mu{};
  Scalar lambda{};

  Scalar lower(long n) const { return c1 * std::pow(mu, static_cast<Scalar>(n)); }
  Scalar upper(long n) const { return c2 * std::pow(mu, static_cast<Scalar>(n)); }
};

template <typename Scalar>
struct SinkRecord {
  Index state = 0;
  Scalar mu{};
  Scalar lambda{};
  bool reducible_after_removal = false;
};

template <typename Scalar>
struct SinkRanking {
  /// Indexed by state.
  std::vector<SinkRecord<Scalar>> records;
  /// States ordered by decreasing escape rate; sigma.front() is the best sink.
  std::vector<Index> sigma;
  /// Consecutive runs of sigma whose rates agree within rank_tol.
  std::vector<std::vector<Index>> ties;
  /// States whose punched matrix is reducible.
  std::vector<Index> warnings;
};

template <typename Scalar>
struct CrossingCertificate {
  Hole fast_hole;
  Hole slow_hole;
  Distribution<Scalar> fast_init;
  Distribution<Scalar> slow_init;
  long n0_empirical = 0;
  long n_star_certified = 0;
  Envelope<Scalar> fast_envelope;
  Envelope<Scalar> slow_envelope;
  SurvivalCurve<Scalar> fast_curve;
  SurvivalCurve<Scalar> slow_curve;
};

/// Mass of p Q^n off the hole for n = 0..n_max, by repeated vector-matrix products.
template <typename Scalar>
SurvivalCurve<Scalar> survival_curve(const TransitionMatrix<Scalar>& p, const Hole& hole,
                                     const Distribution<Scalar>& init, long n_max) {
  require_ergodic(p);
  if (init.size() != p.size()) throw ValidationError("initial distribution has wrong length");
  const auto q = remove_states(p, hole);
  RowVector<Scalar> mass = restrict_to(init.weights(), q.survivors());
  if (!(mass.sum() > Scalar(0))) throw DegenerateInit("all initial mass lies on the hole");

  SurvivalCurve<Scalar> curve{hole, init, {}, false};
  curve.values.reserve(static_cast<std::size_t>(std::max(n_max, 0L)) + 1);
  for (long n = 0; n <= n_max; ++n) {
    const Scalar m = mass.sum();
    if (m < static_cast<Scalar>(kUnderflowFloor)) {
      curve.truncated = true;
      break;
    }
    curve.values.push_back(m);
    mass = mass * q.entries();
  }
  return curve;
}

/// Constants c1 <= c2 with c1 mu^n <= M_n <= c2 mu^n for every n >= 0, from
/// the right Perron vector h of the punched matrix: h_min h <= 1 <= h / h_min.
template <typename Scalar>
Envelope<Scalar> envelope(const TransitionMatrix<Scalar>& p, const Hole& hole,
                          const Distribution<Scalar>& init, const PerronOptions& opts = {}) {
  require_ergodic(p);
  const auto q = remove_states(p, hole);
  if (!analyze_structure(q).irreducible) {
    throw ReducibleAfterRemoval("punched matrix is reducible; no positive right Perron vector");
  }
  const RowVector<Scalar> surv = restrict_to(init.weights(), q.survivors());
  if (!(surv.sum() > Scalar(0))) throw DegenerateInit("all initial mass lies on the hole");
  const auto data = perron(q, opts);
  const Vector<Scalar>& h = data.right;
  const Scalar h_min = h.minCoeff();
  const Scalar ph = surv.dot(h.transpose());
  return {ph * h_min, ph / h_min, data.mu, data.lambda};
}

/// Orders the singleton holes by decreasing escape rate.
template <typename Scalar>
SinkRanking<Scalar> rank_sinks(const TransitionMatrix<Scalar>& p, double rank_tol = 1e-9,
                               const PerronOptions& opts = {}) {
  require_ergodic(p);
  const Index n = p.size();
  SinkRanking<Scalar> out;
  for (Index k = 0; k < n; ++k) {
    const auto rate = escape_rate(p, Hole::single(k, n), opts);
    out.records.push_back({k, rate.mu, rate.lambda, rate.reducible_after_removal});
    if (rate.reducible_after_removal) out.warnings.push_back(k);
  }
  out.sigma.resize(static_cast<std::size_t>(n));
  std::iota(out.sigma.begin(), out.sigma.end(), Index{0});
  std::stable_sort(out.sigma.begin(), out.sigma.end(), [&](Index a, Index b) {
    return out.records[static_cast<std::size_t>(a)].lambda >
           out.records[static_cast<std::size_t>(b)].lambda;
  });
  const auto same = [&](Index a, Index b) {
    const Scalar la = out.records[static_cast<std::size_t>(a)].lambda;
    const Scalar lb = out.records[static_cast<std::size_t>(b)].lambda;
    if (std::isinf(la) || std::isinf(lb)) return la == lb;
    return std::abs(la - lb) <= static_cast<Scalar>(rank_tol);
  };
  for (std::size_t i = 0; i < out.sigma.size(); ++i) {
    if (i == 0 || !same(out.sigma[i - 1], out.sigma[i])) out.ties.emplace_back();
    out.ties.back().push_back(out.sigma[i]);
  }
  return out;
}

namespace detail {

// Smallest n >= 0 with c2f e^{-lf n} < c1s e^{-ls n}.
template <typename Scalar>
long certified_crossing(const Envelope<Scalar>& fast, const Envelope<Scalar>& slow) {
  const Scalar gap = fast.lambda - slow.lambda;
  const auto holds = [&](long n) {
    return std::log(fast.c2) - fast.lambda * static_cast<Scalar>(n) <
           std::log(slow.c1) - slow.lambda * static_cast<Scalar>(n);
  };
  const Scalar bound = std::log(fast.c2 / slow.c1) / gap;
  long n = bound < Scalar(0) ? 0L : static_cast<long>(std::floor(bound)) + 1;
  while (n > 0 && holds(n - 1)) --n;
  while (!holds(n)) ++n;
  return n;
}

}  // namespace detail

/// Certified time after which the survival tail through `fast_hole` from p
/// stays strictly below the tail through `slow_hole` from q.
template <typename Scalar>
CrossingCertificate<Scalar> crossing_time(const TransitionMatrix<Scalar>& p, const Hole& fast_hole,
                                          const Hole& slow_hole, const Distribution<Scalar>& fast_init,
                                          const Distribution<Scalar>& slow_init,
                                          double rank_tol = 1e-9, const PerronOptions& opts = {}) {
  require_ergodic(p);
  const auto fast_rate = escape_rate(p, fast_hole, opts);
  const auto slow_rate = escape_rate(p, slow_hole, opts);
  if (!(fast_rate.lambda - slow_rate.lambda > static_cast<Scalar>(rank_tol))) {
    throw RatesNotSeparated("escape rates are not separated by more than rank_tol");
  }
  if (std::isinf(slow_rate.lambda)) throw RatesNotSeparated("slow hole has infinite escape rate");
  if (!(mass_on(fast_init, fast_hole) < Scalar(1)) || !(mass_on(slow_init, slow_hole) < Scalar(1))) {
    throw DegenerateInit("all initial mass lies on the hole");
  }

  CrossingCertificate<Scalar> cert{fast_hole, slow_hole, fast_init, slow_init, 0, 0,
                                   {},        {},        {fast_hole, fast_init, {}, false},
                                   {slow_hole, slow_init, {}, false}};
  cert.slow_envelope = envelope(p, slow_hole, slow_init, opts);

  if (std::isinf(fast_rate.lambda)) {
    // Nilpotent punched matrix: the fast curve hits exactly zero within
    // size(Q) steps and stays there.
    const long horizon = static_cast<long>(p.size());
    cert.fast_curve = survival_curve(p, fast_hole, fast_init, horizon);
    long n_zero = 0;
    while (n_zero < static_cast<long>(cert.fast_curve.values.size()) &&
           cert.fast_curve.values[static_cast<std::size_t>(n_zero)] > Scalar(0)) {
      ++n_zero;
    }
    cert.fast_envelope = {Scalar(0), Scalar(0), Scalar(0), fast_rate.lambda};
    cert.n_star_certified = n_zero;
  } else {
    cert.fast_envelope = envelope(p, fast_hole, fast_init, opts);
    cert.n_star_certified = detail::certified_crossing(cert.fast_envelope, cert.slow_envelope);
    cert.fast_curve = survival_curve(p, fast_hole, fast_init, cert.n_star_certified);
  }
  cert.slow_curve = survival_curve(p, slow_hole, slow_init, cert.n_star_certified);

  long last_violation = -1;
  for (long n = 0; n <= cert.n_star_certified; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const bool have_fast = i < cert.fast_curve.values.size();
    const bool have_slow = i < cert.slow_curve.values.size();
    // Underflowed fast mass is below the floor, hence below any stored slow value.
    if (!have_slow) continue;
    if (have_fast && cert.fast_curve.values[i] >= cert.slow_curve.values[i]) last_violation = n;
  }
  cert.n0_empirical = last_violation + 1;
  return cert;
}

using SurvivalCurved = SurvivalCurve<double>;
using Enveloped = Envelope<double>;
using SinkRankingd = SinkRanking<double>;
using CrossingCertificated = CrossingCertificate<double>;

}  // namespace markov_rank
