#pragma once

// Monte Carlo cross-checks: first hitting times, survival probabilities, and
// empirical distance to stationarity. Every trial draws from its own
// counter-based stream keyed by (seed, trial), so results do not depend on
// the number of worker threads.

#include <cstdint>
#include <vector>

#include "markov_rank/chain_core.hpp"

namespace markov_rank {

struct SimConfig {
  long trials = 100000;
  std::uint64_t seed = 0;
  long horizon = 500;
  /// Worker threads; 0 means MARKOV_RANK_THREADS or hardware concurrency.
  int threads = 0;
};

struct SurvivalEstimate {
  long n = 0;
  double p_hat = 0.0;
  double ci_half_width = 0.0;
  long trials = 0;

  /// Standard error with the variance floored at 1/trials.
  double standard_error() const;
};

struct TvEstimate {
  long n = 0;
  double value = 0.0;
  long trials = 0;
  /// sqrt(N / trials): the order of the upward bias of the empirical L1 distance.
  double noise_floor = 0.0;
};

/// Counter-based generator: output k of stream (seed, trial) is a fixed
/// function of (seed, trial, k).
class TrialStream {
 public:
  TrialStream(std::uint64_t seed, std::uint64_t trial);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double next_double();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Cumulative-row sampler for a stochastic matrix and an initial distribution.
class ChainSampler {
 public:
  ChainSampler(const TransitionMatrixd& p, const Distributiond& init);

  Index draw_initial(TrialStream& rng) const;
  Index step(Index from, TrialStream& rng) const;
  Index size() const { return n_; }

 private:
  static Index draw(const std::vector<double>& cdf, std::size_t offset, std::size_t len,
                    double u);

  Index n_;
  std::vector<double> rows_;  // n_ x n_ cumulative rows
  std::vector<double> init_;
};

/// T = min{n >= 0 : X_n in hole}; returns horizon + 1 if the hole is not hit
/// within `horizon` steps.
long sample_hitting_time(const ChainSampler& sampler, const Hole& hole, TrialStream& rng,
                         long horizon);

long sample_hitting_time(const TransitionMatrixd& p, const Distributiond& init, const Hole& hole,
                         TrialStream& rng, long horizon);

/// Fraction of trials with T > n for each requested n.
std::vector<SurvivalEstimate> estimate_survival(const TransitionMatrixd& p,
                                                const Distributiond& init, const Hole& hole,
                                                const std::vector<long>& ns,
                                                const SimConfig& cfg);

/// L1 distance between the empirical law of X_n and the stationary distribution.
TvEstimate estimate_tv(const TransitionMatrixd& p, const Distributiond& start, long n,
                       const SimConfig& cfg);

/// Thread count from cfg.threads, then MARKOV_RANK_THREADS, then the hardware.
int resolve_threads(int requested);

}  // namespace markov_rank
