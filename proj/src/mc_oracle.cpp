#include "markov_rank/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "markov_rank/spectral.hpp"

namespace markov_rank {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Runs body(first, last, tally) over contiguous trial blocks and sums the
// integer tallies, so the reduction is independent of the schedule.
template <typename Body>
std::vector<long> parallel_tally(long trials, std::size_t bins, int threads, Body body) {
  const long workers = std::max(1L, std::min<long>(threads, trials));
  std::vector<std::vector<long>> partial(static_cast<std::size_t>(workers),
                                         std::vector<long>(bins, 0));
  std::vector<std::thread> pool;
  for (long w = 0; w < workers; ++w) {
    const long first = trials * w / workers;
    const long last = trials * (w + 1) / workers;
    auto& tally = partial[static_cast<std::size_t>(w)];
    if (workers == 1) {
      body(first, last, tally);
    } else {
      pool.emplace_back([&body, first, last, &tally] { body(first, last, tally); });
    }
  }
  for (auto& t : pool) t.join();
  std::vector<long> total(bins, 0);
  for (const auto& part : partial) {
    for (std::size_t i = 0; i < bins; ++i) total[i] += part[i];
  }
  return total;
}

}  // namespace

double SurvivalEstimate::standard_error() const {
  const double var = std::max(p_hat * (1.0 - p_hat), 1.0 / static_cast<double>(trials));
  return std::sqrt(var / static_cast<double>(trials));
}

TrialStream::TrialStream(std::uint64_t seed, std::uint64_t trial)
    : key_(splitmix64(seed ^ splitmix64(trial ^ 0x5851f42d4c957f2dULL))) {}

std::uint64_t TrialStream::next_u64() {
  return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
}

double TrialStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

ChainSampler::ChainSampler(const TransitionMatrixd& p, const Distributiond& init) : n_(p.size()) {
  if (!p.is_stochastic()) throw ValidationError("simulation requires a stochastic matrix");
  if (init.size() != n_) throw ValidationError("initial distribution has wrong length");
  rows_.resize(static_cast<std::size_t>(n_ * n_));
  for (Index i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (Index j = 0; j < n_; ++j) {
      acc += p(i, j);
      rows_[static_cast<std::size_t>(i * n_ + j)] = acc;
    }
  }
  double acc = 0.0;
  for (Index j = 0; j < n_; ++j) {
    acc += init(j);
    init_.push_back(acc);
  }
}

Index ChainSampler::draw(const std::vector<double>& cdf, std::size_t offset, std::size_t len,
                         double u) {
  const auto first = cdf.begin() + static_cast<std::ptrdiff_t>(offset);
  const auto last = first + static_cast<std::ptrdiff_t>(len);
  // Scale by the row total so rounding in the cumulative sum never leaves a gap.
  auto it = std::upper_bound(first, last, u * *(last - 1));
  if (it == last) {
    // u * total rounded up to the total: take the last state with positive mass.
    --it;
    while (it != first && *it == *(it - 1)) --it;
  }
  return static_cast<Index>(it - first);
}

Index ChainSampler::draw_initial(TrialStream& rng) const {
  return draw(init_, 0, init_.size(), rng.next_double());
}

Index ChainSampler::step(Index from, TrialStream& rng) const {
  return draw(rows_, static_cast<std::size_t>(from * n_), static_cast<std::size_t>(n_),
              rng.next_double());
}

long sample_hitting_time(const ChainSampler& sampler, const Hole& hole, TrialStream& rng,
                         long horizon) {
  Index x = sampler.draw_initial(rng);
  for (long t = 0; t <= horizon; ++t) {
    if (hole.contains(x)) return t;
    if (t == horizon) break;
    x = sampler.step(x, rng);
  }
  return horizon + 1;
}

long sample_hitting_time(const TransitionMatrixd& p, const Distributiond& init, const Hole& hole,
                         TrialStream& rng, long horizon) {
  return sample_hitting_time(ChainSampler(p, init), hole, rng, horizon);
}

std::vector<SurvivalEstimate> estimate_survival(const TransitionMatrixd& p,
                                                const Distributiond& init, const Hole& hole,
                                                const std::vector<long>& ns,
                                                const SimConfig& cfg) {
  if (cfg.trials < 1) throw ValidationError("trials must be positive");
  if (cfg.horizon < 1) throw ValidationError("horizon must be positive");
  for (long n : ns) {
    if (n < 0) throw ValidationError("requested step must be nonnegative");
    if (n >= cfg.horizon) {
      throw HorizonTooSmall("requested step " + std::to_string(n) + " is not below horizon " +
                            std::to_string(cfg.horizon));
    }
  }
  const ChainSampler sampler(p, init);
  // hits[t] = number of trials with T == t; index horizon + 1 holds censored trials.
  const auto hits = parallel_tally(
      cfg.trials, static_cast<std::size_t>(cfg.horizon) + 2, resolve_threads(cfg.threads),
      [&](long first, long last, std::vector<long>& tally) {
        for (long trial = first; trial < last; ++trial) {
          TrialStream rng(cfg.seed, static_cast<std::uint64_t>(trial));
          ++tally[static_cast<std::size_t>(sample_hitting_time(sampler, hole, rng, cfg.horizon))];
        }
      });

  std::vector<SurvivalEstimate> out;
  for (long n : ns) {
    long hit_by_n = 0;
    for (long t = 0; t <= n; ++t) hit_by_n += hits[static_cast<std::size_t>(t)];
    SurvivalEstimate est;
    est.n = n;
    est.trials = cfg.trials;
    est.p_hat = static_cast<double>(cfg.trials - hit_by_n) / static_cast<double>(cfg.trials);
    est.ci_half_width = 1.96 * est.standard_error();
    out.push_back(est);
  }
  return out;
}

TvEstimate estimate_tv(const TransitionMatrixd& p, const Distributiond& start, long n,
                       const SimConfig& cfg) {
  if (cfg.trials < 1) throw ValidationError("trials must be positive");
  if (n < 0) throw ValidationError("step must be nonnegative");
  const auto pi = stationary(p).pi;
  const ChainSampler sampler(p, start);
  const auto counts = parallel_tally(
      cfg.trials, static_cast<std::size_t>(p.size()), resolve_threads(cfg.threads),
      [&](long first, long last, std::vector<long>& tally) {
        for (long trial = first; trial < last; ++trial) {
          TrialStream rng(cfg.seed, static_cast<std::uint64_t>(trial));
          Index x = sampler.draw_initial(rng);
          for (long t = 0; t < n; ++t) x = sampler.step(x, rng);
          ++tally[static_cast<std::size_t>(x)];
        }
      });
  TvEstimate est;
  est.n = n;
  est.trials = cfg.trials;
  const double trials = static_cast<double>(cfg.trials);
  for (Index i = 0; i < p.size(); ++i) {
    est.value += std::abs(static_cast<double>(counts[static_cast<std::size_t>(i)]) / trials - pi(i));
  }
  est.noise_floor = std::sqrt(static_cast<double>(p.size()) / trials);
  return est;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MARKOV_RANK_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace markov_rank
