#include <doctest.h>

#include <cstdlib>

#include "oracles.hpp"

using namespace markov_rank;

TEST_CASE("hitting time is zero when starting in the hole") {
  const auto p = fixtures::example1();
  TrialStream rng(1, 0);
  CHECK(sample_hitting_time(p, Distributiond::point(3, 0), Hole({0}, 3), rng, 50) == 0);
}

TEST_CASE("swap chain hits the other state in one step") {
  Matrix<double> m(2, 2);
  m << 0, 1, 1, 0;
  const TransitionMatrixd p(m);
  for (std::uint64_t t = 0; t < 20; ++t) {
    TrialStream rng(7, t);
    CHECK(sample_hitting_time(p, Distributiond::point(2, 0), Hole({1}, 2), rng, 10) == 1);
  }
}

TEST_CASE("hitting time is censored at the horizon") {
  Matrix<double> m(2, 2);
  m << 0.999999, 0.000001, 0.5, 0.5;
  const TransitionMatrixd p(m);
  TrialStream rng(3, 0);
  CHECK(sample_hitting_time(p, Distributiond::point(2, 0), Hole({1}, 2), rng, 5) == 6);
}

TEST_CASE("trial streams are fixed functions of seed and trial") {
  TrialStream a(42, 9), b(42, 9), c(42, 10);
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  TrialStream d(1, 1);
  for (int k = 0; k < 1000; ++k) {
    const double u = d.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("single trial gives zero or one") {
  SimConfig cfg{1, 5, 100, 1};
  const auto est = estimate_survival(fixtures::example1(), Distributiond::uniform(3), Hole({0}, 3),
                                     {0, 1, 2, 3}, cfg);
  for (const auto& e : est) CHECK((e.p_hat == 0.0 || e.p_hat == 1.0));
  CHECK(est[0].standard_error() > 0.0);
}

TEST_CASE("estimates are nonincreasing in n") {
  SimConfig cfg{20000, 11, 100, 0};
  std::vector<long> ns(31);
  for (long n = 0; n <= 30; ++n) ns[static_cast<std::size_t>(n)] = n;
  const auto est = estimate_survival(fixtures::example2(), Distributiond::uniform(3), Hole({2}, 3), ns, cfg);
  for (std::size_t i = 1; i < est.size(); ++i) CHECK(est[i].p_hat <= est[i - 1].p_hat);
}

TEST_CASE("estimate at n = 8 on the second example") {
  SimConfig cfg{100000, 2024, 50, 0};
  const auto p = fixtures::example2();
  const auto est = estimate_survival(p, Distributiond::uniform(3), Hole({2}, 3), {8}, cfg);
  const auto exact = oracle::survival(oracle::to_mat(p.entries()), {2}, oracle::Vec(3, 1.0 / 3), 8);
  CHECK(std::abs(est[0].p_hat - exact[8]) <= 4 * est[0].standard_error());
}

TEST_CASE("requested steps must lie below the horizon") {
  SimConfig cfg{100, 1, 10, 1};
  CHECK_THROWS_AS(estimate_survival(fixtures::example1(), Distributiond::uniform(3), Hole({0}, 3), {10}, cfg),
                  HorizonTooSmall);
  CHECK_NOTHROW(estimate_survival(fixtures::example1(), Distributiond::uniform(3), Hole({0}, 3), {9}, cfg));
}

TEST_CASE("censoring does not bias survival below the horizon") {
  // A chain that rarely reaches the hole: most trials are censored, yet the
  // estimate at n < horizon must still match the exact survival.
  Matrix<double> m(3, 3);
  m << 0.98, 0.015, 0.005, 0.5, 0.49, 0.01, 0.3, 0.3, 0.4;
  const TransitionMatrixd p(m);
  SimConfig cfg{50000, 77, 40, 0};
  const std::vector<long> ns{0, 10, 20, 39};
  const auto est = estimate_survival(p, Distributiond::uniform(3), Hole({2}, 3), ns, cfg);
  const auto exact = oracle::survival(oracle::to_mat(m), {2}, oracle::Vec(3, 1.0 / 3), 39);
  for (const auto& e : est) {
    CHECK(std::abs(e.p_hat - exact[static_cast<std::size_t>(e.n)]) <= 4 * e.standard_error());
  }
}

TEST_CASE("results do not depend on the thread count") {
  const auto p = fixtures::example2();
  std::vector<long> ns{0, 1, 2, 5, 10, 20};
  SimConfig one{30000, 99, 100, 1};
  SimConfig many{30000, 99, 100, 8};
  const auto a = estimate_survival(p, Distributiond::uniform(3), Hole({0}, 3), ns, one);
  const auto b = estimate_survival(p, Distributiond::uniform(3), Hole({0}, 3), ns, many);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].p_hat == b[i].p_hat);
  const auto ta = estimate_tv(p, Distributiond::point(3, 1), 4, one);
  const auto tb = estimate_tv(p, Distributiond::point(3, 1), 4, many);
  CHECK(ta.value == tb.value);
}

TEST_CASE("thread count resolution") {
  CHECK(resolve_threads(3) == 3);
  ::setenv("MARKOV_RANK_THREADS", "2", 1);
  CHECK(resolve_threads(0) == 2);
  ::unsetenv("MARKOV_RANK_THREADS");
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("monte carlo agrees with exact survival on random configurations") {
  std::mt19937_64 rng(101);
  int inside = 0, total = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto cfg = fixtures::random_config(rng);
    const Hole hole = Hole::single(cfg.hole, cfg.p.size());
    const long n = 1 + trial % 10;
    SimConfig sim{4000, static_cast<std::uint64_t>(trial), 20, 0};
    const auto est = estimate_survival(cfg.p, cfg.init, hole, {n}, sim);
    const auto exact = survival_curve(cfg.p, hole, cfg.init, n).values.back();
    ++total;
    if (std::abs(est[0].p_hat - exact) <= 4 * est[0].standard_error()) ++inside;
  }
  CHECK(inside >= 0.99 * total);
}

TEST_CASE("empirical distance to stationarity shrinks to the noise floor") {
  const auto p = fixtures::example3();
  SimConfig cfg{100000, 3, 10, 0};
  const auto est = estimate_tv(p, Distributiond::point(3, 2), 5, cfg);
  CHECK(std::abs(est.value - std::pow(0.75, 5)) <= 4 * std::sqrt(3.0 / cfg.trials));
  CHECK(est.noise_floor == doctest::Approx(std::sqrt(3.0 / cfg.trials)));
}
