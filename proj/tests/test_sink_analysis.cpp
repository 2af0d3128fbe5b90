#include <doctest.h>

#include <numeric>

#include "oracles.hpp"

using namespace markov_rank;

TEST_CASE("survival through a rank-one punched matrix") {
  const auto p = fixtures::example1();
  const Hole hole({0}, 3);
  const auto uniform = survival_curve(p, hole, Distributiond::uniform(3), 30);
  REQUIRE(uniform.values.size() == 31);
  for (long n = 0; n <= 30; ++n) {
    CHECK(uniform.values[static_cast<std::size_t>(n)] == doctest::Approx(std::pow(2.0 / 3, n + 1)).epsilon(1e-13));
  }
  const auto from_qsd = survival_curve(p, hole, fixtures::dist({0.0, 5.0 / 8, 3.0 / 8}), 30);
  for (long n = 0; n <= 30; ++n) {
    CHECK(from_qsd.values[static_cast<std::size_t>(n)] == doctest::Approx(std::pow(2.0 / 3, n)).epsilon(1e-13));
  }
  const auto env = envelope(p, hole, Distributiond::uniform(3));
  CHECK(env.c1 == doctest::Approx(2.0 / 3).epsilon(1e-13));
  CHECK(env.c2 == doctest::Approx(2.0 / 3).epsilon(1e-13));
}

TEST_CASE("survival agrees with the kill-and-evolve oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto cfg = fixtures::random_config(rng);
    const auto curve = survival_curve(cfg.p, Hole::single(cfg.hole, cfg.p.size()), cfg.init, 60);
    oracle::Vec x(cfg.init.weights().data(), cfg.init.weights().data() + cfg.init.size());
    const auto want = oracle::survival(oracle::to_mat(cfg.p.entries()), {static_cast<std::size_t>(cfg.hole)}, x, 60);
    for (std::size_t n = 0; n < curve.values.size(); ++n) {
      CHECK(std::abs(curve.values[n] - want[n]) <= 1e-13 * std::max(1.0, want[n]) + 1e-300);
    }
  }
}

TEST_CASE("survival from the hole is degenerate") {
  CHECK_THROWS_AS(survival_curve(fixtures::example1(), Hole({0}, 3), Distributiond::point(3, 0), 5),
                  DegenerateInit);
}

TEST_CASE("envelope brackets the survival curve") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cfg = fixtures::random_config(rng);
    const Hole hole = Hole::single(cfg.hole, cfg.p.size());
    const auto env = envelope(cfg.p, hole, cfg.init);
    const auto curve = survival_curve(cfg.p, hole, cfg.init, 100);
    for (std::size_t n = 0; n < curve.values.size(); ++n) {
      const double m = curve.values[n];
      CHECK(env.lower(static_cast<long>(n)) <= m + 1e-10);
      CHECK(m <= env.upper(static_cast<long>(n)) + 1e-10);
    }
  }
}

TEST_CASE("envelope needs an irreducible punched matrix") {
  // Removing state 2 of 1 <-> 2 <-> 3 disconnects 1 from 3.
  Matrix<double> m(3, 3);
  m << 0.5, 0.5, 0, 0.25, 0.5, 0.25, 0, 0.5, 0.5;
  CHECK_THROWS_AS(envelope(TransitionMatrixd(m), Hole({1}, 3), Distributiond::uniform(3)),
                  ReducibleAfterRemoval);
  const auto ranking = rank_sinks(TransitionMatrixd(m));
  CHECK(ranking.warnings == std::vector<Index>{1});
}

TEST_CASE("sink ranking of the worked examples") {
  CHECK(rank_sinks(fixtures::example1()).sigma == std::vector<Index>{2, 0, 1});
  const auto r2 = rank_sinks(fixtures::example2());
  CHECK(r2.sigma == std::vector<Index>{2, 0, 1});
  CHECK(r2.ties.size() == 3);
  // The best sink in the second example is not the heaviest state.
  const auto pi = stationary(fixtures::example2()).pi;
  CHECK(pi(0) > pi(2));
}

TEST_CASE("symmetric chain ties every state") {
  Matrix<double> m(3, 3);
  m << 0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0;
  const auto ranking = rank_sinks(TransitionMatrixd(m));
  REQUIRE(ranking.ties.size() == 1);
  CHECK(ranking.ties[0].size() == 3);
}

TEST_CASE("sink ranking is equivariant under relabeling") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cfg = fixtures::random_config(rng, 4, 6, 0.0);
    const Index n = cfg.p.size();
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix<double> pm(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) pm(perm[i], perm[j]) = cfg.p(i, j);
    }
    const auto a = rank_sinks(cfg.p);
    const auto b = rank_sinks(TransitionMatrixd(pm));
    for (Index i = 0; i < n; ++i) {
      CHECK(std::abs(a.records[i].mu - b.records[perm[i]].mu) < 1e-11);
    }
    REQUIRE(a.ties.size() == b.ties.size());
    for (std::size_t g = 0; g < a.ties.size(); ++g) {
      std::vector<Index> mapped;
      for (Index s : a.ties[g]) mapped.push_back(perm[s]);
      std::sort(mapped.begin(), mapped.end());
      auto other = b.ties[g];
      std::sort(other.begin(), other.end());
      CHECK(mapped == other);
    }
  }
}

TEST_CASE("crossing requires separated rates") {
  const auto p = fixtures::example1();
  const auto u = Distributiond::uniform(3);
  CHECK_THROWS_AS(crossing_time(p, Hole({0}, 3), Hole({0}, 3), u, u), RatesNotSeparated);
  CHECK_THROWS_AS(crossing_time(p, Hole({1}, 3), Hole({2}, 3), u, u), RatesNotSeparated);

  Matrix<double> sym(3, 3);
  sym << 0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0;
  CHECK_THROWS_AS(crossing_time(TransitionMatrixd(sym), Hole({0}, 3), Hole({1}, 3), u, u),
                  RatesNotSeparated);
  CHECK_THROWS_AS(crossing_time(p, Hole({2}, 3), Hole({1}, 3), Distributiond::point(3, 2), u),
                  DegenerateInit);
}

TEST_CASE("crossing certificate on the first example") {
  const auto p = fixtures::example1();
  const auto cert = crossing_time(p, Hole({2}, 3), Hole({1}, 3), Distributiond::uniform(3),
                                  Distributiond::uniform(3));
  CHECK(cert.n0_empirical <= cert.n_star_certified);
  const auto pm = oracle::to_mat(p.entries());
  const oracle::Vec u(3, 1.0 / 3);
  const auto fast = oracle::survival(pm, {2}, u, cert.n_star_certified + 200);
  const auto slow = oracle::survival(pm, {1}, u, cert.n_star_certified + 200);
  for (long n = cert.n0_empirical; n <= cert.n_star_certified + 200; ++n) {
    CHECK(fast[static_cast<std::size_t>(n)] < slow[static_cast<std::size_t>(n)]);
  }
  // The certificate is the first n where the envelopes separate.
  const auto& f = cert.fast_envelope;
  const auto& s = cert.slow_envelope;
  CHECK(f.upper(cert.n_star_certified) < s.lower(cert.n_star_certified));
  if (cert.n_star_certified > 0) {
    CHECK(f.upper(cert.n_star_certified - 1) >= s.lower(cert.n_star_certified - 1));
  }
}

TEST_CASE("crossing with a nilpotent fast hole") {
  // Removing state 1 leaves only 2 -> 3, which is nilpotent.
  Matrix<double> m(3, 3);
  m << 0.2, 0.4, 0.4, 0, 0, 1, 1, 0, 0;
  const TransitionMatrixd p(m);
  const auto u = Distributiond::uniform(3);
  const auto cert = crossing_time(p, Hole({0}, 3), Hole({1}, 3), u, u);
  CHECK(std::isinf(cert.fast_envelope.lambda));
  CHECK(cert.n_star_certified == 2);
}
