// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "markov_rank/cli.hpp"
#include "oracles.hpp"

using namespace markov_rank;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

Check example1() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  const auto p = fixtures::example1();
  const auto ranking = rank_sinks(p);
  const auto pi = stationary(p).pi;
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double mu[] = {2.0 / 3, (7 + std::sqrt(97.0)) / 24, (9 + std::sqrt(33.0)) / 24};
  for (std::size_t k = 0; k < 3; ++k) c.require(near(ranking.records[k].mu, mu[k], 1e-9), "escape rate");
  c.require(ranking.sigma == std::vector<Index>{2, 0, 1}, "sink order");
  for (Index i = 0; i < 3; ++i) c.require(near(pi(i), 1.0 / 3, 1e-10), "stationary");
  c.require(elapsed < 1.0, "runtime");
  return c;
}

Check example2() {
  Check c;
  const auto p = fixtures::example2();
  const auto ranking = rank_sinks(p);
  const auto pi = stationary(p).pi;
  const double want_pi[] = {36.0 / 83, 14.0 / 83, 33.0 / 83};
  for (Index i = 0; i < 3; ++i) c.require(near(pi(i), want_pi[i], 1e-10), "stationary");
  const double mu[] = {(1 + std::sqrt(7.0)) / 6, (5 + std::sqrt(21.0)) / 12, (3 + std::sqrt(15.0)) / 12};
  for (std::size_t k = 0; k < 3; ++k) c.require(near(ranking.records[k].mu, mu[k], 1e-9), "escape rate");
  c.require(ranking.records[2].lambda > ranking.records[0].lambda && pi(0) > pi(2),
            "state 3 should escape faster than state 1 while pi_1 > pi_3");
  return c;
}

Check example3() {
  Check c;
  const auto p = fixtures::example3();
  const auto es = eigen_structure(p);
  c.require(near(es.eigenvalues[0].real(), 0.75, 1e-9) && near(es.eigenvalues[1].real(), -3.0 / 16, 1e-9) &&
                near(es.eigenvalues[2].real(), 1.0, 1e-9),
            "eigenvalues");
  const auto ranking = rank_sources(es);
  const double q[] = {11.0 / 15, 17.0 / 15, 1.0};
  c.require(!ranking.degenerate, "degenerate ranking");
  for (std::size_t i = 0; i < 3 && !ranking.degenerate; ++i) c.require(near(ranking.q[i], q[i], 1e-8), "q");
  c.require(ranking.sigma == std::vector<Index>{0, 2, 1}, "source order");
  const auto e = [](Index i) { return Distributiond::point(3, i); };
  c.require(compare_convergence(es, e(0), e(1)).verdict == Verdict::Faster, "e1 vs e2");
  c.require(compare_convergence(es, e(0), e(2)).verdict == Verdict::Faster, "e1 vs e3");
  c.require(compare_convergence(es, e(2), e(1)).verdict == Verdict::Faster, "e3 vs e2");

  RowVector<double> w1(3), w2(3);
  w1 << -1.0 / 6, -1.0 / 3, 1.0 / 2;
  w2 << -16.0 / 3, 13.0 / 3, 1.0;
  const double a[] = {-11.0 / 15, -17.0 / 15, 1.0};
  const double b[] = {-2.0 / 15, 1.0 / 15, 0.0};
  for (Index i = 0; i < 3; ++i) {
    const RowVector<double> ei = RowVector<double>::Unit(3, i);
    const RowVector<double> p34 = project(es, ei, ProjectionKeyd{0.75, 1});
    const RowVector<double> p316 = project(es, ei, ProjectionKeyd{3.0 / 16, 1});
    c.require((p34 - a[i] * w1).cwiseAbs().maxCoeff() < 1e-9, "projection on 3/4");
    c.require((p316 - b[i] * w2).cwiseAbs().maxCoeff() < 1e-9, "projection on -3/16");
    c.require((es.pi + p34 + p316 - ei).cwiseAbs().maxCoeff() < 1e-9, "reconstruction");
  }
  return c;
}

Check envelopes() {
  Check c;
  std::mt19937_64 rng(1001);
  long violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cfg = fixtures::random_config(rng, 3, 5);
    const Hole hole = Hole::single(cfg.hole, cfg.p.size());
    const auto env = envelope(cfg.p, hole, cfg.init);
    oracle::Vec x(cfg.init.weights().data(), cfg.init.weights().data() + cfg.init.size());
    const auto m = oracle::survival(oracle::to_mat(cfg.p.entries()), {static_cast<std::size_t>(cfg.hole)}, x, 100);
    for (long n = 0; n <= 100; ++n) {
      const double v = m[static_cast<std::size_t>(n)];
      if (env.lower(n) > v + 1e-10 || v > env.upper(n) + 1e-10) ++violations;
    }
  }
  c.require(violations == 0, std::to_string(violations) + " violations");
  return c;
}

Check crossings() {
  Check c;
  std::mt19937_64 rng(2002);
  int configs = 0;
  while (configs < 200) {
    const auto cfg = fixtures::random_config(rng, 3, 5);
    const Index n = cfg.p.size();
    const auto pm = oracle::to_mat(cfg.p.entries());
    std::uniform_int_distribution<Index> pick(0, n - 1);
    const Index a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (!oracle::irreducible(oracle::punch(pm, {static_cast<std::size_t>(a)})) ||
        !oracle::irreducible(oracle::punch(pm, {static_cast<std::size_t>(b)}))) {
      continue;
    }
    const double la = escape_rate(cfg.p, Hole::single(a, n)).lambda;
    const double lb = escape_rate(cfg.p, Hole::single(b, n)).lambda;
    if (std::abs(la - lb) <= 0.01) continue;
    const Index fast = la > lb ? a : b, slow = la > lb ? b : a;
    const auto pf = fixtures::dist(oracle::random_distribution(rng, static_cast<std::size_t>(n)));
    const auto ps = fixtures::dist(oracle::random_distribution(rng, static_cast<std::size_t>(n)));
    const auto cert = crossing_time(cfg.p, Hole::single(fast, n), Hole::single(slow, n), pf, ps);
    ++configs;

    const long last = cert.n_star_certified + 10;
    oracle::Vec xf(pf.weights().data(), pf.weights().data() + n);
    oracle::Vec xs(ps.weights().data(), ps.weights().data() + n);
    const auto lf = oracle::log_survival(pm, {static_cast<std::size_t>(fast)}, xf, last);
    const auto ls = oracle::log_survival(pm, {static_cast<std::size_t>(slow)}, xs, last);
    for (long k = cert.n0_empirical; k <= last; ++k) {
      if (!(lf[static_cast<std::size_t>(k)] < ls[static_cast<std::size_t>(k)])) {
        c.require(false, "fast curve not below slow at n=" + std::to_string(k));
        break;
      }
    }
  }
  return c;
}

Check monte_carlo() {
  Check c;
  const std::vector<long> ns{0, 1, 2, 5, 10, 20};
  SimConfig cfg{100000, 20240611, 50, 0};
  for (const auto& p : {fixtures::example1(), fixtures::example2()}) {
    for (Index k = 0; k < 3; ++k) {
      const Hole hole = Hole::single(k, 3);
      const auto est = estimate_survival(p, Distributiond::uniform(3), hole, ns, cfg);
      const auto exact = survival_curve(p, hole, Distributiond::uniform(3), 20).values;
      for (const auto& e : est) {
        c.require(std::abs(e.p_hat - exact[static_cast<std::size_t>(e.n)]) <= 4 * e.standard_error(),
                  "survival estimate outside 4 SE");
      }
    }
  }
  const auto tv = estimate_tv(fixtures::example3(), Distributiond::point(3, 2), 5, cfg);
  c.require(std::abs(tv.value - std::pow(0.75, 5)) <= 4 * std::sqrt(3.0 / cfg.trials), "empirical TV");
  return c;
}

Check norm_ordering() {
  Check c;
  const auto p = fixtures::example3();
  for (Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
    const auto c1 = tv_curve(p, Distributiond::point(3, 0), norm, 500).values;
    const auto c2 = tv_curve(p, Distributiond::point(3, 1), norm, 500).values;
    const auto c3 = tv_curve(p, Distributiond::point(3, 2), norm, 500).values;
    long last_bad = -1;
    for (long n = 0; n <= 500; ++n) {
      const auto i = static_cast<std::size_t>(n);
      if (!(c1[i] < c3[i] && c3[i] < c2[i])) last_bad = n;
    }
    c.require(last_bad + 1 <= 200, std::string("ordering fails late in ") + to_string(norm));
  }
  return c;
}

Check planted_chain() {
  Check c;
  std::mt19937_64 rng(3003);
  const auto p = fixtures::planted_jordan(rng);
  const auto es = eigen_structure(p);
  const ProjectionKeyd top{0.5, 2};
  const auto top_rows = es.rows_of(top);
  const auto bottom_rows = es.rows_of(ProjectionKeyd{0.5, 1});
  c.require(top_rows.size() == 1 && bottom_rows.size() == 1, "no chain of length 2 at 1/2");
  if (!c.ok) return c;

  // Start from the state with the largest chain-top coefficient and follow
  // the coefficient of the chain's eigenvector under n steps.
  Index start = 0;
  double best = -1;
  for (Index i = 0; i < es.size(); ++i) {
    const double t = std::abs(es.coefficients(RowVector<double>::Unit(es.size(), i))(top_rows[0]));
    if (t > best) best = t, start = i;
  }
  const double coeff = es.coefficients(RowVector<double>::Unit(es.size(), start))(top_rows[0]);
  RowVector<double> x = RowVector<double>::Unit(es.size(), start);
  for (long n = 0; n <= 60; ++n) {
    if (n >= 10) {
      const double empirical = std::abs(es.coefficients(x)(bottom_rows[0]));
      const double ratio = empirical / predicted_decay(es, top, coeff, n);
      c.require(ratio >= 0.1 && ratio <= 10.0, "decay ratio " + std::to_string(ratio) + " at n=" + std::to_string(n));
    }
    x = x * p.entries();
  }
  return c;
}

Check simulate_threads() {
  Check c;
  const auto path = std::filesystem::temp_directory_path() / "markov_rank_acceptance_ex2.json";
  std::ofstream(path) << R"({"rows": [["1/2","1/12","5/12"],["1/2","0","1/2"],["1/3","1/3","1/3"]]})";
  const auto run = [&](const std::string& threads) {
    std::ostringstream out, err;
    const int code = cli::run({"--input", path.string(), "simulate", "--hole", "1", "--steps", "20",
                               "--trials", "100000", "--seed", "7", "--threads", threads},
                              out, err);
    return std::make_pair(code, out.str());
  };
  const auto one = run("1");
  const auto eight = run("8");
  c.require(one.first == 0 && eight.first == 0, "simulate failed");
  c.require(one.second == eight.second, "outputs differ");
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"example 1: escape rates, sink order, uniform stationary law, runtime", example1},
      {"example 2: stationary law, escape rates, fast sink with small mass", example2},
      {"example 3: spectrum, projections, source order, comparator", example3},
      {"envelope bounds on 1000 random chains", envelopes},
      {"certified crossings on 200 random configurations", crossings},
      {"Monte Carlo survival and distance to stationarity", monte_carlo},
      {"example 3 curve ordering in L1, L2 and Linf", norm_ordering},
      {"planted Jordan chain and its decay", planted_chain},
      {"simulate output independent of thread count", simulate_threads},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check result;
    try {
      result = criteria[i].second();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %zu: %s%s%s\n", result.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                result.ok ? "" : " -- ", result.detail.c_str());
    failed += result.ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
