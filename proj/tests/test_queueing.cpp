#include <gtest/gtest.h>

#include <cmath>

#include "femtonet/harness.hpp"
#include "femtonet/queueing.hpp"

using namespace femtonet;

namespace {

// Stationary vector of a CTMC from its full generator: replace one balance equation
// by the normalisation and solve by Gaussian elimination with partial pivoting.
std::vector<double> dense_stationary(std::vector<std::vector<double>> Q) {
  std::size_t n = Q.size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) A[r][c] = Q[c][r];
  for (std::size_t c = 0; c < n; ++c) A[n - 1][c] = 1.0;
  A[n - 1][n] = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(A[r][k]) > std::abs(A[piv][k])) piv = r;
    std::swap(A[k], A[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == k || A[r][k] == 0.0) continue;
      double f = A[r][k] / A[k][k];
      for (std::size_t c = k; c <= n; ++c) A[r][c] -= f * A[k][c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = A[k][n] / A[k][k];
  return x;
}

// Generator of the multicast cell built straight from its parameters.
std::vector<double> dense_multicast(const MulticastQueueParams &p) {
  int lo = p.M, hi = p.N + p.S, n = hi - lo + 1;
  std::vector<std::vector<double>> Q(n, std::vector<double>(n, 0.0));
  for (int i = lo; i <= hi; ++i) {
    double up = 0.0;
    if (i < p.N + p.L) up += p.lambda_voice + p.lambda_unicast;
    if (i < p.N + p.L_back) up += p.lambda_back;
    if (i < p.N + p.S) up += p.lambda_h;
    if (i < hi) Q[i - lo][i - lo + 1] = up;
    if (i > lo) Q[i - lo][i - lo - 1] = (i - p.M) * p.mu;
  }
  for (int r = 0; r < n; ++r) {
    double s = 0.0;
    for (int c = 0; c < n; ++c) s += Q[r][c];
    Q[r][r] = -s;
  }
  return dense_stationary(Q);
}

std::vector<double> dense_chain(const ChainModel &m) {
  int n = m.size();
  std::vector<std::vector<double>> Q(n, std::vector<double>(n, 0.0));
  for (int i = m.lo; i <= m.hi; ++i) {
    double up = 0.0;
    for (const auto &s : m.streams)
      if (i < s.limit) up += s.rate;
    if (i < m.hi) Q[i - m.lo][i - m.lo + 1] = up;
    if (i > m.lo) Q[i - m.lo][i - m.lo - 1] = m.departure[i - m.lo];
    Q[i - m.lo][i - m.lo] = -(i < m.hi ? up : 0.0) - (i > m.lo ? m.departure[i - m.lo] : 0.0);
  }
  return dense_stationary(Q);
}

double tail(const std::vector<double> &p, int lo, int from) {
  double t = 0.0;
  for (int i = std::max(from, lo); i < lo + static_cast<int>(p.size()); ++i) t += p[i - lo];
  return t;
}

TwoTierParams table51(int n) { return preset("table-5.1").two_tier.params(n); }

} // namespace

TEST(Queueing, ErlangTwoServersOneErlang) {
  ChainModel m;
  m.hi = 2;
  m.departure = {0.0, 1.0, 2.0};
  m.streams = {{1.0, false, 2}};
  auto s = solve_chain(m);
  EXPECT_NEAR(s.p_block, 0.2, 1e-12);
  EXPECT_NEAR(erlang_b(2, 1.0), 0.2, 1e-12);
  double sum = 0.0;
  for (double x : s.p) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Queueing, ErlangRecursionMatchesDirectFormula) {
  for (int n : {1, 3, 10, 40})
    for (double a : {0.5, 5.0, 30.0}) {
      double num = 1.0, den = 1.0, term = 1.0;
      for (int k = 1; k <= n; ++k) {
        term *= a / k;
        den += term;
      }
      num = term;
      EXPECT_NEAR(erlang_b(n, a), num / den, 1e-12) << n << " " << a;
    }
}

TEST(Queueing, StationaryMatchesDenseSolveOnRandomChains) {
  Rng rng = make_rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    ChainModel m;
    m.lo = static_cast<int>(uniform_index(rng, 5));
    m.hi = m.lo + 1 + static_cast<int>(uniform_index(rng, 30));
    for (int i = m.lo; i <= m.hi; ++i) m.departure.push_back(i == m.lo ? 0.0 : 0.1 + 3.0 * uniform01(rng));
    int k = 1 + static_cast<int>(uniform_index(rng, 3));
    for (int j = 0; j < k; ++j) m.streams.push_back({5.0 * uniform01(rng), j == k - 1, m.lo + 1 + static_cast<int>(uniform_index(rng, m.hi - m.lo))});
    auto p = stationary(m);
    auto q = dense_chain(m);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      ASSERT_NEAR(p[i], q[i], 1e-9);
      sum += p[i];
    }
    ASSERT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Queueing, ChainValidation) {
  ChainModel m;
  m.hi = 2;
  m.departure = {0.0, 1.0};
  EXPECT_THROW(stationary(m), InvalidArgument);
  m.departure = {0.0, 0.0, 1.0};
  EXPECT_THROW(stationary(m), InvalidArgument);
}

TEST(Queueing, HandoverProbabilities) {
  TwoTierParams p;
  p.dwell_m_s = p.mean_call_s;
  EXPECT_NEAR(handover_probabilities(p).mm, 0.5, 1e-12);
  auto h = handover_probabilities(table51(1000));
  EXPECT_NEAR(h.fm, 0.225, 1e-12);
  auto z = handover_probabilities(table51(0));
  EXPECT_EQ(z.mf, 0.0);
  EXPECT_EQ(z.ff, 0.0);
}

TEST(Queueing, FemtoChainSingleSlot) {
  TwoTierParams p = table51(1);
  p.K = 1;
  double mu_f = p.eta_f() + p.mu();
  auto s = solve_chain(femto_chain(p, mu_f));
  EXPECT_NEAR(s.p_block, 0.5, 1e-12);
  EXPECT_NEAR(s.p_drop, 0.5, 1e-12);
}

TEST(Queueing, NoFemtocellsReducesToErlangB) {
  TwoTierParams p = table51(0);
  p.S = 0;
  auto sol = solve_two_tier(p);
  double mu_m = p.eta_m() + p.mu();
  EXPECT_NEAR(sol.macro.p_block, erlang_b(p.N, (p.lam_o_m + sol.lambda_h_m) / mu_m), 1e-9);
  EXPECT_NEAR(sol.macro.p_drop, sol.macro.p_block, 1e-12);
  EXPECT_EQ(sol.rates.mf, 0.0);
}

TEST(Queueing, TwoTierGivesHandoverPriority) {
  auto sol = solve_two_tier(table51(1000));
  EXPECT_LT(sol.macro.p_drop, sol.macro.p_block);
  EXPECT_LE(sol.iterations, 10000);
  EXPECT_LT(sol.residual, 1e-8);
}

TEST(Queueing, TwoTierRejectsBadInput) {
  TwoTierParams p = table51(10);
  p.r_f = 2000.0;
  EXPECT_THROW(solve_two_tier(p), InvalidArgument);
  p = table51(0);
  p.lam_o_f = 1.0;
  EXPECT_THROW(solve_two_tier(p), InvalidArgument);
}

TEST(Queueing, TwoTierNonConvergenceReportsHistory) {
  FixedPointOptions opt;
  opt.max_iterations = 1;
  opt.tolerance = 0.0;
  try {
    solve_two_tier(table51(500), opt);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence &e) {
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(Queueing, MacroDimensions) {
  auto d = macro_dimensions(6000, 64, 56, 28, 0.5);
  EXPECT_EQ(d.N, 100);
  EXPECT_EQ(d.S, 30);
  EXPECT_THROW(macro_dimensions(0, 64, 56, 28, 0.5), InvalidArgument);
}

TEST(Queueing, AdaptiveDimensions) {
  AdaptiveQueueParams p;
  EXPECT_EQ(adaptive_dimensions(p, AdaptiveScheme::proposed).N, 84);
  auto d = adaptive_dimensions(p, AdaptiveScheme::proposed);
  EXPECT_EQ(d.S, 45);
  EXPECT_EQ(d.L, 22);
  auto np = adaptive_dimensions(p, AdaptiveScheme::non_prioritized);
  EXPECT_EQ(np.L, np.S);
  EXPECT_EQ(adaptive_dimensions(p, AdaptiveScheme::aqos).L, 0);
  auto g = adaptive_dimensions(p, AdaptiveScheme::guard);
  EXPECT_EQ(g.S, 0);
  EXPECT_EQ(g.G, std::lround(0.05 * 84));
  EXPECT_EQ(adaptive_dimensions(p, AdaptiveScheme::hard_qos).G, 0);
}

TEST(Queueing, AdaptiveSingleClassIsErlang) {
  AdaptiveQueueParams p;
  p.classes = {{1, TrafficKind::real_time, 1, 0, 0, 1.0, 1.0}};
  p.capacity_kbps = 2;
  p.dwell_s = 1e12;
  p.lambda_new = 0.5;
  auto s = solve_chain(adaptive_chain(p, AdaptiveScheme::hard_qos, 0.5));
  EXPECT_NEAR(s.p_block, 0.2, 1e-9);
  EXPECT_NEAR(s.p_drop, 0.2, 1e-9);
}

TEST(Queueing, AdaptiveHandoverProbabilityAndLightLoad) {
  AdaptiveQueueParams p;
  p.classes = {{1, TrafficKind::real_time, 25, 0, 0, 1.0, 120}};
  p.dwell_s = 120;
  EXPECT_NEAR(adaptive_handover_probability(p), 0.5, 1e-12);
  p.lambda_new = 1e-4;
  auto s = solve_adaptive(p, AdaptiveScheme::hard_qos);
  EXPECT_NEAR(s.handover_rate, p.lambda_new, 1e-9);
}

TEST(Queueing, AdaptiveSchemeRelations) {
  for (double load : {0.3, 0.8, 1.0}) {
    AdaptiveQueueParams p = preset("table-6.1").cac.params(load);
    auto np = solve_adaptive(p, AdaptiveScheme::non_prioritized);
    EXPECT_NEAR(np.p_block, np.p_drop, 1e-12) << load;
    auto aq = solve_adaptive(p, AdaptiveScheme::aqos);
    auto pr = solve_adaptive(p, AdaptiveScheme::proposed);
    EXPECT_LE(pr.p_drop, pr.p_block) << load;
    EXPECT_LE(aq.p_drop, pr.p_drop + 1e-12) << load;
    auto hq = solve_adaptive(p, AdaptiveScheme::hard_qos);
    EXPECT_GE(hq.p_drop, pr.p_drop) << load;
    // Chain probabilities against the dense solve at the converged handover rate.
    auto m = adaptive_chain(p, AdaptiveScheme::proposed, pr.handover_rate);
    auto q = dense_chain(m);
    for (int i = 0; i < m.size(); ++i) ASSERT_NEAR(pr.p[i], q[i], 1e-9);
  }
}

TEST(Queueing, AdaptiveDurationGrowsOnlyAboveN) {
  AdaptiveQueueParams p;
  auto d = adaptive_dimensions(p, AdaptiveScheme::proposed);
  double full = p.full_duration();
  EXPECT_DOUBLE_EQ(adaptive_duration_at(p, d.N, d.N), full);
  double prev = full;
  for (int i = d.N + 1; i <= d.N + d.S; ++i) {
    double t = adaptive_duration_at(p, i, d.N);
    EXPECT_GE(t, prev - 1e-12) << i;
    prev = t;
  }
  EXPECT_GT(prev, full);
}

TEST(Queueing, MulticastEqualLimitsGiveEqualLosses) {
  MulticastQueueParams p;
  p.M = 3;
  p.N = 20;
  p.S = 5;
  p.L = 5;
  p.L_back = 5;
  p.lambda_voice = 0.05;
  p.lambda_unicast = 0.03;
  p.lambda_back = 0.02;
  p.lambda_h = 0.04;
  auto s = solve_multicast(p);
  EXPECT_NEAR(s.p_block, s.p_drop, 1e-15);
  EXPECT_NEAR(s.p_block_back, s.p_drop, 1e-15);
}

TEST(Queueing, MulticastIdleCellSitsAtSessionCount) {
  MulticastQueueParams p;
  p.M = 4;
  p.N = 10;
  p.S = 2;
  auto s = solve_multicast(p);
  EXPECT_NEAR(s.prob(p.M), 1.0, 1e-15);
  EXPECT_EQ(s.p_drop, 0.0);
}

TEST(Queueing, MulticastMatchesDenseSolveOnRandomInstances) {
  Rng rng = make_rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    MulticastQueueParams p;
    p.M = static_cast<int>(uniform_index(rng, 5));
    p.N = p.M + static_cast<int>(uniform_index(rng, 7));
    p.S = static_cast<int>(uniform_index(rng, 5));
    p.L = static_cast<int>(uniform_index(rng, p.S + 1));
    p.L_back = static_cast<int>(uniform_index(rng, p.S + 1));
    p.lambda_voice = uniform01(rng) * 0.1;
    p.lambda_unicast = uniform01(rng) * 0.1;
    p.lambda_back = uniform01(rng) * 0.1;
    p.lambda_h = uniform01(rng) * 0.1;
    if (p.N + p.S == p.M) continue;
    auto s = solve_multicast(p);
    auto q = dense_multicast(p);
    for (int i = p.M; i <= p.N + p.S; ++i) ASSERT_NEAR(s.prob(i), q[i - p.M], 1e-9);
    ASSERT_NEAR(s.p_block, tail(q, p.M, p.N + p.L), 1e-9);
    ASSERT_NEAR(s.p_drop, tail(q, p.M, p.N + p.S), 1e-9);
    ASSERT_NEAR(s.p_block_back, tail(q, p.M, p.N + p.L_back), 1e-9);
  }
}

TEST(Queueing, MulticastValidation) {
  MulticastQueueParams p;
  p.M = 5;
  p.N = 4;
  EXPECT_THROW(solve_multicast(p), InvalidArgument);
  p.N = 10;
  p.L = 3;
  p.S = 2;
  EXPECT_THROW(solve_multicast(p), InvalidArgument);
}

TEST(Queueing, MulticastFixedPointBalancesHandoverRate) {
  MulticastQueueParams p;
  p.M = 2;
  p.N = 30;
  p.S = 8;
  p.L = 2;
  p.lambda_voice = 0.1;
  p.lambda_unicast = 0.05;
  p.lambda_back = 0.05;
  auto s = solve_multicast_fixed(p, 540.0);
  double eta = 1.0 / 540.0, ph = eta / (eta + p.mu);
  double admitted = 0.15 * (1 - s.p_block) + 0.05 * (1 - s.p_block_back);
  EXPECT_NEAR(s.handover_rate, ph * admitted / (1 - ph * (1 - s.p_drop)), 1e-7);
  EXPECT_LT(s.p_drop, s.p_block);
}

TEST(Queueing, DesMatchesErlang) {
  ChainModel m;
  m.hi = 5;
  for (int i = 0; i <= 5; ++i) m.departure.push_back(i * 1.0);
  m.streams = {{3.0, false, 5}};
  DesOptions o;
  o.max_calls = 200000;
  o.seed = 3;
  auto r = simulate_des(m, o);
  EXPECT_EQ(r.calls, 200000);
  EXPECT_TRUE(r.stream_loss[0].contains(erlang_b(5, 3.0))) << r.stream_loss[0].value;
}

TEST(Queueing, DesZeroArrivals) {
  ChainModel m;
  m.hi = 3;
  m.departure = {0.0, 1.0, 2.0, 3.0};
  m.streams = {{0.0, false, 3}};
  DesOptions o;
  o.horizon_s = 1000.0;
  o.max_calls = 0;
  auto r = simulate_des(m, o);
  EXPECT_EQ(r.calls, 0);
  EXPECT_EQ(r.stream_loss[0].value, 0.0);
  EXPECT_EQ(r.utilization.value, 0.0);
}

TEST(Queueing, DesDeterministicPerSeed) {
  ChainModel m;
  m.hi = 4;
  for (int i = 0; i <= 4; ++i) m.departure.push_back(i * 0.5);
  m.streams = {{1.0, false, 3}, {0.5, true, 4}};
  DesOptions o;
  o.max_calls = 20000;
  auto a = simulate_des(m, o), b = simulate_des(m, o);
  EXPECT_EQ(a.stream_loss[1].value, b.stream_loss[1].value);
  o.max_calls = 0;
  EXPECT_THROW(simulate_des(m, o), InvalidArgument);
}
