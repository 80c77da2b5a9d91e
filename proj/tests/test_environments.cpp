#include <doctest.h>

#include <cmath>
#include <map>

#include "mslab/agents.hpp"
#include "mslab/environments.hpp"
#include "mslab/simulation.hpp"

using namespace mslab;

TEST_CASE("stochastic contextual environment") {
  StochasticContextualEnv env({{0.2, 0.9}, {0.5, 0.1}}, {1.0, 3.0});
  Rng rng(1);
  int ones = 0;
  double loss = 0.0;
  const int n = 40000;
  for (int t = 0; t < n; ++t) {
    const auto x = env.next_context(rng);
    const int c = std::get<Categorical>(x).id;
    ones += c;
    loss += env.play(Arm{1}, rng).loss - env.mean_loss(x, Arm{1});
  }
  CHECK(std::abs(ones / double(n) - 0.75) <= 3.0 * std::sqrt(0.75 * 0.25 / n));
  CHECK(std::abs(loss / n) <= 0.01);
  CHECK_THROWS_AS(env.mean_loss(Categorical{2}, Arm{0}), OracleError);
  CHECK_THROWS_AS(env.mean_loss(PhaseCounter{1}, Arm{0}), OracleError);
  CHECK_THROWS(StochasticContextualEnv({{0.2, 1.5}}));
  CHECK_THROWS(StochasticContextualEnv({{0.2, 0.5}, {0.1}}));
}

TEST_CASE("s-switch mean losses") {
  CHECK(sswitch_mean(4, 3, 0.08, 1, 0, Arm{3}) == doctest::Approx(0.43));
  CHECK(sswitch_mean(4, 3, 0.08, 1, 0, Arm{0}) == doctest::Approx(0.42));
  CHECK(sswitch_mean(4, 3, 0.08, 1, 0, Arm{1}) == doctest::Approx(0.5));
  for (int a = 0; a < 4; ++a) CHECK(sswitch_mean(4, 3, 0.08, 4, 0, Arm{a}) == 0.0);
}

TEST_CASE("s-switch n_max and tuning") {
  CHECK(sswitch_n_max(4, 0.125) == 1);
  CHECK(sswitch_n_max(4, 0.1) == 2);
  CHECK(sswitch_n_max(3, 0.01) == static_cast<std::int64_t>(std::ceil(2.0 / (192.0 * 1e-4))));
  CHECK(sswitch_theorem_tuning(4, 4, 1000000, 1.0) == doctest::Approx(4.0 * std::sqrt(3.0) / 3072000.0));
  CHECK(sswitch_theorem_tuning(4, 4, 1000000, 1.0) == doctest::Approx(2.2553e-6).epsilon(1e-4));
  CHECK(sswitch_theorem_tuning(4, 4, 100, 1e-9) == doctest::Approx(1.0 / (8.0 * std::sqrt(3.0))));
  CHECK(sswitch_theorem_tuning(2, 5, 400, 1e6) == doctest::Approx(2.0 * 2.0 / (3072.0 * 1e6 * 20.0)));
}

TEST_CASE("s-switch scripted play") {
  SwitchAdversary env(4, 3, 0.1, std::vector<int>{0, 1, 2});
  REQUIRE(env.n_max() == 2);
  const std::vector<int> arms{3, 0, 3, 1, 2, 3, 3, 0, 0, 1, 1, 2, 3, 0, 1, 2, 3, 3, 0, 1};
  const std::vector<int> phase_after{1, 1, 1, 2, 2, 2, 2, 3, 3, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4};
  Rng rng(5);
  for (std::size_t t = 0; t < arms.size(); ++t) {
    const auto x = env.next_context(rng);
    const int before = t == 0 ? 1 : phase_after[t - 1];
    CHECK(std::get<PhaseCounter>(x).phase == before);
    env.play(Arm{arms[t]}, rng);
    CHECK(env.phase() == phase_after[t]);
  }
  CHECK(env.switches_completed() == 3);
  for (int a = 0; a < 4; ++a) CHECK(env.current_mean(Arm{a}) == 0.0);
}

TEST_CASE("s-switch: always playing the last arm never switches") {
  Rng setup(1), rng(2);
  SwitchAdversary env(4, 5, 0.1, setup);
  for (int t = 0; t < 5000; ++t) {
    env.next_context(rng);
    env.play(Arm{3}, rng);
  }
  CHECK(env.phase() == 1);
  CHECK(env.switches_completed() == 0);
}

TEST_CASE("s-switch empirical means and switch budget") {
  Rng setup(3), rng(4);
  SwitchAdversary env(4, 2, 0.2, setup);
  const int n = 100000;
  {
    // arm K never advances the phase
    double s = 0.0;
    for (int t = 0; t < n; ++t) s += env.play(Arm{3}, rng).loss;
    const double mu = env.current_mean(Arm{3});
    CHECK(std::abs(s / n - mu) <= 3.0 * std::sqrt(mu * (1 - mu) / n));
  }
  for (int t = 0; t < 1000; ++t) env.play(Arm{static_cast<int>(rng.uniform_index(4))}, rng);
  CHECK(env.switches_completed() <= 2);
  CHECK(env.phase() == 3);
  double s = 0.0;
  for (int t = 0; t < 1000; ++t) s += env.play(Arm{0}, rng).loss;
  CHECK(s == 0.0);
  CHECK_THROWS(SwitchAdversary(2, 1, 0.1, setup));
  CHECK_THROWS(SwitchAdversary(4, 1, 0.6, setup));
}

TEST_CASE("s-switch optimal arm mean matches samples") {
  // fresh adversaries, each played N_max - 1 times on its optimal arm
  Rng rng(6);
  double s = 0.0;
  std::int64_t n = 0;
  for (int rep = 0; rep < 700; ++rep) {
    SwitchAdversary env(4, 1, 0.01, std::vector<int>{1});
    for (std::int64_t t = 0; t + 1 < env.n_max(); ++t, ++n) s += env.play(Arm{1}, rng).loss;
    REQUIRE(env.phase() == 1);
  }
  const double mu = 0.5 - 0.01;
  CHECK(std::abs(s / n - mu) <= 3.0 * std::sqrt(mu * (1 - mu) / n));
}

TEST_CASE("oblivious switching environment") {
  Rng setup(8), rng(9);
  ObliviousSwitchEnv env(4, 4, 0.2, 100, setup);
  std::vector<int> phases;
  for (int t = 0; t < 100; ++t) phases.push_back(std::get<PhaseCounter>(env.next_context(rng)).phase);
  CHECK(phases[0] == 1);
  CHECK(phases[24] == 1);
  CHECK(phases[25] == 2);
  CHECK(phases[99] == 4);
  // consecutive optimal arms differ
  for (int p = 1; p < 4; ++p) {
    int a = -1, b = -1;
    for (int arm = 0; arm < 3; ++arm) {
      if (env.mean_loss(PhaseCounter{p}, Arm{arm}) < 0.5 - 0.9 * 0.2) a = arm;
      if (env.mean_loss(PhaseCounter{p + 1}, Arm{arm}) < 0.5 - 0.9 * 0.2) b = arm;
    }
    CHECK(a >= 0);
    CHECK(a != b);
  }
  CHECK(env.mean_loss(PhaseCounter{4}, Arm{3}) == doctest::Approx(0.5 - 0.175));
}

TEST_CASE("bijection examples") {
  const auto r = reconstruct_losses({1, 1, 1}, 1, 0.2);
  CHECK(r.losses[0] == 1.0);
  CHECK(r.losses[1] == 0.0);
  CHECK(r.losses[2] == doctest::Approx(0.45));
  CHECK(r.context.bits == std::vector<std::uint8_t>{1, 1, 1});

  const auto s = reconstruct_losses({1, 0}, 2, 0.2);
  CHECK(s.losses[1] == 1.0);
  CHECK(s.losses[0] == 0.0);
  CHECK(s.context.bits == std::vector<std::uint8_t>{2, 1});
  CHECK_THROWS(reconstruct_losses({1}, 3, 0.2));
}

TEST_CASE("bijection round trip") {
  Rng rng(12);
  for (int trial = 0; trial < 10000; ++trial) {
    const int k = 1 + static_cast<int>(rng.uniform_index(20));
    std::vector<std::uint8_t> z(static_cast<std::size_t>(k));
    for (auto& b : z) b = rng.bernoulli(0.5);
    const int x1 = rng.bernoulli(0.5) ? 2 : 1;
    const auto r = reconstruct_losses(z, x1, 0.3);
    REQUIRE(r.losses[0] + r.losses[1] == 1.0);
    REQUIRE(r.context.bits[0] == x1);
    REQUIRE(forward_z(r.losses, r.context) == z);
    for (int i = 0; i < k; ++i) REQUIRE(r.losses[r.context.bits[i] - 1U] == z[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("z sampling") {
  Rng rng(13);
  const int n = 100000, k = 5;
  std::vector<double> mean0(k, 0.0), mean2(k, 0.0);
  double cross = 0.0;
  for (int t = 0; t < n; ++t) {
    const auto a = sample_z(k, 0.25, 0, rng);
    const auto b = sample_z(k, 0.25, 2, rng);
    for (int i = 0; i < k; ++i) mean0[i] += a[i], mean2[i] += b[i];
    cross += (a[0] - 0.5) * (a[3] - 0.5);
  }
  const double sd = std::sqrt(0.25 / n);
  for (int i = 0; i < k; ++i) CHECK(std::abs(mean0[i] / n - 0.5) <= 3.0 * sd);
  CHECK(std::abs(mean2[1] / n - 0.375) <= 3.0 * std::sqrt(0.375 * 0.625 / n));
  CHECK(std::abs(mean2[0] / n - 0.5) <= 3.0 * sd);
  // E[(a-1/2)(b-1/2)] = 0 with sd 1/(4 sqrt n)
  CHECK(std::abs(cross / n) <= 3.0 * 0.25 / std::sqrt(double(n)));
}

TEST_CASE("lower-bound environment steps") {
  LowerBoundEnv env(3, 0.2, 0);
  Rng rng(14);
  for (int t = 0; t < 200; ++t) {
    const auto x = env.next_context(rng);
    const auto f3 = env.play(Arm{2}, rng);
    CHECK(f3.loss == doctest::Approx(0.45));
    CHECK_FALSE(f3.revealed);
    CHECK(f3.z.empty());
    const auto f1 = env.play(Arm{0}, rng);
    const auto f2 = env.play(Arm{1}, rng);
    CHECK(f1.loss + f2.loss == 1.0);
    CHECK(f1.revealed);
    CHECK(f1.z == env.current_z());
    CHECK(env.mean_loss(x, Arm{0}) - env.mean_loss(x, Arm{2}) == doctest::Approx(0.05));
  }
  CHECK_THROWS(LowerBoundEnv(3, 0.2, 4));
  CHECK_THROWS(LowerBoundEnv(3, 0.0, 1));
}

TEST_CASE("lower-bound mean oracle matches samples in E_i") {
  LowerBoundEnv env(4, 0.3, 3);
  Rng rng(15);
  double diff = 0.0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    const auto x = env.next_context(rng);
    const Arm a{static_cast<int>(rng.uniform_index(2))};
    diff += env.play(a, rng).loss - env.mean_loss(x, a);
  }
  CHECK(std::abs(diff / n) <= 3.0 * 0.5 / std::sqrt(double(n)));
  // pi_3 plays the arm whose loss is z_3
  BitVector x{{1, 2, 2, 1}};
  CHECK(env.mean_loss(x, Arm{1}) == doctest::Approx(0.35));
  CHECK(env.mean_loss(x, Arm{0}) == doctest::Approx(0.65));
}

TEST_CASE("contexts are uniform and x_1 is independent of z") {
  LowerBoundEnv env(4, 0.25, 2);
  Rng rng(16);
  const int n = 10000;
  std::map<std::vector<std::uint8_t>, int> cells;
  int table[2][2] = {{0, 0}, {0, 0}};
  for (int t = 0; t < n; ++t) {
    const auto x = std::get<BitVector>(env.next_context(rng));
    ++cells[x.bits];
    ++table[x.bits[0] - 1][env.current_z()[1]];
  }
  // E_2 biases z_2 but the context stays uniform
  double chi = 0.0;
  const double expected = n / 16.0;
  for (const auto& [bits, c] : cells) chi += (c - expected) * (c - expected) / expected;
  chi += (16 - static_cast<int>(cells.size())) * expected;
  CHECK(chi < 37.70);  // df 15, p = 0.001

  double ind = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double row = table[i][0] + table[i][1];
      const double col = table[0][j] + table[1][j];
      const double e = row * col / n;
      ind += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  CHECK(ind < 10.83);  // df 1, p = 0.001
}

TEST_CASE("lower-bound tuning") {
  const auto small = lb_theorem_tuning(3000.0, 1.0, 100000000);
  CHECK(small.delta == doctest::Approx(3000.0 / 160.0 / 1e4));
  CHECK(small.n == static_cast<std::int64_t>(std::floor(3000.0 / (20.0 * small.delta * small.delta))));

  const auto capped = lb_theorem_tuning(5000.0, 1.0, 10000);
  CHECK(capped.delta == 0.25);
  CHECK(capped.n == 4000);

  // ln k = 10 is far below c2 = 2560
  CHECK_THROWS_WITH_AS(lb_theorem_tuning(10.0, 1.0, 1000000), doctest::Contains("c2*C^2 <= ln k"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(lb_theorem_tuning(3000.0, 1.0, 5000), doctest::Contains("ln k <= T/2"), std::invalid_argument);
}

TEST_CASE("reveal-budget agent") {
  CHECK(binomial_lower_threshold(10, 1.0 / 1024.0) == 0);
  CHECK(binomial_lower_threshold(10, 1e-4) == -1);
  CHECK(binomial_lower_threshold(0, 0.5) == -1);

  // n = 0 plays arm 3 forever
  LowerBoundEnv e0(8, 0.2, 0);
  auto zero = reveal_budget_agent(8, 0);
  Rng er(1), ar(2);
  const auto tr = simulate(e0, *zero, 500, er, ar);
  for (const auto& s : tr.steps()) REQUIRE(s.arm == Arm{2});
  CHECK(zero->reveals() == 0);

  // n = 100 in E_0: regret vs pi_0 is exactly 100 Delta / 4
  LowerBoundEnv env(8, 0.2, 0);
  auto agent = reveal_budget_agent(8, 100);
  Rng er2(3), ar2(4);
  const auto tr2 = simulate(env, *agent, 2000, er2, ar2);
  CHECK(agent->reveals() == 100);
  CHECK(pseudo_regret(tr2, PolicyClass("pi0", {ConstantArm{Arm{2}}}), env.oracle()) ==
        doctest::Approx(100 * 0.2 / 4).epsilon(1e-12));

  // a long budget in E_3 finds pi_3
  LowerBoundEnv e3(8, 0.4, 3);
  RevealBudgetAgent long_run(8, 400);
  Rng er3(5), ar3(6);
  simulate(e3, long_run, 1000, er3, ar3);
  CHECK(long_run.committed());
  CHECK(long_run.committed_projection() == 2);
}
