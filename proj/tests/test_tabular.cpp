#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rv/tabular.hpp"

using namespace rv;

namespace {

QTable random_table(Rng& rng, int states, int actions, double scale = 10.0) {
  QTable q(states, actions);
  for (auto& v : q.values) v = rng.uniform(-scale, scale);
  return q;
}

TabExperience random_experience(Rng& rng, const QTable& q) {
  TabExperience e;
  e.state = static_cast<int>(rng.below(q.state_count));
  e.action = static_cast<int>(rng.below(q.action_count));
  e.reward = rng.uniform(-5.0, 5.0);
  e.next_state = static_cast<int>(rng.below(q.state_count));
  e.terminal = rng.uniform01() < 0.2;
  return e;
}

}  // namespace

TEST_SUITE("td_error") {
  TEST_CASE("zero table cases") {
    QTable q(3, 4);
    CHECK(td_error(q, {0, 1, 0.0, 2, false}, 0.99) == 0.0);
    CHECK(td_error(q, {0, 1, 1.0, 2, true}, 0.99) == 1.0);
  }

  TEST_CASE("bootstrapped target") {
    QTable q(3, 2);
    q.at(0, 1) = 0.5;
    q.at(2, 0) = 1.0;
    CHECK(td_error(q, {0, 1, 0.0, 2, false}, 0.99) ==
          doctest::Approx(0.49).epsilon(1e-12));
  }

  TEST_CASE("terminal drops the bootstrap even with rich next state") {
    QTable q(3, 2);
    q.at(2, 0) = 100.0;
    CHECK(td_error(q, {0, 1, 0.25, 2, true}, 0.99) == 0.25);
  }
}

TEST_SUITE("q_update") {
  TEST_CASE("single-step target with alpha=1") {
    QTable q(2, 3);
    QAgentConfig cfg;
    cfg.alpha = 1.0;
    const double td = q_update(q, {0, 2, 1.0, 1, true}, cfg);
    CHECK(td == 1.0);
    CHECK(q.at(0, 2) == 1.0);
  }

  TEST_CASE("half step size moves halfway") {
    QTable q(2, 2);
    QAgentConfig cfg;
    cfg.alpha = 0.5;
    const double td = q_update(q, {0, 0, 2.0, 1, true}, cfg);
    CHECK(td == 2.0);
    CHECK(q.at(0, 0) == 1.0);
  }

  TEST_CASE("zero TD is a fixed point") {
    QTable q(2, 2);
    q.at(0, 0) = 3.0;
    q.at(1, 0) = 1.0;
    QAgentConfig cfg;
    cfg.gamma = 0.5;
    QTable before = q;
    // target = 2.5 + 0.5*1.0 = 3.0 = Q(0,0)
    const double td = q_update(q, {0, 0, 2.5, 1, false}, cfg);
    CHECK(td == 0.0);
    CHECK(q.values == before.values);
  }

  TEST_CASE("touches exactly one entry by exactly alpha*td") {
    Rng rng(31);
    for (int t = 0; t < 10000; ++t) {
      QTable q = random_table(rng, 2 + int(rng.below(5)), 2 + int(rng.below(5)));
      const TabExperience e = random_experience(rng, q);
      QAgentConfig cfg;
      cfg.alpha = 1.0 - rng.uniform01();  // (0,1]
      cfg.gamma = rng.uniform01();
      const QTable before = q;
      const double td = q_update(q, e, cfg);
      for (int s = 0; s < q.state_count; ++s)
        for (int a = 0; a < q.action_count; ++a) {
          if (s == e.state && a == e.action) {
            CHECK(std::abs(q.at(s, a) - before.at(s, a) - cfg.alpha * td) <=
                  1e-12 * std::max(1.0, std::abs(cfg.alpha * td)));
          } else {
            CHECK(q.at(s, a) == before.at(s, a));
          }
        }
    }
  }
}

TEST_SUITE("soft_value") {
  TEST_CASE("frozen and degenerate cases") {
    QTable q(1, 4);
    CHECK(soft_value(q, 0, 1.0) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));

    QTable single(1, 1);
    single.at(0, 0) = -2.75;
    CHECK(soft_value(single, 0, 0.37) == -2.75);

    QTable two(1, 2);
    two.at(0, 0) = 1.0;
    CHECK(soft_value(two, 0, 0.5) ==
          doctest::Approx(1.0634640055214862).epsilon(1e-12));
  }

  TEST_CASE("exceeds the hard maximum and is monotone per entry") {
    Rng rng(33);
    for (int t = 0; t < 2000; ++t) {
      QTable q = random_table(rng, 1, 2 + int(rng.below(6)), 3.0);
      const double beta = rng.uniform(0.5, 20.0);
      const double v = soft_value(q, 0, beta);
      CHECK(v >= max_q(q, 0) - 1e-12);
      const int a = static_cast<int>(rng.below(q.action_count));
      QTable bumped = q;
      bumped.at(0, a) += rng.uniform(1.0, 2.0);
      CHECK(soft_value(bumped, 0, beta) > v);
    }
  }
}

TEST_SUITE("soft_td_error") {
  TEST_CASE("frozen values") {
    QTable q(2, 2);
    CHECK(soft_td_error(q, {0, 0, 0.0, 1, false}, 1.0, 0.99) ==
          doctest::Approx(0.68621570875434586).epsilon(1e-12));
    CHECK(soft_td_error(q, {0, 0, 1.0, 1, true}, 1.0, 0.99) == 1.0);
  }

  TEST_CASE("zero next-state value leaves pure regression to -Q") {
    QTable q(2, 1);  // single action: soft value of next state is its entry
    q.at(0, 0) = 0.7;
    q.at(1, 0) = 0.0;
    CHECK(soft_td_error(q, {0, 0, 0.0, 1, false}, 2.0, 0.99) ==
          doctest::Approx(-0.7).epsilon(1e-15));
  }
}

TEST_SUITE("soft_q_update") {
  TEST_CASE("replacement semantics with frozen target") {
    QTable q(2, 4);
    SoftQAgentConfig cfg;
    cfg.beta = 100.0;
    cfg.gamma = 0.99;
    const double td = soft_q_update(q, {0, 1, 0.0, 1, false}, cfg);
    CHECK(q.at(0, 1) == doctest::Approx(137.24314175086917).epsilon(1e-12));
    CHECK(td == q.at(0, 1));

    QTable terminal_case(2, 2);
    SoftQAgentConfig c2{1.0, 0.99};
    soft_q_update(terminal_case, {0, 0, 1.0, 1, true}, c2);
    CHECK(terminal_case.at(0, 0) == 1.0);
  }

  TEST_CASE("entry already at target stays put") {
    QTable q(2, 2);
    SoftQAgentConfig cfg{1.0, 0.5};
    TabExperience e{0, 0, 0.25, 1, false};
    soft_q_update(q, e, cfg);
    const QTable after_first = q;
    // The next-state row is untouched, so the target is unchanged.
    const double td = soft_q_update(q, e, cfg);
    CHECK(td == 0.0);
    CHECK(q.values == after_first.values);
  }

  TEST_CASE("TD recomputed against the old next-state value is exactly zero") {
    Rng rng(34);
    for (int t = 0; t < 10000; ++t) {
      QTable q = random_table(rng, 2 + int(rng.below(4)), 2 + int(rng.below(4)));
      const TabExperience e = random_experience(rng, q);
      SoftQAgentConfig cfg;
      cfg.beta = std::exp(rng.uniform(std::log(0.05), std::log(100.0)));
      cfg.gamma = rng.uniform01();
      const QTable q_old = q;
      soft_q_update(q, e, cfg);
      const double target =
          e.terminal ? e.reward
                     : e.reward + cfg.gamma * soft_value(q_old, e.next_state,
                                                         cfg.beta);
      CHECK(target - q.at(e.state, e.action) == 0.0);
      // only entry (s,a) replaced
      for (int s = 0; s < q.state_count; ++s)
        for (int a = 0; a < q.action_count; ++a)
          if (s != e.state || a != e.action)
            CHECK(q.at(s, a) == q_old.at(s, a));
    }
  }
}

TEST_SUITE("epsilon schedule") {
  TEST_CASE("endpoints and strict decrease") {
    EpsilonSchedule s{1.0, 0.001, 10000};
    s.validate();
    CHECK(s.at(0) == 1.0);
    CHECK(s.at(10000) == 0.001);
    CHECK(s.at(20000) == 0.001);
    CHECK(s.at(5000) == doctest::Approx(std::pow(10.0, -1.5)).epsilon(1e-12));
    double prev = s.at(0);
    for (long long t = 1; t <= 10000; t += 7) {
      const double cur = s.at(t);
      CHECK(cur < prev);
      prev = cur;
    }
  }

  TEST_CASE("exploration-policy schedule for the balancing task") {
    EpsilonSchedule s{1.0, 0.01, 10000};
    s.validate();
    CHECK(s.at(10000) == 0.01);
    CHECK(s.at(50000) == 0.01);
  }

  TEST_CASE("validation") {
    CHECK_THROWS_AS((EpsilonSchedule{0.5, 0.6, 100}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((EpsilonSchedule{1.0, 0.0, 100}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((EpsilonSchedule{1.0, 0.1, 0}.validate()),
                    std::invalid_argument);
  }
}

TEST_SUITE("behavior_action") {
  TEST_CASE("epsilon=1 is uniform") {
    QTable q(1, 4);
    q.at(0, 2) = 5.0;
    Rng rng(35);
    int counts[4] = {0, 0, 0, 0};
    const int kDraws = 10000;
    for (int i = 0; i < kDraws; ++i)
      ++counts[behavior_action(q, 0, BehaviorMode::epsilon_greedy, 1.0, rng)];
    const double expected = kDraws / 4.0;
    const double sigma = std::sqrt(kDraws * 0.25 * 0.75);
    for (int c : counts) CHECK(std::abs(c - expected) <= 3.0 * sigma);
  }

  TEST_CASE("epsilon=0 is greedy") {
    QTable q(1, 4);
    q.at(0, 1) = 1.0;
    Rng rng(36);
    for (int i = 0; i < 100; ++i)
      CHECK(behavior_action(q, 0, BehaviorMode::epsilon_greedy, 0.0, rng) == 1);
  }

  TEST_CASE("softmax over equal values is uniform") {
    QTable q(1, 4);
    Rng rng(37);
    int counts[4] = {0, 0, 0, 0};
    const int kDraws = 10000;
    for (int i = 0; i < kDraws; ++i)
      ++counts[behavior_action(q, 0, BehaviorMode::softmax, 0.7, rng)];
    const double expected = kDraws / 4.0;
    const double sigma = std::sqrt(kDraws * 0.25 * 0.75);
    for (int c : counts) CHECK(std::abs(c - expected) <= 3.0 * sigma);
  }
}

TEST_SUITE("agent configs") {
  TEST_CASE("validation rejects out-of-range parameters") {
    QAgentConfig q;
    q.alpha = 0.0;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    q.alpha = 1.5;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    q.alpha = 1.0;
    q.gamma = 1.1;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);

    SoftQAgentConfig s{0.0, 0.99};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
}
