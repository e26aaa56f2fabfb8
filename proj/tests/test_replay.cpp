#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "rv/env.hpp"
#include "rv/replay.hpp"

using namespace rv;

namespace {

ReplayBuffer<TabExperience> linear_buffer(const LinearGridConfig& cfg) {
  const auto entries = enumerate_linear_buffer(cfg);
  ReplayBuffer<TabExperience> buf(entries.size());
  for (const auto& e : entries) buf.push(e);
  return buf;
}

constexpr std::size_t slot_of(int state, int action) {
  return static_cast<std::size_t>(state) * 4 + static_cast<std::size_t>(action);
}

}  // namespace

TEST_SUITE("replay buffer") {
  TEST_CASE("push and FIFO eviction") {
    ReplayBuffer<int> buf(3);
    CHECK(buf.size() == 0);
    CHECK(buf.push(10) == 0);
    CHECK(buf.size() == 1);
    CHECK(buf[0] == 10);
    buf.push(11);
    buf.push(12);
    CHECK(buf.full());
    CHECK(buf.push(13) == 0);  // oldest slot overwritten
    CHECK(buf.size() == 3);
    CHECK(buf[0] == 13);
    CHECK(buf[1] == 11);
    CHECK(buf[2] == 12);
    CHECK(buf.push(14) == 1);
    CHECK_THROWS_AS(ReplayBuffer<int>{0}, std::invalid_argument);
  }
}

TEST_SUITE("sum tree") {
  TEST_CASE("root equals the leaf sum") {
    SumTree t(5);
    CHECK(t.total() == 0.0);
    for (std::size_t i = 0; i < 5; ++i) t.update(i, 1.0);
    CHECK(t.total() == 5.0);
    SumTree u(7);
    u.update(3, 5.0);
    CHECK(u.total() == 5.0);
    CHECK(u.value_of(3) == 5.0);
    CHECK(u.value_of(0) == 0.0);
  }

  TEST_CASE("prefix descent on [1,3]") {
    SumTree t(2);
    t.update(0, 1.0);
    t.update(1, 3.0);
    CHECK(t.sample(0.5) == 0);
    CHECK(t.sample(2.5) == 1);
    CHECK(t.sample(0.0) == 0);
    CHECK(t.sample(1.0) == 1);  // interval of leaf 0 is [0,1)
    CHECK(t.sample(3.999) == 1);
  }

  TEST_CASE("single leaf always wins") {
    SumTree t(1);
    t.update(0, 0.7);
    for (double p : {0.0, 0.3, 0.699}) CHECK(t.sample(p) == 0);
  }

  TEST_CASE("errors") {
    SumTree t(2);
    CHECK_THROWS_AS(t.update(0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(t.update(0, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(t.update(5, 1.0), std::out_of_range);
    CHECK_THROWS_AS(t.sample(0.0), std::invalid_argument);  // total 0
    t.update(0, 2.0);
    CHECK_THROWS_AS(t.sample(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(t.sample(2.0), std::invalid_argument);
    CHECK_THROWS_AS(SumTree{0}, std::invalid_argument);
  }

  TEST_CASE("incremental updates match a full rebuild") {
    Rng rng(51);
    SumTree t(37);
    std::vector<double> leaves(37, 0.0);
    for (int step = 0; step < 5000; ++step) {
      const std::size_t i = rng.below(37);
      const double p = rng.uniform01() < 0.1 ? 0.0 : rng.uniform(0.0, 10.0);
      t.update(i, p);
      leaves[i] = p;
      if (step % 250 == 0) {
        const double sum = std::accumulate(leaves.begin(), leaves.end(), 0.0);
        CHECK(std::abs(t.total() - sum) <= 1e-9 * std::max(1.0, sum));
        CHECK(t.consistent(1e-9));
      }
    }
    for (std::size_t i = 0; i < 37; ++i) CHECK(t.value_of(i) == leaves[i]);
  }

  TEST_CASE("sampling frequencies track priorities (chi-square)") {
    Rng rng(52);
    const std::size_t kLeaves = 64;
    SumTree t(kLeaves);
    std::vector<double> p(kLeaves);
    for (std::size_t i = 0; i < kLeaves; ++i) {
      p[i] = rng.uniform(0.1, 10.0);
      t.update(i, p[i]);
    }
    const double total = t.total();
    std::vector<long> counts(kLeaves, 0);
    const long kDraws = 1000000;
    for (long d = 0; d < kDraws; ++d) ++counts[t.sample(rng.uniform01() * total)];
    double chi2 = 0.0;
    for (std::size_t i = 0; i < kLeaves; ++i) {
      const double expected = kDraws * p[i] / total;
      chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
    }
    // upper 0.001 quantile of chi-square with 63 degrees of freedom
    CHECK(chi2 < 103.44237731987324);
  }
}

TEST_SUITE("uniform sampling") {
  TEST_CASE("degenerate, reproducible, uniform") {
    Rng rng(53);
    for (std::size_t i : sample_uniform(1, 32, rng)) CHECK(i == 0);

    Rng a(54), b(54);
    CHECK(sample_uniform(100, 64, a) == sample_uniform(100, 64, b));

    Rng rng2(55);
    std::vector<long> counts(10, 0);
    const long kDraws = 100000;
    for (std::size_t i : sample_uniform(10, kDraws, rng2)) ++counts[i];
    const double expected = kDraws / 10.0;
    const double sigma = std::sqrt(kDraws * 0.1 * 0.9);
    for (long c : counts) CHECK(std::abs(c - expected) <= 3.0 * sigma);

    CHECK_THROWS_AS(sample_uniform(0, 4, rng2), std::invalid_argument);
  }
}

TEST_SUITE("greedy oracle") {
  TEST_CASE("abs_td picks the only rewarded transition initially") {
    LinearGridConfig cfg;
    cfg.n = 5;
    const auto buf = linear_buffer(cfg);
    QTable q(cfg.n + 1, 4);
    CHECK(sample_greedy_oracle(buf, OracleCriterion::abs_td, q, 1.0,
                               cfg.gamma) == slot_of(4, kEast));
  }

  TEST_CASE("all-zero criteria fall back to slot 0") {
    LinearGridConfig cfg;
    cfg.n = 3;
    cfg.goal_reward = 0.0;  // nothing to learn: every TD is zero
    const auto buf = linear_buffer(cfg);
    QTable q(cfg.n + 1, 4);
    const auto pick =
        sample_greedy_oracle_scored(buf, OracleCriterion::abs_td, q, 1.0,
                                    cfg.gamma);
    CHECK(pick.slot == 0);
    CHECK(pick.score == 0.0);
  }

  TEST_CASE("abs_evb after the first east update picks east at grid n-2") {
    LinearGridConfig cfg;
    cfg.n = 5;
    const auto buf = linear_buffer(cfg);
    QTable q(cfg.n + 1, 4);
    QAgentConfig agent;
    agent.gamma = cfg.gamma;
    q_update(q, buf[slot_of(4, kEast)], agent);
    CHECK(sample_greedy_oracle(buf, OracleCriterion::abs_evb, q, 1.0,
                               cfg.gamma) == slot_of(3, kEast));
  }

  TEST_CASE("abs_td quiescence takes exactly 4n replays") {
    for (int n : {2, 3}) {
      LinearGridConfig cfg;
      cfg.n = n;
      const auto buf = linear_buffer(cfg);
      QTable q(cfg.n + 1, 4);
      QAgentConfig agent;
      agent.gamma = cfg.gamma;
      int replays = 0;
      while (true) {
        const auto pick = sample_greedy_oracle_scored(
            buf, OracleCriterion::abs_td, q, agent.alpha, agent.gamma);
        // never a zero-criterion pick while a nonzero one exists
        double best = 0.0;
        for (std::size_t i = 0; i < buf.size(); ++i) {
          best = std::max(best, std::abs(td_error(q, buf[i], agent.gamma)));
        }
        CHECK(pick.score == best);
        if (pick.score == 0.0) break;
        q_update(q, buf[pick.slot], agent);
        ++replays;
        REQUIRE(replays <= 100 * n);
      }
      CHECK(replays == 4 * n);
    }
  }

  TEST_CASE("abs_evb reaches the optimal policy in exactly n replays") {
    for (int n : {2, 5}) {
      LinearGridConfig cfg;
      cfg.n = n;
      const auto buf = linear_buffer(cfg);
      QTable q(cfg.n + 1, 4);
      QAgentConfig agent;
      agent.gamma = cfg.gamma;
      auto optimal = [&] {
        for (int s = 0; s < n; ++s) {
          if (argmax_tiebreak(q.row(s)) != static_cast<std::size_t>(kEast)) {
            return false;
          }
        }
        return true;
      };
      int replays = 0;
      while (!optimal()) {
        const auto pick = sample_greedy_oracle_scored(
            buf, OracleCriterion::abs_evb, q, agent.alpha, agent.gamma);
        REQUIRE(pick.score > 0.0);
        q_update(q, buf[pick.slot], agent);
        ++replays;
        REQUIRE(replays <= n);
      }
      CHECK(replays == n);
      // afterwards no experience can raise any state's value
      const auto next = sample_greedy_oracle_scored(
          buf, OracleCriterion::abs_evb, q, agent.alpha, agent.gamma);
      CHECK(next.score == 0.0);
    }
  }
}

TEST_SUITE("priorities") {
  TEST_CASE("shaping formulas") {
    PrioritySamplerConfig cfg;
    CHECK(per_priority(0.0, cfg) == std::pow(1e-6, 0.6));
    CHECK(per_priority(0.0, cfg) > 0.0);
    CHECK(per_priority(-2.0, cfg) == std::pow(2.0 + 1e-6, 0.6));
    CHECK(ver_priority(3.0, 1.0, 1.0, cfg) == per_priority(3.0, cfg));
    CHECK(ver_priority(3.0, 0.2, 0.7, cfg) == std::pow(0.7 * 3.0 + 1e-6, 0.6));

    PrioritySamplerConfig raw;
    raw.alpha_exp = 1.0;
    raw.epsilon_prio = 1e-12;
    CHECK(ver_priority(5.0, 0.3, 0.6, raw) <= per_priority(5.0, raw));
    CHECK_THROWS_AS(shaped_priority(-0.5, cfg), std::invalid_argument);
  }

  TEST_CASE("config validation") {
    PrioritySamplerConfig cfg;
    cfg.validate();
    cfg.alpha_exp = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.alpha_exp = 0.6;
    cfg.beta_is = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.beta_is = 0.4;
    cfg.epsilon_prio = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.epsilon_prio = 1e-6;
    cfg.beta_is_schedule.end = 1.2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }

  TEST_CASE("beta_is anneal") {
    LinearSchedule s{0.4, 1.0, 1000};
    CHECK(s.at(0) == 0.4);
    CHECK(s.at(500) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(s.at(1000) == 1.0);
    CHECK(s.at(5000) == 1.0);
    CHECK_THROWS_AS((LinearSchedule{0.4, 1.0, 0}.validate()),
                    std::invalid_argument);
  }
}

TEST_SUITE("importance weights") {
  TEST_CASE("worked example and degenerate cases") {
    const std::vector<double> probs{0.75, 0.25};
    const auto w = is_weights(probs, 2, 1.0);
    CHECK(w[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(w[1] == 1.0);

    const std::vector<double> uniform{0.1, 0.1, 0.1};
    for (double x : is_weights(uniform, 10, 0.7)) CHECK(x == 1.0);
    for (double x : is_weights(probs, 2, 0.0)) CHECK(x == 1.0);

    CHECK_THROWS_AS(is_weights(std::vector<double>{}, 2, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(is_weights(std::vector<double>{0.5, 0.0}, 2, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(is_weights(probs, 0, 1.0), std::invalid_argument);
  }
}

TEST_SUITE("proportional sampler") {
  TEST_CASE("new slots take the max priority seen") {
    PrioritySamplerConfig cfg;
    ProportionalSampler s(8, cfg);
    s.on_push(0);
    CHECK(s.priority_of_slot(0) == shaped_priority(1.0, cfg));
    s.set_base_priority(0, 3.0);
    s.on_push(1);
    CHECK(s.priority_of_slot(1) == shaped_priority(3.0, cfg));
    s.set_base_priority(1, 0.5);  // lowering one slot keeps the max watermark
    s.on_push(2);
    CHECK(s.priority_of_slot(2) == shaped_priority(3.0, cfg));
  }

  TEST_CASE("draw frequencies follow priorities") {
    PrioritySamplerConfig cfg;
    cfg.alpha_exp = 1.0;
    cfg.epsilon_prio = 1e-9;
    ProportionalSampler s(2, cfg);
    s.on_push(0);
    s.on_push(1);
    s.set_base_priority(0, 3.0);
    s.set_base_priority(1, 1.0);
    Rng rng(56);
    const std::size_t kDraws = 100000;
    long hits0 = 0;
    const auto batch = s.sample(kDraws, rng);
    for (const auto& d : batch) {
      if (d.slot == 0) {
        ++hits0;
        CHECK(d.probability == doctest::Approx(0.75).epsilon(1e-6));
      } else {
        CHECK(d.probability == doctest::Approx(0.25).epsilon(1e-6));
      }
    }
    const double sigma = std::sqrt(kDraws * 0.75 * 0.25);
    CHECK(std::abs(hits0 - kDraws * 0.75) <= 3.0 * sigma);
  }

  TEST_CASE("eviction overwrite keeps the tree consistent") {
    PrioritySamplerConfig cfg;
    ReplayBuffer<int> buf(3);
    ProportionalSampler s(3, cfg);
    for (int i = 0; i < 3; ++i) {
      s.on_push(buf.push(i));
      s.set_base_priority(static_cast<std::size_t>(i), 1.0 + i);
    }
    const double before = s.total();
    const double evicted = s.priority_of_slot(0);
    const std::size_t slot = buf.push(99);  // evicts slot 0
    CHECK(slot == 0);
    s.on_push(slot);
    CHECK(s.total() ==
          doctest::Approx(before - evicted + s.priority_of_slot(0))
              .epsilon(1e-12));
    CHECK(s.tree().consistent(1e-9));
    double rebuild = 0.0;
    for (std::size_t i = 0; i < 3; ++i) rebuild += s.priority_of_slot(i);
    CHECK(s.total() == doctest::Approx(rebuild).epsilon(1e-12));
  }

  TEST_CASE("sampling before any push fails") {
    PrioritySamplerConfig cfg;
    ProportionalSampler s(4, cfg);
    Rng rng(57);
    CHECK_THROWS_AS(s.sample(1, rng), std::invalid_argument);
  }
}
