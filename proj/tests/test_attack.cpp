#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "subcount/attack.hpp"
#include "subcount/datasets.hpp"

using namespace subcount;

namespace {

/// Wraps a predictor and starts throwing after `calls` batch calls.
class Flaky final : public Predictor {
 public:
  Flaky(PredictorPtr inner, int calls) : inner_(std::move(inner)), left_(calls) {}
  std::vector<double> predict_batch(std::span<const Graph> gs, Pattern h) override {
    if (left_-- <= 0) throw ModelError(ModelError::Kind::Connection, "flaky model gave up");
    return inner_->predict_batch(gs, h);
  }
  std::string name() const override { return "flaky"; }
  bool deterministic() const override { return true; }

 private:
  PredictorPtr inner_;
  int left_;
};

std::vector<Graph> sbm_graphs(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<int> sizes{10, 10, 10};
  const std::vector<double> p_in{0.2, 0.3, 0.4};
  std::vector<Graph> out;
  for (int t = 0; t < count; ++t) out.push_back(gen_sbm(sizes, p_in, 0.1, rng));
  return out;
}

PredictorPtr small_regressor(Pattern h) {
  std::vector<LabeledGraph> train;
  for (const auto& g : sbm_graphs(200, 1)) train.push_back({g, static_cast<double>(count_induced(g, h))});
  return train_feature_regressor(train, h);
}

}  // namespace

TEST_CASE("adversarial loss and rounding") {
  CHECK(adversarial_loss(3.2, 3) == doctest::Approx(0.2));
  CHECK(adversarial_loss(5.1, 4) == doctest::Approx(1.1));
  for (Count c : {-3, 0, 7, 1000}) CHECK(adversarial_loss(static_cast<double>(c), c) == 0);
  CHECK(round_prediction(2.5) == 3);
  CHECK(round_prediction(2.4999) == 2);
  CHECK(round_prediction(-0.5) == 0);
  CHECK(round_prediction(-0.6) == -1);
  CHECK(round_prediction(-1.5) == -1);
}

TEST_CASE("verdict fixture table") {
  for (const auto& c : fixtures::kVerdictTable) {
    CAPTURE(c.label);
    const Verdict v = classify_adversarial(c.clean, c.perturbed, c.margin);
    CHECK(v == c.expect);
    CHECK(v.adversarial() == (c.expect.clean_correct && c.expect.perturbed_wrong && c.expect.margin_exceeded));
  }
}

TEST_CASE("config validation") {
  AttackConfig cfg;
  cfg.budget = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.budget = 1;
  cfg.beam_width = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.beam_width = 1;
  cfg.margin = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.margin = 1;
  cfg.sample_m = 11;
  auto m = oracle_model(Pattern::Triangle);
  CHECK_THROWS_AS(beam_attack(*m, Graph::path(5), Pattern::Triangle, cfg), std::invalid_argument);
  CHECK(parse_space("count") == Space::CountPreserving);
  CHECK_THROWS_AS(parse_space("P1"), std::invalid_argument);
}

TEST_CASE("the exact oracle is never fooled") {
  const auto gs = sbm_graphs(6, 2);
  for (Pattern h : {Pattern::Triangle, Pattern::TwoPath, Pattern::FourCycle}) {
    auto m = oracle_model(h);
    for (Space s : {Space::Constrained, Space::CountPreserving, Space::SubgraphPreserving}) {
      for (const auto& g : gs) {
        AttackConfig cfg{s, 3, s == Space::Constrained ? 1 : 4, 1.0, std::nullopt, 0};
        const auto r = beam_attack(*m, g, h, cfg);
        CHECK(r.best.loss == 0);
        CHECK(r.final_beam_best.loss == 0);
        CHECK_FALSE(r.verdict.adversarial());
        CHECK_NOTHROW(validate_result(r));
      }
    }
  }
}

TEST_CASE("greedy single step equals the exhaustive argmax") {
  std::mt19937_64 rng(3);
  auto noisy = noisy_oracle(Pattern::Triangle, 1.0, 4);
  for (int t = 0; t < 40; ++t) {
    const int n = 3 + static_cast<int>(rng() % 6);
    const Graph g = oracle::random_graph(n, 0.5, rng);
    for (Space s : {Space::Constrained, Space::CountPreserving, Space::SubgraphPreserving}) {
      const Count c0 = oracle::count(g, Pattern::Triangle);
      const auto occ0 = oracle::occurrences(g, Pattern::Triangle);
      std::optional<EdgeEdit> arg;
      double best = -1;
      for (const auto& e : gen_p1(g)) {
        const Graph f = edge_flip(g, e.i, e.j);
        const Count c = oracle::count(f, Pattern::Triangle);
        if (s != Space::Constrained && c != c0) continue;
        if (s == Space::SubgraphPreserving && oracle::occurrences(f, Pattern::Triangle) != occ0) continue;
        const double loss = adversarial_loss(noisy->predict(f, Pattern::Triangle), c);
        if (loss > best) {
          best = loss;
          arg = e;
        }
      }
      AttackConfig cfg;
      cfg.space = s;
      const auto r = beam_attack(*noisy, g, Pattern::Triangle, cfg);
      CHECK_NOTHROW(validate_result(r));
      if (!arg) {
        CHECK(r.terminated_early);
        CHECK(r.steps.empty());
        continue;
      }
      REQUIRE(r.steps.size() == 1);
      CHECK(r.steps[0].edits == EditSequence{*arg});
      CHECK(r.steps[0].loss == best);
      CHECK(r.final_beam_best.loss == best);
      CHECK(r.best.loss == std::max(best, r.clean_loss));
    }
  }
}

TEST_CASE("beam width 10 reaches at least the greedy loss") {
  auto reg = small_regressor(Pattern::Triangle);
  const auto gs = sbm_graphs(15, 5);
  for (Space s : {Space::Constrained, Space::CountPreserving}) {
    for (const auto& g : gs) {
      AttackConfig greedy{s, 3, 1, 1.0, std::nullopt, 0};
      AttackConfig beam = greedy;
      beam.beam_width = 10;
      const auto a = beam_attack(*reg, g, Pattern::Triangle, greedy);
      const auto b = beam_attack(*reg, g, Pattern::Triangle, beam);
      CHECK(b.best.loss >= a.best.loss);
      CHECK_NOTHROW(validate_result(a));
      CHECK_NOTHROW(validate_result(b));
    }
  }
}

TEST_CASE("results satisfy budget, space and ground truth") {
  auto reg = small_regressor(Pattern::FourCycle);
  const auto gs = sbm_graphs(5, 6);
  for (Space s : {Space::Constrained, Space::CountPreserving, Space::SubgraphPreserving}) {
    for (const auto& g : gs) {
      AttackConfig cfg{s, 4, 3, 1.0, std::size_t{60}, 9};
      const auto r = beam_attack(*reg, g, Pattern::FourCycle, cfg);
      CHECK_NOTHROW(validate_result(r));
      CHECK(net_toggled_pairs(r.best.edits).size() <= 4);
      CHECK(r.best.count == oracle::count(r.best.graph, Pattern::FourCycle));
      CHECK(r.queries > 1);
    }
  }
}

TEST_CASE("validate_result rejects tampered results") {
  auto reg = small_regressor(Pattern::Triangle);
  const Graph g = sbm_graphs(1, 7)[0];
  const auto r = beam_attack(*reg, g, Pattern::Triangle, {Space::Constrained, 3, 1, 1.0, std::nullopt, 0});
  REQUIRE(r.steps.size() == 3);

  auto bad = r;
  bad.best.count += 1;
  CHECK_THROWS_AS(validate_result(bad), std::logic_error);
  bad = r;
  bad.config.budget = 1;
  CHECK_THROWS_AS(validate_result(bad), std::logic_error);
  bad = r;
  bad.verdict.margin_exceeded = !bad.verdict.margin_exceeded;
  CHECK_THROWS_AS(validate_result(bad), std::logic_error);
  bad = r;
  bad.steps[1].loss += 100;
  CHECK_THROWS_AS(validate_result(bad), std::logic_error);
}

TEST_CASE("attacks are deterministic") {
  auto noisy = noisy_oracle(Pattern::TwoPath, 2.0, 8);
  const Graph g = sbm_graphs(1, 8)[0];
  for (Space s : {Space::Constrained, Space::CountPreserving, Space::SubgraphPreserving}) {
    AttackConfig cfg{s, 3, 5, 1.0, std::size_t{100}, 42};
    const auto a = beam_attack(*noisy, g, Pattern::TwoPath, cfg);
    const auto b = beam_attack(*noisy, g, Pattern::TwoPath, cfg);
    CHECK(to_json(a).dump() == to_json(b).dump());
  }
}

TEST_CASE("empty preserving space terminates without edits") {
  auto m = noisy_oracle(Pattern::Triangle, 0.3, 1);
  const auto r = beam_attack(*m, Graph::complete(3), Pattern::Triangle, {Space::CountPreserving, 2, 10, 1.0, std::nullopt, 0});
  CHECK(r.terminated_early);
  CHECK(r.steps.empty());
  CHECK(r.best.graph == Graph::complete(3));
  CHECK(r.queries == 1);
  CHECK_NOTHROW(validate_result(r));
}

TEST_CASE("a failing model leaves a partial, valid trajectory") {
  auto inner = noisy_oracle(Pattern::Triangle, 1.0, 3);
  const Graph g = sbm_graphs(1, 9)[0];
  Flaky flaky(inner, 3);
  const auto r = beam_attack(flaky, g, Pattern::Triangle, {Space::Constrained, 5, 1, 1.0, std::nullopt, 0});
  REQUIRE(r.error);
  CHECK(r.steps.size() == 2);
  CHECK_NOTHROW(validate_result(r));

  Flaky dead(inner, 0);
  const auto z = beam_attack(dead, g, Pattern::Triangle, {});
  CHECK(z.error);
  CHECK(z.queries == 0);
  CHECK_NOTHROW(validate_result(z));
}

TEST_CASE("transfer evaluation") {
  auto source = noisy_oracle(Pattern::Triangle, 2.0, 10);
  std::vector<AttackResult> results;
  int own = 0;
  for (const auto& g : sbm_graphs(30, 10)) {
    auto r = beam_attack(*source, g, Pattern::Triangle, {Space::Constrained, 2, 1, 1.0, std::nullopt, 0});
    own += r.verdict.adversarial();
    results.push_back(std::move(r));
  }
  REQUIRE(own > 0);
  const auto same = transfer_eval(results, {source}, 1.0);
  CHECK(same.rates[0] == doctest::Approx(own / 30.0));

  const auto exact = transfer_eval(results, {oracle_model(Pattern::Triangle)}, 1.0);
  CHECK(exact.rates[0] == 0);

  const std::vector<PredictorPtr> others{noisy_oracle(Pattern::Triangle, 2.0, 11), noisy_oracle(Pattern::Triangle, 2.0, 12)};
  const auto t1 = transfer_eval(results, others, 1.0);
  const auto t2 = transfer_eval(results, others, 1.0);
  CHECK(t1.rates == t2.rates);
  MESSAGE("transfer rates between noisy oracles: " << t1.rates[0] << ", " << t1.rates[1]);

  auto broken = std::make_shared<Flaky>(source, 0);
  const auto t3 = transfer_eval(results, {broken}, 1.0);
  CHECK_FALSE(t3.cells[0][0].adversarial);
  CHECK_FALSE(t3.cells[0][0].error.empty());
  CHECK(t3.rates[0] == 0);
}

TEST_CASE("JSON round trip") {
  auto noisy = noisy_oracle(Pattern::Triangle, 1.0, 13);
  const Graph g = sbm_graphs(1, 13)[0];
  const auto r = beam_attack(*noisy, g, Pattern::Triangle, {Space::CountPreserving, 3, 4, 1.0, std::size_t{50}, 1}, 17);
  const auto text = to_json(r).dump();
  const auto back = attack_result_from_json(nlohmann::json::parse(text));
  CHECK(to_json(back).dump() == text);
  CHECK(back.clean_id == 17);
  CHECK_NOTHROW(validate_result(back));

  const EditSequence seq{{0, 1, EditOp::Add}, {2, 5, EditOp::Delete}};
  CHECK(to_json(seq).dump() == R"([{"op":"add","i":0,"j":1},{"op":"del","i":2,"j":5}])");
  CHECK(edit_sequence_from_json(nlohmann::json::parse(to_json(seq).dump())) == seq);
  CHECK_THROWS(edit_sequence_from_json(nlohmann::json::parse(R"([{"op":"flip","i":0,"j":1}])")));
}
