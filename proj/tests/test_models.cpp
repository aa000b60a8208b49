#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <random>
#include <thread>

#include "oracles.hpp"
#include "subcount/attack.hpp"
#include "subcount/json.hpp"
#include "subcount/models.hpp"

using namespace subcount;
using namespace std::chrono_literals;

namespace {

std::vector<Graph> random_graphs(int count, std::uint64_t seed, int n_lo = 5, int n_hi = 14) {
  std::mt19937_64 rng(seed);
  std::vector<Graph> out;
  for (int t = 0; t < count; ++t) {
    const int n = n_lo + static_cast<int>(rng() % (n_hi - n_lo + 1));
    out.push_back(oracle::random_graph(n, 0.15 + 0.1 * static_cast<double>(rng() % 6), rng));
  }
  return out;
}

std::string adapter(const std::string& args) { return std::string("stdio:") + FAKE_ADAPTER + " " + args; }

ModelError::Kind failure_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const ModelError& e) {
    return e.kind();
  }
  FAIL("expected a ModelError");
  return ModelError::Kind::Usage;
}

}  // namespace

TEST_CASE("oracle model") {
  auto m = oracle_model(Pattern::Triangle);
  CHECK(m->predict(Graph::complete(4), Pattern::Triangle) == 4.0);
  CHECK(m->deterministic());
  const auto gs = random_graphs(100, 1);
  const auto preds = m->predict_batch(gs, Pattern::FourCycle);
  REQUIRE(preds.size() == gs.size());
  for (std::size_t k = 0; k < gs.size(); ++k) {
    CHECK(preds[k] == static_cast<double>(count_all(gs[k])[Pattern::FourCycle]));
    CHECK(round_prediction(preds[k]) == count_induced(gs[k], Pattern::FourCycle));
  }
  CHECK(m->predict_batch({}, Pattern::Triangle).empty());
}

TEST_CASE("noisy oracle") {
  const auto gs = random_graphs(50, 2);
  auto exact = oracle_model(Pattern::TwoPath);
  auto zero = noisy_oracle(Pattern::TwoPath, 0.0, 5);
  CHECK(zero->predict_batch(gs, Pattern::TwoPath) == exact->predict_batch(gs, Pattern::TwoPath));

  auto noisy = noisy_oracle(Pattern::TwoPath, 2.0, 5);
  CHECK(noisy->predict(gs[0], Pattern::TwoPath) == noisy->predict(gs[0], Pattern::TwoPath));
  auto other_seed = noisy_oracle(Pattern::TwoPath, 2.0, 6);
  CHECK(noisy->predict(gs[0], Pattern::TwoPath) != other_seed->predict(gs[0], Pattern::TwoPath));
  CHECK_THROWS_AS(noisy_oracle(Pattern::Triangle, -1.0, 0), std::invalid_argument);
}

TEST_CASE("noisy oracle spread matches sigma") {
  const double sigma = 2.0;
  auto noisy = noisy_oracle(Pattern::Triangle, sigma, 17);
  const auto gs = random_graphs(10000, 3, 10, 16);
  const auto preds = noisy->predict_batch(gs, Pattern::Triangle);
  double mean = 0, ss = 0;
  std::vector<double> resid;
  for (std::size_t k = 0; k < gs.size(); ++k) resid.push_back(preds[k] - static_cast<double>(count_induced(gs[k], Pattern::Triangle)));
  for (double r : resid) mean += r;
  mean /= static_cast<double>(resid.size());
  for (double r : resid) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(resid.size() - 1));
  CHECK(std::abs(sd - sigma) / sigma < 0.05);
}

TEST_CASE("graph features") {
  // Path 0-1-2: degrees 1,2,1.
  const auto f = graph_features(Graph::path(3));
  REQUIRE(f.size() == 7);
  CHECK(f[0] == 3);
  CHECK(f[1] == 2);
  CHECK(f[2] == doctest::Approx(4.0 / 3));
  CHECK(f[3] == doctest::Approx(6.0 / 3));
  CHECK(f[4] == doctest::Approx(10.0 / 3));
  CHECK(f[5] == doctest::Approx(18.0 / 3));
  CHECK(f[6] == 1);
}

TEST_CASE("regressor on constant labels predicts the constant") {
  std::vector<LabeledGraph> train;
  for (const auto& g : random_graphs(40, 4)) train.push_back({g, 7.0});
  const auto r = FeatureRegressor::fit(train, Pattern::Triangle);
  for (const auto& g : random_graphs(20, 5)) CHECK(r.predict_one(g) == doctest::Approx(7.0).epsilon(1e-9));
}

TEST_CASE("regressor matches an independent normal-equation solve") {
  const auto gs = random_graphs(10, 6);
  std::vector<LabeledGraph> train;
  for (const auto& g : gs) train.push_back({g, static_cast<double>(count_induced(g, Pattern::Triangle))});
  const auto r = FeatureRegressor::fit(train, Pattern::Triangle);
  CHECK_FALSE(r.used_ridge());

  // Oracle: standardize with its own statistics, then solve X^T X w = X^T y.
  const std::size_t d = 7;
  std::vector<double> mu(d, 0), sd(d, 0);
  for (const auto& s : train) {
    const auto f = graph_features(s.graph);
    for (std::size_t c = 0; c < d; ++c) mu[c] += f[c] / 10.0;
  }
  for (const auto& s : train) {
    const auto f = graph_features(s.graph);
    for (std::size_t c = 0; c < d; ++c) sd[c] += (f[c] - mu[c]) * (f[c] - mu[c]) / 10.0;
  }
  for (auto& v : sd) v = std::sqrt(v);
  auto row = [&](const Graph& g) {
    const auto f = graph_features(g);
    std::vector<double> x{1.0};
    for (std::size_t c = 0; c < d; ++c) x.push_back((f[c] - mu[c]) / sd[c]);
    return x;
  };
  std::vector<std::vector<double>> ata(d + 1, std::vector<double>(d + 1, 0));
  std::vector<double> atb(d + 1, 0);
  for (const auto& s : train) {
    const auto x = row(s.graph);
    for (std::size_t a = 0; a <= d; ++a) {
      atb[a] += x[a] * s.label;
      for (std::size_t b = 0; b <= d; ++b) ata[a][b] += x[a] * x[b];
    }
  }
  const auto w = oracle::gauss_solve(ata, atb);
  for (const auto& g : random_graphs(30, 7)) {
    const auto x = row(g);
    double expect = 0;
    for (std::size_t a = 0; a <= d; ++a) expect += w[a] * x[a];
    CHECK(r.predict_one(g) == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("regressor falls back to ridge on a constant feature column") {
  std::vector<LabeledGraph> train;
  for (const auto& g : random_graphs(30, 8, 9, 9)) train.push_back({g, static_cast<double>(g.num_edges())});
  const auto r = FeatureRegressor::fit(train, Pattern::Triangle);
  CHECK(r.used_ridge());
  for (const auto& s : train) CHECK(r.predict_one(s.graph) == doctest::Approx(s.label).epsilon(1e-4));
  CHECK_THROWS_AS(FeatureRegressor::fit({}, Pattern::Triangle), std::invalid_argument);
}

TEST_CASE("regressor JSON round trip and pattern guard") {
  std::vector<LabeledGraph> train;
  for (const auto& g : random_graphs(40, 9)) train.push_back({g, static_cast<double>(count_induced(g, Pattern::FourCycle))});
  auto r = FeatureRegressor::fit(train, Pattern::FourCycle);
  const auto back = FeatureRegressor::from_json(nlohmann::json::parse(r.to_json().dump()));
  for (const auto& g : random_graphs(10, 10)) CHECK(back.predict_one(g) == r.predict_one(g));
  CHECK(back.pattern() == Pattern::FourCycle);
  const auto kind = failure_kind([&] { r.predict(Graph::complete(3), Pattern::Triangle); });
  CHECK(kind == ModelError::Kind::Usage);
}

TEST_CASE("batching is transparent for built-in predictors") {
  std::vector<LabeledGraph> train;
  for (const auto& g : random_graphs(40, 11)) train.push_back({g, static_cast<double>(count_induced(g, Pattern::Triangle))});
  const std::vector<PredictorPtr> models{oracle_model(Pattern::Triangle), noisy_oracle(Pattern::Triangle, 1.5, 3),
                                         train_feature_regressor(train, Pattern::Triangle)};
  const auto gs = random_graphs(25, 12);
  for (const auto& m : models) {
    const auto batch = m->predict_batch(gs, Pattern::Triangle);
    for (std::size_t k = 0; k < gs.size(); ++k) CHECK(batch[k] == m->predict(gs[k], Pattern::Triangle));
  }
}

TEST_CASE("external client round trip over stdio") {
  auto client = external_model_client(adapter("echo"), 10s);
  CHECK(client->name() == "external:fake-echo");
  const auto gs = random_graphs(100, 13);
  auto exact = oracle_model(Pattern::Triangle);
  CHECK(client->predict_batch(gs, Pattern::Triangle) == exact->predict_batch(gs, Pattern::Triangle));
  for (int k = 0; k < 5; ++k) CHECK(client->predict(gs[k], Pattern::ThreePath) == static_cast<double>(count_induced(gs[k], Pattern::ThreePath)));
  CHECK(client->predict_batch({}, Pattern::Triangle).empty());

  // An attack on the echo model never finds an adversarial example.
  AttackConfig cfg;
  cfg.budget = 2;
  const auto r = beam_attack(*client, gs[0], Pattern::Triangle, cfg);
  CHECK_FALSE(r.error);
  CHECK(r.best.loss == 0);
  CHECK_FALSE(r.verdict.adversarial());
}

TEST_CASE("external client protocol failures") {
  const std::vector<Graph> gs{Graph::complete(4), Graph::cycle(5)};
  auto query = [&](const std::string& args, std::chrono::milliseconds timeout = 5s) {
    return failure_kind([&] { external_model_client(adapter(args), timeout)->predict_batch(gs, Pattern::Triangle); });
  };
  CHECK(query("wrong-length") == ModelError::Kind::Protocol);
  CHECK(query("malformed") == ModelError::Kind::Protocol);
  CHECK(query("non-numeric") == ModelError::Kind::Protocol);
  CHECK(query("wrong-id") == ModelError::Kind::Protocol);
  CHECK(query("error") == ModelError::Kind::Remote);
  CHECK(query("bad-handshake") == ModelError::Kind::Protocol);
  CHECK(query("slow 3000", 200ms) == ModelError::Kind::Timeout);
  CHECK(query("fail-after 0") == ModelError::Kind::Connection);
  CHECK(failure_kind([] { external_model_client("stdio:/nonexistent/adapter", 2s); }) ==
        ModelError::Kind::Connection);
  CHECK(failure_kind([] { external_model_client("carrier-pigeon:coop", 2s); }) == ModelError::Kind::Usage);
}

TEST_CASE("external client over tcp") {
  const int srv = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(srv >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  REQUIRE(::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  REQUIRE(::listen(srv, 1) == 0);
  socklen_t len = sizeof addr;
  ::getsockname(srv, reinterpret_cast<sockaddr*>(&addr), &len);
  const int port = ntohs(addr.sin_port);

  std::thread server([srv] {
    const int c = ::accept(srv, nullptr, nullptr);
    const std::string hello = R"({"protocol":"subcount-attack/1","model":"tcp-echo"})" "\n";
    (void)!::write(c, hello.data(), hello.size());
    std::string buf;
    char ch;
    while (::read(c, &ch, 1) == 1) {
      if (ch != '\n') {
        buf += ch;
        continue;
      }
      const auto req = nlohmann::json::parse(buf);
      buf.clear();
      nlohmann::json preds = nlohmann::json::array();
      for (const auto& g : req["graphs"]) preds.push_back(count_induced(graph_from_json(g), Pattern::Triangle));
      const std::string out = nlohmann::json{{"id", req["id"]}, {"preds", preds}}.dump() + "\n";
      (void)!::write(c, out.data(), out.size());
    }
    ::close(c);
  });

  {
    auto client = external_model_client("tcp:127.0.0.1:" + std::to_string(port), 5s);
    CHECK(client->name() == "external:tcp-echo");
    const auto gs = random_graphs(20, 14);
    CHECK(client->predict_batch(gs, Pattern::Triangle) ==
          oracle_model(Pattern::Triangle)->predict_batch(gs, Pattern::Triangle));
  }
  server.join();
  ::close(srv);

  // The listener is gone, so the same port now refuses connections.
  CHECK(failure_kind([port] { external_model_client("tcp:127.0.0.1:" + std::to_string(port), 2s); }) ==
        ModelError::Kind::Connection);
}

TEST_CASE("adapter failure mid-attack keeps the partial trajectory") {
  auto client = external_model_client(adapter("fail-after 3"), 5s);
  std::mt19937_64 rng(15);
  const Graph g = oracle::random_graph(10, 0.4, rng);
  AttackConfig cfg;
  cfg.budget = 6;
  const auto r = beam_attack(*client, g, Pattern::Triangle, cfg);
  REQUIRE(r.error);
  CHECK(r.steps.size() == 2);
  CHECK(r.queries > 0);
  CHECK_NOTHROW(validate_result(r));
}
