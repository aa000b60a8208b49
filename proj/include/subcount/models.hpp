#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "subcount/counting.hpp"
#include "subcount/graph.hpp"
#include "subcount/pattern.hpp"

namespace subcount {

class ModelError : public std::runtime_error {
 public:
  enum class Kind { Connection, Protocol, Timeout, Remote, Usage };
  ModelError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Black-box graph regressor. Output length always equals input length.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::vector<double> predict_batch(std::span<const Graph> graphs, Pattern h) = 0;
  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual bool deterministic() const = 0;

  double predict(const Graph& g, Pattern h) { return predict_batch({&g, 1}, h).front(); }
};

using PredictorPtr = std::shared_ptr<Predictor>;

/// Returns the exact induced count.
PredictorPtr oracle_model(Pattern h);

/// Exact count plus N(0, sigma^2) noise keyed by (seed, graph fingerprint).
PredictorPtr noisy_oracle(Pattern h, double sigma, std::uint64_t seed);

/// Fixed graph statistics fed to the linear baseline:
/// n, |E|, raw degree moments 1..4, and the number of (not necessarily
/// induced) wedges sum_v C(d(v), 2).
std::vector<double> graph_features(const Graph& g);

struct LabeledGraph {
  Graph graph;
  double label = 0;
};

/// Least-squares linear model on graph_features. Columns are standardized
/// with training statistics; rank-deficient normal equations get a ridge term.
class FeatureRegressor final : public Predictor {
 public:
  static constexpr double kRidge = 1e-6;

  static FeatureRegressor fit(std::span<const LabeledGraph> train, Pattern h);
  static FeatureRegressor from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;

  std::vector<double> predict_batch(std::span<const Graph> graphs, Pattern h) override;
  [[nodiscard]] std::string name() const override { return "regressor:" + std::string(subcount::name(pattern_)); }
  [[nodiscard]] bool deterministic() const override { return true; }

  [[nodiscard]] double predict_one(const Graph& g) const;
  [[nodiscard]] Pattern pattern() const { return pattern_; }
  [[nodiscard]] bool used_ridge() const { return used_ridge_; }

 private:
  Pattern pattern_ = Pattern::Triangle;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> weights_;  // intercept first
  bool used_ridge_ = false;
};

PredictorPtr train_feature_regressor(std::span<const LabeledGraph> train, Pattern h);

inline constexpr std::string_view kProtocolVersion = "subcount-attack/1";

/// Client for an adapter process speaking newline-delimited JSON.
///
/// Endpoints: "stdio:<shell command>" spawns the adapter and talks over its
/// stdin/stdout; "tcp:<host>:<port>" connects to a listening adapter.
/// Requests on one client are serialized.
class ExternalModelClient final : public Predictor {
 public:
  ExternalModelClient(const std::string& endpoint, std::chrono::milliseconds timeout);
  ~ExternalModelClient() override;
  ExternalModelClient(const ExternalModelClient&) = delete;
  ExternalModelClient& operator=(const ExternalModelClient&) = delete;

  std::vector<double> predict_batch(std::span<const Graph> graphs, Pattern h) override;
  [[nodiscard]] std::string name() const override { return "external:" + model_name_; }
  [[nodiscard]] bool deterministic() const override { return true; }

 private:
  std::string read_line();
  void write_line(const std::string& line);
  void shutdown();

  std::chrono::milliseconds timeout_;
  int read_fd_ = -1;
  int write_fd_ = -1;
  int child_pid_ = -1;
  bool socket_ = false;
  std::string buffer_;
  std::string model_name_;
  std::uint64_t next_id_ = 1;
  std::mutex mutex_;
};

inline constexpr std::chrono::seconds kDefaultModelTimeout{60};

PredictorPtr external_model_client(const std::string& endpoint,
                                   std::chrono::milliseconds timeout = kDefaultModelTimeout);

}  // namespace subcount
