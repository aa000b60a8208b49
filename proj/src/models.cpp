#include "subcount/models.hpp"

#include <Eigen/Dense>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <random>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "subcount/json.hpp"

namespace subcount {

namespace {

class OracleModel final : public Predictor {
 public:
  explicit OracleModel(Pattern h) : pattern_(h) {}

  std::vector<double> predict_batch(std::span<const Graph> graphs, Pattern h) override {
    std::vector<double> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(static_cast<double>(count_induced(g, h)));
    return out;
  }
  [[nodiscard]] std::string name() const override { return "oracle:" + std::string(subcount::name(pattern_)); }
  [[nodiscard]] bool deterministic() const override { return true; }

 private:
  Pattern pattern_;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class NoisyOracle final : public Predictor {
 public:
  NoisyOracle(Pattern h, double sigma, std::uint64_t seed) : pattern_(h), sigma_(sigma), seed_(seed) {
    if (!(sigma >= 0)) throw std::invalid_argument("noisy_oracle: sigma must be >= 0");
  }

  std::vector<double> predict_batch(std::span<const Graph> graphs, Pattern h) override {
    std::vector<double> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) {
      double value = static_cast<double>(count_induced(g, h));
      if (sigma_ > 0) {
        std::mt19937_64 rng(splitmix64(seed_ ^ splitmix64(fingerprint(g))));
        std::normal_distribution<double> noise(0.0, sigma_);
        value += noise(rng);
      }
      out.push_back(value);
    }
    return out;
  }
  [[nodiscard]] std::string name() const override {
    return "noisy:" + std::to_string(sigma_) + ":" + std::to_string(seed_);
  }
  [[nodiscard]] bool deterministic() const override { return true; }

 private:
  Pattern pattern_;
  double sigma_;
  std::uint64_t seed_;
};

}  // namespace

PredictorPtr oracle_model(Pattern h) { return std::make_shared<OracleModel>(h); }

PredictorPtr noisy_oracle(Pattern h, double sigma, std::uint64_t seed) {
  return std::make_shared<NoisyOracle>(h, sigma, seed);
}

std::vector<double> graph_features(const Graph& g) {
  const int n = g.num_nodes();
  double m[5] = {0, 0, 0, 0, 0};
  double wedges = 0;
  for (Node v = 0; v < n; ++v) {
    const double d = g.degree(v);
    double pw = 1;
    for (int k = 1; k <= 4; ++k) {
      pw *= d;
      m[k] += pw;
    }
    wedges += d * (d - 1) / 2;
  }
  const double denom = n > 0 ? n : 1;
  return {static_cast<double>(n), static_cast<double>(g.num_edges()),
          m[1] / denom, m[2] / denom, m[3] / denom, m[4] / denom, wedges};
}

FeatureRegressor FeatureRegressor::fit(std::span<const LabeledGraph> train, Pattern h) {
  if (train.empty()) throw std::invalid_argument("train_feature_regressor: empty training split");
  const std::size_t rows = train.size();
  const std::size_t k = graph_features(train.front().graph).size();

  Eigen::MatrixXd raw(rows, k);
  Eigen::VectorXd y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    auto f = graph_features(train[r].graph);
    for (std::size_t c = 0; c < k; ++c) raw(r, c) = f[c];
    y(r) = train[r].label;
  }

  FeatureRegressor model;
  model.pattern_ = h;
  model.mean_.resize(k);
  model.scale_.resize(k);
  Eigen::MatrixXd x(rows, k + 1);
  x.col(0).setOnes();
  for (std::size_t c = 0; c < k; ++c) {
    const double mu = raw.col(c).mean();
    const double sd = std::sqrt((raw.col(c).array() - mu).square().mean());
    model.mean_[c] = mu;
    model.scale_[c] = sd > 0 ? sd : 1.0;
    x.col(c + 1) = (raw.col(c).array() - mu) / model.scale_[c];
  }

  Eigen::MatrixXd normal = x.transpose() * x;
  Eigen::VectorXd rhs = x.transpose() * y;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  lu.setThreshold(1e-10);
  Eigen::VectorXd w;
  if (lu.rank() == normal.rows()) {
    w = normal.ldlt().solve(rhs);
  } else {
    model.used_ridge_ = true;
    normal.diagonal().array() += kRidge;
    w = normal.ldlt().solve(rhs);
  }
  model.weights_.assign(w.data(), w.data() + w.size());
  return model;
}

double FeatureRegressor::predict_one(const Graph& g) const {
  auto f = graph_features(g);
  double out = weights_[0];
  for (std::size_t c = 0; c < f.size(); ++c) out += weights_[c + 1] * (f[c] - mean_[c]) / scale_[c];
  return out;
}

std::vector<double> FeatureRegressor::predict_batch(std::span<const Graph> graphs, Pattern h) {
  if (h != pattern_) {
    throw ModelError(ModelError::Kind::Usage, "regressor trained for " + std::string(subcount::name(pattern_)) +
                                                  " queried for " + std::string(subcount::name(h)));
  }
  std::vector<double> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(predict_one(g));
  return out;
}

nlohmann::json FeatureRegressor::to_json() const {
  return {{"kind", "regressor"},   {"pattern", std::string(subcount::name(pattern_))},
          {"mean", mean_},         {"scale", scale_},
          {"weights", weights_},   {"ridge", used_ridge_}};
}

FeatureRegressor FeatureRegressor::from_json(const nlohmann::json& j) {
  FeatureRegressor model;
  model.pattern_ = parse_pattern(j.at("pattern").get<std::string>());
  model.mean_ = j.at("mean").get<std::vector<double>>();
  model.scale_ = j.at("scale").get<std::vector<double>>();
  model.weights_ = j.at("weights").get<std::vector<double>>();
  model.used_ridge_ = j.value("ridge", false);
  if (model.mean_.size() != model.scale_.size() || model.weights_.size() != model.mean_.size() + 1) {
    throw std::invalid_argument("regressor JSON: inconsistent vector lengths");
  }
  return model;
}

PredictorPtr train_feature_regressor(std::span<const LabeledGraph> train, Pattern h) {
  return std::make_shared<FeatureRegressor>(FeatureRegressor::fit(train, h));
}

// ---------------------------------------------------------------------------
// External adapter client

namespace {

[[noreturn]] void fail(ModelError::Kind kind, const std::string& what) { throw ModelError(kind, what); }

int connect_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    fail(ModelError::Kind::Connection, "resolve " + host + ":" + port + ": " + gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) fail(ModelError::Kind::Connection, "cannot connect to " + host + ":" + port);
  return fd;
}

}  // namespace

ExternalModelClient::ExternalModelClient(const std::string& endpoint, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  std::signal(SIGPIPE, SIG_IGN);
  if (endpoint.rfind("stdio:", 0) == 0) {
    const std::string command = endpoint.substr(6);
    if (command.empty()) fail(ModelError::Kind::Usage, "stdio endpoint needs a command");
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
      fail(ModelError::Kind::Connection, std::string("pipe: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) fail(ModelError::Kind::Connection, std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    child_pid_ = pid;
  } else if (endpoint.rfind("tcp:", 0) == 0) {
    const std::string rest = endpoint.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) fail(ModelError::Kind::Usage, "tcp endpoint must be tcp:HOST:PORT");
    read_fd_ = write_fd_ = connect_tcp(rest.substr(0, colon), rest.substr(colon + 1));
    socket_ = true;
  } else {
    fail(ModelError::Kind::Usage, "unknown endpoint '" + endpoint + "' (expected stdio:CMD or tcp:HOST:PORT)");
  }

  try {
    const auto hello = nlohmann::json::parse(read_line());
    if (hello.value("protocol", "") != kProtocolVersion) {
      fail(ModelError::Kind::Protocol, "handshake: unsupported protocol " + hello.dump());
    }
    model_name_ = hello.value("model", "unnamed");
  } catch (const nlohmann::json::exception& e) {
    shutdown();
    fail(ModelError::Kind::Protocol, std::string("handshake: malformed JSON: ") + e.what());
  } catch (...) {
    shutdown();
    throw;
  }
}

ExternalModelClient::~ExternalModelClient() { shutdown(); }

void ExternalModelClient::shutdown() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  read_fd_ = write_fd_ = -1;
  if (child_pid_ > 0) {
    ::kill(child_pid_, SIGTERM);
    int status = 0;
    ::waitpid(child_pid_, &status, 0);
    child_pid_ = -1;
  }
}

std::string ExternalModelClient::read_line() {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + timeout_;
  while (true) {
    if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      return line;
    }
    if (read_fd_ < 0) fail(ModelError::Kind::Connection, "adapter connection is closed");
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    if (left.count() <= 0) fail(ModelError::Kind::Timeout, "adapter timed out after " + std::to_string(timeout_.count()) + " ms");
    pollfd pfd{read_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      fail(ModelError::Kind::Connection, std::string("poll: ") + std::strerror(errno));
    }
    if (rc == 0) continue;
    char chunk[4096];
    const ssize_t got = ::read(read_fd_, chunk, sizeof chunk);
    if (got < 0) {
      if (errno == EINTR) continue;
      fail(ModelError::Kind::Connection, std::string("read: ") + std::strerror(errno));
    }
    if (got == 0) fail(ModelError::Kind::Connection, "adapter closed the connection");
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

void ExternalModelClient::write_line(const std::string& line) {
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t put = socket_ ? ::send(write_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL)
                                : ::write(write_fd_, data.data() + off, data.size() - off);
    if (put < 0) {
      if (errno == EINTR) continue;
      fail(ModelError::Kind::Connection, std::string("write: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(put);
  }
}

std::vector<double> ExternalModelClient::predict_batch(std::span<const Graph> graphs, Pattern h) {
  std::lock_guard lock(mutex_);
  const std::uint64_t id = next_id_++;
  nlohmann::ordered_json request;
  request["id"] = id;
  request["pattern"] = std::string(subcount::name(h));
  auto list = nlohmann::ordered_json::array();
  for (const auto& g : graphs) list.push_back(to_ordered_json(g));
  request["graphs"] = std::move(list);
  write_line(request.dump());

  nlohmann::json response;
  try {
    response = nlohmann::json::parse(read_line());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ModelError::Kind::Protocol, std::string("malformed response: ") + e.what());
  }
  if (!response.is_object() || !response.contains("id") || !response["id"].is_number_unsigned()) {
    fail(ModelError::Kind::Protocol, "response without id: " + response.dump());
  }
  if (response["id"].get<std::uint64_t>() != id) {
    fail(ModelError::Kind::Protocol, "response id " + response["id"].dump() + " does not match request " +
                                         std::to_string(id));
  }
  if (response.contains("error")) fail(ModelError::Kind::Remote, "adapter error: " + response["error"].dump());
  if (!response.contains("preds") || !response["preds"].is_array()) {
    fail(ModelError::Kind::Protocol, "response without preds: " + response.dump());
  }
  const auto& preds = response["preds"];
  if (preds.size() != graphs.size()) {
    fail(ModelError::Kind::Protocol, "adapter returned " + std::to_string(preds.size()) + " predictions for " +
                                         std::to_string(graphs.size()) + " graphs");
  }
  std::vector<double> out;
  out.reserve(preds.size());
  for (const auto& p : preds) {
    if (!p.is_number()) fail(ModelError::Kind::Protocol, "non-numeric prediction " + p.dump());
    out.push_back(p.get<double>());
  }
  return out;
}

PredictorPtr external_model_client(const std::string& endpoint, std::chrono::milliseconds timeout) {
  return std::make_shared<ExternalModelClient>(endpoint, timeout);
}

}  // namespace subcount
