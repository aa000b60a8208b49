#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "subcount/counting.hpp"
#include "subcount/graph.hpp"

namespace subcount {

struct SbmParams {
  std::vector<int> community_sizes;
  std::vector<double> p_in;  // one per community
  double p_out = 0;
};

struct ErParams {
  int n = 0;
  double p = 0;
};

struct DatasetSpec {
  std::variant<SbmParams, ErParams> generator;
  int num_graphs = 0;
  double train_fraction = 0.3;
  double val_fraction = 0.2;
  double test_fraction = 0.5;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on bad probabilities, sizes or fractions.
  void validate() const;

  /// 5,000 graphs, three communities of 10 with p_in 0.2/0.3/0.4, p_out 0.1.
  static DatasetSpec sbm_default(std::uint64_t seed = 0);
  /// 5,000 ER graphs with 10 nodes.
  static DatasetSpec er_default(double p, std::uint64_t seed = 0);
};

/// Communities occupy contiguous node blocks in the order given.
Graph gen_sbm(std::span<const int> sizes, std::span<const double> p_in, double p_out, std::mt19937_64& rng);
Graph gen_er(int n, double p, std::mt19937_64& rng);

enum class Split { Train, Val, Test };
std::string split_name(Split s);
Split parse_split(std::string_view s);

struct Dataset {
  DatasetSpec spec;
  std::vector<Graph> graphs;
  std::vector<CountVector> labels;
  std::vector<Split> split;  // per graph

  [[nodiscard]] std::vector<std::size_t> indices(Split s) const;
  [[nodiscard]] double mean_edges() const;
};

/// Graph k is generated from its own stream seeded by (seed, k); the split
/// shuffle uses a stream of its own. Train and val sizes are floored and
/// the remainder goes to test.
Dataset build_dataset(const DatasetSpec& spec);

nlohmann::ordered_json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const CountVector& c);
CountVector count_vector_from_json(const nlohmann::json& j);

/// JSON-lines file plus "<path>.manifest.json".
void write_dataset(const Dataset& d, const std::filesystem::path& path);

/// Throws std::runtime_error when a stored label differs from a fresh count
/// and `verify_labels` is set.
Dataset read_dataset(const std::filesystem::path& path, bool verify_labels = true);

std::filesystem::path manifest_path(const std::filesystem::path& dataset_path);

}  // namespace subcount
