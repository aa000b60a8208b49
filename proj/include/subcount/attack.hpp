#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "subcount/counting.hpp"
#include "subcount/graph.hpp"
#include "subcount/models.hpp"
#include "subcount/perturbation.hpp"

namespace subcount {

enum class Space { Constrained, CountPreserving, SubgraphPreserving };

std::string space_name(Space s);  // "constrained" | "count" | "subgraph"
Space parse_space(std::string_view s);

struct AttackConfig {
  Space space = Space::Constrained;
  int budget = 1;                          // max net toggled pairs
  int beam_width = 1;                      // 1 = greedy
  double margin = 1.0;                     // delta in the relative-loss condition
  std::optional<std::size_t> sample_m;     // degree-weighted subsample of P1 per member
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when budget or beam width is below 1.
  void validate() const;
};

/// |pred - count|
double adversarial_loss(double pred, Count true_count);

/// floor(x + 0.5), also for negative x.
Count round_prediction(double pred);

struct Verdict {
  bool clean_correct = false;     // (i) clean graph rounds to its count
  bool perturbed_wrong = false;   // (ii) perturbed graph rounds to a wrong count
  bool margin_exceeded = false;   // (iii) relative loss increase above delta

  [[nodiscard]] bool adversarial() const { return clean_correct && perturbed_wrong && margin_exceeded; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct Observation {
  double pred = 0;
  Count count = 0;
};

/// Relative increase is +infinity when the clean loss is 0 and the perturbed
/// loss is positive; 0/0 never exceeds the margin.
Verdict classify_adversarial(Observation clean, Observation perturbed, double margin);

struct Candidate {
  EditSequence edits;
  Graph graph;
  Count count = 0;
  double pred = 0;
  double loss = 0;
};

struct AttackResult {
  std::int64_t clean_id = -1;
  Pattern pattern = Pattern::Triangle;
  AttackConfig config;
  std::string model;

  Graph clean_graph;
  Observation clean;
  double clean_loss = 0;

  /// Best beam member after each step.
  std::vector<Candidate> steps;
  /// Highest-loss graph seen over the whole trajectory (clean graph included).
  Candidate best;
  /// argmax over the last beam.
  Candidate final_beam_best;

  Verdict verdict;
  std::size_t queries = 0;
  bool terminated_early = false;
  std::optional<std::string> error;  // model failure; trajectory is partial
};

AttackResult beam_attack(Predictor& model, const Graph& g, Pattern h, const AttackConfig& cfg,
                         std::int64_t clean_id = -1);

/// Recomputes everything stored in the result from scratch: replays the
/// edits, recounts G*, checks budget, space and verdict. Throws
/// std::logic_error describing the first violation.
void validate_result(const AttackResult& r);

struct TransferCell {
  std::optional<bool> adversarial;  // empty when the model failed
  std::string error;
};

struct TransferReport {
  std::vector<std::string> models;
  std::vector<std::vector<TransferCell>> cells;  // [result][model]
  std::vector<double> rates;                     // per model, over all results
};

/// Re-queries each model on every (clean, G*) pair. A cell succeeds when G*
/// was adversarial for the source model and is also adversarial for the
/// other model.
TransferReport transfer_eval(const std::vector<AttackResult>& results,
                             const std::vector<PredictorPtr>& others, double margin);

nlohmann::ordered_json to_json(const AttackResult& r);
AttackResult attack_result_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const EditSequence& seq);
EditSequence edit_sequence_from_json(const nlohmann::json& j);

}  // namespace subcount
