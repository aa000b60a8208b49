#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "subcount/attack.hpp"
#include "subcount/datasets.hpp"
#include "subcount/metrics.hpp"
#include "subcount/models.hpp"

namespace subcount {

/// Target model description as given on the command line:
/// "oracle", "noisy:SIGMA", "regressor", "regressor:PATH", "external:ENDPOINT".
struct ModelSpec {
  enum class Kind { Oracle, NoisyOracle, FeatureRegressor, External };
  Kind kind = Kind::Oracle;
  double sigma = 0;
  std::string path;  // regressor weights/dataset, or external endpoint

  static ModelSpec parse(const std::string& text);
  [[nodiscard]] std::string to_string() const;
};

/// SUBCOUNT_MODEL_TIMEOUT_SECS, or the 60 s default.
std::chrono::milliseconds model_timeout_from_env();

/// `seed` seeds the noisy oracle. A bare "regressor" is fit on the train
/// split of `train_source`; "regressor:PATH" loads saved weights (JSON) or
/// fits on the train split of a dataset file (JSONL).
PredictorPtr make_predictor(const ModelSpec& spec, Pattern h, std::uint64_t seed, const Dataset* train_source,
                            std::chrono::milliseconds timeout = kDefaultModelTimeout);

std::vector<LabeledGraph> labeled_split(const Dataset& d, Split s, Pattern h);

/// max(1, round(pct/100 * mean edge count)).
int absolute_budget(double budget_pct, double mean_edges);

struct CampaignSpec {
  std::filesystem::path dataset;
  Pattern pattern = Pattern::Triangle;
  std::vector<ModelSpec> models;
  std::vector<Space> spaces{Space::Constrained, Space::CountPreserving, Space::SubgraphPreserving};
  std::vector<double> budget_pcts{1, 5, 10, 25};
  double delta = 1.0;
  std::optional<int> beam;  // default: 1 for constrained, 10 for preserving spaces
  std::optional<std::size_t> sample_m;
  int num_clean = 100;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  std::filesystem::path out;
};

struct CampaignRecord {
  std::size_t model_index = 0;
  double budget_pct = 0;
  AttackResult result;
  std::vector<bool> transfers;  // to every other model, in model order
};

struct CurveRow {
  Space space;
  double budget_pct;
  int budget_abs;
  double rate_mean, rate_se;
  double transfer_mean, transfer_se;
};

struct AucRow {
  Space space;
  double auc_mean, auc_se;
  double transfer_auc_mean, transfer_auc_se;
};

struct CampaignOutput {
  std::vector<std::string> model_names;
  std::vector<std::size_t> clean_found;  // per model
  std::vector<CampaignRecord> records;
  std::vector<CurveRow> curve;
  std::vector<AucRow> auc;
  std::optional<std::string> error;  // model failure; outputs are partial
};

/// Selects clean graphs, runs every (model, space, budget) attack, validates
/// each result from scratch, and writes campaign.jsonl, summary.csv,
/// curve.csv, auc.csv and transfer.csv under spec.out (when non-empty).
CampaignOutput run_campaign(const CampaignSpec& spec, std::ostream& log);

/// Same as run_campaign but with an already loaded dataset and predictors.
CampaignOutput run_campaign(const CampaignSpec& spec, const Dataset& data, const std::vector<PredictorPtr>& models,
                            std::ostream& log);

std::vector<CampaignRecord> read_campaign(const std::filesystem::path& path);

struct OodRow {
  std::string label;  // "d1", "OOD", "d2"
  std::string trained_on;
  std::string tested_on;
  double l1;
  double lc;
};

/// Error table of one model on the test splits of two datasets. A regressor
/// spec trains on the first dataset's train split (and, for the "d2" row,
/// on the second).
std::vector<OodRow> ood_eval(const ModelSpec& model, const Dataset& a, const Dataset& b, Pattern h,
                             std::uint64_t seed, std::chrono::milliseconds timeout = kDefaultModelTimeout);

struct ShiftRow {
  Pattern pattern;
  Space space;
  double budget_pct;
  std::size_t attacks;
  std::size_t adversarial;
  bool omitted;  // success rate below 5%
  ShiftReport counts;
  ShiftReport edges;
};

inline constexpr double kMinShiftSuccessRate = 0.05;

/// Pools every model's attacks per (pattern, space, budget). Clean sample:
/// the clean graphs of the adversarial results; adversarial sample: their G*.
/// When `transferring_only` is set, only results that also transfer to every
/// other model count as adversarial.
std::vector<ShiftRow> shift_rows(const std::vector<CampaignRecord>& records, const Dataset* data,
                                 bool transferring_only);

/// "insufficient" (fewer than 25 adversarial graphs), "omitted" (success
/// rate below 5%), or "ok".
std::string shift_status(const ShiftRow& row, const ShiftReport& rep);

void write_shift_csv(const std::vector<ShiftRow>& rows, const std::filesystem::path& out_dir);

}  // namespace subcount
