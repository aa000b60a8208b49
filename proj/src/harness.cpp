#include "subcount/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "subcount/json.hpp"

namespace subcount {

ModelSpec ModelSpec::parse(const std::string& text) {
  ModelSpec s;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "oracle" && rest.empty()) {
    s.kind = Kind::Oracle;
  } else if (head == "noisy") {
    s.kind = Kind::NoisyOracle;
    try {
      std::size_t used = 0;
      s.sigma = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("noisy model needs a numeric sigma, e.g. noisy:2.0");
    }
    if (!(s.sigma >= 0)) throw std::invalid_argument("noisy sigma must be >= 0");
  } else if (head == "regressor") {
    s.kind = Kind::FeatureRegressor;
    s.path = rest;
  } else if (head == "external" && !rest.empty()) {
    s.kind = Kind::External;
    s.path = rest;
  } else {
    throw std::invalid_argument("unknown model '" + text +
                                "' (expected oracle, noisy:SIGMA, regressor[:PATH] or external:ENDPOINT)");
  }
  return s;
}

std::string ModelSpec::to_string() const {
  switch (kind) {
    case Kind::Oracle: return "oracle";
    case Kind::NoisyOracle: {
      std::ostringstream os;
      os << "noisy:" << sigma;
      return os.str();
    }
    case Kind::FeatureRegressor: return path.empty() ? "regressor" : "regressor:" + path;
    case Kind::External: return "external:" + path;
  }
  return "?";
}

std::chrono::milliseconds model_timeout_from_env() {
  if (const char* v = std::getenv("SUBCOUNT_MODEL_TIMEOUT_SECS"); v != nullptr && *v != '\0') {
    const double secs = std::stod(v);
    if (!(secs > 0)) throw std::invalid_argument("SUBCOUNT_MODEL_TIMEOUT_SECS must be positive");
    return std::chrono::milliseconds(static_cast<long long>(secs * 1000));
  }
  return kDefaultModelTimeout;
}

std::vector<LabeledGraph> labeled_split(const Dataset& d, Split s, Pattern h) {
  std::vector<LabeledGraph> out;
  for (std::size_t k : d.indices(s)) out.push_back({d.graphs[k], static_cast<double>(d.labels[k][h])});
  return out;
}

PredictorPtr make_predictor(const ModelSpec& spec, Pattern h, std::uint64_t seed, const Dataset* train_source,
                            std::chrono::milliseconds timeout) {
  switch (spec.kind) {
    case ModelSpec::Kind::Oracle: return oracle_model(h);
    case ModelSpec::Kind::NoisyOracle: return noisy_oracle(h, spec.sigma, seed);
    case ModelSpec::Kind::External: return external_model_client(spec.path, timeout);
    case ModelSpec::Kind::FeatureRegressor: {
      if (spec.path.empty()) {
        if (train_source == nullptr) throw std::invalid_argument("bare 'regressor' needs a dataset to train on");
        return train_feature_regressor(labeled_split(*train_source, Split::Train, h), h);
      }
      std::ifstream in(spec.path);
      if (!in) throw std::runtime_error("cannot open regressor source " + spec.path);
      if (in.peek() == '{') {
        // Saved weights are one JSON object; a dataset is several lines.
        std::string first;
        std::getline(in, first);
        auto j = nlohmann::json::parse(first, nullptr, false);
        if (!j.is_discarded() && j.value("kind", "") == "regressor") {
          auto model = std::make_shared<FeatureRegressor>(FeatureRegressor::from_json(j));
          if (model->pattern() != h) throw std::invalid_argument("saved regressor was trained for another pattern");
          return model;
        }
      }
      const Dataset d = read_dataset(spec.path);
      return train_feature_regressor(labeled_split(d, Split::Train, h), h);
    }
  }
  throw std::logic_error("unhandled model kind");
}

int absolute_budget(double budget_pct, double mean_edges) {
  return std::max(1, static_cast<int>(std::lround(budget_pct / 100.0 * mean_edges)));
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::max(1U, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t k = next.fetch_add(1);
        if (k >= n) return;
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::pair<double, double> mean_se(const std::vector<double>& xs) {
  if (xs.empty()) return {0, 0};
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(xs.size()))};
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

nlohmann::ordered_json record_json(const CampaignRecord& rec) {
  nlohmann::ordered_json line;
  line["model_index"] = rec.model_index;
  line["budget_pct"] = rec.budget_pct;
  line["transfers"] = rec.transfers;
  const auto result = to_json(rec.result);
  for (const auto& [k, v] : result.items()) line[k] = v;
  return line;
}

// Selects the first `want` test graphs the model predicts correctly.
std::vector<std::size_t> select_clean(Predictor& model, const Dataset& data, Pattern h, int want) {
  std::vector<std::size_t> chosen;
  const auto test = data.indices(Split::Test);
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < test.size() && chosen.size() < static_cast<std::size_t>(want); start += kChunk) {
    const std::size_t stop = std::min(test.size(), start + kChunk);
    std::vector<Graph> batch;
    for (std::size_t k = start; k < stop; ++k) batch.push_back(data.graphs[test[k]]);
    const auto preds = model.predict_batch(batch, h);
    for (std::size_t k = start; k < stop && chosen.size() < static_cast<std::size_t>(want); ++k) {
      if (round_prediction(preds[k - start]) == data.labels[test[k]][h]) chosen.push_back(test[k]);
    }
  }
  return chosen;
}

void write_campaign_files(const CampaignSpec& spec, const CampaignOutput& out) {
  if (spec.out.empty()) return;
  std::filesystem::create_directories(spec.out);
  {
    auto f = open_out(spec.out / "campaign.jsonl");
    for (const auto& rec : out.records) f << record_json(rec).dump() << '\n';
  }
  {
    auto f = open_out(spec.out / "summary.csv");
    f << "pattern,space,budget_pct,budget_abs,model,attacks,adversarial,success_rate\n";
    std::map<std::tuple<std::size_t, int, double>, std::pair<std::size_t, std::size_t>> tally;
    std::map<std::tuple<std::size_t, int, double>, int> budgets;
    for (const auto& rec : out.records) {
      auto key = std::make_tuple(rec.model_index, static_cast<int>(rec.result.config.space), rec.budget_pct);
      auto& [n, hits] = tally[key];
      ++n;
      hits += rec.result.verdict.adversarial() ? 1 : 0;
      budgets[key] = rec.result.config.budget;
    }
    for (const auto& [key, v] : tally) {
      const auto& [m, space, pct] = key;
      f << name(spec.pattern) << ',' << space_name(static_cast<Space>(space)) << ',' << fmt(pct) << ','
        << budgets[key] << ',' << out.model_names[m] << ',' << v.first << ',' << v.second << ','
        << fmt(static_cast<double>(v.second) / static_cast<double>(v.first)) << '\n';
    }
  }
  {
    auto f = open_out(spec.out / "curve.csv");
    f << "pattern,space,budget_pct,budget_abs,rate_mean,rate_se,transfer_mean,transfer_se\n";
    for (const auto& r : out.curve) {
      f << name(spec.pattern) << ',' << space_name(r.space) << ',' << fmt(r.budget_pct) << ',' << r.budget_abs << ','
        << fmt(r.rate_mean) << ',' << fmt(r.rate_se) << ',' << fmt(r.transfer_mean) << ',' << fmt(r.transfer_se)
        << '\n';
    }
  }
  {
    auto f = open_out(spec.out / "auc.csv");
    f << "pattern,space,auc_mean,auc_se,transfer_auc_mean,transfer_auc_se\n";
    for (const auto& r : out.auc) {
      f << name(spec.pattern) << ',' << space_name(r.space) << ',' << fmt(r.auc_mean) << ',' << fmt(r.auc_se) << ','
        << fmt(r.transfer_auc_mean) << ',' << fmt(r.transfer_auc_se) << '\n';
    }
  }
  {
    auto f = open_out(spec.out / "transfer.csv");
    f << "pattern,space,budget_pct,source_model,target_model,attacks,transferred,rate\n";
    std::map<std::tuple<int, double, std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>> tally;
    for (const auto& rec : out.records) {
      std::size_t slot = 0;
      for (std::size_t m = 0; m < out.model_names.size(); ++m) {
        if (m == rec.model_index) continue;
        auto& [n, hits] =
            tally[{static_cast<int>(rec.result.config.space), rec.budget_pct, rec.model_index, m}];
        ++n;
        if (slot < rec.transfers.size() && rec.transfers[slot]) ++hits;
        ++slot;
      }
    }
    for (const auto& [key, v] : tally) {
      const auto& [space, pct, src, dst] = key;
      f << name(spec.pattern) << ',' << space_name(static_cast<Space>(space)) << ',' << fmt(pct) << ','
        << out.model_names[src] << ',' << out.model_names[dst] << ',' << v.first << ',' << v.second << ','
        << fmt(static_cast<double>(v.second) / static_cast<double>(v.first)) << '\n';
    }
  }
}

}  // namespace

CampaignOutput run_campaign(const CampaignSpec& spec, std::ostream& log) {
  const Dataset data = read_dataset(spec.dataset);
  const auto timeout = model_timeout_from_env();
  std::vector<PredictorPtr> models;
  for (std::size_t m = 0; m < spec.models.size(); ++m) {
    models.push_back(make_predictor(spec.models[m], spec.pattern, spec.seed + m, &data, timeout));
  }
  return run_campaign(spec, data, models, log);
}

CampaignOutput run_campaign(const CampaignSpec& spec, const Dataset& data, const std::vector<PredictorPtr>& models,
                            std::ostream& log) {
  if (models.empty()) throw std::invalid_argument("campaign needs at least one model");
  if (spec.budget_pcts.empty() || spec.spaces.empty()) throw std::invalid_argument("campaign needs spaces and budgets");
  if (!std::is_sorted(spec.budget_pcts.begin(), spec.budget_pcts.end()) ||
      std::adjacent_find(spec.budget_pcts.begin(), spec.budget_pcts.end()) != spec.budget_pcts.end()) {
    throw std::invalid_argument("budget percentages must be strictly increasing");
  }
  const auto test_size = data.indices(Split::Test).size();
  if (spec.num_clean < 1 || static_cast<std::size_t>(spec.num_clean) > test_size) {
    throw std::invalid_argument("clean-graph count must lie in [1, " + std::to_string(test_size) + "]");
  }

  CampaignOutput out;
  for (const auto& m : models) out.model_names.push_back(m->name());
  const double mean_edges = data.mean_edges();
  const std::size_t num_models = models.size();

  // per (model, space, budget) success and transfer rates
  std::map<std::tuple<std::size_t, Space, double>, std::pair<double, double>> rates;

  try {
    for (std::size_t mi = 0; mi < num_models; ++mi) {
      const auto clean = select_clean(*models[mi], data, spec.pattern, spec.num_clean);
      out.clean_found.push_back(clean.size());
      if (clean.size() < static_cast<std::size_t>(spec.num_clean)) {
        log << "warning: model " << out.model_names[mi] << " predicts only " << clean.size()
            << " test graphs correctly (wanted " << spec.num_clean << ")\n";
      }
      if (clean.empty()) {
        for (Space space : spec.spaces)
          for (double pct : spec.budget_pcts) rates[{mi, space, pct}] = {0.0, 0.0};
        continue;
      }
      std::vector<PredictorPtr> others;
      for (std::size_t mj = 0; mj < num_models; ++mj)
        if (mj != mi) others.push_back(models[mj]);

      for (Space space : spec.spaces) {
        for (double pct : spec.budget_pcts) {
          AttackConfig cfg;
          cfg.space = space;
          cfg.budget = absolute_budget(pct, mean_edges);
          cfg.beam_width = spec.beam.value_or(space == Space::Constrained ? 1 : 10);
          cfg.margin = spec.delta;
          cfg.sample_m = spec.sample_m;
          cfg.seed = spec.seed;

          std::vector<AttackResult> results(clean.size());
          parallel_for(clean.size(), spec.threads, [&](std::size_t k) {
            results[k] = beam_attack(*models[mi], data.graphs[clean[k]], spec.pattern, cfg,
                                     static_cast<std::int64_t>(clean[k]));
          });
          for (const auto& r : results) validate_result(r);

          std::vector<std::vector<bool>> transfers(results.size());
          double transfer_rate = 0;
          if (!others.empty()) {
            const TransferReport rep = transfer_eval(results, others, spec.delta);
            for (std::size_t k = 0; k < results.size(); ++k)
              for (const auto& cell : rep.cells[k]) transfers[k].push_back(cell.adversarial.value_or(false));
            for (double r : rep.rates) transfer_rate += r;
            transfer_rate /= static_cast<double>(rep.rates.size());
          }

          std::size_t hits = 0;
          std::optional<std::string> failure;
          for (std::size_t k = 0; k < results.size(); ++k) {
            if (results[k].error && !failure) failure = results[k].error;
            hits += results[k].verdict.adversarial() ? 1 : 0;
            out.records.push_back({mi, pct, std::move(results[k]), std::move(transfers[k])});
          }
          rates[{mi, space, pct}] = {static_cast<double>(hits) / static_cast<double>(clean.size()), transfer_rate};
          log << out.model_names[mi] << ' ' << space_name(space) << ' ' << pct << "% (budget " << cfg.budget
              << ", beam " << cfg.beam_width << "): " << hits << '/' << clean.size() << " adversarial\n";
          if (failure) throw ModelError(ModelError::Kind::Remote, *failure);
        }
      }
    }
  } catch (const ModelError& e) {
    out.error = e.what();
    log << "error: model failure, campaign aborted: " << e.what() << '\n';
    write_campaign_files(spec, out);
    return out;
  }

  for (Space space : spec.spaces) {
    std::vector<double> aucs, transfer_aucs;
    std::vector<std::vector<CurvePoint>> own(num_models), transferred(num_models);
    for (double pct : spec.budget_pcts) {
      std::vector<double> r, t;
      for (std::size_t mi = 0; mi < num_models; ++mi) {
        const auto [rate, trate] = rates.at({mi, space, pct});
        r.push_back(rate);
        t.push_back(trate);
        own[mi].push_back({pct, rate});
        transferred[mi].push_back({pct, trate});
      }
      const auto [rm, rs] = mean_se(r);
      const auto [tm, ts] = mean_se(t);
      out.curve.push_back({space, pct, absolute_budget(pct, mean_edges), rm, rs, tm, ts});
    }
    if (spec.budget_pcts.size() >= 2) {
      for (std::size_t mi = 0; mi < num_models; ++mi) {
        aucs.push_back(auc_normalized(SuccessCurve(own[mi])));
        transfer_aucs.push_back(auc_normalized(SuccessCurve(transferred[mi])));
      }
      const auto [am, as] = mean_se(aucs);
      const auto [tm, ts] = mean_se(transfer_aucs);
      out.auc.push_back({space, am, as, tm, ts});
    }
  }
  write_campaign_files(spec, out);
  return out;
}

std::vector<CampaignRecord> read_campaign(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open campaign file " + path.string());
  std::vector<CampaignRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    CampaignRecord rec;
    rec.model_index = j.at("model_index").get<std::size_t>();
    rec.budget_pct = j.at("budget_pct").get<double>();
    rec.transfers = j.at("transfers").get<std::vector<bool>>();
    rec.result = attack_result_from_json(j);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<OodRow> ood_eval(const ModelSpec& model, const Dataset& a, const Dataset& b, Pattern h,
                             std::uint64_t seed, std::chrono::milliseconds timeout) {
  auto evaluate = [h](Predictor& p, const Dataset& d) {
    const auto test = d.indices(Split::Test);
    if (test.empty()) throw std::invalid_argument("OOD evaluation: empty test split");
    std::vector<Graph> graphs;
    std::vector<double> labels;
    for (std::size_t k : test) {
      graphs.push_back(d.graphs[k]);
      labels.push_back(static_cast<double>(d.labels[k][h]));
    }
    const auto preds = p.predict_batch(graphs, h);
    return std::make_pair(mae(preds, labels), mae_count_norm(preds, labels));
  };

  std::vector<OodRow> rows;
  const bool trains = model.kind == ModelSpec::Kind::FeatureRegressor && model.path.empty();
  auto first = make_predictor(model, h, seed, &a, timeout);
  const std::string trained_on = trains ? "d1" : "-";
  {
    const auto [l1, lc] = evaluate(*first, a);
    rows.push_back({"d1", trained_on, "d1", l1, lc});
  }
  {
    const auto [l1, lc] = evaluate(*first, b);
    rows.push_back({"OOD", trained_on, "d2", l1, lc});
  }
  if (trains) {
    auto second = make_predictor(model, h, seed, &b, timeout);
    const auto [l1, lc] = evaluate(*second, b);
    rows.push_back({"d2", "d2", "d2", l1, lc});
  }
  return rows;
}

std::vector<ShiftRow> shift_rows(const std::vector<CampaignRecord>& records, const Dataset* data,
                                 bool transferring_only) {
  struct Group {
    std::size_t attacks = 0;
    std::vector<Graph> clean;
    std::vector<Graph> adversarial;
  };
  std::map<std::tuple<int, int, double>, Group> groups;
  for (const auto& rec : records) {
    const auto& r = rec.result;
    if (data != nullptr) {
      if (r.clean_id < 0 || static_cast<std::size_t>(r.clean_id) >= data->graphs.size() ||
          !(data->graphs[static_cast<std::size_t>(r.clean_id)] == r.clean_graph)) {
        throw std::runtime_error("campaign record for clean graph " + std::to_string(r.clean_id) +
                                 " does not match the dataset");
      }
    }
    auto& g = groups[{static_cast<int>(r.pattern), static_cast<int>(r.config.space), rec.budget_pct}];
    ++g.attacks;
    bool hit = r.verdict.adversarial();
    if (transferring_only) hit = hit && std::all_of(rec.transfers.begin(), rec.transfers.end(), [](bool t) { return t; });
    if (hit) {
      g.clean.push_back(r.clean_graph);
      g.adversarial.push_back(r.best.graph);
    }
  }
  std::vector<ShiftRow> rows;
  for (const auto& [key, g] : groups) {
    const auto& [pattern, space, pct] = key;
    const Pattern h = static_cast<Pattern>(pattern);
    auto [counts, edges] = shift_report(g.clean, g.adversarial, h);
    const double rate = static_cast<double>(g.adversarial.size()) / static_cast<double>(g.attacks);
    rows.push_back({h, static_cast<Space>(space), pct, g.attacks, g.adversarial.size(), rate < kMinShiftSuccessRate,
                    std::move(counts), std::move(edges)});
  }
  return rows;
}

std::string shift_status(const ShiftRow& row, const ShiftReport& rep) {
  if (rep.insufficient()) return "insufficient";
  if (row.omitted) return "omitted";
  return "ok";
}

void write_shift_csv(const std::vector<ShiftRow>& rows, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto cell = [](const ShiftRow& r, const ShiftReport& rep) -> std::string {
    const std::string status = shift_status(r, rep);
    if (status == "omitted") return "-";
    if (status == "insufficient") return status;
    std::ostringstream os;
    os << std::setprecision(2) << rep.test->p_value;
    return os.str();
  };
  {
    auto f = open_out(out_dir / "shift.csv");
    f << "pattern,space,budget_pct,attacks,adversarial,success_rate,quantity,statistic,dof,p_value,status\n";
    for (const auto& r : rows) {
      for (const ShiftReport* rep : {&r.counts, &r.edges}) {
        f << name(r.pattern) << ',' << space_name(r.space) << ',' << fmt(r.budget_pct) << ',' << r.attacks << ','
          << r.adversarial << ',' << fmt(static_cast<double>(r.adversarial) / static_cast<double>(r.attacks)) << ','
          << rep->quantity << ',';
        const std::string status = shift_status(r, *rep);
        if (status == "ok") {
          f << fmt(rep->test->statistic) << ',' << fmt(rep->test->dof) << ',' << fmt(rep->test->p_value) << ",ok\n";
        } else {
          f << ",,," << status << '\n';
        }
      }
    }
  }
  // Budget-by-pattern layouts: counts under the constrained space, edges
  // under the count-preserving space.
  auto table = [&](const std::filesystem::path& file, Space space, bool counts) {
    std::vector<double> budgets;
    std::vector<Pattern> patterns;
    std::map<std::pair<double, int>, std::string> cells;
    for (const auto& r : rows) {
      if (r.space != space) continue;
      if (std::find(budgets.begin(), budgets.end(), r.budget_pct) == budgets.end()) budgets.push_back(r.budget_pct);
      if (std::find(patterns.begin(), patterns.end(), r.pattern) == patterns.end()) patterns.push_back(r.pattern);
      cells[{r.budget_pct, static_cast<int>(r.pattern)}] = cell(r, counts ? r.counts : r.edges);
    }
    std::sort(budgets.begin(), budgets.end());
    std::sort(patterns.begin(), patterns.end());
    auto f = open_out(file);
    f << "budget_pct";
    for (Pattern p : patterns) f << ',' << name(p);
    f << '\n';
    for (double b : budgets) {
      f << fmt(b);
      for (Pattern p : patterns) {
        auto it = cells.find({b, static_cast<int>(p)});
        f << ',' << (it == cells.end() ? "-" : it->second);
      }
      f << '\n';
    }
  };
  table(out_dir / "shift_counts_constrained.csv", Space::Constrained, true);
  table(out_dir / "shift_edges_count.csv", Space::CountPreserving, false);
}

}  // namespace subcount
