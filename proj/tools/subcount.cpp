// subcount: dataset generation, counting, adversarial attack campaigns and
// evaluation reports for black-box subgraph-counting regressors.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "subcount/harness.hpp"
#include "subcount/json.hpp"

using namespace subcount;

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
  return out;
}

DatasetSpec preset(const std::string& name, std::uint64_t seed) {
  if (name == "sbm") return DatasetSpec::sbm_default(seed);
  if (name == "er-0.3") return DatasetSpec::er_default(0.3, seed);
  if (name == "er-0.8") return DatasetSpec::er_default(0.8, seed);
  throw std::invalid_argument("unknown preset '" + name + "' (sbm, er-0.3, er-0.8)");
}

int cmd_generate(const std::string& spec_file, const std::string& preset_name, std::optional<int> num_graphs,
                 std::optional<std::uint64_t> seed, const std::string& out) {
  DatasetSpec spec;
  if (!spec_file.empty()) {
    std::ifstream in(spec_file);
    if (!in) throw std::runtime_error("cannot open spec file " + spec_file);
    spec = dataset_spec_from_json(nlohmann::json::parse(in));
    if (seed) spec.seed = *seed;
  } else {
    spec = preset(preset_name, seed.value_or(0));
  }
  if (num_graphs) spec.num_graphs = *num_graphs;
  const Dataset d = build_dataset(spec);
  write_dataset(d, out);
  std::cout << "wrote " << d.graphs.size() << " graphs to " << out << " (train " << d.indices(Split::Train).size()
            << ", val " << d.indices(Split::Val).size() << ", test " << d.indices(Split::Test).size() << ")\n";
  return 0;
}

int cmd_count(const std::string& file, const std::string& pattern) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file);
  std::string first;
  std::getline(in, first);
  const auto j = nlohmann::json::parse(first);
  const bool all = pattern == "all";
  const std::optional<Pattern> only = all ? std::nullopt : std::optional<Pattern>(parse_pattern(pattern));

  if (j.contains("n")) {
    // A single graph (the rest of the file may continue the JSON object).
    std::stringstream whole;
    whole << first << '\n' << in.rdbuf();
    const Graph g = graph_from_json(nlohmann::json::parse(whole.str()));
    if (all) std::cout << to_json(count_all(g)).dump() << '\n';
    else std::cout << count_induced(g, *only) << '\n';
    return 0;
  }
  const Dataset d = read_dataset(file, /*verify_labels=*/true);
  std::cout << "index,split";
  for (Pattern p : kAllPatterns)
    if (all || p == *only) std::cout << ',' << name(p);
  std::cout << '\n';
  for (std::size_t k = 0; k < d.graphs.size(); ++k) {
    std::cout << k << ',' << split_name(d.split[k]);
    for (Pattern p : kAllPatterns)
      if (all || p == *only) std::cout << ',' << d.labels[k][p];
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgraph-counting adversarial attacks on black-box graph regressors"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Generate a labeled synthetic dataset");
  std::string gen_spec, gen_preset = "sbm", gen_out;
  std::optional<int> gen_num;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("spec", gen_spec, "Dataset spec JSON file");
  gen->add_option("--preset", gen_preset, "Built-in spec: sbm, er-0.3, er-0.8")->capture_default_str();
  gen->add_option("--num-graphs", gen_num, "Override the number of graphs");
  gen->add_option("--seed", gen_seed, "Generation seed");
  gen->add_option("--out", gen_out, "Output JSON-lines path")->required();

  auto* count = app.add_subcommand("count", "Count induced patterns in a graph or dataset file");
  std::string count_file, count_pattern = "all";
  count->add_option("file", count_file, "Graph JSON or dataset JSON-lines")->required();
  count->add_option("--pattern", count_pattern, "Pattern name or 'all'")->capture_default_str();

  auto* attack = app.add_subcommand("attack", "Run an attack campaign");
  std::string a_dataset, a_pattern = "triangle", a_spaces = "constrained,count,subgraph", a_budgets = "1,5,10,25",
                         a_out = "campaign";
  std::vector<std::string> a_models;
  double a_delta = 1.0;
  std::optional<int> a_beam;
  std::optional<std::size_t> a_sample;
  int a_num = 100, a_threads = 0;
  std::uint64_t a_seed = 0;
  attack->add_option("--dataset", a_dataset, "Dataset JSON-lines")->required();
  attack->add_option("--pattern", a_pattern)->capture_default_str();
  attack->add_option("--model", a_models, "oracle | noisy:SIGMA | regressor[:PATH] | external:ENDPOINT (repeatable)")
      ->required();
  attack->add_option("--space", a_spaces, "Comma list of constrained, count, subgraph")->capture_default_str();
  attack->add_option("--budget-pcts", a_budgets, "Comma list of budget percentages")->capture_default_str();
  attack->add_option("--delta", a_delta, "Relative loss margin")->capture_default_str();
  attack->add_option("--beam", a_beam, "Beam width for every space (default 1 constrained, 10 preserving)");
  attack->add_option("--sample-m", a_sample, "Degree-weighted candidate sample per beam member");
  attack->add_option("--num-clean", a_num, "Correctly predicted test graphs to attack")->capture_default_str();
  attack->add_option("--seed", a_seed)->capture_default_str();
  attack->add_option("--threads", a_threads, "Worker threads (0 = all cores)")->capture_default_str();
  attack->add_option("--out", a_out, "Output directory")->capture_default_str();

  auto* ood = app.add_subcommand("ood-eval", "Error table on an in-distribution and an OOD dataset");
  std::string o_model = "regressor", o_a, o_b, o_pattern = "triangle", o_out;
  std::uint64_t o_seed = 0;
  ood->add_option("--model", o_model)->capture_default_str();
  ood->add_option("dataset-a", o_a, "Training / in-distribution dataset")->required();
  ood->add_option("dataset-b", o_b, "Out-of-distribution dataset")->required();
  ood->add_option("--pattern", o_pattern)->capture_default_str();
  ood->add_option("--seed", o_seed)->capture_default_str();
  ood->add_option("--out", o_out, "CSV output path (stdout when omitted)");

  auto* shift = app.add_subcommand("shift-report", "Welch tests on counts and edges of adversarial graphs");
  std::string s_campaign, s_dataset, s_out = "shift";
  bool s_transfer = false;
  shift->add_option("campaign", s_campaign, "campaign.jsonl")->required();
  shift->add_option("--dataset", s_dataset, "Dataset the campaign was run on");
  shift->add_flag("--transferring-only", s_transfer, "Only adversarial graphs that fool every other model");
  shift->add_option("--out", s_out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      if (gen_spec.empty() && gen->count("--preset") == 0) gen_preset = "sbm";
      return cmd_generate(gen_spec, gen_preset, gen_num, gen_seed, gen_out);
    }
    if (*count) return cmd_count(count_file, count_pattern);
    if (*attack) {
      CampaignSpec spec;
      spec.dataset = a_dataset;
      spec.pattern = parse_pattern(a_pattern);
      for (const auto& m : a_models) spec.models.push_back(ModelSpec::parse(m));
      spec.spaces.clear();
      std::stringstream ss(a_spaces);
      for (std::string s; std::getline(ss, s, ',');)
        if (!s.empty()) spec.spaces.push_back(parse_space(s));
      spec.budget_pcts = parse_list(a_budgets);
      spec.delta = a_delta;
      spec.beam = a_beam;
      spec.sample_m = a_sample;
      spec.num_clean = a_num;
      spec.seed = a_seed;
      spec.threads = a_threads;
      spec.out = a_out;
      const auto out = run_campaign(spec, std::cerr);
      for (const auto& r : out.auc) {
        std::cout << name(spec.pattern) << ' ' << space_name(r.space) << " AUC " << r.auc_mean << " +- " << r.auc_se;
        if (out.model_names.size() > 1) std::cout << " (transfer " << r.transfer_auc_mean << ")";
        std::cout << '\n';
      }
      return out.error ? 2 : 0;
    }
    if (*ood) {
      const Dataset a = read_dataset(o_a);
      const Dataset b = read_dataset(o_b);
      const auto rows = ood_eval(ModelSpec::parse(o_model), a, b, parse_pattern(o_pattern), o_seed,
                                 model_timeout_from_env());
      std::ofstream file;
      std::ostream& os = o_out.empty() ? std::cout : (file.open(o_out), file);
      os << "row,trained_on,tested_on,pattern,l1,lc\n";
      for (const auto& r : rows) {
        os << r.label << ',' << r.trained_on << ',' << r.tested_on << ',' << o_pattern << ',' << r.l1 << ',' << r.lc
           << '\n';
      }
      return 0;
    }
    if (*shift) {
      const auto records = read_campaign(s_campaign);
      std::optional<Dataset> data;
      if (!s_dataset.empty()) data = read_dataset(s_dataset);
      const auto rows = shift_rows(records, data ? &*data : nullptr, s_transfer);
      write_shift_csv(rows, s_out);
      std::cout << "wrote shift report for " << rows.size() << " (pattern, space, budget) cells to " << s_out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
