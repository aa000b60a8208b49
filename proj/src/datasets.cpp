#include "subcount/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "subcount/json.hpp"

namespace subcount {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

// Avoids bernoulli_distribution so p = 1 and p = 0 are exact.
bool coin(std::mt19937_64& rng, double p) {
  if (p <= 0) return false;
  if (p >= 1) return true;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

}  // namespace

void DatasetSpec::validate() const {
  if (num_graphs < 1) throw std::invalid_argument("num_graphs must be >= 1");
  for (double f : {train_fraction, val_fraction, test_fraction})
    if (!(f >= 0 && f <= 1)) throw std::invalid_argument("split fractions must lie in [0,1]");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }
  if (const auto* sbm = std::get_if<SbmParams>(&generator)) {
    if (sbm->community_sizes.size() != sbm->p_in.size()) {
      throw std::invalid_argument("SBM: one p_in per community required");
    }
    for (int s : sbm->community_sizes)
      if (s < 0) throw std::invalid_argument("SBM: negative community size");
    for (double p : sbm->p_in) check_prob(p, "SBM p_in");
    check_prob(sbm->p_out, "SBM p_out");
  } else {
    const auto& er = std::get<ErParams>(generator);
    if (er.n < 0) throw std::invalid_argument("ER: negative node count");
    check_prob(er.p, "ER p");
  }
}

DatasetSpec DatasetSpec::sbm_default(std::uint64_t seed) {
  DatasetSpec s;
  s.generator = SbmParams{{10, 10, 10}, {0.2, 0.3, 0.4}, 0.1};
  s.num_graphs = 5000;
  s.seed = seed;
  return s;
}

DatasetSpec DatasetSpec::er_default(double p, std::uint64_t seed) {
  DatasetSpec s;
  s.generator = ErParams{10, p};
  s.num_graphs = 5000;
  s.seed = seed;
  return s;
}

Graph gen_sbm(std::span<const int> sizes, std::span<const double> p_in, double p_out, std::mt19937_64& rng) {
  if (sizes.size() != p_in.size()) throw std::invalid_argument("SBM: one p_in per community required");
  for (double p : p_in) check_prob(p, "SBM p_in");
  check_prob(p_out, "SBM p_out");
  std::vector<int> block;
  for (std::size_t c = 0; c < sizes.size(); ++c) block.insert(block.end(), sizes[c], static_cast<int>(c));
  const int n = static_cast<int>(block.size());
  std::vector<NodePair> edges;
  for (Node i = 0; i < n; ++i)
    for (Node j = i + 1; j < n; ++j)
      if (coin(rng, block[i] == block[j] ? p_in[block[i]] : p_out)) edges.emplace_back(i, j);
  return Graph(n, edges);
}

Graph gen_er(int n, double p, std::mt19937_64& rng) {
  check_prob(p, "ER p");
  std::vector<NodePair> edges;
  for (Node i = 0; i < n; ++i)
    for (Node j = i + 1; j < n; ++j)
      if (coin(rng, p)) edges.emplace_back(i, j);
  return Graph(n, edges);
}

std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw std::invalid_argument("unknown split '" + std::string(s) + "'");
}

std::vector<std::size_t> Dataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < split.size(); ++k)
    if (split[k] == s) out.push_back(k);
  return out;
}

double Dataset::mean_edges() const {
  if (graphs.empty()) return 0;
  double total = 0;
  for (const auto& g : graphs) total += static_cast<double>(g.num_edges());
  return total / static_cast<double>(graphs.size());
}

Dataset build_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset d;
  d.spec = spec;
  const auto count = static_cast<std::size_t>(spec.num_graphs);
  d.graphs.reserve(count);
  d.labels.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::mt19937_64 rng(mix64(spec.seed) ^ mix64(k + 1));
    if (const auto* sbm = std::get_if<SbmParams>(&spec.generator)) {
      d.graphs.push_back(gen_sbm(sbm->community_sizes, sbm->p_in, sbm->p_out, rng));
    } else {
      const auto& er = std::get<ErParams>(spec.generator);
      d.graphs.push_back(gen_er(er.n, er.p, rng));
    }
    d.labels.push_back(count_all(d.graphs.back()));
  }

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(mix64(spec.seed ^ 0x5eed5eed5eedULL));
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(count) + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(spec.val_fraction * static_cast<double>(count) + 1e-9));
  d.split.assign(count, Split::Test);
  for (std::size_t k = 0; k < count; ++k) {
    if (k < n_train) d.split[order[k]] = Split::Train;
    else if (k < n_train + n_val) d.split[order[k]] = Split::Val;
  }
  return d;
}

nlohmann::ordered_json to_json(const DatasetSpec& spec) {
  nlohmann::ordered_json gen;
  if (const auto* sbm = std::get_if<SbmParams>(&spec.generator)) {
    gen["kind"] = "sbm";
    gen["community_sizes"] = sbm->community_sizes;
    gen["p_in"] = sbm->p_in;
    gen["p_out"] = sbm->p_out;
  } else {
    const auto& er = std::get<ErParams>(spec.generator);
    gen["kind"] = "er";
    gen["n"] = er.n;
    gen["p"] = er.p;
  }
  nlohmann::ordered_json out;
  out["generator"] = std::move(gen);
  out["num_graphs"] = spec.num_graphs;
  out["splits"] = {spec.train_fraction, spec.val_fraction, spec.test_fraction};
  out["seed"] = spec.seed;
  return out;
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
  DatasetSpec s;
  const auto& gen = j.at("generator");
  const auto kind = gen.at("kind").get<std::string>();
  if (kind == "sbm") {
    s.generator = SbmParams{gen.at("community_sizes").get<std::vector<int>>(),
                            gen.at("p_in").get<std::vector<double>>(), gen.at("p_out").get<double>()};
  } else if (kind == "er") {
    s.generator = ErParams{gen.at("n").get<int>(), gen.at("p").get<double>()};
  } else {
    throw std::invalid_argument("unknown generator kind '" + kind + "'");
  }
  s.num_graphs = j.at("num_graphs").get<int>();
  if (j.contains("splits")) {
    const auto fr = j.at("splits").get<std::vector<double>>();
    if (fr.size() != 3) throw std::invalid_argument("splits must list train, val and test fractions");
    s.train_fraction = fr[0];
    s.val_fraction = fr[1];
    s.test_fraction = fr[2];
  }
  s.seed = j.value("seed", std::uint64_t{0});
  s.validate();
  return s;
}

nlohmann::ordered_json to_json(const CountVector& c) {
  nlohmann::ordered_json out;
  for (Pattern p : kAllPatterns) out[std::string(name(p))] = c[p];
  return out;
}

CountVector count_vector_from_json(const nlohmann::json& j) {
  CountVector c;
  for (Pattern p : kAllPatterns) {
    const Count v = j.at(std::string(name(p))).get<Count>();
    if (v < 0) throw std::invalid_argument("negative count in CountVector JSON");
    c[p] = v;
  }
  return c;
}

std::filesystem::path manifest_path(const std::filesystem::path& dataset_path) {
  return dataset_path.string() + ".manifest.json";
}

void write_dataset(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t k = 0; k < d.graphs.size(); ++k) {
    nlohmann::ordered_json rec;
    rec["graph"] = to_ordered_json(d.graphs[k]);
    rec["counts"] = to_json(d.labels[k]);
    rec["split"] = split_name(d.split[k]);
    out << rec.dump() << '\n';
  }
  std::ofstream man(manifest_path(path), std::ios::binary);
  if (!man) throw std::runtime_error("cannot write manifest for " + path.string());
  nlohmann::ordered_json m;
  m["spec"] = to_json(d.spec);
  m["seed"] = d.spec.seed;
  m["num_records"] = d.graphs.size();
  man << m.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& path, bool verify_labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  Dataset d;
  if (std::ifstream man(manifest_path(path)); man) {
    d.spec = dataset_spec_from_json(nlohmann::json::parse(man).at("spec"));
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    d.graphs.push_back(graph_from_json(rec.at("graph")));
    d.labels.push_back(count_vector_from_json(rec.at("counts")));
    d.split.push_back(parse_split(rec.at("split").get<std::string>()));
    if (verify_labels && !(count_all(d.graphs.back()) == d.labels.back())) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": stored counts do not match the graph");
    }
  }
  return d;
}

}  // namespace subcount
