#include "subcount/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "subcount/json.hpp"

namespace subcount {

std::string space_name(Space s) {
  switch (s) {
    case Space::Constrained: return "constrained";
    case Space::CountPreserving: return "count";
    case Space::SubgraphPreserving: return "subgraph";
  }
  return "?";
}

Space parse_space(std::string_view s) {
  if (s == "constrained") return Space::Constrained;
  if (s == "count") return Space::CountPreserving;
  if (s == "subgraph") return Space::SubgraphPreserving;
  throw std::invalid_argument("unknown perturbation space '" + std::string(s) +
                              "' (expected constrained, count or subgraph)");
}

void AttackConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("attack budget must be >= 1");
  if (beam_width < 1) throw std::invalid_argument("beam width must be >= 1");
  if (!(margin >= 0)) throw std::invalid_argument("margin must be >= 0");
  if (sample_m && *sample_m == 0) throw std::invalid_argument("sample size must be >= 1");
}

double adversarial_loss(double pred, Count true_count) {
  return std::abs(pred - static_cast<double>(true_count));
}

Count round_prediction(double pred) { return static_cast<Count>(std::floor(pred + 0.5)); }

Verdict classify_adversarial(Observation clean, Observation perturbed, double margin) {
  Verdict v;
  v.clean_correct = round_prediction(clean.pred) == clean.count;
  v.perturbed_wrong = round_prediction(perturbed.pred) != perturbed.count;
  const double clean_loss = adversarial_loss(clean.pred, clean.count);
  const double pert_loss = adversarial_loss(perturbed.pred, perturbed.count);
  if (clean_loss == 0) {
    v.margin_exceeded = pert_loss > 0;
  } else {
    v.margin_exceeded = (pert_loss - clean_loss) / clean_loss > margin;
  }
  return v;
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Member {
  Candidate cand;
  CountVector counts;
};

struct PoolEntry {
  EditSequence edits;
  const Member* parent = nullptr;
  EdgeEdit edit;
  bool carried = false;
  Count count = 0;
  double pred = 0;
  double loss = 0;
};

using Key = std::vector<NodePair>;

bool ranks_before(double loss_a, const EditSequence& a, double loss_b, const EditSequence& b) {
  if (loss_a != loss_b) return loss_a > loss_b;
  return a < b;
}

// One-step neighbors of a member in the configured space, with count deltas.
std::vector<std::pair<EdgeEdit, Count>> expand(const Member& m, Pattern h, const AttackConfig& cfg,
                                               int step) {
  const Graph& g = m.cand.graph;
  std::vector<EdgeEdit> base;
  if (cfg.sample_m) {
    std::mt19937_64 rng(mix64(cfg.seed) ^ mix64(fingerprint(g) + static_cast<std::uint64_t>(step)));
    base = sample_edits_degree_weighted(g, *cfg.sample_m, rng);
    std::sort(base.begin(), base.end());
  } else {
    base = gen_p1(g);
  }
  std::vector<std::pair<EdgeEdit, Count>> out;
  for (const auto& edit : base) {
    const Count delta = local_count_delta(g, edit, h);
    if (cfg.space != Space::Constrained && delta != 0) continue;
    if (cfg.space == Space::SubgraphPreserving && !preserves_occurrences(g, edit, h)) continue;
    out.emplace_back(edit, delta);
  }
  return out;
}

}  // namespace

AttackResult beam_attack(Predictor& model, const Graph& g, Pattern h, const AttackConfig& cfg,
                         std::int64_t clean_id) {
  cfg.validate();
  const std::size_t pairs = static_cast<std::size_t>(g.num_nodes()) * (g.num_nodes() - 1) / 2;
  if (cfg.sample_m && *cfg.sample_m > pairs) {
    throw std::invalid_argument("sample size " + std::to_string(*cfg.sample_m) + " exceeds " +
                                std::to_string(pairs) + " node pairs");
  }

  AttackResult r;
  r.clean_id = clean_id;
  r.pattern = h;
  r.config = cfg;
  r.model = model.name();
  r.clean_graph = g;

  const CountVector counts0 = count_all(g);
  r.clean.count = counts0[h];
  try {
    r.clean.pred = model.predict(g, h);
    r.queries = 1;
  } catch (const std::exception& e) {
    r.error = e.what();
    r.best = {{}, g, r.clean.count, std::numeric_limits<double>::quiet_NaN(), 0};
    r.final_beam_best = r.best;
    return r;
  }
  r.clean_loss = adversarial_loss(r.clean.pred, r.clean.count);

  std::vector<Member> beam{{{{}, g, r.clean.count, r.clean.pred, r.clean_loss}, counts0}};
  r.best = beam.front().cand;

  for (int step = 0; step < cfg.budget; ++step) {
    std::map<Key, PoolEntry> pool;
    auto offer = [&pool](Key key, PoolEntry entry) {
      auto [it, inserted] = pool.try_emplace(std::move(key), entry);
      if (!inserted && entry.edits < it->second.edits) it->second = std::move(entry);
    };

    bool expanded = false;
    for (const Member& m : beam) {
      auto next = expand(m, h, cfg, step);
      if (next.empty()) {
        PoolEntry carried{m.cand.edits, &m, {}, true, m.cand.count, m.cand.pred, m.cand.loss};
        offer(net_toggled_pairs(m.cand.edits), std::move(carried));
        continue;
      }
      expanded = true;
      for (const auto& [edit, delta] : next) {
        PoolEntry e;
        e.edits = m.cand.edits;
        e.edits.push_back(edit);
        e.parent = &m;
        e.edit = edit;
        e.count = m.cand.count + delta;
        Key key = net_toggled_pairs(e.edits);
        offer(std::move(key), std::move(e));
      }
    }
    if (!expanded) {
      r.terminated_early = true;
      break;
    }

    std::vector<PoolEntry*> to_score;
    std::vector<Graph> graphs;
    for (auto& [key, e] : pool) {
      if (e.carried) continue;
      to_score.push_back(&e);
      graphs.push_back(edge_flip(e.parent->cand.graph, e.edit.i, e.edit.j));
    }
    std::vector<double> preds;
    try {
      preds = model.predict_batch(graphs, h);
      if (preds.size() != graphs.size()) {
        throw ModelError(ModelError::Kind::Protocol, "model returned a batch of the wrong length");
      }
    } catch (const std::exception& e) {
      r.error = e.what();
      break;
    }
    r.queries += graphs.size();
    for (std::size_t k = 0; k < to_score.size(); ++k) {
      to_score[k]->pred = preds[k];
      to_score[k]->loss = adversarial_loss(preds[k], to_score[k]->count);
    }

    std::vector<const PoolEntry*> ranked;
    ranked.reserve(pool.size());
    for (const auto& [key, e] : pool) ranked.push_back(&e);
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(cfg.beam_width), ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                      [](const PoolEntry* a, const PoolEntry* b) {
                        return ranks_before(a->loss, a->edits, b->loss, b->edits);
                      });

    std::vector<Member> next_beam;
    next_beam.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
      const PoolEntry& e = *ranked[k];
      if (e.carried) {
        Member m = *e.parent;
        m.cand.edits = e.edits;
        next_beam.push_back(std::move(m));
        continue;
      }
      Perturbed p = apply_edit(e.parent->cand.graph, e.parent->counts, e.edit);
      if (p.counts[h] != e.count) {
        throw std::logic_error("beam_attack: patch delta and incremental update disagree");
      }
      next_beam.push_back({{e.edits, std::move(p.graph), e.count, e.pred, e.loss}, p.counts});
    }
    beam = std::move(next_beam);

    r.steps.push_back(beam.front().cand);
    if (beam.front().cand.loss > r.best.loss) r.best = beam.front().cand;
  }

  r.final_beam_best = beam.front().cand;
  r.verdict = classify_adversarial(r.clean, {r.best.pred, r.best.count}, cfg.margin);
  return r;
}

namespace {

Graph replay(const Graph& start, const EditSequence& edits) {
  Graph g = start;
  for (const auto& e : edits) {
    validate(g, e);
    g = edge_flip(g, e.i, e.j);
  }
  return g;
}

void check(bool ok, const std::string& what) {
  if (!ok) throw std::logic_error("attack result invalid: " + what);
}

void check_candidate(const AttackResult& r, const Candidate& c, const std::string& label) {
  const Graph replayed = replay(r.clean_graph, c.edits);
  check(replayed == c.graph, label + " graph does not match its edits");
  check(net_toggled_pairs(c.edits).size() <= static_cast<std::size_t>(r.config.budget),
        label + " exceeds the budget");
  check(count_induced(c.graph, r.pattern) == c.count, label + " stored count differs from a fresh recount");
  check(adversarial_loss(c.pred, c.count) == c.loss, label + " loss inconsistent with pred/count");
  if (r.config.space == Space::CountPreserving || r.config.space == Space::SubgraphPreserving) {
    check(c.count == r.clean.count, label + " changes the count in a preserving space");
  }
  if (r.config.space == Space::SubgraphPreserving) {
    check(enumerate_induced(c.graph, r.pattern) == enumerate_induced(r.clean_graph, r.pattern),
          label + " changes the occurrence set in the subgraph-preserving space");
  }
}

}  // namespace

void validate_result(const AttackResult& r) {
  check(count_induced(r.clean_graph, r.pattern) == r.clean.count, "clean count differs from a fresh recount");
  if (r.queries == 0) return;  // model failed before the clean query
  check(adversarial_loss(r.clean.pred, r.clean.count) == r.clean_loss, "clean loss inconsistent");
  check_candidate(r, r.best, "best");
  check_candidate(r, r.final_beam_best, "final");
  double running = r.clean_loss;
  for (std::size_t s = 0; s < r.steps.size(); ++s) {
    check_candidate(r, r.steps[s], "step " + std::to_string(s));
    running = std::max(running, r.steps[s].loss);
  }
  check(r.best.loss == running, "best loss is not the trajectory maximum");
  if (!r.error) {
    check(r.verdict == classify_adversarial(r.clean, {r.best.pred, r.best.count}, r.config.margin),
          "verdict does not match stored observations");
  }
}

TransferReport transfer_eval(const std::vector<AttackResult>& results,
                             const std::vector<PredictorPtr>& others, double margin) {
  TransferReport rep;
  for (const auto& m : others) rep.models.push_back(m->name());
  rep.cells.assign(results.size(), std::vector<TransferCell>(others.size()));
  rep.rates.assign(others.size(), 0.0);
  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto& res = results[r];
    const std::vector<Graph> pair{res.clean_graph, res.best.graph};
    for (std::size_t m = 0; m < others.size(); ++m) {
      auto& cell = rep.cells[r][m];
      try {
        auto preds = others[m]->predict_batch(pair, res.pattern);
        if (preds.size() != 2) throw ModelError(ModelError::Kind::Protocol, "wrong batch length");
        const Verdict v = classify_adversarial({preds[0], res.clean.count}, {preds[1], res.best.count}, margin);
        cell.adversarial = res.verdict.adversarial() && v.adversarial();
        if (*cell.adversarial) rep.rates[m] += 1;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  }
  if (!results.empty())
    for (auto& rate : rep.rates) rate /= static_cast<double>(results.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::ordered_json to_json(const EditSequence& seq) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& e : seq) {
    nlohmann::ordered_json item;
    item["op"] = op_name(e.op);
    item["i"] = e.i;
    item["j"] = e.j;
    out.push_back(std::move(item));
  }
  return out;
}

EditSequence edit_sequence_from_json(const nlohmann::json& j) {
  EditSequence out;
  for (const auto& item : j) {
    const auto op = item.at("op").get<std::string>();
    if (op != "add" && op != "del") throw std::invalid_argument("edit op must be \"add\" or \"del\"");
    out.emplace_back(item.at("i").get<Node>(), item.at("j").get<Node>(), op == "add" ? EditOp::Add : EditOp::Delete);
  }
  return out;
}

namespace {

nlohmann::ordered_json candidate_json(const Candidate& c, bool with_graph) {
  nlohmann::ordered_json out;
  out["edits"] = to_json(c.edits);
  if (with_graph) out["graph"] = to_ordered_json(c.graph);
  out["count"] = c.count;
  out["pred"] = c.pred;
  out["loss"] = c.loss;
  return out;
}

Candidate candidate_from_json(const nlohmann::json& j, const Graph& clean) {
  Candidate c;
  c.edits = edit_sequence_from_json(j.at("edits"));
  c.graph = j.contains("graph") ? graph_from_json(j.at("graph")) : replay(clean, c.edits);
  c.count = j.at("count").get<Count>();
  c.pred = j.at("pred").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("pred").get<double>();
  c.loss = j.at("loss").get<double>();
  return c;
}

}  // namespace

nlohmann::ordered_json to_json(const AttackResult& r) {
  nlohmann::ordered_json out;
  out["clean_id"] = r.clean_id;
  out["pattern"] = std::string(name(r.pattern));
  out["model"] = r.model;
  nlohmann::ordered_json cfg;
  cfg["space"] = space_name(r.config.space);
  cfg["budget"] = r.config.budget;
  cfg["beam"] = r.config.beam_width;
  cfg["delta"] = r.config.margin;
  cfg["sample_m"] = r.config.sample_m ? nlohmann::ordered_json(*r.config.sample_m) : nlohmann::ordered_json();
  cfg["seed"] = r.config.seed;
  out["config"] = std::move(cfg);
  out["clean_graph"] = to_ordered_json(r.clean_graph);
  out["clean"] = {{"count", r.clean.count}, {"pred", r.clean.pred}, {"loss", r.clean_loss}};
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : r.steps) steps.push_back(candidate_json(s, false));
  out["steps"] = std::move(steps);
  out["best"] = candidate_json(r.best, true);
  out["final_beam_best"] = candidate_json(r.final_beam_best, false);
  nlohmann::ordered_json verdict;
  verdict["clean_correct"] = r.verdict.clean_correct;
  verdict["perturbed_wrong"] = r.verdict.perturbed_wrong;
  verdict["margin_exceeded"] = r.verdict.margin_exceeded;
  verdict["adversarial"] = r.verdict.adversarial();
  out["verdict"] = std::move(verdict);
  out["queries"] = r.queries;
  out["terminated_early"] = r.terminated_early;
  out["error"] = r.error ? nlohmann::ordered_json(*r.error) : nlohmann::ordered_json();
  return out;
}

AttackResult attack_result_from_json(const nlohmann::json& j) {
  AttackResult r;
  r.clean_id = j.at("clean_id").get<std::int64_t>();
  r.pattern = parse_pattern(j.at("pattern").get<std::string>());
  r.model = j.at("model").get<std::string>();
  const auto& cfg = j.at("config");
  r.config.space = parse_space(cfg.at("space").get<std::string>());
  r.config.budget = cfg.at("budget").get<int>();
  r.config.beam_width = cfg.at("beam").get<int>();
  r.config.margin = cfg.at("delta").get<double>();
  if (!cfg.at("sample_m").is_null()) r.config.sample_m = cfg.at("sample_m").get<std::size_t>();
  r.config.seed = cfg.at("seed").get<std::uint64_t>();
  r.clean_graph = graph_from_json(j.at("clean_graph"));
  const auto& clean = j.at("clean");
  r.clean.count = clean.at("count").get<Count>();
  r.clean.pred = clean.at("pred").is_null() ? std::numeric_limits<double>::quiet_NaN() : clean.at("pred").get<double>();
  r.clean_loss = clean.at("loss").get<double>();
  for (const auto& s : j.at("steps")) r.steps.push_back(candidate_from_json(s, r.clean_graph));
  r.best = candidate_from_json(j.at("best"), r.clean_graph);
  r.final_beam_best = candidate_from_json(j.at("final_beam_best"), r.clean_graph);
  const auto& v = j.at("verdict");
  r.verdict.clean_correct = v.at("clean_correct").get<bool>();
  r.verdict.perturbed_wrong = v.at("perturbed_wrong").get<bool>();
  r.verdict.margin_exceeded = v.at("margin_exceeded").get<bool>();
  r.queries = j.at("queries").get<std::size_t>();
  r.terminated_early = j.at("terminated_early").get<bool>();
  if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  return r;
}

}  // namespace subcount
