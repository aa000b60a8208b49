#include "subcount/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "subcount/counting.hpp"

namespace subcount {

namespace {

void check_pair(std::span<const double> preds, std::span<const double> labels) {
  if (preds.empty()) throw std::invalid_argument("metric on empty input");
  if (preds.size() != labels.size()) throw std::invalid_argument("predictions and labels differ in length");
}

std::pair<double, double> mean_and_variance(std::span<const double> x) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / static_cast<double>(x.size() - 1)};
}

}  // namespace

double mae(std::span<const double> preds, std::span<const double> labels) {
  check_pair(preds, labels);
  double total = 0;
  for (std::size_t k = 0; k < preds.size(); ++k) total += std::abs(preds[k] - labels[k]);
  return total / static_cast<double>(preds.size());
}

double mae_count_norm(std::span<const double> preds, std::span<const double> labels) {
  check_pair(preds, labels);
  double total = 0;
  for (std::size_t k = 0; k < preds.size(); ++k)
    total += std::abs(preds[k] - labels[k]) / std::max(labels[k], 1.0);
  return total / static_cast<double>(preds.size());
}

SuccessCurve::SuccessCurve(std::vector<CurvePoint> points) : points_(std::move(points)) {
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (!(points_[k].rate >= 0 && points_[k].rate <= 1)) throw std::invalid_argument("success rate outside [0,1]");
    if (k > 0 && !(points_[k].budget_pct > points_[k - 1].budget_pct)) {
      throw std::invalid_argument("curve budgets must be strictly increasing");
    }
  }
}

SuccessCurve success_curve(std::span<const Campaign> campaigns) {
  std::vector<CurvePoint> points;
  for (const auto& c : campaigns) {
    if (c.results.empty()) throw std::invalid_argument("empty campaign at budget " + std::to_string(c.budget_pct));
    const auto hits = std::count_if(c.results.begin(), c.results.end(),
                                    [](const AttackResult& r) { return r.verdict.adversarial(); });
    points.push_back({c.budget_pct, static_cast<double>(hits) / static_cast<double>(c.results.size())});
  }
  return SuccessCurve(std::move(points));
}

double auc_normalized(const SuccessCurve& curve) {
  const auto& pts = curve.points();
  if (pts.size() < 2) throw std::invalid_argument("AUC needs at least two curve points");
  double area = 0;
  for (std::size_t k = 1; k < pts.size(); ++k)
    area += (pts[k].budget_pct - pts[k - 1].budget_pct) * (pts[k].rate + pts[k - 1].rate) / 2;
  return area / (pts.back().budget_pct - pts.front().budget_pct);
}

WelchResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("Welch test needs at least two samples per group");
  const auto [ma, va] = mean_and_variance(a);
  const auto [mb, vb] = mean_and_variance(b);
  const double sa = va / static_cast<double>(a.size());
  const double sb = vb / static_cast<double>(b.size());
  if (sa + sb == 0) {
    if (ma == mb) return {0.0, static_cast<double>(a.size() + b.size() - 2), 1.0};
    throw std::invalid_argument("Welch test undefined: both samples constant with different means");
  }
  WelchResult r;
  r.statistic = (ma - mb) / std::sqrt(sa + sb);
  r.dof = (sa + sb) * (sa + sb) /
          (sa * sa / static_cast<double>(a.size() - 1) + sb * sb / static_cast<double>(b.size() - 1));
  boost::math::students_t_distribution<double> dist(r.dof);
  r.p_value = 2 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic)));
  r.p_value = std::min(1.0, r.p_value);
  return r;
}

namespace {

ShiftReport one_shift(std::string quantity, std::vector<double> clean, std::vector<double> adv) {
  ShiftReport rep{std::move(quantity), std::move(clean), std::move(adv), std::nullopt};
  if (rep.adversarial.size() >= kMinShiftSamples && rep.clean.size() >= 2) {
    rep.test = welch_ttest(rep.clean, rep.adversarial);
  }
  return rep;
}

}  // namespace

std::pair<ShiftReport, ShiftReport> shift_report(std::span<const Graph> clean,
                                                 std::span<const Graph> adversarial, Pattern h) {
  std::vector<double> cc, ca, ec, ea;
  for (const auto& g : clean) {
    cc.push_back(static_cast<double>(count_induced(g, h)));
    ec.push_back(static_cast<double>(g.num_edges()));
  }
  for (const auto& g : adversarial) {
    ca.push_back(static_cast<double>(count_induced(g, h)));
    ea.push_back(static_cast<double>(g.num_edges()));
  }
  return {one_shift("count", std::move(cc), std::move(ca)), one_shift("edges", std::move(ec), std::move(ea))};
}

}  // namespace subcount
