#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subcount/attack.hpp"
#include "subcount/graph.hpp"
#include "subcount/pattern.hpp"

namespace subcount {

/// Mean absolute error. Throws std::invalid_argument on empty or mismatched input.
double mae(std::span<const double> preds, std::span<const double> labels);

/// Mean of |pred - label| / max(label, 1).
double mae_count_norm(std::span<const double> preds, std::span<const double> labels);

struct CurvePoint {
  double budget_pct;
  double rate;
};

/// Budget-ordered success rates. Budgets strictly increase; rates lie in [0,1].
class SuccessCurve {
 public:
  SuccessCurve() = default;
  explicit SuccessCurve(std::vector<CurvePoint> points);

  [[nodiscard]] const std::vector<CurvePoint>& points() const { return points_; }

 private:
  std::vector<CurvePoint> points_;
};

struct Campaign {
  double budget_pct;
  std::vector<AttackResult> results;
};

/// Fraction of adversarial results per budget. Throws on an empty campaign.
SuccessCurve success_curve(std::span<const Campaign> campaigns);

/// Trapezoidal area over [first, last budget] divided by the width of that
/// interval. Throws std::invalid_argument for fewer than two points.
double auc_normalized(const SuccessCurve& curve);

struct WelchResult {
  double statistic = 0;
  double dof = 0;
  double p_value = 1;
};

/// Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom.
/// Both samples constant with equal means gives statistic 0, p = 1; other
/// zero-variance inputs throw std::invalid_argument.
WelchResult welch_ttest(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kMinShiftSamples = 25;

struct ShiftReport {
  std::string quantity;  // "count" or "edges"
  std::vector<double> clean;
  std::vector<double> adversarial;
  std::optional<WelchResult> test;  // empty when the adversarial sample is too small

  [[nodiscard]] bool insufficient() const { return !test.has_value(); }
};

/// Welch tests on C(., H) and on |E| between clean and adversarial graphs.
std::pair<ShiftReport, ShiftReport> shift_report(std::span<const Graph> clean,
                                                 std::span<const Graph> adversarial, Pattern h);

}  // namespace subcount
