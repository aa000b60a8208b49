#pragma once
// Hand-derived and externally generated reference data shared by the unit
// tests and the acceptance suite.

#include <array>
#include <vector>

#include "subcount/attack.hpp"

namespace fixtures {

struct VerdictCase {
  const char* label;
  subcount::Observation clean;
  subcount::Observation perturbed;
  double margin;
  subcount::Verdict expect;  // (i) clean correct, (ii) perturbed wrong, (iii) margin exceeded
};

// Rounding is floor(x + 0.5); a zero clean loss makes any positive perturbed
// loss exceed the margin.
inline const std::array<VerdictCase, 12> kVerdictTable = {{
    {"loss 0.2 -> 1.1, relative increase 4.5", {3.2, 3}, {5.1, 4}, 1.0, {true, true, true}},
    {"unchanged prediction", {3.0, 3}, {3.0, 3}, 1.0, {true, false, false}},
    {"clean rounds to 4", {3.6, 3}, {10.0, 4}, 1.0, {false, true, true}},
    {"zero clean loss, perturbed rounds to 3 for count 4", {3.0, 3}, {3.4, 4}, 1.0, {true, true, true}},
    {"zero clean loss, perturbed still rounds correctly", {3.0, 3}, {4.4, 4}, 1.0, {true, false, true}},
    {"negative prediction rounds to -1, increase 0.5 below margin 1", {-0.4, 0}, {-0.6, 0}, 1.0, {true, true, false}},
    {"negative prediction rounds to -1, increase 0.5 above margin 0.25", {-0.4, 0}, {-0.6, 0}, 0.25, {true, true, true}},
    {"half rounds up: 2.5 is correct for 3, -0.5 is correct for 0", {2.5, 3}, {-0.5, 0}, 1.0, {true, false, false}},
    {"-0.5 rounds to 0, 1.5 rounds to 2", {-0.5, 0}, {1.5, 0}, 1.0, {true, true, true}},
    {"relative increase exactly equal to the margin", {3.25, 3}, {4.5, 4}, 1.0, {true, true, false}},
    {"same pair with margin 0", {3.25, 3}, {4.5, 4}, 0.0, {true, true, true}},
    {"negative prediction on a positive count", {3.0, 3}, {-2.0, 1}, 1.0, {true, true, true}},
}};

struct WelchCase {
  std::vector<double> a;
  std::vector<double> b;
  double statistic;
  double p_value;
};

// scipy.stats.ttest_ind(a, b, equal_var=False); see data/welch_reference.py.
inline const std::vector<WelchCase> kWelchCases = {
#include "welch_fixtures.inc"
};

}  // namespace fixtures
