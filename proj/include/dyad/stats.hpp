#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dyad/interaction.hpp"

namespace dyad {

inline constexpr int kSeverityCut = 10;

struct CorrelationResult {
  double r = 0.0;
  double p_two_sided = 1.0;
  int n = 0;
};

struct TTestResult {
  double t = 0.0;
  double p_two_sided = 1.0;
  double df = 0.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double std_a = 0.0;
  double std_b = 0.0;
};

struct GroupSummary {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) standard deviation
  int n = 0;
};

/// Regularized incomplete beta I_x(a, b) by Lentz continued fractions.
double incomplete_beta(double a, double b, double x);

/// Student-t CDF with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// Two-sided tail probability P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

/// Throws LengthMismatch, TooFewPoints (n < 3), ConstantInput.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

/// Welch's unequal-variance t-test of mean(a) - mean(b). Throws
/// TooFewPoints, BothConstantEqual.
TTestResult t_test_welch(std::span<const double> a, std::span<const double> b);

/// Throws TooFewPoints.
GroupSummary group_summary(std::span<const double> values);

/// A statistic that may have failed on its preconditions.
template <typename T>
struct Outcome {
  std::optional<T> value;
  std::string error;  // error class name when value is empty
};

struct SplitCorrelation {
  Outcome<CorrelationResult> below;     // severity < cut
  Outcome<CorrelationResult> at_above;  // severity >= cut
};

/// Pearson of (severity, dyadic ratio) on each side of `cut`. Profiles
/// without a severity score are skipped.
SplitCorrelation split_correlation(std::span<const ParticipantProfile> profiles,
                                   int cut = kSeverityCut);

struct StatRow {
  std::string analysis;
  int n = 0;
  std::optional<double> statistic;
  std::optional<double> p_value;
  std::optional<double> detail;  // df for t-tests, sd for group summaries
  std::string note;              // error class when the analysis could not run
};

/// The cohort analyses: dyadic ratio and timing correlations with severity,
/// per-item response-time t-tests (score > 0 vs score 0), group summaries.
std::vector<StatRow> cohort_statistics(std::span<const ParticipantProfile> profiles);

/// analysis,n,statistic,p_value,detail,note
std::string stat_rows_to_csv(std::span<const StatRow> rows);
std::string stat_rows_summary(std::span<const StatRow> rows);

}  // namespace dyad
