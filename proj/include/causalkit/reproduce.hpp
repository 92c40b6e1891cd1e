#pragma once

// Built-in scenarios for the published tables, with the published values and
// the tolerance bands a reproduction must meet.
//
// Default seeds (fixed, chosen before any run):
//   case study tables 2-5  sample seed 12345, bootstrap seed 54321, n = 10^6
//   table 6 (confounder)   sample seed 1006, n = 10^4
//   table 7 (mediator)     sample seed 1007, n = 10^4
//   table 8 (collider)     sample seed 1008, n = 10^4

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "causalkit/estimators.hpp"
#include "causalkit/scenario.hpp"

namespace causalkit {

enum class Target { table2, table3, table4, table5, table6, table7, table8 };

std::string_view to_string(Target target);
std::optional<Target> parse_target(std::string_view text);
std::vector<Target> all_targets();

inline constexpr std::uint64_t kCaseStudySeed = 12345;
inline constexpr std::uint64_t kCaseStudyBootstrapSeed = 54321;
inline constexpr std::size_t kCaseStudySampleSize = 1'000'000;
inline constexpr std::size_t kCaseStudyReplicates = 200;
inline constexpr std::size_t kAppendixSampleSize = 10'000;

/// The case-study scenario without analyses (model, roles, analysis edge).
Scenario case_study_scenario();
Scenario builtin_scenario(Target target);

struct PublishedValue {
  double risk_ratio = 0.0;
  std::optional<std::pair<double, double>> ci;
  /// Path status column of the appendix tables ("Open" / "Closed").
  std::string path;
};

struct BandCheck {
  std::string description;
  bool pass = false;
  /// Non-binding checks are reported but do not affect the verdict.
  bool binding = true;
};

struct ReproRow {
  std::string label;
  std::vector<std::string> adjustment;
  std::optional<PublishedValue> published;
  std::optional<EffectEstimate> estimate;
  std::string error;
  /// Population estimand of the same analysis.
  double oracle = 0.0;
  /// d-separation status of treatment and outcome given the adjustment set,
  /// in the scenario's diagram ("Open" / "Closed").
  std::string path;
  std::vector<BandCheck> checks;
  bool pass() const;
};

struct Reproduction {
  Target target = Target::table2;
  std::string title;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<ReproRow> rows;
  bool pass() const;
};

struct ReproOptions {
  /// Replaces the sample seed of every target.
  std::optional<std::uint64_t> seed;
  /// Bootstrap worker threads.
  std::optional<unsigned> threads;
};

Reproduction reproduce(Target target, const ReproOptions& options = {});

std::string render(const std::vector<Reproduction>& results, Format format);

}  // namespace causalkit
