#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driveloc/core.hpp"
#include "driveloc/fusion.hpp"
#include "driveloc/localize.hpp"
#include "driveloc/synth.hpp"

namespace driveloc {

enum class ReportFormat { Text, Json };

/// Everything a command needs besides its file paths. Loaded from a JSON document whose
/// sections mirror the members; unknown keys are rejected.
struct RunConfig {
  int num_classes = kDefaultNumClasses;
  ClipSpec clip;
  FusionMode fusion_mode = FusionMode::WeightedAverage;
  ViewWeights weights = default_view_weights();
  bool default_weights = true;
  PostParams post = PostParams::defaults();
  SynthConfig synth;
  std::size_t videos = 1;
  ReportFormat format = ReportFormat::Text;
  /// Non-fatal notes collected while loading, e.g. renormalized weight rows.
  std::vector<std::string> warnings;

  static RunConfig defaults() { return RunConfig{}; }
  void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Parses a num_classes x 3 table, either as a JSON array of rows or as whitespace
/// separated numbers (one row per line, '#' comments allowed).
std::vector<ViewWeights::Row> parse_weight_table(const std::string& text, int num_classes);
void load_weights(RunConfig& cfg, const std::string& path);

/// "none" or a class id.
std::optional<ClassId> parse_background(const std::string& text, int num_classes);
void apply_background(RunConfig& cfg, std::optional<ClassId> background);

ReportFormat parse_format(const std::string& text);

}  // namespace driveloc
