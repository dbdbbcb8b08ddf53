#pragma once

// Text formats shared by every command:
//   probability streams  JSON Lines, {"video_id", "view", "clip_index", "probs": [...]}
//   fused streams        the same without "view"
//   submissions / truth  "video_id class_id start_s end_s", whitespace separated

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "driveloc/core.hpp"
#include "driveloc/localize.hpp"
#include "driveloc/metrics.hpp"

namespace driveloc::io {

struct ProbFile {
  bool fused = false;            // records carry no "view"
  std::vector<ProbFrame> frames;  // view is meaningless when fused
  std::vector<std::size_t> lines;
};

/// Parse errors name the line. Each vector must have `num_classes` entries and is
/// normalized; bad vectors raise validation errors naming the line.
ProbFile read_prob_jsonl(std::istream& in, int num_classes);

void write_prob_jsonl(std::ostream& out, const std::vector<ProbFrame>& frames);
void write_fused_jsonl(std::ostream& out, const std::string& video_id, std::size_t first_index,
                       const std::vector<std::vector<double>>& fused);

/// Shortest decimal text that reads back to the same double.
std::string format_seconds(double s);
/// Nearest whole second, halves rounded up.
long long round_half_up(double s);

void write_submission(std::ostream& out, const std::vector<Localization>& locs, bool fractional);
void write_ground_truth(std::ostream& out, const std::vector<GroundTruthActivity>& gts);

/// Reads the interval format used both for submissions and ground truth.
std::vector<GroundTruthActivity> read_intervals(std::istream& in, int num_classes);

/// Groups interval records into one Localization per video.
std::vector<Localization> as_localizations(const std::vector<GroundTruthActivity>& records);

}  // namespace driveloc::io
