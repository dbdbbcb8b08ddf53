#pragma once

#include <map>
#include <string>
#include <vector>

#include "driveloc/core.hpp"
#include "driveloc/localize.hpp"

namespace driveloc {

struct GroundTruthActivity {
  std::string video_id;
  ClassId class_id = 0;
  double start_s = 0.0;
  double end_s = 0.0;
};

/// Percentage of positions where the labels agree.
double accuracy(const std::vector<ClassId>& predicted, const std::vector<ClassId>& truth);

/// Intersection over union of two time intervals; 0 when they are disjoint or only touch.
double interval_iou(double a_start, double a_end, double b_start, double b_end);
double overlap_os(const Segment& pred, const GroundTruthActivity& gt);

struct ClassScore {
  int gt_count = 0;
  int matched = 0;
  double os_sum = 0.0;
  double mean_os() const { return gt_count > 0 ? os_sum / gt_count : 0.0; }
};

struct ScoreSummary {
  double mean_os = 0.0;
  int gt_count = 0;
  int matched_count = 0;
  int unmatched_gt = 0;
  int unmatched_pred = 0;
  std::map<ClassId, ClassScore> per_class;
};

struct ScoreReport {
  ScoreSummary corpus;
  std::map<std::string, ScoreSummary> per_video;
  std::vector<std::string> warnings;
};

/// Greedy one-to-one matching within each (video, class): pairs are taken in descending
/// overlap order, unmatched ground truth scores 0, mean_os averages over ground truth.
ScoreReport match_and_score(const std::vector<Localization>& preds,
                            const std::vector<GroundTruthActivity>& gts);

}  // namespace driveloc
