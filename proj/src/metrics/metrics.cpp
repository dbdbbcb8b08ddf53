#include "driveloc/metrics.hpp"

#include <algorithm>
#include <tuple>

namespace driveloc {

double accuracy(const std::vector<ClassId>& predicted, const std::vector<ClassId>& truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(predicted.size()) + " predictions vs " +
                                               std::to_string(truth.size()) + " labels");
  }
  if (predicted.empty()) throw Error(ErrorKind::EmptyInput, "no labels to score");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(predicted.size());
}

double interval_iou(double a_start, double a_end, double b_start, double b_end) {
  const double inter = std::min(a_end, b_end) - std::max(a_start, b_start);
  if (inter <= 0.0) return 0.0;
  const double uni = std::max(a_end, b_end) - std::min(a_start, b_start);
  return uni > 0.0 ? inter / uni : 0.0;
}

double overlap_os(const Segment& pred, const GroundTruthActivity& gt) {
  return interval_iou(pred.start_s, pred.end_s, gt.start_s, gt.end_s);
}

namespace {

struct Group {
  std::vector<const GroundTruthActivity*> gts;
  std::vector<const Segment*> preds;
};

void add_group(ScoreSummary& summary, ClassId c, int gts, int matched, int preds, double os) {
  summary.gt_count += gts;
  summary.matched_count += matched;
  summary.unmatched_gt += gts - matched;
  summary.unmatched_pred += preds - matched;
  auto& cls = summary.per_class[c];
  cls.gt_count += gts;
  cls.matched += matched;
  cls.os_sum += os;
}

void finish(ScoreSummary& summary) {
  double total = 0.0;
  for (const auto& [c, cls] : summary.per_class) total += cls.os_sum;
  summary.mean_os = summary.gt_count > 0 ? total / summary.gt_count : 0.0;
}

}  // namespace

ScoreReport match_and_score(const std::vector<Localization>& preds,
                            const std::vector<GroundTruthActivity>& gts) {
  std::map<std::pair<std::string, ClassId>, Group> groups;
  for (const auto& g : gts) groups[{g.video_id, g.class_id}].gts.push_back(&g);
  for (const auto& loc : preds) {
    for (const auto& s : loc.segments) groups[{loc.video_id, s.class_id}].preds.push_back(&s);
  }

  ScoreReport report;
  for (const auto& [key, group] : groups) {
    const auto& [video, c] = key;
    struct Pair {
      double os;
      std::size_t gt;
      std::size_t pred;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < group.gts.size(); ++i) {
      for (std::size_t j = 0; j < group.preds.size(); ++j) {
        const double os = overlap_os(*group.preds[j], *group.gts[i]);
        if (os > 0.0) pairs.push_back({os, i, j});
      }
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Pair& a, const Pair& b) { return a.os > b.os; });
    std::vector<bool> gt_used(group.gts.size(), false);
    std::vector<bool> pred_used(group.preds.size(), false);
    int matched = 0;
    double os_sum = 0.0;
    for (const auto& p : pairs) {
      if (gt_used[p.gt] || pred_used[p.pred]) continue;
      gt_used[p.gt] = pred_used[p.pred] = true;
      ++matched;
      os_sum += p.os;
    }
    const int n_gt = static_cast<int>(group.gts.size());
    const int n_pred = static_cast<int>(group.preds.size());
    add_group(report.corpus, c, n_gt, matched, n_pred, os_sum);
    add_group(report.per_video[video], c, n_gt, matched, n_pred, os_sum);
  }

  finish(report.corpus);
  for (auto& [video, summary] : report.per_video) finish(summary);
  if (report.corpus.gt_count == 0) {
    report.warnings.push_back("no ground-truth activities; mean_os reported as 0");
  }
  return report;
}

}  // namespace driveloc
