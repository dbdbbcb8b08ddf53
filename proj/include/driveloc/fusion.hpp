#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "driveloc/core.hpp"

namespace driveloc {

/// Per-class, per-view fusion weights. Rows are kept normalized to unit sum.
class ViewWeights {
 public:
  using Row = std::array<double, kNumViews>;

  /// Validates and row-normalizes. Rows off unit sum by more than 1e-6 are listed in
  /// `renormalized_rows` so callers can warn about them.
  static ViewWeights from_rows(const std::vector<Row>& rows,
                               std::vector<ClassId>* renormalized_rows = nullptr);
  static ViewWeights uniform(int num_classes = kDefaultNumClasses);

  int num_classes() const { return static_cast<int>(columns_[0].size()); }
  double at(ClassId c, View v) const { return columns_[view_slot(v)][static_cast<std::size_t>(c)]; }
  Row row(ClassId c) const;
  const double* column(View v) const { return columns_[view_slot(v)].data(); }

 private:
  std::array<std::vector<double>, kNumViews> columns_;
};

/// Classes each camera is known to resolve best; the default weights favour these views.
struct SpecialistSets {
  std::vector<ClassId> dashboard{1, 4, 13};
  std::vector<ClassId> rearview{3, 14};
  std::vector<ClassId> rightside{5, 6, 8, 10};

  /// The view specialised in `c`, if any.
  std::optional<View> specialist_for(ClassId c) const;
};

/// 0.5 for the specialist view and 0.25 for the others on specialist classes, 1/3 elsewhere.
ViewWeights default_view_weights(int num_classes = kDefaultNumClasses);

struct AlignedStreams {
  std::string video_id;
  std::size_t first_index = 0;
  /// slots[t][view] holds the frame of clip first_index + t, if that view reported it.
  std::vector<std::array<std::optional<std::vector<double>>, kNumViews>> slots;

  std::size_t size() const { return slots.size(); }
};

/// Groups one video's frames by clip index. Every index between the smallest and the largest
/// must have at least one view.
AlignedStreams align_streams(const std::vector<ProbFrame>& frames);

enum class FusionMode { WeightedAverage, MaxConfidence };

/// One unit-sum vector per clip index of `streams`, in index order.
std::vector<std::vector<double>> fuse_views(const AlignedStreams& streams,
                                            const ViewWeights& weights,
                                            FusionMode mode = FusionMode::WeightedAverage);

}  // namespace driveloc
