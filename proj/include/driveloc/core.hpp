#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace driveloc {

inline constexpr int kDefaultNumClasses = 16;
inline constexpr std::size_t kNumViews = 3;

/// Class labels are plain indices in [0, num_classes).
using ClassId = int;

enum class View : std::uint8_t { Dashboard = 0, Rearview = 1, Rightside = 2 };

inline constexpr std::array<View, kNumViews> kAllViews = {View::Dashboard, View::Rearview,
                                                           View::Rightside};

std::string_view view_name(View view);
/// Case-insensitive. Anything other than the three camera names throws ErrorKind::Validation.
View parse_view(std::string_view name);
inline std::size_t view_slot(View view) { return static_cast<std::size_t>(view); }

enum class ErrorKind {
  AllZeroVector,
  InvalidProbability,
  DuplicateFrame,
  MixedVideo,
  NonContiguous,
  EmptyStreams,
  InconsistentInput,
  EmptySequence,
  LengthMismatch,
  EmptyInput,
  InfeasibleConfig,
  NoCandidateRun,
  Parse,
  Validation,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Clip timebase: one probability vector per clip of `clip_len_frames`, advanced by `stride_frames`.
struct ClipSpec {
  double fps = 30.0;
  int clip_len_frames = 64;
  int stride_frames = 30;

  void validate() const;
  /// Seconds between consecutive clip starts; the temporal resolution of every segment.
  double hop_s() const { return stride_frames / fps; }
  double clip_len_s() const { return clip_len_frames / fps; }
};

struct TimeSpan {
  double start_s = 0.0;
  double end_s = 0.0;
};

TimeSpan clip_time_bounds(std::size_t clip_index, const ClipSpec& spec);

struct ProbFrame {
  std::string video_id;
  View view = View::Dashboard;
  std::size_t clip_index = 0;
  std::vector<double> probs;
};

/// Throws InvalidProbability on negative or non-finite entries, AllZeroVector when nothing is positive.
void validate_probs(std::span<const double> probs);

/// Scales `probs` to unit sum. Vectors already within 1e-12 of unit sum are returned unchanged.
std::vector<double> normalize_probs(std::span<const double> probs);
ProbFrame normalize_probs(const ProbFrame& frame);

struct Ranked {
  ClassId class_id = 0;
  double prob = 0.0;
  bool operator==(const Ranked&) const = default;
};

/// Descending by probability; equal probabilities rank the lower class id first.
struct TopK {
  std::vector<Ranked> ranks;

  const Ranked& top1() const { return ranks.at(0); }
  /// True when `c` is among the ranks with non-zero probability.
  bool contains(ClassId c) const;
  double prob_of(ClassId c) const;
};

TopK topk(std::span<const double> probs, std::size_t k);

/// A temporal interval attributed to one class. `score` is the class probability mass it carries.
struct Segment {
  ClassId class_id = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double score = 0.0;

  double duration_s() const { return end_s - start_s; }
  void validate() const;
  bool operator==(const Segment&) const = default;
};

}  // namespace driveloc
