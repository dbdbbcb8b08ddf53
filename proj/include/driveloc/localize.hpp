#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driveloc/core.hpp"

namespace driveloc {

/// Thresholds for the three post-processing stages.
struct PostParams {
  double gap_max_s = 2.0;   // widest gap two same-class segments may be merged across
  double min_dur_s = 2.0;   // shorter segments are noise candidates
  double p_merge = 0.30;    // every gap clip must rank the class top-2 with at least this
  double p_noise = 0.50;    // short segments below this mean probability are dropped
  std::optional<ClassId> background_class = 0;
  std::vector<ClassId> required_classes;  // sorted, unique

  /// Background 0 and every other class required.
  static PostParams defaults(int num_classes = kDefaultNumClasses);
  /// Replaces the background class and recomputes required_classes as "all but background".
  void set_background(std::optional<ClassId> background, int num_classes);
  bool is_background(ClassId c) const { return background_class && *background_class == c; }
  void validate(int num_classes) const;
};

struct DecodedClip {
  std::size_t clip_index = 0;
  double start_s = 0.0;
  std::vector<double> probs;
  TopK top;  // k = 2
};

struct DecodedSequence {
  std::vector<DecodedClip> clips;
  double hop_s = 1.0;

  std::size_t size() const { return clips.size(); }
  bool empty() const { return clips.empty(); }
  int num_classes() const { return clips.empty() ? 0 : static_cast<int>(clips[0].probs.size()); }
  /// End of the tile that starts at clip `pos`.
  double tile_end(std::size_t pos) const { return clips[pos].start_s + hop_s; }
};

/// Builds the decoded view of consecutive fused vectors starting at `first_index`.
DecodedSequence make_sequence(const std::vector<std::vector<double>>& fused,
                              std::size_t first_index, const ClipSpec& spec);

/// A segment still tied to the clips that produced it. `first`/`last` are inclusive
/// positions in the DecodedSequence.
struct Candidate {
  Segment segment;
  std::size_t first = 0;
  std::size_t last = 0;
  bool background = false;

  std::size_t clip_count() const { return last - first + 1; }
  bool operator==(const Candidate&) const = default;
};

enum class NoticeKind { Restored, WeakRestore };

struct Notice {
  NoticeKind kind = NoticeKind::Restored;
  ClassId class_id = 0;
  std::string message;
  bool operator==(const Notice&) const = default;
};

struct Localization {
  std::string video_id;
  std::vector<Segment> segments;  // ordered by (start_s, class_id)
  std::vector<Notice> warnings;
};

/// Maximal runs of constant top-1 class. Each run spans its clips' tiles.
std::vector<Candidate> decode_segments(const DecodedSequence& seq, const PostParams& params);

/// Same-class merging across short, top-2-supported gaps (to fixpoint, left to right), then
/// removal of short low-confidence segments. Segments lying inside a merged gap are absorbed.
std::vector<Candidate> conditional_merge(const std::vector<Candidate>& segments,
                                         const DecodedSequence& seq, const PostParams& params);

/// Sum of the class's probability over the segment's clips that rank it top-2.
double trust_score(const Candidate& cand, const DecodedSequence& seq);

/// Keeps the most trusted segment of every class and drops background.
std::vector<Candidate> conditional_decision(const std::vector<Candidate>& segments,
                                            const DecodedSequence& seq, const PostParams& params);

/// Fills in every required class missing from `selected`.
Localization restore_missing(const std::vector<Candidate>& selected, const DecodedSequence& seq,
                             const PostParams& params, const std::string& video_id = {});

/// Intermediate results of every stage, for reporting.
struct StageTrace {
  std::vector<Candidate> decoded;
  std::vector<Candidate> merged;
  std::vector<Candidate> decided;
  Localization final;
};

StageTrace trace_video(const DecodedSequence& seq, const PostParams& params,
                       const std::string& video_id = {});
Localization localize_video(const DecodedSequence& seq, const PostParams& params,
                            const std::string& video_id = {});

}  // namespace driveloc
