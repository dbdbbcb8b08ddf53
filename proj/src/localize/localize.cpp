#include "driveloc/localize.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace driveloc {
namespace {

constexpr double kTimeEps = 1e-9;

void check_ranges(const std::vector<Candidate>& segments, const DecodedSequence& seq) {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.first > s.last || s.last >= seq.size()) {
      std::ostringstream msg;
      msg << "segment of class " << s.segment.class_id << " covers clips [" << s.first << ", "
          << s.last << "] but the sequence has " << seq.size();
      throw Error(ErrorKind::InconsistentInput, msg.str());
    }
    if (i > 0 && segments[i - 1].last >= s.first) {
      throw Error(ErrorKind::InconsistentInput, "segments overlap or are out of order");
    }
  }
}

bool gap_supports(const Candidate& left, const Candidate& right, const DecodedSequence& seq,
                  const PostParams& params) {
  const double gap = right.segment.start_s - left.segment.end_s;
  if (gap > params.gap_max_s + kTimeEps) return false;
  const ClassId c = left.segment.class_id;
  for (std::size_t t = left.last + 1; t < right.first; ++t) {
    const auto& top = seq.clips[t].top;
    if (!top.contains(c) || top.prob_of(c) < params.p_merge) return false;
  }
  return true;
}

Candidate join(const Candidate& left, const Candidate& right, const DecodedSequence& seq) {
  const ClassId c = left.segment.class_id;
  Candidate out = left;
  out.last = right.last;
  out.segment.end_s = right.segment.end_s;
  out.segment.score = left.segment.score + right.segment.score;
  for (std::size_t t = left.last + 1; t < right.first; ++t) {
    out.segment.score += seq.clips[t].probs[static_cast<std::size_t>(c)];
  }
  return out;
}

Candidate make_candidate(ClassId c, std::size_t first, std::size_t last, double score,
                         const DecodedSequence& seq, const PostParams& params) {
  Candidate out;
  out.segment = {c, seq.clips[first].start_s, seq.tile_end(last), score};
  out.first = first;
  out.last = last;
  out.background = params.is_background(c);
  return out;
}

bool by_start(const Candidate& a, const Candidate& b) {
  if (a.first != b.first) return a.first < b.first;
  return a.segment.class_id < b.segment.class_id;
}

}  // namespace

PostParams PostParams::defaults(int num_classes) {
  PostParams p;
  p.set_background(ClassId{0}, num_classes);
  return p;
}

void PostParams::set_background(std::optional<ClassId> background, int num_classes) {
  background_class = background;
  required_classes.clear();
  for (ClassId c = 0; c < num_classes; ++c) {
    if (!is_background(c)) required_classes.push_back(c);
  }
}

void PostParams::validate(int num_classes) const {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(p_merge) || !in_unit(p_noise)) {
    throw Error(ErrorKind::Validation, "probability thresholds must lie in [0, 1]");
  }
  if (!(gap_max_s >= 0.0) || !(min_dur_s >= 0.0)) {
    throw Error(ErrorKind::Validation, "durations must be non-negative");
  }
  if (background_class && (*background_class < 0 || *background_class >= num_classes)) {
    throw Error(ErrorKind::Validation, "background class out of range");
  }
  for (ClassId c : required_classes) {
    if (c < 0 || c >= num_classes) {
      throw Error(ErrorKind::Validation, "required class " + std::to_string(c) + " out of range");
    }
    if (is_background(c)) {
      throw Error(ErrorKind::Validation, "background class cannot be required");
    }
  }
}

DecodedSequence make_sequence(const std::vector<std::vector<double>>& fused,
                              std::size_t first_index, const ClipSpec& spec) {
  spec.validate();
  DecodedSequence seq;
  seq.hop_s = spec.hop_s();
  seq.clips.reserve(fused.size());
  for (std::size_t t = 0; t < fused.size(); ++t) {
    DecodedClip clip;
    clip.clip_index = first_index + t;
    clip.start_s = clip_time_bounds(clip.clip_index, spec).start_s;
    clip.probs = fused[t];
    clip.top = topk(clip.probs, 2);
    seq.clips.push_back(std::move(clip));
  }
  return seq;
}

std::vector<Candidate> decode_segments(const DecodedSequence& seq, const PostParams& params) {
  std::vector<Candidate> out;
  std::size_t t = 0;
  while (t < seq.size()) {
    const ClassId c = seq.clips[t].top.top1().class_id;
    double score = 0.0;
    std::size_t end = t;
    while (end < seq.size() && seq.clips[end].top.top1().class_id == c) {
      score += seq.clips[end].top.top1().prob;
      ++end;
    }
    out.push_back(make_candidate(c, t, end - 1, score, seq, params));
    t = end;
  }
  return out;
}

std::vector<Candidate> conditional_merge(const std::vector<Candidate>& segments,
                                         const DecodedSequence& seq, const PostParams& params) {
  check_ranges(segments, seq);
  std::vector<Candidate> list = segments;

  bool changed = true;
  while (changed) {
    changed = false;
    std::size_t i = 0;
    while (i < list.size()) {
      const ClassId c = list[i].segment.class_id;
      auto next = std::find_if(list.begin() + static_cast<std::ptrdiff_t>(i) + 1, list.end(),
                               [c](const Candidate& s) { return s.segment.class_id == c; });
      if (next != list.end() && gap_supports(list[i], *next, seq, params)) {
        list[i] = join(list[i], *next, seq);
        list.erase(list.begin() + static_cast<std::ptrdiff_t>(i) + 1, next + 1);
        changed = true;
        continue;
      }
      ++i;
    }
  }

  std::erase_if(list, [&](const Candidate& s) {
    if (s.background) return false;
    const double mean = s.segment.score / static_cast<double>(s.clip_count());
    return s.segment.duration_s() < params.min_dur_s - kTimeEps && mean < params.p_noise;
  });
  return list;
}

double trust_score(const Candidate& cand, const DecodedSequence& seq) {
  const ClassId c = cand.segment.class_id;
  double total = 0.0;
  for (std::size_t t = cand.first; t <= cand.last; ++t) {
    const auto& top = seq.clips[t].top;
    if (top.contains(c)) total += top.prob_of(c);
  }
  return total;
}

std::vector<Candidate> conditional_decision(const std::vector<Candidate>& segments,
                                            const DecodedSequence& seq,
                                            const PostParams& params) {
  check_ranges(segments, seq);
  struct Best {
    const Candidate* cand;
    double trust;
  };
  std::map<ClassId, Best> best;
  for (const auto& s : segments) {
    if (s.background || params.is_background(s.segment.class_id)) continue;
    const double trust = trust_score(s, seq);
    auto [it, inserted] = best.try_emplace(s.segment.class_id, Best{&s, trust});
    if (inserted) continue;
    const Best& cur = it->second;
    const bool better =
        trust > cur.trust ||
        (trust == cur.trust && (s.clip_count() > cur.cand->clip_count() ||
                                (s.clip_count() == cur.cand->clip_count() &&
                                 s.first < cur.cand->first)));
    if (better) it->second = {&s, trust};
  }
  std::vector<Candidate> out;
  out.reserve(best.size());
  for (const auto& [c, b] : best) out.push_back(*b.cand);
  std::sort(out.begin(), out.end(), by_start);
  return out;
}

Localization restore_missing(const std::vector<Candidate>& selected, const DecodedSequence& seq,
                             const PostParams& params, const std::string& video_id) {
  if (seq.empty()) throw Error(ErrorKind::EmptySequence, "no clips to restore from");
  Localization out;
  out.video_id = video_id;

  std::vector<bool> present(static_cast<std::size_t>(seq.num_classes()), false);
  std::vector<Candidate> kept = selected;
  for (const auto& s : selected) {
    const auto c = static_cast<std::size_t>(s.segment.class_id);
    if (c >= present.size() || s.last >= seq.size() || s.first > s.last) {
      throw Error(ErrorKind::InconsistentInput,
                  "selected segment of class " + std::to_string(c) + " does not fit the sequence");
    }
    if (present[c]) {
      throw Error(ErrorKind::InconsistentInput,
                  "class " + std::to_string(c) + " has more than one selected segment");
    }
    present[c] = true;
  }

  for (ClassId c : params.required_classes) {
    const auto ci = static_cast<std::size_t>(c);
    if (ci >= present.size()) {
      throw Error(ErrorKind::InconsistentInput,
                  "required class " + std::to_string(c) + " is outside the sequence's classes");
    }
    if (present[ci]) continue;

    std::optional<Candidate> best;
    std::size_t t = 0;
    while (t < seq.size()) {
      if (!seq.clips[t].top.contains(c)) {
        ++t;
        continue;
      }
      std::size_t end = t;
      double mass = 0.0;
      while (end < seq.size() && seq.clips[end].top.contains(c)) {
        mass += seq.clips[end].probs[ci];
        ++end;
      }
      Candidate run = make_candidate(c, t, end - 1, mass, seq, params);
      // Runs are visited left to right, so strict comparisons keep the earlier one on ties.
      if (!best || mass > best->segment.score ||
          (mass == best->segment.score && run.clip_count() > best->clip_count())) {
        best = run;
      }
      t = end;
    }

    std::ostringstream msg;
    if (best) {
      msg << "class " << c << " restored from top-2 run [" << best->segment.start_s << ", "
          << best->segment.end_s << ")";
      out.warnings.push_back({NoticeKind::Restored, c, msg.str()});
      kept.push_back(*best);
      continue;
    }
    std::size_t arg = 0;
    for (std::size_t u = 1; u < seq.size(); ++u) {
      if (seq.clips[u].probs[ci] > seq.clips[arg].probs[ci]) arg = u;
    }
    Candidate weak = make_candidate(c, arg, arg, seq.clips[arg].probs[ci], seq, params);
    msg << "class " << c << " never ranked top-2; placed at its peak clip " << seq.clips[arg].clip_index
        << " (p=" << seq.clips[arg].probs[ci] << ")";
    out.warnings.push_back({NoticeKind::WeakRestore, c, msg.str()});
    kept.push_back(weak);
  }

  std::sort(kept.begin(), kept.end(), by_start);
  out.segments.reserve(kept.size());
  for (const auto& k : kept) out.segments.push_back(k.segment);
  return out;
}

StageTrace trace_video(const DecodedSequence& seq, const PostParams& params,
                       const std::string& video_id) {
  if (seq.empty()) throw Error(ErrorKind::EmptySequence, "no clips to localize");
  StageTrace trace;
  trace.decoded = decode_segments(seq, params);
  trace.merged = conditional_merge(trace.decoded, seq, params);
  trace.decided = conditional_decision(trace.merged, seq, params);
  trace.final = restore_missing(trace.decided, seq, params, video_id);
  return trace;
}

Localization localize_video(const DecodedSequence& seq, const PostParams& params,
                            const std::string& video_id) {
  return trace_video(seq, params, video_id).final;
}

}  // namespace driveloc
