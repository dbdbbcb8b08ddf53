#include "driveloc/oracle.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>

namespace driveloc::oracle {

bool in_top2(const std::vector<double>& probs, ClassId c) {
  const double pc = probs[static_cast<std::size_t>(c)];
  if (!(pc > 0.0)) return false;
  int beaten_by = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const auto kc = static_cast<ClassId>(k);
    if (probs[k] > pc || (probs[k] == pc && kc < c)) ++beaten_by;
  }
  return beaten_by < 2;
}

namespace {

constexpr double kTimeEps = 1e-9;

Candidate span(ClassId c, std::size_t first, std::size_t last, double score,
               const DecodedSequence& seq, const PostParams& params) {
  Candidate out;
  out.segment.class_id = c;
  out.segment.start_s = seq.clips[first].start_s;
  out.segment.end_s = seq.clips[last].start_s + seq.hop_s;
  out.segment.score = score;
  out.first = first;
  out.last = last;
  out.background = params.background_class.has_value() && *params.background_class == c;
  return out;
}

std::vector<Candidate> decode(const DecodedSequence& seq, const PostParams& params) {
  std::vector<ClassId> label(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto& p = seq.clips[t].probs;
    std::size_t arg = 0;
    for (std::size_t k = 1; k < p.size(); ++k) {
      if (p[k] > p[arg]) arg = k;
    }
    label[t] = static_cast<ClassId>(arg);
  }
  std::vector<Candidate> out;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const double p = seq.clips[t].probs[static_cast<std::size_t>(label[t])];
    if (t > 0 && label[t] == label[t - 1]) {
      out.back().last = t;
      out.back().segment.end_s = seq.clips[t].start_s + seq.hop_s;
      out.back().segment.score += p;
    } else {
      out.push_back(span(label[t], t, t, p, seq, params));
    }
  }
  return out;
}

bool mergeable(const Candidate& a, const Candidate& b, const DecodedSequence& seq,
               const PostParams& params) {
  const ClassId c = a.segment.class_id;
  const double gap = seq.clips[b.first].start_s - (seq.clips[a.last].start_s + seq.hop_s);
  if (gap > params.gap_max_s + kTimeEps) return false;
  for (std::size_t t = a.last + 1; t < b.first; ++t) {
    const auto& p = seq.clips[t].probs;
    if (!in_top2(p, c)) return false;
    if (!(p[static_cast<std::size_t>(c)] >= params.p_merge)) return false;
  }
  return true;
}

std::vector<Candidate> merge(const std::vector<Candidate>& input, const DecodedSequence& seq,
                             const PostParams& params) {
  std::vector<Candidate> list = input;
  for (;;) {
    std::optional<std::pair<std::size_t, std::size_t>> hit;
    for (std::size_t i = 0; i < list.size() && !hit; ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        if (list[j].segment.class_id != list[i].segment.class_id) continue;
        // j is the nearest same-class segment after i
        if (mergeable(list[i], list[j], seq, params)) hit = std::make_pair(i, j);
        break;
      }
    }
    if (!hit) break;
    const auto [i, j] = *hit;
    const ClassId c = list[i].segment.class_id;
    double score = list[i].segment.score + list[j].segment.score;
    for (std::size_t t = list[i].last + 1; t < list[j].first; ++t) {
      score += seq.clips[t].probs[static_cast<std::size_t>(c)];
    }
    Candidate joined = span(c, list[i].first, list[j].last, score, seq, params);
    joined.background = list[i].background;
    std::vector<Candidate> next;
    for (std::size_t k = 0; k < list.size(); ++k) {
      if (k == i) next.push_back(joined);
      else if (k < i || k > j) next.push_back(list[k]);
    }
    list = std::move(next);
  }

  std::vector<Candidate> out;
  for (const auto& s : list) {
    const auto clips = static_cast<double>(s.last - s.first + 1);
    const bool short_seg = s.segment.end_s - s.segment.start_s < params.min_dur_s - kTimeEps;
    const bool weak = s.segment.score / clips < params.p_noise;
    if (!s.background && short_seg && weak) continue;
    out.push_back(s);
  }
  return out;
}

double trust(const Candidate& s, const DecodedSequence& seq) {
  const ClassId c = s.segment.class_id;
  double total = 0.0;
  for (std::size_t t = s.first; t <= s.last; ++t) {
    const auto& p = seq.clips[t].probs;
    total += in_top2(p, c) ? p[static_cast<std::size_t>(c)] : 0.0;
  }
  return total;
}

bool by_position(const Candidate& a, const Candidate& b) {
  return a.first != b.first ? a.first < b.first : a.segment.class_id < b.segment.class_id;
}

std::vector<Candidate> decide(const std::vector<Candidate>& input, const DecodedSequence& seq,
                              const PostParams& params) {
  std::map<ClassId, std::vector<Candidate>> by_class;
  for (const auto& s : input) {
    const bool bg = s.background || (params.background_class && *params.background_class == s.segment.class_id);
    if (!bg) by_class[s.segment.class_id].push_back(s);
  }
  std::vector<Candidate> out;
  for (auto& [c, group] : by_class) {
    std::stable_sort(group.begin(), group.end(), [&](const Candidate& a, const Candidate& b) {
      const double ta = trust(a, seq);
      const double tb = trust(b, seq);
      if (ta != tb) return ta > tb;
      const auto la = a.last - a.first;
      const auto lb = b.last - b.first;
      if (la != lb) return la > lb;
      return a.first < b.first;
    });
    out.push_back(group.front());
  }
  std::sort(out.begin(), out.end(), by_position);
  return out;
}

Localization restore(const std::vector<Candidate>& input, const DecodedSequence& seq,
                     const PostParams& params) {
  Localization out;
  std::vector<Candidate> kept = input;
  for (ClassId c : params.required_classes) {
    const bool present = std::any_of(input.begin(), input.end(),
                                     [c](const Candidate& s) { return s.segment.class_id == c; });
    if (present) continue;
    try {
      kept.push_back(best_run(seq, c, params));
      out.warnings.push_back({NoticeKind::Restored, c, {}});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoCandidateRun) throw;
      std::size_t arg = 0;
      const auto ci = static_cast<std::size_t>(c);
      for (std::size_t t = 0; t < seq.size(); ++t) {
        if (seq.clips[t].probs[ci] > seq.clips[arg].probs[ci]) arg = t;
      }
      kept.push_back(span(c, arg, arg, seq.clips[arg].probs[ci], seq, params));
      out.warnings.push_back({NoticeKind::WeakRestore, c, {}});
    }
  }
  std::sort(kept.begin(), kept.end(), by_position);
  for (const auto& k : kept) out.segments.push_back(k.segment);
  return out;
}

}  // namespace

Candidate best_run(const DecodedSequence& seq, ClassId class_id, const PostParams& params) {
  const auto ci = static_cast<std::size_t>(class_id);
  std::optional<Candidate> best;
  for (std::size_t l = 0; l < seq.size(); ++l) {
    double mass = 0.0;
    for (std::size_t r = l; r < seq.size(); ++r) {
      if (!in_top2(seq.clips[r].probs, class_id)) break;
      mass += seq.clips[r].probs[ci];
      const bool better = !best || mass > best->segment.score ||
                          (mass == best->segment.score &&
                           (r - l > best->last - best->first ||
                            (r - l == best->last - best->first && l < best->first)));
      if (better) best = span(class_id, l, r, mass, seq, params);
    }
  }
  if (!best) {
    throw Error(ErrorKind::NoCandidateRun,
                "class " + std::to_string(class_id) + " never ranks top-2");
  }
  return *best;
}

Stage parse_stage(std::string_view name) {
  if (name == "decode") return Stage::Decode;
  if (name == "merge") return Stage::Merge;
  if (name == "decision") return Stage::Decision;
  if (name == "restore") return Stage::Restore;
  throw Error(ErrorKind::Validation, "unknown stage '" + std::string(name) + "'");
}

StageOutput stage_check(Stage stage, const DecodedSequence& seq,
                        const std::vector<Candidate>& input, const PostParams& params) {
  StageOutput out;
  switch (stage) {
    case Stage::Decode: out.candidates = decode(seq, params); break;
    case Stage::Merge: out.candidates = merge(input, seq, params); break;
    case Stage::Decision: out.candidates = decide(input, seq, params); break;
    case Stage::Restore: out.localization = restore(input, seq, params); break;
  }
  return out;
}

}  // namespace driveloc::oracle
