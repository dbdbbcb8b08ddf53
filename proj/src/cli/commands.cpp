#include "driveloc/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "driveloc/io.hpp"
#include "driveloc/metrics.hpp"
#include "driveloc/parallel.hpp"
#include "json.hpp"

namespace driveloc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Parse:
    case ErrorKind::EmptyInput:
      return kInputError;
    case ErrorKind::NoCandidateRun:
      return kInternalError;
    default:
      return kValidationError;
  }
}

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
  return in;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Validation, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorKind::Validation, "failed writing '" + path + "'");
}

void ensure_distinct(const std::string& input, const std::string& output) {
  std::error_code ec;
  if (fs::exists(output, ec) && fs::equivalent(input, output, ec)) {
    throw Error(ErrorKind::Validation, "output '" + output + "' would overwrite input");
  }
}

void print_warnings(const RunConfig& cfg, std::ostream& err) {
  for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
}

using VideoFrames = std::map<std::string, std::vector<ProbFrame>>;

VideoFrames read_videos(const std::string& path, const RunConfig& cfg, bool& fused) {
  auto in = open_in(path);
  io::ProbFile file = io::read_prob_jsonl(in, cfg.num_classes);
  if (file.frames.empty()) throw Error(ErrorKind::Parse, "'" + path + "': no records");
  fused = file.fused;
  VideoFrames videos;
  for (auto& f : file.frames) videos[f.video_id].push_back(std::move(f));
  return videos;
}

struct FusedVideo {
  std::string video_id;
  std::size_t first_index = 0;
  std::vector<std::vector<double>> probs;
};

FusedVideo fuse_video(const std::vector<ProbFrame>& frames, const RunConfig& cfg) {
  const AlignedStreams streams = align_streams(frames);
  return {streams.video_id, streams.first_index, fuse_views(streams, cfg.weights, cfg.fusion_mode)};
}

/// Fused records go straight into a sequence; they still need one record per clip index.
FusedVideo collect_fused(std::vector<ProbFrame> frames) {
  std::sort(frames.begin(), frames.end(),
            [](const ProbFrame& a, const ProbFrame& b) { return a.clip_index < b.clip_index; });
  FusedVideo out;
  out.video_id = frames.front().video_id;
  out.first_index = frames.front().clip_index;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::size_t expected = out.first_index + i;
    if (frames[i].clip_index < expected) {
      throw Error(ErrorKind::DuplicateFrame, "video " + out.video_id + " clip " +
                                                 std::to_string(frames[i].clip_index));
    }
    if (frames[i].clip_index > expected) {
      throw Error(ErrorKind::NonContiguous,
                  "video " + out.video_id + " has no record for clip " + std::to_string(expected));
    }
    out.probs.push_back(std::move(frames[i].probs));
  }
  return out;
}

std::vector<std::reference_wrapper<const std::vector<ProbFrame>>> as_list(const VideoFrames& videos) {
  std::vector<std::reference_wrapper<const std::vector<ProbFrame>>> out;
  for (const auto& [id, frames] : videos) out.emplace_back(frames);
  return out;
}

json candidates_json(const std::vector<Candidate>& cands) {
  json arr = json::array();
  for (const auto& c : cands) {
    arr.push_back({{"class_id", c.segment.class_id},
                   {"start_s", c.segment.start_s},
                   {"end_s", c.segment.end_s},
                   {"score", c.segment.score},
                   {"first_clip", c.first},
                   {"last_clip", c.last}});
  }
  return arr;
}

json segments_json(const std::vector<Segment>& segs) {
  json arr = json::array();
  for (const auto& s : segs) {
    arr.push_back({{"class_id", s.class_id}, {"start_s", s.start_s}, {"end_s", s.end_s},
                   {"score", s.score}});
  }
  return arr;
}

std::string notice_kind(NoticeKind k) { return k == NoticeKind::Restored ? "restored" : "weak-restore"; }

json video_report(const FusedVideo& video, const DecodedSequence& seq, const StageTrace& trace) {
  json top1 = json::array();
  json top2 = json::array();
  for (const auto& clip : seq.clips) {
    top1.push_back(clip.top.ranks.at(0).class_id);
    top2.push_back(clip.top.ranks.size() > 1 && clip.top.ranks[1].prob > 0.0
                       ? json(clip.top.ranks[1].class_id)
                       : json(nullptr));
  }
  json warnings = json::array();
  for (const auto& w : trace.final.warnings) {
    warnings.push_back({{"kind", notice_kind(w.kind)}, {"class_id", w.class_id}, {"message", w.message}});
  }
  return {{"video_id", video.video_id},
          {"first_clip_index", video.first_index},
          {"clips", seq.size()},
          {"hop_s", seq.hop_s},
          {"clip_start_s", seq.empty() ? 0.0 : seq.clips.front().start_s},
          {"top1", top1},
          {"top2", top2},
          {"decoded", candidates_json(trace.decoded)},
          {"merged", candidates_json(trace.merged)},
          {"decided", candidates_json(trace.decided)},
          {"final", segments_json(trace.final.segments)},
          {"warnings", warnings}};
}

}  // namespace

int cmd_fuse(const RunConfig& cfg, const FuseArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    print_warnings(cfg, err);
    ensure_distinct(args.input, args.output);
    bool fused = false;
    const VideoFrames videos = read_videos(args.input, cfg, fused);
    if (fused) throw Error(ErrorKind::Validation, "'" + args.input + "' is already fused");
    const auto list = as_list(videos);
    std::vector<FusedVideo> results(list.size());
    parallel_for(list.size(), args.jobs, [&](std::size_t i) { results[i] = fuse_video(list[i], cfg); });

    std::ostringstream out;
    for (const auto& r : results) io::write_fused_jsonl(out, r.video_id, r.first_index, r.probs);
    write_file(args.output, out.str());
    return static_cast<int>(kOk);
  });
}

int cmd_localize(const RunConfig& cfg, const LocalizeArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    print_warnings(cfg, err);
    const std::string sidecar = args.report.empty() ? args.output + ".report.json" : args.report;
    ensure_distinct(args.input, args.output);
    ensure_distinct(args.input, sidecar);
    bool fused = false;
    VideoFrames videos = read_videos(args.input, cfg, fused);
    const auto list = as_list(videos);

    struct Result {
      FusedVideo video;
      DecodedSequence seq;
      StageTrace trace;
    };
    std::vector<Result> results(list.size());
    parallel_for(list.size(), args.jobs, [&](std::size_t i) {
      Result& r = results[i];
      r.video = fused ? collect_fused(list[i].get()) : fuse_video(list[i], cfg);
      r.seq = make_sequence(r.video.probs, r.video.first_index, cfg.clip);
      r.trace = trace_video(r.seq, cfg.post, r.video.video_id);
    });

    std::vector<Localization> locs;
    json report_videos = json::array();
    std::size_t restored = 0;
    for (const auto& r : results) {
      locs.push_back(r.trace.final);
      report_videos.push_back(video_report(r.video, r.seq, r.trace));
      restored += r.trace.final.warnings.size();
    }
    std::ostringstream sub;
    io::write_submission(sub, locs, args.fractional);
    write_file(args.output, sub.str());

    json required = cfg.post.required_classes;
    const json report = {
        {"num_classes", cfg.num_classes},
        {"background_class", cfg.post.background_class ? json(*cfg.post.background_class) : json(nullptr)},
        {"required_classes", required},
        {"videos", report_videos}};
    write_file(sidecar, report.dump(1) + "\n");
    if (restored > 0) err << "note: " << restored << " classes restored; details in " << sidecar << '\n';
    return static_cast<int>(kOk);
  });
}

namespace {

json summary_json(const ScoreSummary& s) {
  json per_class = json::array();
  for (const auto& [c, cls] : s.per_class) {
    per_class.push_back({{"class_id", c}, {"gt", cls.gt_count}, {"matched", cls.matched},
                         {"mean_os", cls.mean_os()}});
  }
  return {{"mean_os", s.mean_os},       {"ground_truth", s.gt_count},
          {"matched", s.matched_count}, {"unmatched_gt", s.unmatched_gt},
          {"unmatched_pred", s.unmatched_pred}, {"per_class", per_class}};
}

constexpr const char* kMatchingNote =
    "matching: greedy same-class one-to-one by descending os; unmatched ground truth scores 0 "
    "(stand-in rule, not the official challenge matcher)";

json report_json(const ScoreReport& r) {
  json videos = json::object();
  for (const auto& [id, s] : r.per_video) videos[id] = summary_json(s);
  return {{"corpus", summary_json(r.corpus)}, {"videos", videos}, {"warnings", r.warnings},
          {"matching", kMatchingNote}};
}

}  // namespace

int cmd_eval(const RunConfig& cfg, const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto pred_in = open_in(args.predictions);
    auto gt_in = open_in(args.ground_truth);
    const auto preds = io::as_localizations(io::read_intervals(pred_in, cfg.num_classes));
    const auto gts = io::read_intervals(gt_in, cfg.num_classes);
    const ScoreReport report = match_and_score(preds, gts);
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';

    const json doc = report_json(report);
    if (!args.output.empty()) write_file(args.output, doc.dump(1) + "\n");
    if (cfg.format == ReportFormat::Json) {
      out << doc.dump(1) << '\n';
      return static_cast<int>(kOk);
    }
    const auto& c = report.corpus;
    out << std::fixed << std::setprecision(4);
    out << "mean_os " << c.mean_os << '\n';
    out << "ground_truth " << c.gt_count << "  matched " << c.matched_count << "  unmatched_gt "
        << c.unmatched_gt << "  unmatched_pred " << c.unmatched_pred << '\n';
    out << "class      gt  matched  mean_os\n";
    for (const auto& [cls, s] : c.per_class) {
      out << std::setw(5) << cls << std::setw(8) << s.gt_count << std::setw(9) << s.matched
          << std::setw(9) << s.mean_os() << '\n';
    }
    out << kMatchingNote << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_synth(const RunConfig& cfg, const SynthArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    print_warnings(cfg, err);
    if (args.ground_truth == args.probs) {
      throw Error(ErrorKind::Validation, "ground truth and probability outputs must differ");
    }
    const std::size_t videos = args.videos > 0 ? args.videos : cfg.videos;
    const auto scenarios = generate_corpus(args.seed, videos, cfg.synth);
    std::vector<std::string> chunks(scenarios.size());
    parallel_for(scenarios.size(), args.jobs, [&](std::size_t i) {
      std::ostringstream buf;
      io::write_prob_jsonl(buf, emit_streams(scenarios[i]));
      chunks[i] = buf.str();
    });

    std::ostringstream gt;
    for (const auto& s : scenarios) io::write_ground_truth(gt, s.schedule);
    write_file(args.ground_truth, gt.str());
    std::ofstream probs(args.probs, std::ios::binary | std::ios::trunc);
    if (!probs) throw Error(ErrorKind::Validation, "cannot write '" + args.probs + "'");
    for (const auto& chunk : chunks) probs << chunk;
    if (!probs) throw Error(ErrorKind::Validation, "failed writing '" + args.probs + "'");
    return static_cast<int>(kOk);
  });
}

namespace {

std::string bar(std::size_t clips, std::size_t width, const std::function<bool(std::size_t)>& on) {
  std::string out(width, '.');
  for (std::size_t b = 0; b < width; ++b) {
    const std::size_t lo = b * clips / width;
    const std::size_t hi = std::max(lo + 1, (b + 1) * clips / width);
    for (std::size_t t = lo; t < hi && t < clips; ++t) {
      if (on(t)) {
        out[b] = '#';
        break;
      }
    }
  }
  return out;
}

}  // namespace

int cmd_report(const RunConfig& cfg, const ReportArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto in = open_in(args.sidecar);
    std::ostringstream buf;
    buf << in.rdbuf();
    const json doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded() || !doc.contains("videos")) {
      throw Error(ErrorKind::Parse, "'" + args.sidecar + "' is not a localization report");
    }
    const int num_classes = doc.value("num_classes", cfg.num_classes);
    const json bg = doc.value("background_class", json(nullptr));

    json rendered = json::array();
    for (const auto& v : doc["videos"]) {
      const std::size_t clips = v.at("clips").get<std::size_t>();
      const double hop = v.at("hop_s").get<double>();
      const double t0 = v.at("clip_start_s").get<double>();
      const std::size_t width = std::max<std::size_t>(1, std::min(clips, args.width));
      const auto& top1 = v.at("top1");
      const auto& top2 = v.at("top2");

      json rows = json::array();
      std::ostringstream text;
      text << "video " << v.at("video_id").get<std::string>() << "  (" << clips << " clips, "
           << hop << " s each)\n";
      text << "class  " << std::left << std::setw(static_cast<int>(width)) << "top-1" << " | "
           << std::setw(static_cast<int>(width)) << "top-2" << " | final\n"
           << std::right;
      for (ClassId c = 0; c < num_classes; ++c) {
        const std::string r1 = bar(clips, width, [&](std::size_t t) { return top1[t] == c; });
        const std::string r2 = bar(clips, width, [&](std::size_t t) { return top2[t] == c; });
        const std::string rf = bar(clips, width, [&](std::size_t t) {
          const double mid = t0 + (static_cast<double>(t) + 0.5) * hop;
          for (const auto& s : v.at("final")) {
            if (s.at("class_id") == c && s.at("start_s") <= mid && mid < s.at("end_s")) return true;
          }
          return false;
        });
        const bool is_bg = bg.is_number_integer() && bg.get<int>() == c;
        rows.push_back({{"class_id", c}, {"background", is_bg}, {"top1", r1}, {"top2", r2}, {"final", rf}});
        text << std::setw(5) << c << (is_bg ? "* " : "  ") << r1 << " | " << r2 << " | " << rf << '\n';
      }
      for (const auto& w : v.at("warnings")) text << "  " << w.at("kind").get<std::string>() << ": "
                                                  << w.at("message").get<std::string>() << '\n';
      if (cfg.format == ReportFormat::Json) {
        rendered.push_back({{"video_id", v.at("video_id")}, {"width", width}, {"rows", rows},
                            {"final_segments", v.at("final")}, {"warnings", v.at("warnings")}});
      } else {
        out << text.str() << '\n';
      }
    }
    if (cfg.format == ReportFormat::Json) out << rendered.dump(1) << '\n';
    return static_cast<int>(kOk);
  });
}

}  // namespace driveloc::cli
