#include "driveloc/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace driveloc::io {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what);
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); });
}

}  // namespace

ProbFile read_prob_jsonl(std::istream& in, int num_classes) {
  ProbFile file;
  std::string text;
  std::size_t line = 0;
  bool seen = false;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    json rec = json::parse(text, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) parse_fail(line, "not a JSON object");

    ProbFrame frame;
    const auto vid = rec.find("video_id");
    if (vid == rec.end() || !vid->is_string()) parse_fail(line, "missing string field video_id");
    frame.video_id = vid->get<std::string>();
    const auto idx = rec.find("clip_index");
    if (idx == rec.end() || !idx->is_number_unsigned()) {
      parse_fail(line, "missing non-negative integer field clip_index");
    }
    frame.clip_index = idx->get<std::size_t>();
    const auto probs = rec.find("probs");
    if (probs == rec.end() || !probs->is_array()) parse_fail(line, "missing array field probs");
    for (const auto& p : *probs) {
      if (!p.is_number()) parse_fail(line, "probs must be numbers");
      frame.probs.push_back(p.get<double>());
    }
    const auto view = rec.find("view");
    const bool fused = view == rec.end();
    if (seen && fused != file.fused) parse_fail(line, "mixes fused and per-view records");
    file.fused = fused;
    seen = true;

    try {
      if (!fused) {
        if (!view->is_string()) parse_fail(line, "view must be a string");
        frame.view = parse_view(view->get<std::string>());
      }
      if (frame.probs.size() != static_cast<std::size_t>(num_classes)) {
        throw Error(ErrorKind::Validation, "expected " + std::to_string(num_classes) +
                                               " probabilities, got " +
                                               std::to_string(frame.probs.size()));
      }
      frame.probs = normalize_probs(frame.probs);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Parse) throw;
      std::ostringstream msg;
      msg << "line " << line << " (video " << frame.video_id << ", clip " << frame.clip_index
          << "): " << e.what();
      throw Error(e.kind(), msg.str());
    }
    file.frames.push_back(std::move(frame));
    file.lines.push_back(line);
  }
  return file;
}

void write_prob_jsonl(std::ostream& out, const std::vector<ProbFrame>& frames) {
  for (const auto& f : frames) {
    json rec = {{"video_id", f.video_id},
                {"view", std::string(view_name(f.view))},
                {"clip_index", f.clip_index},
                {"probs", f.probs}};
    out << rec.dump() << '\n';
  }
}

void write_fused_jsonl(std::ostream& out, const std::string& video_id, std::size_t first_index,
                       const std::vector<std::vector<double>>& fused) {
  for (std::size_t t = 0; t < fused.size(); ++t) {
    json rec = {{"video_id", video_id}, {"clip_index", first_index + t}, {"probs", fused[t]}};
    out << rec.dump() << '\n';
  }
}

std::string format_seconds(double s) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, s);
  return std::string(buf, res.ptr);
}

long long round_half_up(double s) { return static_cast<long long>(std::floor(s + 0.5 + 1e-9)); }

void write_submission(std::ostream& out, const std::vector<Localization>& locs, bool fractional) {
  struct Line {
    const std::string* video;
    const Segment* seg;
  };
  std::vector<Line> lines;
  for (const auto& loc : locs) {
    for (const auto& s : loc.segments) lines.push_back({&loc.video_id, &s});
  }
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (*a.video != *b.video) return *a.video < *b.video;
    if (a.seg->class_id != b.seg->class_id) return a.seg->class_id < b.seg->class_id;
    return a.seg->start_s < b.seg->start_s;
  });
  for (const auto& l : lines) {
    out << *l.video << ' ' << l.seg->class_id << ' ';
    if (fractional) {
      out << format_seconds(l.seg->start_s) << ' ' << format_seconds(l.seg->end_s);
    } else {
      out << round_half_up(l.seg->start_s) << ' ' << round_half_up(l.seg->end_s);
    }
    out << '\n';
  }
}

void write_ground_truth(std::ostream& out, const std::vector<GroundTruthActivity>& gts) {
  for (const auto& g : gts) {
    out << g.video_id << ' ' << g.class_id << ' ' << format_seconds(g.start_s) << ' '
        << format_seconds(g.end_s) << '\n';
  }
}

std::vector<GroundTruthActivity> read_intervals(std::istream& in, int num_classes) {
  std::vector<GroundTruthActivity> out;
  std::string text;
  std::size_t line = 0;
  auto number = [&line](const std::string& tok, double& value) {
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(value)) {
      parse_fail(line, "'" + tok + "' is not a number");
    }
  };
  while (std::getline(in, text)) {
    ++line;
    if (blank(text) || text.find_first_not_of(" \t") == text.find('#')) continue;
    std::istringstream fields(text);
    std::string vid, cls, start, end, extra;
    if (!(fields >> vid >> cls >> start >> end) || (fields >> extra)) {
      parse_fail(line, "expected 'video_id class_id start end'");
    }
    int c = 0;
    const auto res = std::from_chars(cls.data(), cls.data() + cls.size(), c);
    if (res.ec != std::errc{} || res.ptr != cls.data() + cls.size()) {
      parse_fail(line, "'" + cls + "' is not a class id");
    }
    if (c < 0 || c >= num_classes) parse_fail(line, "class " + cls + " out of range");
    GroundTruthActivity g{vid, c, 0.0, 0.0};
    number(start, g.start_s);
    number(end, g.end_s);
    if (!(g.start_s >= 0.0) || !(g.start_s < g.end_s)) {
      parse_fail(line, "interval must satisfy 0 <= start < end");
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<Localization> as_localizations(const std::vector<GroundTruthActivity>& records) {
  std::map<std::string, Localization> by_video;
  for (const auto& r : records) {
    auto& loc = by_video[r.video_id];
    loc.video_id = r.video_id;
    loc.segments.push_back({r.class_id, r.start_s, r.end_s, 0.0});
  }
  std::vector<Localization> out;
  for (auto& [id, loc] : by_video) out.push_back(std::move(loc));
  return out;
}

}  // namespace driveloc::io
