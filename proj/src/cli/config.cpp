#include "driveloc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace driveloc {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(ErrorKind::Validation, where + " must be a table");
  for (const auto& [key, value] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&key](const char* a) { return key == a; });
    if (!known) throw Error(ErrorKind::Validation, "unknown config key '" + where + "." + key + "'");
  }
}

double number(const json& obj, const char* key, double fallback, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw Error(ErrorKind::Validation, where + "." + key + " must be a number");
  return it->get<double>();
}

int integer(const json& obj, const char* key, int fallback, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) throw Error(ErrorKind::Validation, where + "." + key + " must be an integer");
  return it->get<int>();
}

std::string text(const json& obj, const char* key, const std::string& fallback, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) throw Error(ErrorKind::Validation, where + "." + key + " must be a string");
  return it->get<std::string>();
}

std::vector<ViewWeights::Row> rows_from_json(const json& table, int num_classes) {
  if (!table.is_array() || table.size() != static_cast<std::size_t>(num_classes)) {
    throw Error(ErrorKind::Validation,
                "weights table needs " + std::to_string(num_classes) + " rows of 3 numbers");
  }
  std::vector<ViewWeights::Row> rows;
  for (const auto& r : table) {
    if (!r.is_array() || r.size() != kNumViews) {
      throw Error(ErrorKind::Validation, "each weights row needs exactly 3 numbers");
    }
    ViewWeights::Row row{};
    for (std::size_t v = 0; v < kNumViews; ++v) {
      if (!r[v].is_number()) throw Error(ErrorKind::Validation, "weights must be numbers");
      row[v] = r[v].get<double>();
    }
    rows.push_back(row);
  }
  return rows;
}

void set_weights(RunConfig& cfg, const std::vector<ViewWeights::Row>& rows) {
  std::vector<ClassId> fixed;
  cfg.weights = ViewWeights::from_rows(rows, &fixed);
  cfg.default_weights = false;
  for (ClassId c : fixed) {
    cfg.warnings.push_back("weights row " + std::to_string(c) + " did not sum to 1; renormalized");
  }
}

std::optional<ClassId> background_from_json(const json& v, int num_classes) {
  if (v.is_null()) return std::nullopt;
  if (v.is_string()) return parse_background(v.get<std::string>(), num_classes);
  if (v.is_number_integer()) return parse_background(std::to_string(v.get<int>()), num_classes);
  throw Error(ErrorKind::Validation, "post.background_class must be a class id or \"none\"");
}

}  // namespace

void RunConfig::validate() const {
  clip.validate();
  if (weights.num_classes() != num_classes) {
    throw Error(ErrorKind::Validation, "weights table does not match num_classes");
  }
  post.validate(num_classes);
  synth.validate();
}

std::optional<ClassId> parse_background(const std::string& text, int num_classes) {
  if (text == "none") return std::nullopt;
  int c = -1;
  std::istringstream in(text);
  char extra = 0;
  if (!(in >> c) || (in >> extra) || c < 0 || c >= num_classes) {
    throw Error(ErrorKind::Validation, "background class must be \"none\" or 0.." +
                                           std::to_string(num_classes - 1) + ", got '" + text + "'");
  }
  return c;
}

void apply_background(RunConfig& cfg, std::optional<ClassId> background) {
  cfg.post.set_background(background, cfg.num_classes);
  cfg.synth.background_class = background;
}

ReportFormat parse_format(const std::string& text) {
  if (text == "text") return ReportFormat::Text;
  if (text == "json") return ReportFormat::Json;
  throw Error(ErrorKind::Validation, "format must be text or json, got '" + text + "'");
}

RunConfig parse_config(const std::string& doc) {
  const json root = json::parse(doc, nullptr, false);
  if (root.is_discarded()) throw Error(ErrorKind::Parse, "config is not valid JSON");
  check_keys(root, "config", {"num_classes", "clip", "fusion", "post", "synth", "report"});

  RunConfig cfg;
  cfg.num_classes = integer(root, "num_classes", kDefaultNumClasses, "config");
  if (cfg.num_classes < 2) throw Error(ErrorKind::Validation, "num_classes must be at least 2");
  cfg.weights = default_view_weights(cfg.num_classes);
  cfg.post = PostParams::defaults(cfg.num_classes);
  cfg.synth.num_classes = cfg.num_classes;

  if (root.contains("clip")) {
    const auto& c = root["clip"];
    check_keys(c, "clip", {"fps", "clip_len_frames", "stride_frames"});
    cfg.clip.fps = number(c, "fps", cfg.clip.fps, "clip");
    cfg.clip.clip_len_frames = integer(c, "clip_len_frames", cfg.clip.clip_len_frames, "clip");
    cfg.clip.stride_frames = integer(c, "stride_frames", cfg.clip.stride_frames, "clip");
  }
  cfg.synth.clip = cfg.clip;

  if (root.contains("fusion")) {
    const auto& f = root["fusion"];
    check_keys(f, "fusion", {"mode", "weights"});
    const std::string mode = text(f, "mode", "weighted-average", "fusion");
    if (mode == "weighted-average") cfg.fusion_mode = FusionMode::WeightedAverage;
    else if (mode == "max-confidence") cfg.fusion_mode = FusionMode::MaxConfidence;
    else throw Error(ErrorKind::Validation, "fusion.mode must be weighted-average or max-confidence");
    if (f.contains("weights")) {
      const auto& w = f["weights"];
      if (w.is_string()) {
        if (w.get<std::string>() != "default") {
          throw Error(ErrorKind::Validation, "fusion.weights must be \"default\" or a table");
        }
      } else {
        set_weights(cfg, rows_from_json(w, cfg.num_classes));
      }
    }
  }

  if (root.contains("post")) {
    const auto& p = root["post"];
    check_keys(p, "post", {"gap_max_s", "min_dur_s", "p_merge", "p_noise", "background_class",
                           "required_classes"});
    cfg.post.gap_max_s = number(p, "gap_max_s", cfg.post.gap_max_s, "post");
    cfg.post.min_dur_s = number(p, "min_dur_s", cfg.post.min_dur_s, "post");
    cfg.post.p_merge = number(p, "p_merge", cfg.post.p_merge, "post");
    cfg.post.p_noise = number(p, "p_noise", cfg.post.p_noise, "post");
    if (p.contains("background_class")) {
      apply_background(cfg, background_from_json(p["background_class"], cfg.num_classes));
    }
    if (p.contains("required_classes")) {
      const auto& r = p["required_classes"];
      if (!r.is_array()) throw Error(ErrorKind::Validation, "post.required_classes must be a list");
      std::vector<ClassId> req;
      for (const auto& c : r) {
        if (!c.is_number_integer()) throw Error(ErrorKind::Validation, "required classes must be integers");
        req.push_back(c.get<int>());
      }
      std::sort(req.begin(), req.end());
      req.erase(std::unique(req.begin(), req.end()), req.end());
      cfg.post.required_classes = req;
    }
  }

  if (root.contains("synth")) {
    const auto& s = root["synth"];
    check_keys(s, "synth", {"videos", "activity_min_s", "activity_max_s", "gap_min_s", "gap_max_s",
                            "max_video_s", "label_window", "noise"});
    const int videos = integer(s, "videos", 1, "synth");
    if (videos < 1) throw Error(ErrorKind::Validation, "synth.videos must be positive");
    cfg.videos = static_cast<std::size_t>(videos);
    auto& sc = cfg.synth;
    sc.activity_min_s = number(s, "activity_min_s", sc.activity_min_s, "synth");
    sc.activity_max_s = number(s, "activity_max_s", sc.activity_max_s, "synth");
    sc.gap_min_s = number(s, "gap_min_s", sc.gap_min_s, "synth");
    sc.gap_max_s = number(s, "gap_max_s", sc.gap_max_s, "synth");
    sc.max_video_s = number(s, "max_video_s", sc.max_video_s, "synth");
    const std::string window = text(s, "label_window", "tile", "synth");
    if (window == "tile") sc.label_window = LabelWindow::Tile;
    else if (window == "clip") sc.label_window = LabelWindow::Clip;
    else throw Error(ErrorKind::Validation, "synth.label_window must be tile or clip");
    if (s.contains("noise")) {
      const auto& n = s["noise"];
      check_keys(n, "synth.noise", {"eps_flip", "flip_correlation", "flip_keep_min", "specialist_boost",
                                    "temperature", "spread", "confusion"});
      auto& nm = sc.noise;
      nm.eps_flip = number(n, "eps_flip", nm.eps_flip, "synth.noise");
      nm.flip_correlation = number(n, "flip_correlation", nm.flip_correlation, "synth.noise");
      nm.flip_keep_min = number(n, "flip_keep_min", nm.flip_keep_min, "synth.noise");
      nm.specialist_boost = number(n, "specialist_boost", nm.specialist_boost, "synth.noise");
      nm.temperature = number(n, "temperature", nm.temperature, "synth.noise");
      nm.spread = number(n, "spread", nm.spread, "synth.noise");
      if (n.contains("confusion")) {
        const auto& m = n["confusion"];
        if (!m.is_array()) throw Error(ErrorKind::Validation, "synth.noise.confusion must be a table");
        nm.confusion.clear();
        for (const auto& row : m) {
          if (!row.is_array()) throw Error(ErrorKind::Validation, "confusion rows must be lists");
          std::vector<double> r;
          for (const auto& x : row) {
            if (!x.is_number()) throw Error(ErrorKind::Validation, "confusion entries must be numbers");
            r.push_back(x.get<double>());
          }
          nm.confusion.push_back(std::move(r));
        }
      }
    }
  }

  if (root.contains("report")) {
    const auto& r = root["report"];
    check_keys(r, "report", {"format"});
    cfg.format = parse_format(text(r, "format", "text", "report"));
  }

  cfg.validate();
  return cfg;
}

namespace {

std::string slurp(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, std::string("cannot open ") + what + " '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

RunConfig load_config(const std::string& path) { return parse_config(slurp(path, "config")); }

std::vector<ViewWeights::Row> parse_weight_table(const std::string& doc, int num_classes) {
  const auto first = doc.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && doc[first] == '[') {
    const json table = json::parse(doc, nullptr, false);
    if (table.is_discarded()) throw Error(ErrorKind::Parse, "weights table is not valid JSON");
    return rows_from_json(table, num_classes);
  }
  std::vector<ViewWeights::Row> rows;
  std::istringstream in(doc);
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    std::istringstream fields(line);
    std::vector<double> values;
    double x = 0.0;
    while (fields >> x) values.push_back(x);
    if (!fields.eof()) throw Error(ErrorKind::Parse, "weights table has a non-numeric entry");
    if (values.empty()) continue;
    if (values.size() != kNumViews) {
      throw Error(ErrorKind::Validation, "each weights row needs exactly 3 numbers");
    }
    rows.push_back({values[0], values[1], values[2]});
  }
  if (rows.size() != static_cast<std::size_t>(num_classes)) {
    throw Error(ErrorKind::Validation,
                "weights table needs " + std::to_string(num_classes) + " rows");
  }
  return rows;
}

void load_weights(RunConfig& cfg, const std::string& path) {
  if (path == "default") {
    cfg.weights = default_view_weights(cfg.num_classes);
    cfg.default_weights = true;
    return;
  }
  set_weights(cfg, parse_weight_table(slurp(path, "weights table"), cfg.num_classes));
}

}  // namespace driveloc
