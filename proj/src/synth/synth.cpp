#include "driveloc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "driveloc/fusion.hpp"

namespace driveloc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::size_t Rng::pick(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

std::vector<std::vector<double>> default_confusion(int num_classes) {
  // drink/eat, phone calls and texting, floor pick-ups, talking to passengers
  const std::vector<std::vector<ClassId>> groups = {{1, 4}, {2, 3, 5, 6}, {9, 10}, {11, 12}};
  const auto n = static_cast<std::size_t>(num_classes);
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (ClassId c = 0; c < num_classes; ++c) {
    std::vector<ClassId> peers;
    for (const auto& g : groups) {
      if (std::find(g.begin(), g.end(), c) == g.end()) continue;
      for (ClassId k : g) {
        if (k != c && k < num_classes) peers.push_back(k);
      }
    }
    if (peers.empty()) {
      for (ClassId k = 0; k < num_classes; ++k) {
        if (k != c) peers.push_back(k);
      }
    }
    if (peers.empty()) peers.push_back(c);
    for (ClassId k : peers) {
      m[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] = 1.0 / static_cast<double>(peers.size());
    }
  }
  return m;
}

void NoiseModel::validate(int num_classes) const {
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(eps_flip) || !unit(flip_correlation) || !unit(flip_keep_min)) {
    throw Error(ErrorKind::Validation, "eps_flip, flip_correlation and flip_keep_min must lie in [0, 1]");
  }
  if (!(specialist_boost >= 1.0)) throw Error(ErrorKind::Validation, "specialist_boost must be >= 1");
  if (!(temperature >= 0.0) || !(spread >= 0.0)) {
    throw Error(ErrorKind::Validation, "temperature and spread must be non-negative");
  }
  if (confusion.empty()) return;
  if (confusion.size() != static_cast<std::size_t>(num_classes)) {
    throw Error(ErrorKind::Validation, "confusion matrix must have one row per class");
  }
  for (const auto& row : confusion) {
    double total = 0.0;
    if (row.size() != confusion.size()) throw Error(ErrorKind::Validation, "confusion matrix must be square");
    for (double p : row) {
      if (!(p >= 0.0)) throw Error(ErrorKind::Validation, "confusion entries must be non-negative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::Validation, "confusion rows must sum to 1");
  }
}

std::vector<ClassId> SynthConfig::activity_classes() const {
  std::vector<ClassId> out;
  for (ClassId c = 0; c < num_classes; ++c) {
    if (!background_class || *background_class != c) out.push_back(c);
  }
  return out;
}

void SynthConfig::validate() const {
  if (num_classes < 2) throw Error(ErrorKind::Validation, "need at least two classes");
  clip.validate();
  if (background_class && (*background_class < 0 || *background_class >= num_classes)) {
    throw Error(ErrorKind::Validation, "background class out of range");
  }
  if (!(activity_min_s > 0.0) || activity_max_s < activity_min_s) {
    throw Error(ErrorKind::InfeasibleConfig, "activity duration range is empty");
  }
  if (!(gap_min_s >= 0.0) || gap_max_s < gap_min_s) {
    throw Error(ErrorKind::InfeasibleConfig, "gap duration range is empty");
  }
  if (!(max_video_s > 0.0)) throw Error(ErrorKind::InfeasibleConfig, "max_video_s must be positive");
  noise.validate(num_classes);
}

namespace {

using Frames = long long;

Frames to_frames(double seconds, double fps) { return std::llround(seconds * fps); }

struct Interval {
  ClassId class_id;
  Frames start;
  Frames end;
};

/// Activities plus the background gaps between them, covering [0, duration).
std::vector<Interval> timeline(const Scenario& s) {
  const double fps = s.config.clip.fps;
  std::vector<Interval> out;
  Frames cursor = 0;
  const ClassId bg = s.config.background_class.value_or(-1);
  for (const auto& a : s.schedule) {
    const Frames start = to_frames(a.start_s, fps);
    if (start > cursor) out.push_back({bg, cursor, start});
    const Frames end = to_frames(a.end_s, fps);
    out.push_back({a.class_id, start, end});
    cursor = end;
  }
  const Frames total = to_frames(s.duration_s, fps);
  if (total > cursor) out.push_back({bg, cursor, total});
  return out;
}

}  // namespace

std::size_t Scenario::clip_count() const {
  const Frames total = to_frames(duration_s, config.clip.fps);
  const Frames stride = config.clip.stride_frames;
  return static_cast<std::size_t>((total + stride - 1) / stride);
}

ClassId Scenario::true_class(std::size_t clip_index) const {
  const Frames start = static_cast<Frames>(clip_index) * config.clip.stride_frames;
  const Frames len = config.label_window == LabelWindow::Tile ? config.clip.stride_frames
                                                              : config.clip.clip_len_frames;
  const Frames end = start + len;
  const auto intervals = timeline(*this);
  ClassId best = intervals.empty() ? 0 : intervals.back().class_id;
  Frames best_overlap = 0;
  for (const auto& iv : intervals) {
    const Frames overlap = std::min(end, iv.end) - std::max(start, iv.start);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = iv.class_id;
    }
  }
  return best;
}

Scenario generate_scenario(std::uint64_t seed, const SynthConfig& config,
                           const std::string& video_id) {
  config.validate();
  const double fps = config.clip.fps;
  std::vector<ClassId> order = config.activity_classes();
  const auto n = order.size();
  const std::size_t gaps = config.background_class ? n + 1 : 0;

  const Frames act_lo = static_cast<Frames>(std::ceil(config.activity_min_s * fps - 1e-9));
  const Frames act_hi = std::max(act_lo, static_cast<Frames>(std::floor(config.activity_max_s * fps + 1e-9)));
  const Frames gap_lo = static_cast<Frames>(std::ceil(config.gap_min_s * fps - 1e-9));
  const Frames gap_hi = std::max(gap_lo, static_cast<Frames>(std::floor(config.gap_max_s * fps + 1e-9)));
  const Frames budget = static_cast<Frames>(std::floor(config.max_video_s * fps + 1e-9));
  const Frames min_total = static_cast<Frames>(n) * act_lo + static_cast<Frames>(gaps) * gap_lo;
  if (min_total > budget) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "minimum schedule length %.3f s exceeds max_video_s %.3f s",
                  static_cast<double>(min_total) / fps, config.max_video_s);
    throw Error(ErrorKind::InfeasibleConfig, msg);
  }

  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  auto draw = [&rng](Frames lo, Frames hi) {
    return lo + static_cast<Frames>(rng.index(static_cast<std::size_t>(hi - lo + 1)));
  };
  std::vector<Frames> acts(n);
  std::vector<Frames> gap_len(gaps);
  for (auto& a : acts) a = draw(act_lo, act_hi);
  for (auto& g : gap_len) g = draw(gap_lo, gap_hi);

  Frames total = 0;
  for (Frames a : acts) total += a;
  for (Frames g : gap_len) total += g;
  if (total > budget) {
    // Shrink every slack above its minimum by the same factor.
    const double factor = static_cast<double>(budget - min_total) / static_cast<double>(total - min_total);
    for (auto& a : acts) a = act_lo + static_cast<Frames>(std::floor(static_cast<double>(a - act_lo) * factor));
    for (auto& g : gap_len) g = gap_lo + static_cast<Frames>(std::floor(static_cast<double>(g - gap_lo) * factor));
  }

  Scenario s;
  s.seed = seed;
  s.video_id = video_id;
  s.config = config;
  Frames cursor = gaps > 0 ? gap_len[0] : 0;
  for (std::size_t i = 0; i < n; ++i) {
    s.schedule.push_back({video_id, order[i], static_cast<double>(cursor) / fps,
                          static_cast<double>(cursor + acts[i]) / fps});
    cursor += acts[i];
    if (gaps > 0) cursor += gap_len[i + 1];
  }
  s.duration_s = static_cast<double>(cursor) / fps;
  return s;
}

std::vector<ProbFrame> emit_streams(const Scenario& scenario) {
  const auto& cfg = scenario.config;
  const auto& noise = cfg.noise;
  const auto n = static_cast<std::size_t>(cfg.num_classes);
  const auto confusion = noise.confusion.empty() ? default_confusion(cfg.num_classes) : noise.confusion;
  const SpecialistSets specialists;
  const double temp = noise.temperature;
  Rng rng(splitmix64(scenario.seed ^ 0x6a09e667f3bcc909ull));

  // Softmax weights over logits in [0, spread), shifted so the largest possible one is 0.
  auto weights_for = [&](std::vector<double>& w, ClassId skip) {
    for (std::size_t k = 0; k < n; ++k) {
      const double u = rng.uniform(0.0, noise.spread);
      w[k] = (static_cast<ClassId>(k) == skip || temp == 0.0) ? 0.0 : std::exp((u - 1.0) / temp);
    }
  };

  std::vector<ProbFrame> frames;
  frames.reserve(scenario.clip_count() * kNumViews);
  std::vector<double> shared(n), own(n);
  for (std::size_t i = 0; i < scenario.clip_count(); ++i) {
    const ClassId c = scenario.true_class(i);
    const auto ci = static_cast<std::size_t>(c);

    weights_for(shared, c);
    double rest = 0.0;
    for (double w : shared) rest += w;
    const double confidence = 1.0 / (1.0 + rest);

    const bool shared_decision = rng.uniform() < noise.flip_correlation;
    const bool shared_flip = rng.uniform() < noise.eps_flip;
    const std::size_t shared_to = rng.pick(confusion[ci]);
    const auto specialist = specialists.specialist_for(c);

    for (View v : kAllViews) {
      double m = confidence;
      if (specialist && *specialist == v) {
        const double b = noise.specialist_boost;
        m = b * m / (b * m + 1.0 - m);
      }
      weights_for(own, c);
      double own_total = 0.0;
      for (double w : own) own_total += w;

      std::vector<double> p(n, 0.0);
      p[ci] = m;
      if (own_total > 0.0) {
        for (std::size_t k = 0; k < n; ++k) p[k] += (1.0 - m) * own[k] / own_total;
      }

      const bool own_flip = rng.uniform() < noise.eps_flip;
      const std::size_t own_to = rng.pick(confusion[ci]);
      const double keep = rng.uniform(noise.flip_keep_min, 1.0);
      const bool flip = shared_decision ? shared_flip : own_flip;
      const std::size_t to = shared_decision ? shared_to : own_to;
      if (flip && to != ci) {
        // The confuser takes the lead; the true class stays close behind.
        p[to] = p[ci];
        p[ci] *= keep;
      }

      frames.push_back({scenario.video_id, v, i, normalize_probs(p)});
    }
  }
  return frames;
}

std::vector<Scenario> generate_corpus(std::uint64_t seed, std::size_t videos,
                                      const SynthConfig& config) {
  std::vector<Scenario> out;
  out.reserve(videos);
  for (std::size_t v = 0; v < videos; ++v) {
    char id[32];
    std::snprintf(id, sizeof id, "video_%04zu", v + 1);
    out.push_back(generate_scenario(splitmix64(seed + v), config, id));
  }
  return out;
}

}  // namespace driveloc
