#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "driveloc/core.hpp"
#include "driveloc/metrics.hpp"

namespace driveloc {

/// Portable draws on top of mt19937_64. The std distributions are implementation-defined,
/// so synthetic corpora would differ between standard libraries without this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t bits() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  /// Index drawn proportionally to `weights`.
  std::size_t pick(const std::vector<double>& weights);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct NoiseModel {
  double eps_flip = 0.2;          // per view, chance a confuser takes the lead from the true class
  double flip_correlation = 0.5;  // chance a clip's flip decision is shared by all views
  double flip_keep_min = 0.5;     // a flipped true class keeps U[flip_keep_min, 1) of its mass
  double specialist_boost = 2.0;  // odds multiplier for a class in its specialist view
  double temperature = 0.15;      // 0 gives exact one-hot vectors
  double spread = 0.8;            // logit range of non-true classes (true class sits at 1)
  /// Row c: distribution of the class that replaces c on a flip. Empty means the default.
  std::vector<std::vector<double>> confusion;

  void validate(int num_classes) const;
};

/// Groups of look-alike activities; each class confuses uniformly within its group, and
/// classes outside any group confuse uniformly with all others.
std::vector<std::vector<double>> default_confusion(int num_classes = kDefaultNumClasses);

enum class LabelWindow { Tile, Clip };

struct SynthConfig {
  int num_classes = kDefaultNumClasses;
  std::optional<ClassId> background_class = 0;  // fills the gaps; none means back-to-back
  ClipSpec clip;
  double activity_min_s = 5.0;
  double activity_max_s = 20.0;
  double gap_min_s = 2.0;
  double gap_max_s = 10.0;
  double max_video_s = 600.0;
  /// Which part of a clip decides its true class: its stride tile or its full window.
  LabelWindow label_window = LabelWindow::Tile;
  NoiseModel noise;

  std::vector<ClassId> activity_classes() const;
  void validate() const;
};

struct Scenario {
  std::uint64_t seed = 0;
  std::string video_id;
  double duration_s = 0.0;
  std::vector<GroundTruthActivity> schedule;  // in time order
  SynthConfig config;

  std::size_t clip_count() const;
  /// True class of clip `i` by majority of its label window; ties go to the earlier interval.
  ClassId true_class(std::size_t clip_index) const;
};

Scenario generate_scenario(std::uint64_t seed, const SynthConfig& config,
                           const std::string& video_id = "video_0001");

/// Three views for every clip of the scenario, ordered by (clip_index, view).
std::vector<ProbFrame> emit_streams(const Scenario& scenario);

/// Scenarios for `videos` videos, each with its own seed derived from `seed`.
std::vector<Scenario> generate_corpus(std::uint64_t seed, std::size_t videos,
                                      const SynthConfig& config);

}  // namespace driveloc
