#pragma once

// Builders shared by the unit tests and the acceptance suite.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "driveloc/localize.hpp"

namespace driveloc::testing {

/// A vector with the listed (class, probability) entries; the remaining mass is spread
/// evenly over the other classes.
inline std::vector<double> peaked(std::vector<std::pair<ClassId, double>> entries, int n = 16) {
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  double used = 0.0;
  for (auto [c, v] : entries) {
    p[static_cast<std::size_t>(c)] = v;
    used += v;
  }
  const auto rest = static_cast<double>(n) - static_cast<double>(entries.size());
  for (std::size_t c = 0; c < p.size(); ++c) {
    bool listed = false;
    for (auto [k, v] : entries) listed = listed || static_cast<std::size_t>(k) == c;
    if (!listed) p[c] = (1.0 - used) / rest;
  }
  return p;
}

inline std::vector<double> one_hot(ClassId c, int n = 16) {
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  p[static_cast<std::size_t>(c)] = 1.0;
  return p;
}

/// Sequence with the default 30 fps / 30-frame stride clock (1 s per clip).
inline DecodedSequence sequence(const std::vector<std::vector<double>>& probs,
                                std::size_t first_index = 0) {
  return make_sequence(probs, first_index, ClipSpec{});
}

/// Random coarse probability vectors; small integer weights make ties common.
inline std::vector<std::vector<double>> random_probs(std::mt19937_64& gen, std::size_t clips,
                                                     int classes) {
  std::uniform_int_distribution<int> w(0, 4);
  std::vector<std::vector<double>> out(clips);
  for (auto& p : out) {
    int total = 0;
    std::vector<int> raw(static_cast<std::size_t>(classes));
    while (total == 0) {
      total = 0;
      for (auto& x : raw) total += (x = w(gen));
    }
    p.resize(raw.size());
    for (std::size_t c = 0; c < raw.size(); ++c) p[c] = raw[c] / static_cast<double>(total);
  }
  return out;
}

/// Runs of a few classes with occasional off-class clips, so merges and restores happen.
inline std::vector<std::vector<double>> blocky_probs(std::mt19937_64& gen, std::size_t clips,
                                                     int classes) {
  std::uniform_int_distribution<int> cls(0, classes - 1), run(1, 5), noise(0, 9);
  std::uniform_real_distribution<double> conf(0.2, 0.9);
  std::vector<std::vector<double>> out;
  while (out.size() < clips) {
    const ClassId c = cls(gen);
    const int n = run(gen);
    for (int i = 0; i < n && out.size() < clips; ++i) {
      const ClassId k = noise(gen) == 0 ? cls(gen) : c;
      const ClassId second = cls(gen);
      const double p = conf(gen);
      std::vector<double> v(static_cast<std::size_t>(classes), 0.0);
      v[static_cast<std::size_t>(k)] += p;
      v[static_cast<std::size_t>(second)] += (1.0 - p) * 0.7;
      const double rest = (1.0 - p) * 0.3 / classes;
      for (auto& x : v) x += rest;
      out.push_back(normalize_probs(v));
    }
  }
  return out;
}

}  // namespace driveloc::testing
