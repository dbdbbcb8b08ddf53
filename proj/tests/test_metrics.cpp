#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "driveloc/metrics.hpp"

using namespace driveloc;

namespace {

Localization loc(const std::string& video, std::vector<Segment> segs) {
  Localization l;
  l.video_id = video;
  l.segments = std::move(segs);
  return l;
}

// Best achievable overlap sum over every one-to-one assignment, by brute force.
double best_assignment(const std::vector<Segment>& preds, const std::vector<GroundTruthActivity>& gts,
                       std::size_t g, std::vector<bool>& used) {
  if (g == gts.size()) return 0.0;
  double best = best_assignment(preds, gts, g + 1, used);
  for (std::size_t p = 0; p < preds.size(); ++p) {
    if (used[p] || preds[p].class_id != gts[g].class_id) continue;
    used[p] = true;
    best = std::max(best, overlap_os(preds[p], gts[g]) + best_assignment(preds, gts, g + 1, used));
    used[p] = false;
  }
  return best;
}

// Greedy matching written out as repeated selection of the largest remaining overlap.
double greedy_oracle(const std::vector<Segment>& preds, const std::vector<GroundTruthActivity>& gts) {
  std::vector<bool> gu(gts.size()), pu(preds.size());
  double total = 0.0;
  for (;;) {
    double best = 0.0;
    std::size_t bg = 0, bp = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      for (std::size_t p = 0; p < preds.size(); ++p) {
        if (gu[g] || pu[p] || preds[p].class_id != gts[g].class_id) continue;
        const double os = overlap_os(preds[p], gts[g]);
        if (os > best) {
          best = os;
          bg = g;
          bp = p;
        }
      }
    }
    if (best <= 0.0) return total;
    gu[bg] = pu[bp] = true;
    total += best;
  }
}

}  // namespace

TEST_CASE("accuracy examples") {
  std::vector<ClassId> truth(10, 3);
  std::vector<ClassId> pred = truth;
  CHECK(accuracy(pred, truth) == 100.0);
  pred[0] = pred[1] = 5;
  CHECK(accuracy(pred, truth) == 80.0);
  CHECK(accuracy(std::vector<ClassId>(10, 1), truth) == 0.0);
  CHECK_THROWS_AS(accuracy({1}, {1, 2}), Error);
  CHECK_THROWS_AS(accuracy({}, {}), Error);
}

TEST_CASE("overlap examples") {
  CHECK(interval_iou(0, 10, 0, 10) == 1.0);
  CHECK(interval_iou(0, 10, 5, 15) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(interval_iou(0, 10, 20, 30) == 0.0);
  CHECK(interval_iou(0, 10, 10, 20) == 0.0);
  CHECK(interval_iou(2, 4, 0, 10) == doctest::Approx(0.2));
}

TEST_CASE("overlap is symmetric, bounded and translation invariant") {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> d(0, 200);
  for (int i = 0; i < 5000; ++i) {
    int a = d(gen), b = d(gen), c = d(gen), e = d(gen);
    if (a > b) std::swap(a, b);
    if (c > e) std::swap(c, e);
    if (a == b || c == e) continue;
    const double x = interval_iou(a, b, c, e);
    CHECK(x == interval_iou(c, e, a, b));
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
    CHECK(std::abs(x - interval_iou(a + 7, b + 7, c + 7, e + 7)) <= 1e-12);
    CHECK((x == 1.0) == (a == c && b == e));
  }
}

TEST_CASE("match_and_score examples") {
  std::vector<GroundTruthActivity> gt{{"v1", 3, 0, 10}, {"v1", 5, 20, 30}};
  SUBCASE("perfect") {
    auto r = match_and_score({loc("v1", {{3, 0, 10, 1}, {5, 20, 30, 1}})}, gt);
    CHECK(r.corpus.mean_os == 1.0);
    CHECK(r.corpus.matched_count == 2);
    CHECK(r.corpus.unmatched_pred == 0);
  }
  SUBCASE("half shifted") {
    auto r = match_and_score({loc("v1", {{3, 5, 15, 1}, {5, 25, 35, 1}})}, gt);
    CHECK(r.corpus.mean_os == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("wrong class or wrong video never matches") {
    auto r = match_and_score({loc("v1", {{4, 0, 10, 1}}), loc("v2", {{5, 20, 30, 1}})}, gt);
    CHECK(r.corpus.mean_os == 0.0);
    CHECK(r.corpus.unmatched_gt == 2);
    CHECK(r.corpus.unmatched_pred == 2);
  }
  SUBCASE("a prediction matches one ground truth only") {
    std::vector<GroundTruthActivity> twice{{"v", 2, 0, 10}, {"v", 2, 0, 10}};
    auto r = match_and_score({loc("v", {{2, 0, 10, 1}})}, twice);
    CHECK(r.corpus.mean_os == 0.5);
    CHECK(r.corpus.per_class.at(2).matched == 1);
  }
  SUBCASE("no ground truth") {
    auto r = match_and_score({loc("v", {{2, 0, 10, 1}})}, {});
    CHECK(r.corpus.mean_os == 0.0);
    CHECK(r.warnings.size() == 1);
  }
}

TEST_CASE("matching agrees with independent oracles on random corpora") {
  std::mt19937_64 gen(12);
  std::uniform_int_distribution<int> cls(0, 2), pos(0, 40), len(1, 15), count(0, 4);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<GroundTruthActivity> gts;
    std::vector<Segment> preds;
    const int ng = count(gen) + 1, np = count(gen);
    for (int i = 0; i < ng; ++i) {
      const int s = pos(gen);
      gts.push_back({"v", cls(gen), double(s), double(s + len(gen))});
    }
    for (int i = 0; i < np; ++i) {
      const int s = pos(gen);
      preds.push_back({cls(gen), double(s), double(s + len(gen)), 1.0});
    }
    const auto r = match_and_score({loc("v", preds)}, gts);
    std::vector<bool> used(preds.size());
    const double optimum = best_assignment(preds, gts, 0, used);
    const double greedy = greedy_oracle(preds, gts);
    CHECK(std::abs(r.corpus.mean_os * ng - greedy) <= 1e-9);
    CHECK(r.corpus.mean_os * ng <= optimum + 1e-9);
    CHECK(r.corpus.matched_count + r.corpus.unmatched_gt == ng);
    CHECK(r.corpus.matched_count + r.corpus.unmatched_pred == np);

    auto extra = gts;
    extra.push_back({"v", 7, 0, 5});
    CHECK(match_and_score({loc("v", preds)}, extra).corpus.mean_os <= r.corpus.mean_os + 1e-12);
  }
}
