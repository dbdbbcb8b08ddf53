#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "driveloc/fusion.hpp"
#include "driveloc/metrics.hpp"
#include "driveloc/oracle.hpp"
#include "driveloc/synth.hpp"
#include "support.hpp"

using namespace driveloc;
using driveloc::testing::one_hot;
using driveloc::testing::peaked;
using driveloc::testing::sequence;

namespace {

struct Expected {
  ClassId c;
  double start;
  double end;
};

void check_segments(const std::vector<Candidate>& got, const std::vector<Expected>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].segment.class_id == want[i].c);
    CHECK(got[i].segment.start_s == want[i].start);
    CHECK(got[i].segment.end_s == want[i].end);
  }
}

PostParams only_required(std::vector<ClassId> required) {
  PostParams p = PostParams::defaults();
  p.required_classes = std::move(required);
  return p;
}

}  // namespace

TEST_CASE("decode splits the top-1 sequence into runs") {
  const auto params = PostParams::defaults();
  SUBCASE("three runs") {
    std::vector<std::vector<double>> probs;
    for (ClassId c : {7, 7, 7, 0, 0, 2, 2}) probs.push_back(one_hot(c));
    auto d = decode_segments(sequence(probs), params);
    check_segments(d, {{7, 0, 3}, {0, 3, 5}, {2, 5, 7}});
    CHECK(d[0].segment.score == 3.0);
    CHECK(d[1].background);
    CHECK_FALSE(d[2].background);
  }
  SUBCASE("single clip") {
    auto d = decode_segments(sequence({one_hot(4)}), params);
    check_segments(d, {{4, 0, 1}});
  }
  SUBCASE("alternation") {
    std::vector<std::vector<double>> probs;
    for (ClassId c : {1, 2, 1, 2}) probs.push_back(one_hot(c));
    check_segments(decode_segments(sequence(probs), params), {{1, 0, 1}, {2, 1, 2}, {1, 2, 3}, {2, 3, 4}});
  }
  SUBCASE("offset clip index shifts times") {
    auto d = decode_segments(sequence({one_hot(4), one_hot(4)}, 10), params);
    check_segments(d, {{4, 10, 12}});
  }
}

TEST_CASE("merge bridges a supported gap and drops weak short segments") {
  std::vector<std::vector<double>> probs;
  for (int i = 0; i < 3; ++i) probs.push_back(peaked({{7, 0.8}}));
  probs.push_back(peaked({{0, 0.55}, {7, 0.40}}));
  for (int i = 0; i < 2; ++i) probs.push_back(peaked({{7, 0.8}}));
  probs.push_back(peaked({{9, 0.34}, {0, 0.33}}));
  for (int i = 0; i < 4; ++i) probs.push_back(peaked({{0, 0.9}}));
  const auto seq = sequence(probs);
  const auto params = PostParams::defaults();
  const auto decoded = decode_segments(seq, params);
  check_segments(decoded, {{7, 0, 3}, {0, 3, 4}, {7, 4, 6}, {9, 6, 7}, {0, 7, 11}});
  const auto merged = conditional_merge(decoded, seq, params);
  check_segments(merged, {{7, 0, 6}, {0, 7, 11}});
  CHECK(merged[0].first == 0);
  CHECK(merged[0].last == 5);
  CHECK(merged[0].segment.score == doctest::Approx(0.8 * 5 + 0.4));

  SUBCASE("a weak gap clip blocks the merge") {
    auto weak = probs;
    weak[3] = peaked({{0, 0.75}, {7, 0.2}});
    const auto s = sequence(weak);
    check_segments(conditional_merge(decode_segments(s, params), s, params),
                   {{7, 0, 3}, {0, 3, 4}, {7, 4, 6}, {0, 7, 11}});
  }
  SUBCASE("a wide gap blocks the merge") {
    auto wide = probs;
    wide.insert(wide.begin() + 3, 2, peaked({{0, 0.55}, {7, 0.40}}));
    const auto s = sequence(wide);
    auto m = conditional_merge(decode_segments(s, params), s, params);
    CHECK(m[0].segment.end_s == 3.0);
  }
  SUBCASE("inconsistent input") {
    auto bad = decoded;
    bad[1].last = 5;
    CHECK_THROWS_AS(conditional_merge(bad, seq, params), Error);
    bad = decoded;
    bad.back().last = 40;
    CHECK_THROWS_AS(conditional_merge(bad, seq, params), Error);
  }
}

TEST_CASE("decision keeps the most trusted segment per class") {
  const auto params = PostParams::defaults();
  SUBCASE("higher trust wins") {
    std::vector<std::vector<double>> probs(3, peaked({{3, 0.85}}));
    for (int i = 0; i < 4; ++i) probs.push_back(peaked({{0, 0.9}}));
    probs.push_back(peaked({{3, 0.6}}));
    probs.push_back(peaked({{3, 0.55}}));
    const auto seq = sequence(probs);
    const auto decoded = decode_segments(seq, params);
    CHECK(trust_score(decoded[0], seq) == doctest::Approx(2.55));
    CHECK(trust_score(decoded[2], seq) == doctest::Approx(1.15));
    check_segments(conditional_decision(decoded, seq, params), {{3, 0, 3}});
  }
  SUBCASE("one segment per class passes through without background") {
    std::vector<std::vector<double>> probs{one_hot(2), one_hot(0), one_hot(5), one_hot(5)};
    const auto seq = sequence(probs);
    check_segments(conditional_decision(decode_segments(seq, params), seq, params),
                   {{2, 0, 1}, {5, 2, 4}});
  }
  SUBCASE("equal trust prefers more clips, then the earlier segment") {
    std::vector<std::vector<double>> probs(2, peaked({{3, 0.5}}));
    for (int i = 0; i < 3; ++i) probs.push_back(one_hot(0));
    for (int i = 0; i < 4; ++i) probs.push_back(peaked({{3, 0.25}}));
    auto seq = sequence(probs);
    auto decoded = decode_segments(seq, params);
    CHECK(trust_score(decoded[0], seq) == trust_score(decoded[2], seq));
    check_segments(conditional_decision(decoded, seq, params), {{3, 5, 9}});

    std::vector<std::vector<double>> same(2, peaked({{3, 0.5}}));
    for (int i = 0; i < 3; ++i) same.push_back(one_hot(0));
    for (int i = 0; i < 2; ++i) same.push_back(peaked({{3, 0.5}}));
    seq = sequence(same);
    check_segments(conditional_decision(decode_segments(seq, params), seq, params), {{3, 0, 2}});
  }
  SUBCASE("trust ignores clips where the class falls out of the top two") {
    std::vector<std::vector<double>> probs{peaked({{3, 0.6}}), peaked({{1, 0.5}, {2, 0.3}, {3, 0.2}})};
    const auto seq = sequence(probs);
    Candidate c;
    c.segment = {3, 0, 2, 0};
    c.first = 0;
    c.last = 1;
    CHECK(trust_score(c, seq) == 0.6);
  }
}

TEST_CASE("restore fills missing classes") {
  SUBCASE("best top-2 run") {
    std::vector<std::vector<double>> probs(10, peaked({{3, 0.6}}));
    probs[5] = peaked({{3, 0.6}, {9, 0.30}});
    probs[6] = peaked({{3, 0.6}, {9, 0.35}});
    probs[7] = peaked({{3, 0.6}, {9, 0.30}});
    probs[1] = peaked({{3, 0.6}, {9, 0.2}});
    const auto seq = sequence(probs);
    const auto params = only_required({3, 9});
    const auto selected = conditional_decision(decode_segments(seq, params), seq, params);
    const auto out = restore_missing(selected, seq, params, "v");
    REQUIRE(out.segments.size() == 2);
    CHECK(out.segments[1].class_id == 9);
    CHECK(out.segments[1].start_s == 5.0);
    CHECK(out.segments[1].end_s == 8.0);
    CHECK(out.segments[1].score == doctest::Approx(0.95));
    REQUIRE(out.warnings.size() == 1);
    CHECK(out.warnings[0].kind == NoticeKind::Restored);
    CHECK(out.warnings[0].class_id == 9);
    CHECK(out.video_id == "v");
  }
  SUBCASE("nothing missing") {
    std::vector<std::vector<double>> probs{one_hot(1), one_hot(2)};
    const auto seq = sequence(probs);
    const auto params = only_required({1, 2});
    const auto out = restore_missing(decode_segments(seq, params), seq, params);
    CHECK(out.segments.size() == 2);
    CHECK(out.warnings.empty());
  }
  SUBCASE("weak restore at the peak clip") {
    std::vector<std::vector<double>> probs(50, peaked({{3, 0.6}, {4, 0.3}}));
    probs[40] = peaked({{3, 0.6}, {4, 0.3}, {12, 0.05}});
    const auto seq = sequence(probs);
    const auto params = only_required({3, 12});
    const auto out = restore_missing(conditional_decision(decode_segments(seq, params), seq, params),
                                     seq, params);
    REQUIRE(out.segments.size() == 2);
    CHECK(out.segments[1].class_id == 12);
    CHECK(out.segments[1].start_s == 40.0);
    CHECK(out.segments[1].end_s == 41.0);
    REQUIRE(out.warnings.size() == 1);
    CHECK(out.warnings[0].kind == NoticeKind::WeakRestore);
  }
  SUBCASE("errors") {
    const auto params = only_required({1});
    CHECK_THROWS_AS(restore_missing({}, DecodedSequence{}, params), Error);
    const auto seq = sequence({one_hot(1), one_hot(1)});
    auto d = decode_segments(seq, params);
    d.push_back(d[0]);
    CHECK_THROWS_AS(restore_missing(d, seq, params), Error);
    CHECK_THROWS_AS(restore_missing({}, seq, only_required({20})), Error);
  }
}

TEST_CASE("oracle best run examples") {
  const auto params = PostParams::defaults();
  std::vector<std::vector<double>> probs(8, peaked({{3, 0.6}}));
  for (int t : {1, 2}) probs[static_cast<std::size_t>(t)] = peaked({{3, 0.6}, {9, 0.30}});
  for (int t : {5, 6, 7}) probs[static_cast<std::size_t>(t)] = peaked({{3, 0.6}, {9, 0.30}});
  probs[6] = peaked({{3, 0.6}, {9, 0.35}});
  const auto seq = sequence(probs);
  const auto run = oracle::best_run(seq, 9, params);
  CHECK(run.first == 5);
  CHECK(run.last == 7);
  CHECK(run.segment.score == doctest::Approx(0.95));
  const auto single = oracle::best_run(sequence({one_hot(2)}), 2, params);
  CHECK(single.segment.end_s == 1.0);
  CHECK_THROWS_AS(oracle::best_run(seq, 12, params), Error);
}

TEST_CASE("stages agree with the brute-force oracle") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 300; ++trial) {
    const int classes = 5;
    const std::size_t clips = 1 + gen() % 25;
    const auto probs = trial % 2 ? testing::random_probs(gen, clips, classes)
                                 : testing::blocky_probs(gen, clips, classes);
    const auto seq = sequence(probs);
    PostParams params = PostParams::defaults(classes);
    if (trial % 3 == 0) params.set_background(std::nullopt, classes);

    const auto trace = trace_video(seq, params, "v");
    CHECK(oracle::stage_check(oracle::Stage::Decode, seq, {}, params).candidates == trace.decoded);
    CHECK(oracle::stage_check(oracle::Stage::Merge, seq, trace.decoded, params).candidates == trace.merged);
    CHECK(oracle::stage_check(oracle::Stage::Decision, seq, trace.merged, params).candidates ==
          trace.decided);
    const auto restored = oracle::stage_check(oracle::Stage::Restore, seq, trace.decided, params).localization;
    REQUIRE(restored.segments.size() == trace.final.segments.size());
    for (std::size_t i = 0; i < restored.segments.size(); ++i) {
      CHECK(restored.segments[i].class_id == trace.final.segments[i].class_id);
      CHECK(restored.segments[i].start_s == trace.final.segments[i].start_s);
      CHECK(restored.segments[i].end_s == trace.final.segments[i].end_s);
      CHECK(restored.segments[i].score == trace.final.segments[i].score);
    }
    REQUIRE(restored.warnings.size() == trace.final.warnings.size());
    for (std::size_t i = 0; i < restored.warnings.size(); ++i) {
      CHECK(restored.warnings[i].kind == trace.final.warnings[i].kind);
      CHECK(restored.warnings[i].class_id == trace.final.warnings[i].class_id);
    }
  }
}

TEST_CASE("localization properties") {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t clips = 1 + gen() % 40;
    const auto seq = sequence(testing::blocky_probs(gen, clips, 16));
    const auto params = PostParams::defaults();
    const auto trace = trace_video(seq, params);

    // decoded runs tile the sequence
    CHECK(trace.decoded.front().first == 0);
    CHECK(trace.decoded.back().last == clips - 1);
    for (std::size_t i = 1; i < trace.decoded.size(); ++i) {
      CHECK(trace.decoded[i].first == trace.decoded[i - 1].last + 1);
      CHECK(trace.decoded[i].segment.class_id != trace.decoded[i - 1].segment.class_id);
    }
    CHECK(conditional_merge(trace.merged, seq, params) == trace.merged);

    // exactly one segment for every required class and none for background
    const auto& segs = trace.final.segments;
    CHECK(segs.size() == params.required_classes.size());
    for (ClassId c : params.required_classes) {
      CHECK(std::count_if(segs.begin(), segs.end(), [c](const Segment& s) { return s.class_id == c; }) == 1);
    }
    for (const auto& s : segs) {
      CHECK(s.start_s < s.end_s);
      CHECK(s.start_s >= 0.0);
      CHECK(s.end_s <= static_cast<double>(clips) + 1e-9);
    }
    CHECK(std::is_sorted(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) {
      return a.start_s != b.start_s ? a.start_s < b.start_s : a.class_id < b.class_id;
    }));
    const auto again = localize_video(seq, params);
    REQUIRE(again.segments.size() == segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
      CHECK(again.segments[i].start_s == segs[i].start_s);
      CHECK(again.segments[i].score == segs[i].score);
    }
  }
}

TEST_CASE("noiseless synthetic videos are recovered") {
  SynthConfig cfg;
  cfg.noise.eps_flip = 0.0;
  cfg.noise.temperature = 0.0;
  const auto weights = default_view_weights();
  const auto params = PostParams::defaults();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto sc = generate_scenario(seed, cfg);
    const auto streams = align_streams(emit_streams(sc));
    const auto seq = make_sequence(fuse_views(streams, weights), streams.first_index, cfg.clip);
    const auto loc = localize_video(seq, params, sc.video_id);
    CHECK(loc.warnings.empty());
    const auto report = match_and_score({loc}, sc.schedule);
    CHECK(report.corpus.matched_count == report.corpus.gt_count);
    for (const auto& g : sc.schedule) {
      if (g.class_id == 0) continue;
      const auto it = std::find_if(loc.segments.begin(), loc.segments.end(),
                                   [&](const Segment& s) { return s.class_id == g.class_id; });
      REQUIRE(it != loc.segments.end());
      CHECK(overlap_os(*it, g) >= 0.8);
    }
  }
}
