#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sigseg/detector.hpp"
#include "sigseg/error.hpp"
#include "test_util.hpp"

using namespace sigseg;

namespace {

ResidualSignal sig(std::vector<double> v, double fps = 1.0) { return {"v", fps, std::move(v), 1}; }

FlagSet flags_of(std::vector<std::size_t> idx) { return {std::move(idx), 0.0}; }

// Grouping oracle: fill short interior gaps in a boolean timeline, then read off runs.
std::vector<std::pair<std::size_t, std::size_t>> brute_group(const std::vector<std::size_t>& idx, std::size_t n,
                                                             double fps, double gap_s, double min_s) {
  std::vector<bool> on(n + 2, false);
  for (auto i : idx) on[i] = true;
  std::vector<bool> filled = on;
  for (std::size_t i = 1; i <= n; ++i) {
    if (on[i]) continue;
    std::size_t j = i;
    while (j <= n && !on[j]) ++j;
    const bool bounded = i > 1 && on[i - 1] && j <= n;
    if (bounded && double(j - i) <= gap_s * fps + 1e-9) {
      for (std::size_t k = i; k < j; ++k) filled[k] = true;
    }
    i = j - 1;
  }
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = 1; i <= n; ++i) {
    if (!filled[i]) continue;
    std::size_t j = i;
    while (j + 1 <= n && filled[j + 1]) ++j;
    if (double(j - i + 1) / fps + 1e-9 >= min_s) runs.emplace_back(i, j);
    i = j;
  }
  return runs;
}

}  // namespace

TEST_CASE("threshold_of: median and population std") {
  CHECK(threshold_of(sig({5, 5, 5, 5}), {3.0}) == 5.0);
  CHECK(threshold_of(sig({1, 2, 3, 4}), {0.0}) == 2.5);
  CHECK(threshold_of(sig({3, 1, 2}), {0.0}) == 2.0);

  // mean 3.25, squared deviations sum 60.75, population variance 15.1875
  const double expected = 1.0 + std::sqrt(15.1875);
  CHECK(threshold_of(sig({1, 1, 1, 10}), {1.0}) == doctest::Approx(4.897114317029974).epsilon(1e-14));
  CHECK(threshold_of(sig({1, 1, 1, 10}), {1.0}) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(threshold_of(sig({1, 1, 1, 10}), {1.0, StdMode::Sample}) ==
        doctest::Approx(1.0 + std::sqrt(60.75 / 3.0)).epsilon(1e-15));

  CHECK_THROWS_AS(threshold_of(sig({}), {}), Error);
}

TEST_CASE("flag_frames uses strict comparison and 1-based indices") {
  CHECK(flag_frames(sig({1, 1, 1, 10}), 4.897114).indices == std::vector<std::size_t>{4});
  CHECK(flag_frames(sig({2, 2, 2}), 2.0).indices.empty());
  CHECK(flag_frames(sig({0, 4, 2}), -1.0).indices == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("group_segments merge and duration rules") {
  auto one = group_segments(flags_of({4, 5, 6}), 1.0, {0.0, 0.0});
  REQUIRE(one.size() == 1);
  CHECK(one[0].start_frame == 4);
  CHECK(one[0].end_frame == 6);
  CHECK(one[0].start_s == 3.0);
  CHECK(one[0].end_s == 6.0);

  auto merged = group_segments(flags_of({4, 5, 9, 10}), 1.0, {3.0, 0.0});
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].start_frame == 4);
  CHECK(merged[0].end_frame == 10);
  auto split = group_segments(flags_of({4, 5, 9, 10}), 1.0, {1.0, 0.0});
  REQUIRE(split.size() == 2);
  CHECK(split[0].end_frame == 5);
  CHECK(split[1].start_frame == 9);
  CHECK(brute_group({4, 5, 9, 10}, 12, 1.0, 3.0, 0.0) == std::vector<std::pair<std::size_t, std::size_t>>{{4, 10}});
  CHECK(brute_group({4, 5, 9, 10}, 12, 1.0, 1.0, 0.0) ==
        std::vector<std::pair<std::size_t, std::size_t>>{{4, 5}, {9, 10}});

  CHECK(group_segments(flags_of({7}), 10.0, {0.0, 0.5}).empty());
  CHECK(group_segments(flags_of({}), 10.0, {0.5, 1.0}).empty());

  // 10 frames at 10 fps is exactly the 1 s minimum.
  CHECK(group_segments(flags_of({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), 10.0, {0.5, 1.0}).size() == 1);

  const std::vector<double> values{0, 0, 0, 7, 9, 8, 0};
  auto peak = group_segments(flags_of({4, 5, 6}), 1.0, {0.0, 0.0}, values);
  CHECK(peak[0].peak_value == 9.0);
}

TEST_CASE("group_segments agrees with the timeline oracle") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 80;
    std::bernoulli_distribution bit(0.1 + 0.8 * (trial % 5) / 5.0);
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i <= n; ++i)
      if (bit(rng)) idx.push_back(i);
    const double fps = std::vector<double>{1, 2.5, 10, 30}[trial % 4];
    const double gap = (rng() % 6) / fps;
    const double min_dur = (rng() % 8) / fps;
    const auto got = group_segments(flags_of(idx), fps, {gap, min_dur});
    const auto want = brute_group(idx, n, fps, gap, min_dur);
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      CHECK(got[k].start_frame == want[k].first);
      CHECK(got[k].end_frame == want[k].second);
      CHECK(got[k].start_s < got[k].end_s);
      CHECK(got[k].end_s - got[k].start_s + 1e-9 >= min_dur);
      if (k > 0) CHECK(got[k].start_frame > got[k - 1].end_frame + 1);
    }
    // Every surviving flagged frame lies in exactly one interval.
    for (auto i : idx) {
      int hits = 0;
      for (const auto& c : got) hits += (i >= c.start_frame && i <= c.end_frame);
      CHECK(hits <= 1);
    }
  }
}

TEST_CASE("detect composes threshold, flags and grouping") {
  CHECK(detect(sig(std::vector<double>(50, 0.0)), {}, {}).empty());
  CHECK(detect(sig(std::vector<double>(50, 3.0), 10), {0.0}, {0.0, 0.0}).empty());

  auto out = detect(sig({1, 1, 1, 10, 10, 1}), {1.0}, {0.0, 0.0});
  REQUIRE(out.size() == 1);
  CHECK(out[0].start_frame == 4);
  CHECK(out[0].end_frame == 5);
  CHECK(out[0].peak_value == 10.0);
  CHECK(out[0].video_id == "v");
}

TEST_CASE("flags are monotone in k and invariant to scaling") {
  std::mt19937_64 rng(1234);
  std::exponential_distribution<double> e(0.01);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + rng() % 300);
    for (auto& x : v) x = e(rng);
    const auto s = sig(v);
    std::vector<std::size_t> prev;
    bool first = true;
    for (double k : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      const auto f = flag_frames(s, threshold_of(s, {k})).indices;
      if (!first) CHECK(std::includes(prev.begin(), prev.end(), f.begin(), f.end()));
      prev = f;
      first = false;
    }
    auto scaled = v;
    for (auto& x : scaled) x *= 4.0;  // power of two keeps the arithmetic exact
    CHECK(flag_frames(sig(scaled), threshold_of(sig(scaled), {2.0})).indices ==
          flag_frames(s, threshold_of(s, {2.0})).indices);
  }
}

TEST_CASE("candidate CSV round trip") {
  sigseg::testing::TempDir dir("cand");
  std::vector<CandidateInterval> cs{{"a", 4, 10, 123.5, 0.3, 1.0}, {"b", 1, 1, 0.25, 0.0, 0.1}};
  write_candidates_csv(cs, dir / "c.csv");
  const auto back = read_candidates_csv(dir / "c.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0] == cs[0]);
  CHECK(back[1] == cs[1]);
}
