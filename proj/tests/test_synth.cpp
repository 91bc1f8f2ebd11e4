#include <doctest.h>

#include <cmath>
#include <map>

#include "sigseg/background.hpp"
#include "sigseg/error.hpp"
#include "sigseg/signalgen.hpp"
#include "sigseg/synth.hpp"
#include "test_util.hpp"

using namespace sigseg;

namespace {

struct Split {
  double in_mean, out_mean, out_std;
};

Split window_stats(const SynthConfig& cfg) {
  const auto v = gen_sequence(cfg);
  const auto s = generate_signal(v.sequence, estimate_mean(v.sequence));
  std::vector<double> in, out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = i / cfg.fps;
    bool inside = false;
    for (const auto& a : cfg.anomalies) inside |= (t >= a.start_s && t < a.end_s);
    (inside ? in : out).push_back(s.values[i]);
  }
  auto mean = [](const std::vector<double>& x) {
    double m = 0;
    for (double v : x) m += v;
    return m / x.size();
  };
  const double om = mean(out);
  double var = 0;
  for (double v : out) var += (v - om) * (v - om);
  return {mean(in), om, std::sqrt(var / out.size())};
}

}  // namespace

TEST_CASE("noise-free video without anomalies is constant") {
  for (auto pattern : {BasePattern::Constant, BasePattern::Gradient, BasePattern::Blob}) {
    SynthConfig cfg;
    cfg.noise_std = 0;
    cfg.duration_s = 3;
    cfg.base_pattern = pattern;
    const auto v = gen_sequence(cfg);
    REQUIRE(v.sequence.size() == 30);
    for (std::size_t i = 1; i < v.sequence.size(); ++i) CHECK(v.sequence.frame(i) == v.sequence.frame(0));
    const auto s = generate_signal(v.sequence, estimate_mean(v.sequence));
    for (double x : s.values) CHECK(x == 0.0);
    CHECK(v.ground_truth.empty());
  }
}

TEST_CASE("generation is deterministic and returns the injected segments") {
  SynthConfig cfg;
  cfg.duration_s = 12;
  cfg.anomalies = {{2, 5.0, 8.0, 40, Motif::Bar}, {1, 1.0, 3.5, 60, Motif::Block}};
  cfg.seed = 99;
  const auto a = gen_sequence(cfg), b = gen_sequence(cfg);
  for (std::size_t i = 0; i < a.sequence.size(); ++i) REQUIRE(a.sequence.frame(i) == b.sequence.frame(i));
  REQUIRE(a.ground_truth.size() == 2);
  CHECK(a.ground_truth[0] == ActivitySegment{"synth", 1, 1.0, 3.5});
  CHECK(a.ground_truth[1] == ActivitySegment{"synth", 2, 5.0, 8.0});
  cfg.seed = 100;
  CHECK(gen_sequence(cfg).sequence.frame(0) != a.sequence.frame(0));
}

TEST_CASE("invalid synth configs are rejected") {
  SynthConfig cfg;
  cfg.duration_s = 10;
  cfg.anomalies = {{0, 2, 5, 50}, {1, 4, 6, 50}};
  CHECK_THROWS_AS(gen_sequence(cfg), Error);
  cfg.anomalies = {{0, 8, 11, 50}};
  CHECK_THROWS_AS(gen_sequence(cfg), Error);
  cfg.anomalies = {{0, 2, 3, -1}};
  CHECK_THROWS_AS(gen_sequence(cfg), Error);
  cfg.anomalies = {};
  cfg.noise_std = -1;
  CHECK_THROWS_AS(gen_sequence(cfg), Error);
}

TEST_CASE("an amplitude-50 anomaly stands out of noise 10") {
  SynthConfig cfg;
  cfg.noise_std = 10;
  cfg.anomalies = {{0, 20, 23, 50}};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    cfg.seed = seed;
    const auto st = window_stats(cfg);
    CHECK(st.in_mean - st.out_mean >= 2 * st.out_std);
  }
}

TEST_CASE("zero amplitude anomalies are indistinguishable") {
  SynthConfig cfg;
  cfg.noise_std = 10;
  cfg.anomalies = {{0, 20, 23, 0}};
  cfg.seed = 4;
  const auto st = window_stats(cfg);
  CHECK(std::abs(st.in_mean - st.out_mean) <= 3 * st.out_std);
}

TEST_CASE("window dataset split, balance and separability") {
  DatasetConfig dc;
  dc.video.duration_s = 12;
  dc.video.seed = 8;
  const ModelShape shape{16, 32, 32, 8, 16, 64, 32, 3};
  const auto ds = gen_window_dataset(dc, 3, 10, shape);
  CHECK(ds.train.size() == 24);
  CHECK(ds.test.size() == 6);
  std::map<int, int> counts;
  for (const auto* part : {&ds.train, &ds.test})
    for (const auto& w : *part) {
      ++counts[*w.label];
      CHECK(w.values.size() == 16 * 32 * 32);
      for (double v : w.values) REQUIRE((v >= 0.0 && v <= 1.0));
    }
  CHECK(counts == std::map<int, int>{{0, 10}, {1, 10}, {2, 10}});

  // Nearest-centroid baseline on flattened windows.
  std::map<int, std::vector<double>> centroid;
  std::map<int, int> n;
  for (const auto& w : ds.train) {
    auto& c = centroid[*w.label];
    c.resize(w.values.size(), 0.0);
    for (std::size_t i = 0; i < w.values.size(); ++i) c[i] += w.values[i];
    ++n[*w.label];
  }
  for (auto& [k, c] : centroid)
    for (auto& v : c) v /= n[k];
  int correct = 0;
  for (const auto& w : ds.test) {
    int best = -1;
    double best_d = 1e300;
    for (const auto& [k, c] : centroid) {
      double d = 0;
      for (std::size_t i = 0; i < c.size(); ++i) d += (w.values[i] - c[i]) * (w.values[i] - c[i]);
      if (d < best_d) best_d = d, best = k;
    }
    correct += best == *w.label;
  }
  CHECK(correct >= 0.8 * ds.test.size());

  const auto again = gen_window_dataset(dc, 3, 10, shape);
  REQUIRE(again.train.size() == ds.train.size());
  for (std::size_t i = 0; i < ds.train.size(); ++i) CHECK(again.train[i].values == ds.train[i].values);
  CHECK_THROWS_AS(gen_window_dataset(dc, 1, 10, shape), Error);
  CHECK_THROWS_AS(gen_window_dataset(dc, 3, 1, shape), Error);
}

TEST_CASE("random_suite places disjoint anomalies deterministically") {
  SuiteConfig suite;
  suite.videos = 6;
  suite.anomalies_per_video = 3;
  suite.classes = 4;
  const auto a = random_suite(suite, 5), b = random_suite(suite, 5);
  REQUIRE(a.size() == 6);
  for (std::size_t v = 0; v < a.size(); ++v) {
    CHECK(a[v].video_id == "video_" + std::to_string(v));
    CHECK(a[v].seed == b[v].seed);
    REQUIRE(a[v].anomalies.size() == 3);
    validate(a[v]);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(a[v].anomalies[k].start_s == b[v].anomalies[k].start_s);
      CHECK((a[v].anomalies[k].class_id >= 0 && a[v].anomalies[k].class_id < 4));
    }
  }
}
