#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "sigseg/background.hpp"
#include "sigseg/error.hpp"
#include "test_util.hpp"

using namespace sigseg;

namespace {
Frame row(std::vector<std::uint8_t> px) {
  const auto n = px.size();
  return Frame(n, 1, std::move(px));
}
}  // namespace

TEST_CASE("accumulate adds intensities and counts frames") {
  MeanAccumulator acc(2, 1);
  acc = accumulate(acc, row({10, 20}));
  CHECK(acc.sums() == std::vector<double>{10, 20});
  CHECK(acc.count() == 1);
  acc = accumulate(acc, row({30, 0}));
  CHECK(acc.sums() == std::vector<double>{40, 20});
  CHECK(acc.count() == 2);
  CHECK_THROWS_AS(acc.accumulate(row({1, 2, 3})), Error);
}

TEST_CASE("accumulate equals naive element-wise totals") {
  const auto frames = sigseg::testing::random_frames(50, 9, 7, 1);
  MeanAccumulator acc(9, 7);
  for (const auto& f : frames) acc.accumulate(f);
  for (std::size_t j = 0; j < 63; ++j) {
    double total = 0;
    for (const auto& f : frames) total += f.pixels[j];
    CHECK(acc.sums()[j] == total);
  }
}

TEST_CASE("merge: identity, commutativity, partitioned equals sequential") {
  const auto frames = sigseg::testing::random_frames(40, 6, 5, 2);
  MeanAccumulator a(6, 5), b(6, 5);
  for (std::size_t i = 0; i < 7; ++i) a.accumulate(frames[i]);
  for (std::size_t i = 7; i < 19; ++i) b.accumulate(frames[i]);
  CHECK(merge(a, MeanAccumulator(6, 5)) == a);
  CHECK(merge(a, MeanAccumulator()) == a);
  CHECK(merge(a, b) == merge(b, a));

  MeanAccumulator sequential(6, 5);
  for (const auto& f : frames) sequential.accumulate(f);
  MeanAccumulator merged(6, 5);
  for (std::size_t part = 0; part < 4; ++part) {
    MeanAccumulator p(6, 5);
    for (std::size_t i = part * 10; i < part * 10 + 10; ++i) p.accumulate(frames[i]);
    merged.merge(p);
  }
  CHECK(merged == sequential);
  CHECK(merged.finalize() == sequential.finalize());

  MeanAccumulator c(6, 5);
  c.accumulate(frames[30]);
  CHECK(merge(merge(a, b), c) == merge(a, merge(b, c)));
  CHECK_THROWS_AS(a.merge(MeanAccumulator(5, 6)), Error);
}

TEST_CASE("finalize divides by the frame count") {
  MeanAccumulator acc(2, 1);
  acc.accumulate(row({30, 0}));
  acc.accumulate(row({10, 20}));
  const auto m = finalize(acc);
  CHECK(m.values == std::vector<double>{20, 10});
  CHECK(m.count == 2);

  MeanAccumulator halves(1, 1);
  halves.accumulate(row({0}));
  halves.accumulate(row({255}));
  CHECK(halves.finalize().values[0] == 127.5);

  try {
    MeanAccumulator(3, 3).finalize();
    FAIL("expected EmptySequence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySequence);
  }
}

TEST_CASE("estimate_mean small cases") {
  const Frame f(2, 1, std::vector<std::uint8_t>{9, 200});
  const auto single = estimate_mean(FrameSequence("s", 5, {f}));
  CHECK(single.values == std::vector<double>{9, 200});

  const auto two = estimate_mean(FrameSequence("t", 5, {row({0, 2}), row({2, 0})}));
  CHECK(two.values == std::vector<double>{1, 1});

  const Frame same(3, 3, std::uint8_t{42});
  const auto idem = estimate_mean(FrameSequence("u", 5, {same, same, same, same}));
  for (double v : idem.values) CHECK(v == 42.0);

  CHECK_THROWS_AS(estimate_mean(FrameSequence("e", 5, {})), Error);
}

TEST_CASE("estimate_mean matches batch mean and is permutation invariant") {
  auto frames = sigseg::testing::random_frames(100, 12, 10, 3);
  const auto mean = estimate_mean(FrameSequence("r", 30, frames));
  for (std::size_t j = 0; j < 120; ++j) {
    double total = 0;
    double lo = 255, hi = 0;
    for (const auto& f : frames) {
      total += f.pixels[j];
      lo = std::min<double>(lo, f.pixels[j]);
      hi = std::max<double>(hi, f.pixels[j]);
    }
    CHECK(std::abs(mean.values[j] - total / 100.0) < 1e-9);
    CHECK((lo <= mean.values[j] && mean.values[j] <= hi));
  }
  std::mt19937_64 rng(4);
  std::shuffle(frames.begin(), frames.end(), rng);
  const auto shuffled = estimate_mean(FrameSequence("r", 30, frames));
  for (std::size_t j = 0; j < 120; ++j) CHECK(std::abs(shuffled.values[j] - mean.values[j]) < 1e-9);
}

TEST_CASE("SGBG file round trip and layout") {
  sigseg::testing::TempDir dir("sgbg");
  MeanFrame m{3, 2, {0.0, 1.5, 255.0, 127.25, 3.0, 9.125}, 4};
  save_mean_frame(m, dir / "m.sgbg");
  CHECK(std::filesystem::file_size(dir / "m.sgbg") == 16 + 6 * 8);
  const auto back = load_mean_frame(dir / "m.sgbg");
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.values == m.values);

  std::ofstream(dir / "bad.sgbg", std::ios::binary) << "SGSM0000";
  CHECK_THROWS_AS(load_mean_frame(dir / "bad.sgbg"), Error);
}
