#include <doctest.h>

#include <fstream>
#include <random>

#include "sigseg/error.hpp"
#include "sigseg/frameio.hpp"
#include "test_util.hpp"

using namespace sigseg;
using sigseg::testing::TempDir;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoFailure;
}

}  // namespace

TEST_CASE("load_frame reads a hand-written PGM byte for byte") {
  TempDir dir("pgm");
  write_bytes(dir / "a.pgm", std::string("P5\n2 2\n255\n") + std::string{'\x00', '\xff', '\x0a', '\x14'});
  const auto f = load_frame(dir / "a.pgm");
  CHECK(f.width == 2);
  CHECK(f.height == 2);
  CHECK(f.pixels == std::vector<std::uint8_t>{0, 255, 10, 20});
}

TEST_CASE("load_frame accepts header comments") {
  TempDir dir("pgm");
  write_bytes(dir / "c.pgm", std::string("P5\n# made by hand\n1 1\n255\n") + '\x07');
  CHECK(load_frame(dir / "c.pgm").pixels == std::vector<std::uint8_t>{7});
}

TEST_CASE("load_frame rejects malformed files") {
  TempDir dir("pgm");
  write_bytes(dir / "deep.pgm", std::string("P5\n1 1\n65535\n") + std::string(2, '\0'));
  CHECK(code_of([&] { load_frame(dir / "deep.pgm"); }) == ErrorCode::MalformedPgm);
  write_bytes(dir / "ascii.pgm", "P2\n1 1\n255\n7\n");
  CHECK(code_of([&] { load_frame(dir / "ascii.pgm"); }) == ErrorCode::MalformedPgm);
  write_bytes(dir / "short.pgm", std::string("P5\n2 2\n255\n") + std::string(3, '\0'));
  CHECK(code_of([&] { load_frame(dir / "short.pgm"); }) == ErrorCode::MalformedPgm);
  CHECK(code_of([&] { load_frame(dir / "absent.pgm"); }) == ErrorCode::MissingFile);
}

TEST_CASE("write_frame emits P5 with maxval 255") {
  TempDir dir("pgm");
  write_frame(Frame(1, 1, std::vector<std::uint8_t>{7}), dir / "one.pgm");
  std::ifstream in(dir / "one.pgm", std::ios::binary);
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  CHECK(bytes == std::string("P5\n1 1\n255\n") + '\x07');

  const Frame zeros(16, 16, std::uint8_t{0});
  write_frame(zeros, dir / "zeros.pgm");
  CHECK(load_frame(dir / "zeros.pgm") == zeros);
}

TEST_CASE("write_frame/load_frame round trip over random rasters") {
  TempDir dir("pgm");
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  for (int i = 0; i < 100; ++i) {
    const auto f = sigseg::testing::random_frame(dim(rng), dim(rng), rng);
    write_frame(f, dir / "rt.pgm");
    REQUIRE(load_frame(dir / "rt.pgm") == f);
  }
  const auto big = sigseg::testing::random_frame(32, 32, rng);
  write_frame(big, dir / "big.pgm");
  CHECK(load_frame(dir / "big.pgm") == big);
}

TEST_CASE("load_sequence follows manifest order and validates") {
  TempDir dir("seq");
  const auto frames = sigseg::testing::random_frames(3, 4, 4, 5);
  for (int i = 0; i < 3; ++i) write_frame(frames[i], dir / ("f" + std::to_string(i) + ".pgm"));

  write_bytes(dir / "m.json", R"({"video_id":"v","fps":10,"frames":["f2.pgm","f0.pgm","f1.pgm"]})");
  const auto seq = load_sequence(dir / "m.json");
  CHECK(seq.size() == 3);
  CHECK(seq.fps() == 10.0);
  CHECK(seq.video_id() == "v");
  CHECK(seq.frame(0) == frames[2]);
  CHECK(seq.frame(1) == frames[0]);
  CHECK(seq.frame(2) == frames[1]);

  write_bytes(dir / "zero.json", R"({"video_id":"v","fps":0,"frames":["f0.pgm"]})");
  CHECK(code_of([&] { load_sequence(dir / "zero.json"); }) == ErrorCode::MalformedManifest);
  write_bytes(dir / "junk.json", R"({"video_id":"v","frames":[]})");
  CHECK(code_of([&] { load_sequence(dir / "junk.json"); }) == ErrorCode::MalformedManifest);

  write_frame(Frame(8, 8, std::uint8_t{1}), dir / "big.pgm");
  write_bytes(dir / "mixed.json", R"({"video_id":"v","fps":10,"frames":["f0.pgm","big.pgm","f1.pgm"]})");
  try {
    load_sequence(dir / "mixed.json");
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
    CHECK(e.detail().find("frame 1") != std::string::npos);
  }

  write_bytes(dir / "gone.json", R"({"video_id":"v","fps":10,"frames":["nope.pgm"]})");
  CHECK(code_of([&] { load_sequence(dir / "gone.json"); }) == ErrorCode::MissingFile);
}

TEST_CASE("write_sequence produces a loadable manifest") {
  TempDir dir("seq");
  FrameSequence seq("clip", 12.5, sigseg::testing::random_frames(4, 5, 3, 9));
  const auto manifest = write_sequence(seq, dir / "clip");
  const auto back = load_sequence(manifest);
  REQUIRE(back.size() == 4);
  CHECK(back.fps() == 12.5);
  for (std::size_t i = 0; i < 4; ++i) CHECK(back.frame(i) == seq.frame(i));
}

TEST_CASE("downsample block-averages into [0,1]") {
  const Frame f(2, 2, std::vector<std::uint8_t>{0, 0, 255, 255});
  const auto one = downsample(f, 1, 1);
  REQUIRE(one.values.size() == 1);
  CHECK(one.values[0] == doctest::Approx(0.5).epsilon(1e-15));

  std::mt19937_64 rng(3);
  const auto r = sigseg::testing::random_frame(7, 5, rng);
  const auto same = downsample(r, 7, 5);
  for (std::size_t j = 0; j < r.pixels.size(); ++j) CHECK(same.values[j] == r.pixels[j] / 255.0);

  CHECK(code_of([&] { downsample(f, 3, 1); }) == ErrorCode::BadTargetSize);
  CHECK(code_of([&] { downsample(f, 0, 1); }) == ErrorCode::BadTargetSize);
}

TEST_CASE("downsample matches a per-cell scalar loop") {
  std::mt19937_64 rng(21);
  const auto f = sigseg::testing::random_frame(8, 8, rng);
  const auto out = downsample(f, 2, 2);
  for (std::size_t cy = 0; cy < 2; ++cy) {
    for (std::size_t cx = 0; cx < 2; ++cx) {
      double sum = 0;
      for (std::size_t y = cy * 4; y < cy * 4 + 4; ++y)
        for (std::size_t x = cx * 4; x < cx * 4 + 4; ++x) sum += f.pixels[y * 8 + x];
      CHECK(std::abs(out.values[cy * 2 + cx] - sum / 16.0 / 255.0) < 1e-12);
    }
  }

  // Uneven split: 7 columns into 3 cells gives widths 2, 2, 3.
  const auto g = sigseg::testing::random_frame(7, 1, rng);
  const auto uneven = downsample(g, 3, 1);
  CHECK(std::abs(uneven.values[0] - (g.pixels[0] + g.pixels[1]) / 2.0 / 255.0) < 1e-12);
  CHECK(std::abs(uneven.values[1] - (g.pixels[2] + g.pixels[3]) / 2.0 / 255.0) < 1e-12);
  CHECK(std::abs(uneven.values[2] - (g.pixels[4] + g.pixels[5] + g.pixels[6]) / 3.0 / 255.0) < 1e-12);
}

TEST_CASE("downsample properties: range and constant frames") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    std::uniform_int_distribution<std::size_t> dim(1, 30);
    const auto f = sigseg::testing::random_frame(dim(rng), dim(rng), rng);
    std::uniform_int_distribution<std::size_t> ow(1, f.width), oh(1, f.height);
    for (double v : downsample(f, ow(rng), oh(rng)).values) CHECK((v >= 0.0 && v <= 1.0));
  }
  const Frame c(9, 6, std::uint8_t{77});
  for (double v : downsample(c, 4, 5).values) CHECK(v == doctest::Approx(77.0 / 255.0).epsilon(1e-14));
}
