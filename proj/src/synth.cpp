#include "sigseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "sigseg/background.hpp"
#include "sigseg/error.hpp"

namespace sigseg {

namespace {

constexpr double kSlack = 1e-9;

// Mixes a base seed with an index so derived streams do not collide.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::size_t frame_count(const SynthConfig& c) {
  return static_cast<std::size_t>(std::llround(c.duration_s * c.fps));
}

std::vector<double> render_base(const SynthConfig& c) {
  std::vector<double> base(c.width * c.height);
  const double cx = (static_cast<double>(c.width) - 1.0) / 2.0, cy = (static_cast<double>(c.height) - 1.0) / 2.0;
  const double sigma = static_cast<double>(std::min(c.width, c.height)) / 4.0;
  const double span = std::max<double>(1.0, static_cast<double>(c.width + c.height) - 2.0);
  for (std::size_t y = 0; y < c.height; ++y) {
    for (std::size_t x = 0; x < c.width; ++x) {
      double v = 100.0;
      if (c.base_pattern == BasePattern::Gradient) {
        v = 60.0 + 80.0 * static_cast<double>(x + y) / span;
      } else if (c.base_pattern == BasePattern::Blob) {
        const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
        v = 60.0 + 80.0 * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      }
      base[y * c.width + x] = v;
    }
  }
  return base;
}

void composite_motif(const SynthConfig& c, const InjectedAnomaly& a, std::vector<double>& raster) {
  std::size_t x0 = 0, x1 = c.width, y0 = 0, y1 = c.height;
  if (a.motif == Motif::Block) {
    const std::size_t cell = static_cast<std::size_t>(a.class_id) % 16;
    const std::size_t gx = cell % 4, gy = cell / 4;
    x0 = gx * c.width / 4;
    x1 = std::max(x0 + 1, (gx + 1) * c.width / 4);
    y0 = gy * c.height / 4;
    y1 = std::max(y0 + 1, (gy + 1) * c.height / 4);
  } else {
    const std::size_t band = static_cast<std::size_t>(a.class_id) % 8;
    y0 = band * c.height / 8;
    y1 = std::max(y0 + 1, (band + 1) * c.height / 8);
  }
  for (std::size_t y = y0; y < std::min(y1, c.height); ++y) {
    for (std::size_t x = x0; x < std::min(x1, c.width); ++x) raster[y * c.width + x] += a.amplitude;
  }
}

}  // namespace

void validate(const SynthConfig& c) {
  auto bad = [](const std::string& why) { return Error(ErrorCode::BadConfig, why); };
  if (c.width < 1 || c.height < 1) throw bad("frame size must be at least 1x1");
  if (!(c.fps > 0.0) || !(c.duration_s > 0.0) || frame_count(c) < 1) throw bad("need fps > 0 and at least one frame");
  if (!(c.noise_std >= 0.0)) throw bad("noise_std must be non-negative");
  std::vector<InjectedAnomaly> sorted = c.anomalies;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& a = sorted[i];
    if (!(a.start_s >= 0.0 && a.start_s < a.end_s && a.end_s <= c.duration_s + kSlack)) {
      throw bad("anomaly window [" + std::to_string(a.start_s) + ", " + std::to_string(a.end_s) +
                "] outside [0, duration]");
    }
    if (!(a.amplitude >= 0.0)) throw bad("amplitude must be non-negative");
    if (a.class_id < 0) throw bad("class_id must be non-negative");
    if (i > 0 && a.start_s < sorted[i - 1].end_s) throw bad("anomaly windows overlap");
  }
}

SynthVideo gen_sequence(const SynthConfig& config) {
  validate(config);
  const std::size_t n = frame_count(config);
  const auto base = render_base(config);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<Frame> frames;
  frames.reserve(n);
  std::vector<double> raster(base.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / config.fps;
    raster = base;
    for (const auto& a : config.anomalies) {
      if (t >= a.start_s - kSlack && t < a.end_s - kSlack) composite_motif(config, a, raster);
    }
    Frame f(config.width, config.height);
    for (std::size_t j = 0; j < raster.size(); ++j) {
      const double v = raster[j] + config.noise_std * noise(rng);
      f.pixels[j] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
    }
    frames.push_back(std::move(f));
  }

  SynthVideo out{FrameSequence(config.video_id, config.fps, std::move(frames)), {}};
  for (const auto& a : config.anomalies) out.ground_truth.push_back({config.video_id, a.class_id, a.start_s, a.end_s});
  std::sort(out.ground_truth.begin(), out.ground_truth.end(),
            [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
  return out;
}

WindowDataset gen_window_dataset(const DatasetConfig& config, int classes, int per_class, const ModelShape& shape,
                                 InputMode mode) {
  if (classes < 2 || per_class < 2) throw Error(ErrorCode::BadConfig, "need classes >= 2 and per_class >= 2");
  if (static_cast<std::size_t>(classes) > shape.classes) {
    throw Error(ErrorCode::BadConfig, "more dataset classes than model outputs");
  }
  const auto& video = config.video;
  if (!(config.anomaly_s > 0.0) || config.anomaly_s + 2.0 > video.duration_s) {
    throw Error(ErrorCode::BadConfig, "anomaly_s must be positive and leave 1 s of margin on each side");
  }
  const std::uint64_t seed = video.seed;
  std::vector<ClassWindow> all;
  for (int c = 0; c < classes; ++c) {
    for (int r = 0; r < per_class; ++r) {
      const auto index = static_cast<std::uint64_t>(c * per_class + r);
      std::mt19937_64 rng(derive_seed(seed, index));
      SynthConfig cfg = video;
      cfg.video_id = "window_" + std::to_string(index);
      cfg.seed = rng();
      std::uniform_real_distribution<double> place(1.0, video.duration_s - 1.0 - config.anomaly_s);
      const double start = std::round(place(rng) * video.fps) / video.fps;
      cfg.anomalies = {{c, start, start + config.anomaly_s, config.amplitude, config.motif}};
      const auto synth = gen_sequence(cfg);
      const auto mean = estimate_mean(synth.sequence);

      const auto first = static_cast<std::size_t>(std::llround(start * video.fps));
      const auto length = static_cast<std::size_t>(std::llround(config.anomaly_s * video.fps));
      std::size_t offset = 0;
      if (length > shape.steps) {
        std::uniform_int_distribution<std::size_t> pick(0, length - shape.steps);
        offset = pick(rng);
      }
      auto windows = extract_windows(synth.sequence, mean, first + offset, std::min(length, shape.steps), shape, mode);
      ClassWindow w = std::move(windows.front());
      w.label = c;
      all.push_back(std::move(w));
    }
  }

  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng(derive_seed(seed, all.size()));
  std::shuffle(order.begin(), order.end(), split_rng);
  const std::size_t train_count = all.size() * 4 / 5;
  WindowDataset ds;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < train_count ? ds.train : ds.test).push_back(std::move(all[order[k]]));
  }
  return ds;
}

std::vector<SynthConfig> random_suite(const SuiteConfig& suite, std::uint64_t seed) {
  const auto& base = suite.base;
  const std::size_t m = suite.anomalies_per_video;
  if (suite.classes < 1 || m < 1) throw Error(ErrorCode::BadConfig, "need classes >= 1 and anomalies_per_video >= 1");
  const double slot = base.duration_s / static_cast<double>(m);
  constexpr double kMargin = 2.0;
  if (suite.anomaly_s + 2.0 * kMargin > slot) {
    throw Error(ErrorCode::BadConfig, "video too short for the requested anomalies");
  }
  std::vector<SynthConfig> out;
  for (std::size_t v = 0; v < suite.videos; ++v) {
    std::mt19937_64 rng(derive_seed(seed, v));
    SynthConfig cfg = base;
    cfg.video_id = suite.id_prefix + "_" + std::to_string(v);
    cfg.seed = rng();
    cfg.anomalies.clear();
    std::uniform_int_distribution<int> cls(0, suite.classes - 1);
    for (std::size_t k = 0; k < m; ++k) {
      const double lo = static_cast<double>(k) * slot + kMargin;
      const double hi = static_cast<double>(k + 1) * slot - kMargin - suite.anomaly_s;
      std::uniform_real_distribution<double> place(lo, hi);
      const double start = std::round(place(rng) * base.fps) / base.fps;
      cfg.anomalies.push_back({cls(rng), start, start + suite.anomaly_s, suite.amplitude, suite.motif});
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

void write_suite(std::span<const SynthVideo> videos, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
  nlohmann::json entries = nlohmann::json::array();
  std::vector<ActivitySegment> gt;
  for (const auto& v : videos) {
    write_sequence(v.sequence, dir / v.sequence.video_id());
    entries.push_back(v.sequence.video_id() + "/manifest.json");
    gt.insert(gt.end(), v.ground_truth.begin(), v.ground_truth.end());
  }
  write_segments_csv(gt, dir / "ground_truth.csv");
  std::ofstream out(dir / "dataset.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write dataset index in " + dir.string());
  out << nlohmann::json{{"manifests", entries}, {"ground_truth", "ground_truth.csv"}}.dump(2) << '\n';
}

}  // namespace sigseg
