#include "sigseg/frameio.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <utility>

#include <json.hpp>

#include "sigseg/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sigseg {

Frame::Frame(std::size_t w, std::size_t h, std::vector<std::uint8_t> px)
    : width(w), height(h), pixels(std::move(px)) {
  if (w == 0 || h == 0 || pixels.size() != w * h) {
    throw Error(ErrorCode::DimensionMismatch, "frame raster does not match " + std::to_string(w) +
                                                  "x" + std::to_string(h));
  }
}

Frame::Frame(std::size_t w, std::size_t h, std::uint8_t fill)
    : width(w), height(h), pixels(w * h, fill) {
  if (w == 0 || h == 0) throw Error(ErrorCode::DimensionMismatch, "frame must be at least 1x1");
}

FrameSequence::FrameSequence(std::string video_id, double fps, std::vector<Frame> frames)
    : video_id_(std::move(video_id)), fps_(fps), frames_(std::move(frames)) {
  if (!(fps_ > 0.0)) throw Error(ErrorCode::MalformedManifest, "fps must be positive");
  if (!frames_.empty()) {
    width_ = frames_.front().width;
    height_ = frames_.front().height;
    for (std::size_t i = 1; i < frames_.size(); ++i) {
      if (frames_[i].width != width_ || frames_[i].height != height_) {
        throw Error(ErrorCode::DimensionMismatch, "frame " + std::to_string(i) +
                                                      " differs in size from frame 0");
      }
    }
  }
}

FrameSequence FrameSequence::from_files(std::string video_id, double fps,
                                        std::vector<fs::path> paths, std::size_t width,
                                        std::size_t height) {
  FrameSequence seq;
  if (!(fps > 0.0)) throw Error(ErrorCode::MalformedManifest, "fps must be positive");
  seq.video_id_ = std::move(video_id);
  seq.fps_ = fps;
  seq.paths_ = std::move(paths);
  seq.width_ = width;
  seq.height_ = height;
  return seq;
}

std::size_t FrameSequence::size() const noexcept {
  return paths_.empty() ? frames_.size() : paths_.size();
}

Frame FrameSequence::frame(std::size_t i) const {
  if (i >= size()) throw Error(ErrorCode::ShapeMismatch, "frame index out of range");
  if (paths_.empty()) return frames_[i];
  Frame f = load_frame(paths_[i]);
  if (f.width != width_ || f.height != height_) {
    throw Error(ErrorCode::DimensionMismatch,
                "frame " + std::to_string(i) + " changed size on disk: " + paths_[i].string());
  }
  return f;
}

namespace {

std::vector<char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Parses the ASCII header; returns dimensions and the raster offset.
PgmHeader parse_pgm_header(const std::vector<char>& buf, const fs::path& path) {
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::MalformedPgm, path.string() + ": " + why);
  };
  if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5') throw fail("bad magic");
  std::size_t pos = 2;
  auto next_token = [&]() -> unsigned long long {
    for (;;) {
      while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
      if (pos < buf.size() && buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= buf.size() || !std::isdigit(static_cast<unsigned char>(buf[pos]))) {
      throw fail("truncated header");
    }
    unsigned long long v = 0;
    while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
      v = v * 10 + static_cast<unsigned>(buf[pos] - '0');
      if (v > (1ull << 32)) throw fail("header value out of range");
      ++pos;
    }
    return v;
  };
  PgmHeader h;
  h.width = next_token();
  h.height = next_token();
  const auto maxval = next_token();
  if (h.width == 0 || h.height == 0) throw fail("zero dimension");
  if (maxval != 255) throw fail("maxval must be 255, got " + std::to_string(maxval));
  if (pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[pos]))) {
    throw fail("missing raster separator");
  }
  h.raster_offset = pos + 1;
  return h;
}

}  // namespace

PgmHeader read_pgm_header(const fs::path& path) {
  // Headers are tiny; reading a bounded prefix keeps manifest validation cheap.
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::vector<char> buf(256);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  buf.resize(static_cast<std::size_t>(in.gcount()));
  return parse_pgm_header(buf, path);
}

Frame load_frame(const fs::path& path) {
  const auto buf = read_all(path);
  const auto h = parse_pgm_header(buf, path);
  const std::size_t n = h.width * h.height;
  if (buf.size() - h.raster_offset < n) {
    throw Error(ErrorCode::MalformedPgm, path.string() + ": truncated raster");
  }
  std::vector<std::uint8_t> px(n);
  for (std::size_t i = 0; i < n; ++i) px[i] = static_cast<std::uint8_t>(buf[h.raster_offset + i]);
  return Frame(h.width, h.height, std::move(px));
}

void write_frame(const Frame& frame, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

FrameSequence load_sequence(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::MissingFile, manifest_path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedManifest, manifest_path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("video_id") || !doc["video_id"].is_string() ||
      !doc.contains("fps") || !doc["fps"].is_number() || !doc.contains("frames") ||
      !doc["frames"].is_array()) {
    throw Error(ErrorCode::MalformedManifest,
                manifest_path.string() + ": expected {video_id, fps, frames}");
  }
  const double fps = doc["fps"].get<double>();
  if (!(fps > 0.0)) throw Error(ErrorCode::MalformedManifest, "fps must be positive");

  const fs::path base = manifest_path.parent_path();
  std::vector<fs::path> paths;
  std::size_t width = 0, height = 0;
  for (const auto& entry : doc["frames"]) {
    if (!entry.is_string()) throw Error(ErrorCode::MalformedManifest, "frame entry is not a string");
    fs::path p = base / entry.get<std::string>();
    const auto h = read_pgm_header(p);
    if (paths.empty()) {
      width = h.width;
      height = h.height;
    } else if (h.width != width || h.height != height) {
      throw Error(ErrorCode::DimensionMismatch,
                  "frame " + std::to_string(paths.size()) + " is " + std::to_string(h.width) +
                      "x" + std::to_string(h.height) + ", expected " + std::to_string(width) +
                      "x" + std::to_string(height));
    }
    paths.push_back(std::move(p));
  }
  return FrameSequence::from_files(doc["video_id"].get<std::string>(), fps, std::move(paths),
                                   width, height);
}

fs::path write_sequence(const FrameSequence& seq, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
  json names = json::array();
  for (std::size_t i = 0; i < seq.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.pgm", i);
    write_frame(seq.frame(i), dir / name);
    names.push_back(name);
  }
  const json doc = {{"video_id", seq.video_id()}, {"fps", seq.fps()}, {"frames", names}};
  const fs::path manifest = dir / "manifest.json";
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + manifest.string());
  out << doc.dump(1) << '\n';
  return manifest;
}

Raster downsample(std::span<const double> values, std::size_t width, std::size_t height,
                  std::size_t out_w, std::size_t out_h) {
  if (values.size() != width * height) {
    throw Error(ErrorCode::DimensionMismatch, "raster length does not match dimensions");
  }
  if (out_w < 1 || out_h < 1 || out_w > width || out_h > height) {
    throw Error(ErrorCode::BadTargetSize, std::to_string(out_w) + "x" + std::to_string(out_h) +
                                              " from " + std::to_string(width) + "x" +
                                              std::to_string(height));
  }
  Raster out{out_w, out_h, std::vector<double>(out_w * out_h)};
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    const std::size_t y0 = oy * height / out_h, y1 = (oy + 1) * height / out_h;
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const std::size_t x0 = ox * width / out_w, x1 = (ox + 1) * width / out_w;
      double sum = 0.0;
      for (std::size_t y = y0; y < y1; ++y) {
        for (std::size_t x = x0; x < x1; ++x) sum += values[y * width + x];
      }
      out.values[oy * out_w + ox] = sum / static_cast<double>((y1 - y0) * (x1 - x0));
    }
  }
  return out;
}

Raster downsample(const Frame& frame, std::size_t out_w, std::size_t out_h) {
  std::vector<double> v(frame.pixels.begin(), frame.pixels.end());
  Raster r = downsample(v, frame.width, frame.height, out_w, out_h);
  for (auto& x : r.values) x /= 255.0;
  return r;
}

}  // namespace sigseg
