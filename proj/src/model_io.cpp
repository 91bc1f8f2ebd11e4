#include <fstream>

#include "binio.hpp"
#include "sigseg/classifier.hpp"
#include "sigseg/error.hpp"

namespace sigseg {

namespace {
constexpr std::uint32_t kModelVersion = 1;
}

void save_model(const CnnLstmModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  const auto& s = model.shape;
  out.write("SGSM", 4);
  binio::put_u32(out, kModelVersion);
  for (std::size_t v : {s.steps, s.height, s.width, s.conv1_filters, s.conv2_filters, s.embed, s.hidden, s.classes}) {
    binio::put_u32(out, static_cast<std::uint32_t>(v));
  }
  for (double v : model.params) binio::put_f64(out, v);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

CnnLstmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  binio::expect_magic(in, "SGSM");
  const auto version = binio::get_u32(in);
  if (version != kModelVersion) {
    throw Error(ErrorCode::MalformedFile, "unsupported SGSM version " + std::to_string(version));
  }
  ModelShape s;
  for (std::size_t* field : {&s.steps, &s.height, &s.width, &s.conv1_filters, &s.conv2_filters, &s.embed,
                             &s.hidden, &s.classes}) {
    *field = binio::get_u32(in);
  }
  CnnLstmModel model{s, ParamLayout(s), {}};
  model.params.resize(model.layout.total());
  for (auto& v : model.params) v = binio::get_f64(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::MalformedFile, path.string() + ": trailing bytes after parameters");
  }
  return model;
}

}  // namespace sigseg
