#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sigseg/background.hpp"
#include "sigseg/detector.hpp"
#include "sigseg/evaluator.hpp"
#include "sigseg/frameio.hpp"

namespace sigseg {

// Architecture sizes. Per frame: conv(conv1_filters, 3x3, pad 1) + ReLU +
// 2x2 max pool, conv(conv2_filters, 3x3, pad 1) + ReLU + 2x2 max pool,
// dense -> embed + ReLU. An LSTM of `hidden` units runs over the `steps`
// embeddings and a dense softmax head maps the last hidden state to classes.
struct ModelShape {
  std::size_t steps = 16;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t conv1_filters = 8;
  std::size_t conv2_filters = 16;
  std::size_t embed = 64;
  std::size_t hidden = 32;
  std::size_t classes = 17;

  std::size_t flat_size() const noexcept { return conv2_filters * (height / 4) * (width / 4); }

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

void validate(const ModelShape& shape);

// Parameter tensors in storage (and file) order.
enum class Tensor : std::size_t {
  Conv1Weight, Conv1Bias,
  Conv2Weight, Conv2Bias,
  EmbedWeight, EmbedBias,
  InputGateWx, InputGateWh, InputGateBias,
  ForgetGateWx, ForgetGateWh, ForgetGateBias,
  CellGateWx, CellGateWh, CellGateBias,
  OutputGateWx, OutputGateWh, OutputGateBias,
  HeadWeight, HeadBias,
};
inline constexpr std::size_t kTensorCount = 20;

struct TensorInfo {
  std::string_view name;
  std::size_t offset = 0;
  std::size_t size = 0;
  std::size_t fan_in = 0;   // zero for biases
  std::size_t fan_out = 0;
  bool is_bias() const noexcept { return fan_in == 0; }
};

class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(const ModelShape& shape);

  const TensorInfo& info(Tensor t) const { return tensors_[static_cast<std::size_t>(t)]; }
  const std::array<TensorInfo, kTensorCount>& tensors() const noexcept { return tensors_; }
  std::size_t total() const noexcept { return total_; }

 private:
  std::array<TensorInfo, kTensorCount> tensors_{};
  std::size_t total_ = 0;
};

// All learnable parameters in one flat vector; gradients and Adam moments
// use the same layout.
struct CnnLstmModel {
  ModelShape shape;
  ParamLayout layout;
  std::vector<double> params;

  std::span<double> tensor(Tensor t) {
    const auto& i = layout.info(t);
    return {params.data() + i.offset, i.size};
  }
  std::span<const double> tensor(Tensor t) const {
    const auto& i = layout.info(t);
    return {params.data() + i.offset, i.size};
  }
};

// T frames of H x W values in [0,1], frame-major.
struct ClassWindow {
  std::size_t steps = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
  std::optional<int> label;

  std::span<const double> frame(std::size_t t) const {
    return {values.data() + t * height * width, height * width};
  }
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 8;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

void validate(const TrainConfig& config);

// Uniform(-a, a) weights with a = sqrt(6 / (fan_in + fan_out)); zero biases
// except the forget gate, which starts at 1.
CnnLstmModel init_model(const ModelShape& shape, std::uint64_t seed);

// Activations retained by forward for backward.
struct ForwardCache {
  struct Step {
    std::vector<double> conv1;  // post-ReLU
    std::vector<double> pool1;
    std::vector<std::uint32_t> pool1_arg;
    std::vector<double> conv2;  // post-ReLU
    std::vector<double> pool2;  // flattened embed input
    std::vector<std::uint32_t> pool2_arg;
    std::vector<double> embed;  // post-ReLU
    std::vector<double> in_gate, forget_gate, cell_gate, out_gate;
    std::vector<double> cell, cell_tanh, hidden;
  };
  std::vector<Step> steps;
  std::vector<double> logits;
  std::vector<double> probs;
};

std::vector<double> forward(const CnnLstmModel& model, const ClassWindow& window,
                            ForwardCache* cache = nullptr);

// Cross-entropy with probabilities clamped below at 1e-12.
double loss(std::span<const double> probs, int label);

// Exact gradient of loss(forward(window), label) with respect to every
// parameter. Runs its own forward pass; the probabilities it produced are
// copied to probs_out when given.
std::vector<double> backward(const CnnLstmModel& model, const ClassWindow& window, int label,
                             std::vector<double>* probs_out = nullptr);

// Lowest class id among the maximal entries.
int argmax_class(std::span<const double> scores);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

// One Adam update on the batch-mean gradient. Returns the mean batch loss
// measured before the update.
double train_step(CnnLstmModel& model, std::span<const ClassWindow* const> batch,
                  const TrainConfig& config, AdamState& state);

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;      // mean loss over the training set after the epoch
  double accuracy = 0.0;  // fraction classified correctly after the epoch
};

struct TrainResult {
  CnnLstmModel model;
  std::vector<EpochStats> history;
};

TrainResult train(CnnLstmModel model, std::span<const ClassWindow> dataset, const TrainConfig& config);

struct DatasetStats {
  double loss = 0.0;
  double accuracy = 0.0;
};
DatasetStats evaluate_windows(const CnnLstmModel& model, std::span<const ClassWindow> dataset);

enum class InputMode {
  Residual,  // |frame - mean| / 255
  Raw,       // frame / 255
};

// Preprocesses one frame into the model's H x W input raster.
Raster preprocess_frame(const Frame& frame, const MeanFrame& mean, const ModelShape& shape,
                        InputMode mode = InputMode::Residual);

// 0-based offsets of the windows covering a span of `length` frames: stride
// steps/2, continuing until a window reaches the end of the span.
std::vector<std::size_t> window_starts(std::size_t length, std::size_t steps);

// Windows covering frames [first, first + length) of seq (0-based), padded by
// repeating the last frame of the span where a window runs past its end.
std::vector<ClassWindow> extract_windows(const FrameSequence& seq, const MeanFrame& mean,
                                         std::size_t first, std::size_t length,
                                         const ModelShape& shape, InputMode mode = InputMode::Residual);

ActivitySegment classify_interval(const CnnLstmModel& model, const FrameSequence& seq,
                                  const MeanFrame& mean, const CandidateInterval& interval,
                                  InputMode mode = InputMode::Residual);

// Labeled windows for every ground-truth segment of seq's video.
std::vector<ClassWindow> windows_from_segments(const FrameSequence& seq, const MeanFrame& mean,
                                               std::span<const ActivitySegment> segments,
                                               const ModelShape& shape,
                                               InputMode mode = InputMode::Residual);

// SGSM container: magic, u32 version, u32 steps, height, width,
// conv1_filters, conv2_filters, embed, hidden, classes, then every tensor in
// Tensor order as f64 (all LE).
void save_model(const CnnLstmModel& model, const std::filesystem::path& path);
CnnLstmModel load_model(const std::filesystem::path& path);

// header: epoch,loss,accuracy
void write_history_csv(std::span<const EpochStats> history, const std::filesystem::path& path);

}  // namespace sigseg
