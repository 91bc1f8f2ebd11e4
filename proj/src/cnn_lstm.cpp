#include <algorithm>
#include <cmath>
#include <random>

#include "sigseg/classifier.hpp"
#include "sigseg/error.hpp"

namespace sigseg {

namespace {

constexpr std::size_t kKernel = 3;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// 3x3 convolution, zero padding 1, stride 1. Weights are [out][in][ky][kx].
void conv3x3_forward(const double* in, std::size_t channels, std::size_t h, std::size_t w,
                     const double* weights, const double* bias, std::size_t filters, double* out) {
  const std::size_t plane = h * w;
  for (std::size_t f = 0; f < filters; ++f) {
    double* dst_plane = out + f * plane;
    std::fill(dst_plane, dst_plane + plane, bias[f]);
    for (std::size_t c = 0; c < channels; ++c) {
      const double* src_plane = in + c * plane;
      for (std::size_t ky = 0; ky < kKernel; ++ky) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - 1;
        const std::size_t y0 = dy < 0 ? 1 : 0, y1 = dy > 0 ? h - 1 : h;
        for (std::size_t kx = 0; kx < kKernel; ++kx) {
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - 1;
          const std::size_t x0 = dx < 0 ? 1 : 0, x1 = dx > 0 ? w - 1 : w;
          const double wt = weights[((f * channels + c) * kKernel + ky) * kKernel + kx];
          for (std::size_t y = y0; y < y1; ++y) {
            const double* src = src_plane + static_cast<std::ptrdiff_t>(y) * static_cast<std::ptrdiff_t>(w) +
                                dy * static_cast<std::ptrdiff_t>(w) + dx;
            double* dst = dst_plane + y * w;
            for (std::size_t x = x0; x < x1; ++x) dst[x] += wt * src[x];
          }
        }
      }
    }
  }
}

// Accumulates weight/bias gradients and, when d_in is non-null, the input gradient.
void conv3x3_backward(const double* in, std::size_t channels, std::size_t h, std::size_t w,
                      const double* weights, std::size_t filters, const double* d_out,
                      double* d_weights, double* d_bias, double* d_in) {
  const std::size_t plane = h * w;
  for (std::size_t f = 0; f < filters; ++f) {
    const double* g_plane = d_out + f * plane;
    double bsum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) bsum += g_plane[i];
    d_bias[f] += bsum;
    for (std::size_t c = 0; c < channels; ++c) {
      const double* src_plane = in + c * plane;
      for (std::size_t ky = 0; ky < kKernel; ++ky) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - 1;
        const std::size_t y0 = dy < 0 ? 1 : 0, y1 = dy > 0 ? h - 1 : h;
        for (std::size_t kx = 0; kx < kKernel; ++kx) {
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - 1;
          const std::size_t x0 = dx < 0 ? 1 : 0, x1 = dx > 0 ? w - 1 : w;
          const std::size_t widx = ((f * channels + c) * kKernel + ky) * kKernel + kx;
          const double wt = weights[widx];
          const std::ptrdiff_t shift = dy * static_cast<std::ptrdiff_t>(w) + dx;
          double acc = 0.0;
          for (std::size_t y = y0; y < y1; ++y) {
            const double* g = g_plane + y * w;
            const double* src = src_plane + static_cast<std::ptrdiff_t>(y * w) + shift;
            for (std::size_t x = x0; x < x1; ++x) acc += g[x] * src[x];
            if (d_in != nullptr) {
              double* dsrc = d_in + c * plane + static_cast<std::ptrdiff_t>(y * w) + shift;
              for (std::size_t x = x0; x < x1; ++x) dsrc[x] += wt * g[x];
            }
          }
          d_weights[widx] += acc;
        }
      }
    }
  }
}

// 2x2 stride-2 max pool; arg holds the flat source index of each winner
// (first maximum in row-major order).
void maxpool2x2(const double* in, std::size_t channels, std::size_t h, std::size_t w, double* out,
                std::uint32_t* arg) {
  const std::size_t oh = h / 2, ow = w / 2;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = c * h * w + (2 * oy) * w + 2 * ox;
        for (std::size_t ky = 0; ky < 2; ++ky) {
          for (std::size_t kx = 0; kx < 2; ++kx) {
            const std::size_t idx = c * h * w + (2 * oy + ky) * w + 2 * ox + kx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (c * oh + oy) * ow + ox;
        out[o] = in[best];
        arg[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

void relu_inplace(std::vector<double>& v) {
  for (auto& x : v) x = std::max(x, 0.0);
}

// y = W x + b with W row-major [rows][cols]; y is overwritten.
void affine(const double* weights, const double* bias, const double* x, std::size_t rows,
            std::size_t cols, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = weights + r * cols;
    double acc = bias != nullptr ? bias[r] : 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

// y += W x without bias.
void gemv_add(const double* weights, const double* x, std::size_t rows, std::size_t cols, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = weights + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

// dW += g x^T, dx += W^T g (dx may be null).
void affine_backward(const double* weights, const double* x, const double* g, std::size_t rows,
                     std::size_t cols, double* d_weights, double* d_x) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    double* drow = d_weights + r * cols;
    for (std::size_t c = 0; c < cols; ++c) drow[c] += gr * x[c];
    if (d_x != nullptr) {
      const double* row = weights + r * cols;
      for (std::size_t c = 0; c < cols; ++c) d_x[c] += gr * row[c];
    }
  }
}

struct GateTensors {
  Tensor wx, wh, bias;
};
constexpr std::array<GateTensors, 4> kGates = {{
    {Tensor::InputGateWx, Tensor::InputGateWh, Tensor::InputGateBias},
    {Tensor::ForgetGateWx, Tensor::ForgetGateWh, Tensor::ForgetGateBias},
    {Tensor::CellGateWx, Tensor::CellGateWh, Tensor::CellGateBias},
    {Tensor::OutputGateWx, Tensor::OutputGateWh, Tensor::OutputGateBias},
}};

void check_window(const CnnLstmModel& model, const ClassWindow& window) {
  const auto& s = model.shape;
  if (window.steps != s.steps || window.height != s.height || window.width != s.width ||
      window.values.size() != s.steps * s.height * s.width) {
    throw Error(ErrorCode::ShapeMismatch,
                "window is " + std::to_string(window.steps) + "x" + std::to_string(window.height) +
                    "x" + std::to_string(window.width) + ", model expects " + std::to_string(s.steps) +
                    "x" + std::to_string(s.height) + "x" + std::to_string(s.width));
  }
  if (model.params.size() != model.layout.total()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter vector does not match layout");
  }
}

}  // namespace

void validate(const ModelShape& s) {
  const bool ok = s.steps >= 1 && s.height >= 4 && s.width >= 4 && s.height % 4 == 0 &&
                  s.width % 4 == 0 && s.conv1_filters >= 1 && s.conv2_filters >= 1 && s.embed >= 1 &&
                  s.hidden >= 1 && s.classes >= 2;
  if (!ok) {
    throw Error(ErrorCode::BadHyperparams,
                "need steps >= 1, height/width positive multiples of 4, at least one filter/unit, "
                "and at least 2 classes");
  }
}

ParamLayout::ParamLayout(const ModelShape& s) {
  validate(s);
  const std::size_t k2 = kKernel * kKernel;
  auto set = [&](Tensor t, std::string_view name, std::size_t size, std::size_t fan_in, std::size_t fan_out) {
    tensors_[static_cast<std::size_t>(t)] = {name, total_, size, fan_in, fan_out};
    total_ += size;
  };
  set(Tensor::Conv1Weight, "conv1.weight", s.conv1_filters * k2, k2, s.conv1_filters * k2);
  set(Tensor::Conv1Bias, "conv1.bias", s.conv1_filters, 0, 0);
  set(Tensor::Conv2Weight, "conv2.weight", s.conv2_filters * s.conv1_filters * k2, s.conv1_filters * k2,
      s.conv2_filters * k2);
  set(Tensor::Conv2Bias, "conv2.bias", s.conv2_filters, 0, 0);
  set(Tensor::EmbedWeight, "embed.weight", s.embed * s.flat_size(), s.flat_size(), s.embed);
  set(Tensor::EmbedBias, "embed.bias", s.embed, 0, 0);
  constexpr std::array<std::string_view, 12> gate_names = {
      "lstm.input.wx",  "lstm.input.wh",  "lstm.input.bias",  "lstm.forget.wx", "lstm.forget.wh",
      "lstm.forget.bias", "lstm.cell.wx", "lstm.cell.wh",     "lstm.cell.bias", "lstm.output.wx",
      "lstm.output.wh", "lstm.output.bias"};
  for (std::size_t g = 0; g < kGates.size(); ++g) {
    set(kGates[g].wx, gate_names[3 * g], s.hidden * s.embed, s.embed, s.hidden);
    set(kGates[g].wh, gate_names[3 * g + 1], s.hidden * s.hidden, s.hidden, s.hidden);
    set(kGates[g].bias, gate_names[3 * g + 2], s.hidden, 0, 0);
  }
  set(Tensor::HeadWeight, "head.weight", s.classes * s.hidden, s.hidden, s.classes);
  set(Tensor::HeadBias, "head.bias", s.classes, 0, 0);
}

CnnLstmModel init_model(const ModelShape& shape, std::uint64_t seed) {
  CnnLstmModel model{shape, ParamLayout(shape), {}};
  model.params.assign(model.layout.total(), 0.0);
  std::mt19937_64 rng(seed);
  for (const auto& info : model.layout.tensors()) {
    if (info.is_bias()) continue;
    const double a = std::sqrt(6.0 / static_cast<double>(info.fan_in + info.fan_out));
    std::uniform_real_distribution<double> dist(-a, a);
    for (std::size_t i = 0; i < info.size; ++i) {
      double v;
      do v = dist(rng);
      while (!(v > -a && v < a));
      model.params[info.offset + i] = v;
    }
  }
  for (auto& b : model.tensor(Tensor::ForgetGateBias)) b = 1.0;
  return model;
}

std::vector<double> forward(const CnnLstmModel& model, const ClassWindow& window, ForwardCache* cache) {
  check_window(model, window);
  const auto& s = model.shape;
  const std::size_t h1 = s.height / 2, w1 = s.width / 2;
  const std::size_t hid = s.hidden;

  ForwardCache local;
  ForwardCache& fc = cache != nullptr ? *cache : local;
  fc.steps.assign(s.steps, {});

  const double* conv1_w = model.tensor(Tensor::Conv1Weight).data();
  const double* conv1_b = model.tensor(Tensor::Conv1Bias).data();
  const double* conv2_w = model.tensor(Tensor::Conv2Weight).data();
  const double* conv2_b = model.tensor(Tensor::Conv2Bias).data();
  const double* embed_w = model.tensor(Tensor::EmbedWeight).data();
  const double* embed_b = model.tensor(Tensor::EmbedBias).data();

  std::vector<double> h_prev(hid, 0.0), c_prev(hid, 0.0);
  for (std::size_t t = 0; t < s.steps; ++t) {
    auto& st = fc.steps[t];
    st.conv1.resize(s.conv1_filters * s.height * s.width);
    conv3x3_forward(window.frame(t).data(), 1, s.height, s.width, conv1_w, conv1_b, s.conv1_filters,
                    st.conv1.data());
    relu_inplace(st.conv1);
    st.pool1.resize(s.conv1_filters * h1 * w1);
    st.pool1_arg.resize(st.pool1.size());
    maxpool2x2(st.conv1.data(), s.conv1_filters, s.height, s.width, st.pool1.data(), st.pool1_arg.data());

    st.conv2.resize(s.conv2_filters * h1 * w1);
    conv3x3_forward(st.pool1.data(), s.conv1_filters, h1, w1, conv2_w, conv2_b, s.conv2_filters,
                    st.conv2.data());
    relu_inplace(st.conv2);
    st.pool2.resize(s.flat_size());
    st.pool2_arg.resize(st.pool2.size());
    maxpool2x2(st.conv2.data(), s.conv2_filters, h1, w1, st.pool2.data(), st.pool2_arg.data());

    st.embed.resize(s.embed);
    affine(embed_w, embed_b, st.pool2.data(), s.embed, s.flat_size(), st.embed.data());
    relu_inplace(st.embed);

    std::array<std::vector<double>*, 4> gates = {&st.in_gate, &st.forget_gate, &st.cell_gate, &st.out_gate};
    for (std::size_t g = 0; g < 4; ++g) {
      auto& a = *gates[g];
      a.resize(hid);
      affine(model.tensor(kGates[g].wx).data(), model.tensor(kGates[g].bias).data(), st.embed.data(), hid,
             s.embed, a.data());
      gemv_add(model.tensor(kGates[g].wh).data(), h_prev.data(), hid, hid, a.data());
      for (auto& x : a) x = g == 2 ? std::tanh(x) : sigmoid(x);
    }
    st.cell.resize(hid);
    st.cell_tanh.resize(hid);
    st.hidden.resize(hid);
    for (std::size_t j = 0; j < hid; ++j) {
      st.cell[j] = st.forget_gate[j] * c_prev[j] + st.in_gate[j] * st.cell_gate[j];
      st.cell_tanh[j] = std::tanh(st.cell[j]);
      st.hidden[j] = st.out_gate[j] * st.cell_tanh[j];
    }
    h_prev = st.hidden;
    c_prev = st.cell;
  }

  fc.logits.resize(s.classes);
  affine(model.tensor(Tensor::HeadWeight).data(), model.tensor(Tensor::HeadBias).data(), h_prev.data(),
         s.classes, hid, fc.logits.data());
  const double mx = *std::max_element(fc.logits.begin(), fc.logits.end());
  fc.probs.resize(s.classes);
  double z = 0.0;
  for (std::size_t k = 0; k < s.classes; ++k) z += (fc.probs[k] = std::exp(fc.logits[k] - mx));
  for (auto& p : fc.probs) p /= z;
  return fc.probs;
}

double loss(std::span<const double> probs, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= probs.size()) {
    throw Error(ErrorCode::BadLabel, "label " + std::to_string(label) + " outside [0, " +
                                         std::to_string(probs.size()) + ")");
  }
  return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-12));
}

int argmax_class(std::span<const double> scores) {
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::vector<double> backward(const CnnLstmModel& model, const ClassWindow& window, int label,
                             std::vector<double>* probs_out) {
  const auto& s = model.shape;
  if (label < 0 || static_cast<std::size_t>(label) >= s.classes) {
    throw Error(ErrorCode::BadLabel, "label " + std::to_string(label) + " outside [0, " +
                                         std::to_string(s.classes) + ")");
  }
  ForwardCache fc;
  forward(model, window, &fc);
  if (probs_out != nullptr) *probs_out = fc.probs;

  std::vector<double> grad(model.layout.total(), 0.0);
  auto g = [&](Tensor t) { return grad.data() + model.layout.info(t).offset; };
  auto p = [&](Tensor t) { return model.tensor(t).data(); };

  const std::size_t hid = s.hidden;
  const std::size_t h1 = s.height / 2, w1 = s.width / 2;

  // Softmax + cross-entropy: d logits = probs - one_hot(label).
  std::vector<double> d_logits = fc.probs;
  d_logits[static_cast<std::size_t>(label)] -= 1.0;
  std::vector<double> d_h(hid, 0.0);
  affine_backward(p(Tensor::HeadWeight), fc.steps.back().hidden.data(), d_logits.data(), s.classes, hid,
                  g(Tensor::HeadWeight), d_h.data());
  for (std::size_t k = 0; k < s.classes; ++k) g(Tensor::HeadBias)[k] += d_logits[k];

  std::vector<double> d_c(hid, 0.0);
  const std::vector<double> zeros(hid, 0.0);
  std::array<std::vector<double>, 4> d_pre;
  for (auto& v : d_pre) v.resize(hid);
  std::vector<double> d_embed(s.embed), d_flat(s.flat_size()), d_conv2(s.conv2_filters * h1 * w1),
      d_pool1(s.conv1_filters * h1 * w1), d_conv1(s.conv1_filters * s.height * s.width);

  for (std::size_t t = s.steps; t-- > 0;) {
    const auto& st = fc.steps[t];
    const std::vector<double>& c_prev = t > 0 ? fc.steps[t - 1].cell : zeros;
    const std::vector<double>& h_prev = t > 0 ? fc.steps[t - 1].hidden : zeros;

    for (std::size_t j = 0; j < hid; ++j) {
      const double d_out_gate = d_h[j] * st.cell_tanh[j];
      const double dc = d_c[j] + d_h[j] * st.out_gate[j] * (1.0 - st.cell_tanh[j] * st.cell_tanh[j]);
      const double i = st.in_gate[j], f = st.forget_gate[j], gg = st.cell_gate[j], o = st.out_gate[j];
      d_pre[0][j] = dc * gg * i * (1.0 - i);
      d_pre[1][j] = dc * c_prev[j] * f * (1.0 - f);
      d_pre[2][j] = dc * i * (1.0 - gg * gg);
      d_pre[3][j] = d_out_gate * o * (1.0 - o);
      d_c[j] = dc * f;
    }

    std::fill(d_embed.begin(), d_embed.end(), 0.0);
    std::fill(d_h.begin(), d_h.end(), 0.0);
    for (std::size_t gi = 0; gi < 4; ++gi) {
      affine_backward(p(kGates[gi].wx), st.embed.data(), d_pre[gi].data(), hid, s.embed, g(kGates[gi].wx),
                      d_embed.data());
      affine_backward(p(kGates[gi].wh), h_prev.data(), d_pre[gi].data(), hid, hid, g(kGates[gi].wh),
                      d_h.data());
      double* db = g(kGates[gi].bias);
      for (std::size_t j = 0; j < hid; ++j) db[j] += d_pre[gi][j];
    }

    // Embed ReLU, dense layer, then back through the convolutional stack.
    for (std::size_t e = 0; e < s.embed; ++e) {
      if (st.embed[e] <= 0.0) d_embed[e] = 0.0;
    }
    std::fill(d_flat.begin(), d_flat.end(), 0.0);
    affine_backward(p(Tensor::EmbedWeight), st.pool2.data(), d_embed.data(), s.embed, s.flat_size(),
                    g(Tensor::EmbedWeight), d_flat.data());
    for (std::size_t e = 0; e < s.embed; ++e) g(Tensor::EmbedBias)[e] += d_embed[e];

    std::fill(d_conv2.begin(), d_conv2.end(), 0.0);
    for (std::size_t k = 0; k < d_flat.size(); ++k) d_conv2[st.pool2_arg[k]] += d_flat[k];
    for (std::size_t k = 0; k < d_conv2.size(); ++k) {
      if (st.conv2[k] <= 0.0) d_conv2[k] = 0.0;
    }
    std::fill(d_pool1.begin(), d_pool1.end(), 0.0);
    conv3x3_backward(st.pool1.data(), s.conv1_filters, h1, w1, p(Tensor::Conv2Weight), s.conv2_filters,
                     d_conv2.data(), g(Tensor::Conv2Weight), g(Tensor::Conv2Bias), d_pool1.data());

    std::fill(d_conv1.begin(), d_conv1.end(), 0.0);
    for (std::size_t k = 0; k < d_pool1.size(); ++k) d_conv1[st.pool1_arg[k]] += d_pool1[k];
    for (std::size_t k = 0; k < d_conv1.size(); ++k) {
      if (st.conv1[k] <= 0.0) d_conv1[k] = 0.0;
    }
    conv3x3_backward(window.frame(t).data(), 1, s.height, s.width, p(Tensor::Conv1Weight), s.conv1_filters,
                     d_conv1.data(), g(Tensor::Conv1Weight), g(Tensor::Conv1Bias), nullptr);
  }
  return grad;
}

}  // namespace sigseg
