// Copyright 2026 The SpoofKit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spoofkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "spoofkit/errors.hpp"

namespace spoofkit {

namespace {

constexpr double kBceEps = 1e-7;
constexpr int kK = DetectorModel::kKernel;
constexpr int kC1 = DetectorModel::kConv1Channels;
constexpr int kC2 = DetectorModel::kConv2Channels;
constexpr int kEmbed = DetectorModel::kEmbedDim;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// out[r][c] += w * in[r+dr][c+dc] over an out_rows x out_cols plane.
inline void accumulate_shifted(double* out, const double* in, int in_cols, int out_rows,
                               int out_cols, int dr, int dc, double w) {
  for (int r = 0; r < out_rows; ++r) {
    const double* src = in + (r + dr) * in_cols + dc;
    double* dst = out + r * out_cols;
    for (int c = 0; c < out_cols; ++c) dst[c] += w * src[c];
  }
}

// sum over the plane of gout[r][c] * in[r+dr][c+dc].
inline double dot_shifted(const double* gout, const double* in, int in_cols, int out_rows,
                          int out_cols, int dr, int dc) {
  double acc = 0.0;
  for (int r = 0; r < out_rows; ++r) {
    const double* src = in + (r + dr) * in_cols + dc;
    const double* g = gout + r * out_cols;
    for (int c = 0; c < out_cols; ++c) acc += g[c] * src[c];
  }
  return acc;
}

// in[r+dr][c+dc] += w * gout[r][c] (transpose of accumulate_shifted).
inline void scatter_shifted(double* in, const double* gout, int in_cols, int out_rows,
                            int out_cols, int dr, int dc, double w) {
  for (int r = 0; r < out_rows; ++r) {
    double* dst = in + (r + dr) * in_cols + dc;
    const double* g = gout + r * out_cols;
    for (int c = 0; c < out_cols; ++c) dst[c] += w * g[c];
  }
}

void maxpool2(const double* in, int rows, int cols, double* out, int* argmax) {
  const int orows = rows / 2;
  const int ocols = cols / 2;
  for (int i = 0; i < orows; ++i) {
    for (int j = 0; j < ocols; ++j) {
      const int r0 = 2 * i, c0 = 2 * j;
      int best = r0 * cols + c0;
      double v = in[best];
      const int cand[3] = {r0 * cols + c0 + 1, (r0 + 1) * cols + c0, (r0 + 1) * cols + c0 + 1};
      for (int idx : cand) {
        if (in[idx] > v) {
          v = in[idx];
          best = idx;
        }
      }
      out[i * ocols + j] = v;
      argmax[i * ocols + j] = best;
    }
  }
}

struct ParamRef {
  const char* name;
  std::vector<double>* values;
  std::vector<double> Gradients::* grad;
  bool weight;     // L2-regularized
  bool extractor;  // frozen under Freeze::extractor
  bool last;       // trainable under Freeze::all_but_last
};

std::vector<ParamRef> param_refs(DetectorModel& m) {
  return {
      {"conv1_w", &m.conv1_w, &Gradients::conv1_w, true, true, false},
      {"conv1_b", &m.conv1_b, &Gradients::conv1_b, false, true, false},
      {"conv2_w", &m.conv2_w, &Gradients::conv2_w, true, true, false},
      {"conv2_b", &m.conv2_b, &Gradients::conv2_b, false, true, false},
      {"fc1_w", &m.fc1_w, &Gradients::fc1_w, true, false, false},
      {"fc1_b", &m.fc1_b, &Gradients::fc1_b, false, false, false},
      {"fc2_w", &m.fc2_w, &Gradients::fc2_w, true, false, true},
      {"fc2_b", &m.fc2_b, &Gradients::fc2_b, false, false, true},
  };
}

bool trainable(const ParamRef& p, Freeze freeze) {
  switch (freeze) {
    case Freeze::none: return true;
    case Freeze::extractor: return !p.extractor;
    case Freeze::all_but_last: return p.last;
  }
  return false;
}

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

void put_f32le(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  put_u32le(out, bits);
}

void put_tensor(std::vector<std::uint8_t>& out, const std::string& name,
                const std::vector<std::size_t>& dims, const std::vector<double>& data) {
  put_u32le(out, static_cast<std::uint32_t>(name.size()));
  out.insert(out.end(), name.begin(), name.end());
  put_u32le(out, static_cast<std::uint32_t>(dims.size()));
  for (std::size_t d : dims) put_u32le(out, static_cast<std::uint32_t>(d));
  for (double v : data) put_f32le(out, static_cast<float>(v));
}

struct TensorReader {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  std::uint32_t u32() {
    if (pos + 4 > bytes.size()) throw ParseError("checkpoint: truncated");
    const std::uint32_t v = static_cast<std::uint32_t>(bytes[pos]) |
                            (static_cast<std::uint32_t>(bytes[pos + 1]) << 8) |
                            (static_cast<std::uint32_t>(bytes[pos + 2]) << 16) |
                            (static_cast<std::uint32_t>(bytes[pos + 3]) << 24);
    pos += 4;
    return v;
  }

  std::string str(std::size_t len) {
    if (pos + len > bytes.size()) throw ParseError("checkpoint: truncated");
    std::string s(reinterpret_cast<const char*>(bytes.data() + pos), len);
    pos += len;
    return s;
  }

  float f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
  }
};

constexpr std::uint64_t kStageSalt[3] = {0x5354414745303031ULL, 0x5354414745303032ULL,
                                         0x5354414745303033ULL};

}  // namespace

DetectorModel DetectorModel::init(std::uint64_t seed, int in_rows, int in_cols) {
  DetectorModel m;
  m.in_rows = in_rows;
  m.in_cols = in_cols;
  if (m.pool2_rows() < 1 || m.pool2_cols() < 1) {
    throw ValidationError("DetectorModel: input too small for the architecture");
  }

  Rng rng(Rng::splitmix(seed ^ 0x4D4F44454C494E49ULL));
  auto fill = [&](std::vector<double>& v, std::size_t n, double stddev) {
    v.resize(n);
    for (auto& x : v) x = stddev * rng.gaussian();
  };

  fill(m.conv1_w, static_cast<std::size_t>(kC1) * kK * kK, std::sqrt(2.0 / (kK * kK)));
  m.conv1_b.assign(kC1, 0.0);
  fill(m.conv2_w, static_cast<std::size_t>(kC2) * kC1 * kK * kK,
       std::sqrt(2.0 / (kC1 * kK * kK)));
  m.conv2_b.assign(kC2, 0.0);
  fill(m.fc1_w, static_cast<std::size_t>(kEmbed) * kC2, std::sqrt(2.0 / kC2));
  m.fc1_b.assign(kEmbed, 0.0);
  fill(m.fc2_w, kEmbed, std::sqrt(1.0 / kEmbed));
  m.fc2_b.assign(1, 0.0);
  m.input_mean.assign(static_cast<std::size_t>(in_rows), 0.0);
  m.input_std.assign(static_cast<std::size_t>(in_rows), 1.0);
  return m;
}

void DetectorModel::set_input_stats(const TaskView& view) {
  if (view.empty()) throw ValidationError("set_input_stats: empty view");
  std::vector<double> sum(static_cast<std::size_t>(in_rows), 0.0);
  std::vector<double> sumsq(static_cast<std::size_t>(in_rows), 0.0);
  std::size_t count = 0;
  for (const auto& ex : view) {
    if (ex.features.n_mels != in_rows || ex.features.n_frames != in_cols) {
      throw ValidationError("set_input_stats: feature shape mismatch for " + ex.file_id);
    }
    for (int r = 0; r < in_rows; ++r) {
      for (int c = 0; c < in_cols; ++c) {
        const double v = ex.features.at(r, c);
        sum[static_cast<std::size_t>(r)] += v;
        sumsq[static_cast<std::size_t>(r)] += v * v;
      }
    }
    count += static_cast<std::size_t>(in_cols);
  }
  for (int r = 0; r < in_rows; ++r) {
    const double mean = sum[static_cast<std::size_t>(r)] / static_cast<double>(count);
    const double var = sumsq[static_cast<std::size_t>(r)] / static_cast<double>(count) -
                       mean * mean;
    input_mean[static_cast<std::size_t>(r)] = mean;
    input_std[static_cast<std::size_t>(r)] = std::max(std::sqrt(std::max(var, 0.0)), 1e-6);
  }
}

double bce_loss(double p, int y) {
  const double ph = std::clamp(p, kBceEps, 1.0 - kBceEps);
  return -(y == 1 ? std::log(ph) : std::log(1.0 - ph));
}

namespace {

// Extractor half: standardized input through both conv blocks to the
// 16-dim global average pool.
void extractor_forward(const DetectorModel& m, const MelSpectrogram& x, ForwardTrace& t) {
  const int R = m.in_rows, C = m.in_cols;
  const int R1 = m.conv1_out_rows(), C1 = m.conv1_out_cols();
  const int H1 = m.pool1_rows(), W1 = m.pool1_cols();
  const int R2 = m.conv2_out_rows(), C2 = m.conv2_out_cols();
  const int H2 = m.pool2_rows(), W2 = m.pool2_cols();

  t.xs.resize(static_cast<std::size_t>(R) * C);
  for (int r = 0; r < R; ++r) {
    const double mean = m.input_mean[static_cast<std::size_t>(r)];
    const double inv = 1.0 / m.input_std[static_cast<std::size_t>(r)];
    for (int c = 0; c < C; ++c) {
      t.xs[static_cast<std::size_t>(r) * C + c] =
          (static_cast<double>(x.at(r, c)) - mean) * inv;
    }
  }

  t.a1.assign(static_cast<std::size_t>(kC1) * R1 * C1, 0.0);
  for (int oc = 0; oc < kC1; ++oc) {
    double* plane = t.a1.data() + static_cast<std::size_t>(oc) * R1 * C1;
    const double bias = m.conv1_b[static_cast<std::size_t>(oc)];
    for (int i = 0; i < R1 * C1; ++i) plane[i] = bias;
    const double* w = m.conv1_w.data() + static_cast<std::size_t>(oc) * kK * kK;
    for (int dr = 0; dr < kK; ++dr) {
      for (int dc = 0; dc < kK; ++dc) {
        accumulate_shifted(plane, t.xs.data(), C, R1, C1, dr, dc, w[dr * kK + dc]);
      }
    }
    for (int i = 0; i < R1 * C1; ++i) plane[i] = std::max(plane[i], 0.0);
  }

  t.p1.resize(static_cast<std::size_t>(kC1) * H1 * W1);
  t.arg1.resize(t.p1.size());
  for (int ch = 0; ch < kC1; ++ch) {
    maxpool2(t.a1.data() + static_cast<std::size_t>(ch) * R1 * C1, R1, C1,
             t.p1.data() + static_cast<std::size_t>(ch) * H1 * W1,
             t.arg1.data() + static_cast<std::size_t>(ch) * H1 * W1);
  }

  t.a2.assign(static_cast<std::size_t>(kC2) * R2 * C2, 0.0);
  for (int oc = 0; oc < kC2; ++oc) {
    double* plane = t.a2.data() + static_cast<std::size_t>(oc) * R2 * C2;
    const double bias = m.conv2_b[static_cast<std::size_t>(oc)];
    for (int i = 0; i < R2 * C2; ++i) plane[i] = bias;
    for (int ic = 0; ic < kC1; ++ic) {
      const double* in = t.p1.data() + static_cast<std::size_t>(ic) * H1 * W1;
      const double* w =
          m.conv2_w.data() + (static_cast<std::size_t>(oc) * kC1 + ic) * kK * kK;
      for (int dr = 0; dr < kK; ++dr) {
        for (int dc = 0; dc < kK; ++dc) {
          accumulate_shifted(plane, in, W1, R2, C2, dr, dc, w[dr * kK + dc]);
        }
      }
    }
    for (int i = 0; i < R2 * C2; ++i) plane[i] = std::max(plane[i], 0.0);
  }

  t.p2.resize(static_cast<std::size_t>(kC2) * H2 * W2);
  t.arg2.resize(t.p2.size());
  for (int ch = 0; ch < kC2; ++ch) {
    maxpool2(t.a2.data() + static_cast<std::size_t>(ch) * R2 * C2, R2, C2,
             t.p2.data() + static_cast<std::size_t>(ch) * H2 * W2,
             t.arg2.data() + static_cast<std::size_t>(ch) * H2 * W2);
  }

  t.gap.assign(kC2, 0.0);
  const double inv_area = 1.0 / (H2 * W2);
  for (int ch = 0; ch < kC2; ++ch) {
    const double* plane = t.p2.data() + static_cast<std::size_t>(ch) * H2 * W2;
    double acc = 0.0;
    for (int i = 0; i < H2 * W2; ++i) acc += plane[i];
    t.gap[static_cast<std::size_t>(ch)] = acc * inv_area;
  }
}

// Head half: GAP vector through dense-128 (ReLU, dropout) and the sigmoid
// output. Kept separate so frozen-extractor training can reuse cached GAPs.
double head_forward(const DetectorModel& m, const std::vector<double>& gap, bool train_mode,
                    double dropout_p, Rng* rng, ForwardTrace& t) {
  if (&t.gap != &gap) t.gap = gap;  // cached-GAP path hands in a foreign vector
  t.h.resize(kEmbed);
  for (int j = 0; j < kEmbed; ++j) {
    const double* w = m.fc1_w.data() + static_cast<std::size_t>(j) * kC2;
    double acc = m.fc1_b[static_cast<std::size_t>(j)];
    for (int c = 0; c < kC2; ++c) acc += w[c] * gap[static_cast<std::size_t>(c)];
    t.h[static_cast<std::size_t>(j)] = std::max(acc, 0.0);
  }

  t.mask.assign(kEmbed, 1.0);
  if (train_mode && dropout_p > 0.0) {
    if (rng == nullptr) throw ValidationError("forward: train mode needs an rng");
    const double keep_scale = 1.0 / (1.0 - dropout_p);
    for (int j = 0; j < kEmbed; ++j) {
      t.mask[static_cast<std::size_t>(j)] = rng->next_double() < dropout_p ? 0.0 : keep_scale;
    }
  }
  t.hd.resize(kEmbed);
  for (int j = 0; j < kEmbed; ++j) {
    t.hd[static_cast<std::size_t>(j)] =
        t.h[static_cast<std::size_t>(j)] * t.mask[static_cast<std::size_t>(j)];
  }

  double z = m.fc2_b[0];
  for (int j = 0; j < kEmbed; ++j) z += m.fc2_w[static_cast<std::size_t>(j)] * t.hd[static_cast<std::size_t>(j)];
  t.p = sigmoid(z);
  return t.p;
}

// Head backward; returns d(loss)/d(gap) in dgap when non-null.
void head_backward(const DetectorModel& m, const ForwardTrace& t, double dlogit, Gradients& g,
                   std::vector<double>* dgap) {
  std::vector<double> du(kEmbed);
  for (int j = 0; j < kEmbed; ++j) {
    g.fc2_w[static_cast<std::size_t>(j)] += dlogit * t.hd[static_cast<std::size_t>(j)];
    const double dhd = m.fc2_w[static_cast<std::size_t>(j)] * dlogit;
    const double dh = dhd * t.mask[static_cast<std::size_t>(j)];
    du[static_cast<std::size_t>(j)] = t.h[static_cast<std::size_t>(j)] > 0.0 ? dh : 0.0;
  }
  g.fc2_b[0] += dlogit;

  if (dgap) dgap->assign(kC2, 0.0);
  for (int j = 0; j < kEmbed; ++j) {
    const double duj = du[static_cast<std::size_t>(j)];
    if (duj == 0.0) continue;
    const double* w = m.fc1_w.data() + static_cast<std::size_t>(j) * kC2;
    double* gw = g.fc1_w.data() + static_cast<std::size_t>(j) * kC2;
    for (int c = 0; c < kC2; ++c) {
      gw[c] += duj * t.gap[static_cast<std::size_t>(c)];
      if (dgap) (*dgap)[static_cast<std::size_t>(c)] += w[c] * duj;
    }
    g.fc1_b[static_cast<std::size_t>(j)] += duj;
  }
}

void extractor_backward(const DetectorModel& m, const ForwardTrace& t,
                        const std::vector<double>& dgap, Gradients& g) {
  const int C = m.in_cols;
  const int R1 = m.conv1_out_rows(), C1 = m.conv1_out_cols();
  const int H1 = m.pool1_rows(), W1 = m.pool1_cols();
  const int R2 = m.conv2_out_rows(), C2 = m.conv2_out_cols();
  const int H2 = m.pool2_rows(), W2 = m.pool2_cols();
  const double inv_area = 1.0 / (H2 * W2);

  // GAP -> unpool2 -> ReLU mask gives dz2 directly (sparse at pool argmaxes).
  std::vector<double> dz2(static_cast<std::size_t>(kC2) * R2 * C2, 0.0);
  for (int ch = 0; ch < kC2; ++ch) {
    const double dval = dgap[static_cast<std::size_t>(ch)] * inv_area;
    if (dval == 0.0) continue;
    const double* a2 = t.a2.data() + static_cast<std::size_t>(ch) * R2 * C2;
    double* dz = dz2.data() + static_cast<std::size_t>(ch) * R2 * C2;
    const int* arg = t.arg2.data() + static_cast<std::size_t>(ch) * H2 * W2;
    for (int i = 0; i < H2 * W2; ++i) {
      const int idx = arg[i];
      if (a2[idx] > 0.0) dz[idx] += dval;
    }
  }

  // conv2 backward: weight/bias grads plus the gradient into pool1.
  std::vector<double> dp1(static_cast<std::size_t>(kC1) * H1 * W1, 0.0);
  for (int oc = 0; oc < kC2; ++oc) {
    const double* dz = dz2.data() + static_cast<std::size_t>(oc) * R2 * C2;
    double bacc = 0.0;
    for (int i = 0; i < R2 * C2; ++i) bacc += dz[i];
    g.conv2_b[static_cast<std::size_t>(oc)] += bacc;
    for (int ic = 0; ic < kC1; ++ic) {
      const double* in = t.p1.data() + static_cast<std::size_t>(ic) * H1 * W1;
      double* din = dp1.data() + static_cast<std::size_t>(ic) * H1 * W1;
      double* gw = g.conv2_w.data() + (static_cast<std::size_t>(oc) * kC1 + ic) * kK * kK;
      const double* w = m.conv2_w.data() + (static_cast<std::size_t>(oc) * kC1 + ic) * kK * kK;
      for (int dr = 0; dr < kK; ++dr) {
        for (int dc = 0; dc < kK; ++dc) {
          gw[dr * kK + dc] += dot_shifted(dz, in, W1, R2, C2, dr, dc);
          scatter_shifted(din, dz, W1, R2, C2, dr, dc, w[dr * kK + dc]);
        }
      }
    }
  }

  // unpool1 + ReLU mask -> dz1; conv1 weight/bias grads (no input gradient
  // needed below the first layer).
  std::vector<double> dz1(static_cast<std::size_t>(kC1) * R1 * C1, 0.0);
  for (int ch = 0; ch < kC1; ++ch) {
    const double* a1 = t.a1.data() + static_cast<std::size_t>(ch) * R1 * C1;
    const double* dp = dp1.data() + static_cast<std::size_t>(ch) * H1 * W1;
    double* dz = dz1.data() + static_cast<std::size_t>(ch) * R1 * C1;
    const int* arg = t.arg1.data() + static_cast<std::size_t>(ch) * H1 * W1;
    for (int i = 0; i < H1 * W1; ++i) {
      const int idx = arg[i];
      if (a1[idx] > 0.0) dz[idx] += dp[i];
    }
  }
  for (int oc = 0; oc < kC1; ++oc) {
    const double* dz = dz1.data() + static_cast<std::size_t>(oc) * R1 * C1;
    double bacc = 0.0;
    for (int i = 0; i < R1 * C1; ++i) bacc += dz[i];
    g.conv1_b[static_cast<std::size_t>(oc)] += bacc;
    double* gw = g.conv1_w.data() + static_cast<std::size_t>(oc) * kK * kK;
    for (int dr = 0; dr < kK; ++dr) {
      for (int dc = 0; dc < kK; ++dc) {
        gw[dr * kK + dc] += dot_shifted(dz, t.xs.data(), C, R1, C1, dr, dc);
      }
    }
  }
}

}  // namespace

double forward(const DetectorModel& m, const MelSpectrogram& x, bool train_mode,
               double dropout_p, Rng* rng, ForwardTrace& trace) {
  if (x.n_mels != m.in_rows || x.n_frames != m.in_cols) {
    throw ValidationError("forward: input shape " + std::to_string(x.n_mels) + "x" +
                          std::to_string(x.n_frames) + " does not match model " +
                          std::to_string(m.in_rows) + "x" + std::to_string(m.in_cols));
  }
  extractor_forward(m, x, trace);
  return head_forward(m, trace.gap, train_mode, dropout_p, rng, trace);
}

void Gradients::zero_like(const DetectorModel& m) {
  conv1_w.assign(m.conv1_w.size(), 0.0);
  conv1_b.assign(m.conv1_b.size(), 0.0);
  conv2_w.assign(m.conv2_w.size(), 0.0);
  conv2_b.assign(m.conv2_b.size(), 0.0);
  fc1_w.assign(m.fc1_w.size(), 0.0);
  fc1_b.assign(m.fc1_b.size(), 0.0);
  fc2_w.assign(m.fc2_w.size(), 0.0);
  fc2_b.assign(m.fc2_b.size(), 0.0);
}

void Gradients::scale(double s) {
  for (auto* v : {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b}) {
    for (double& x : *v) x *= s;
  }
}

void backward(const DetectorModel& m, const ForwardTrace& trace, double dlogit, Gradients& acc) {
  std::vector<double> dgap;
  head_backward(m, trace, dlogit, acc, &dgap);
  extractor_backward(m, trace, dgap, acc);
}

double batch_loss(const DetectorModel& m, const TaskView& batch, double l2) {
  if (batch.empty()) throw ValidationError("batch_loss: empty batch");
  double acc = 0.0;
  ForwardTrace trace;
  for (const auto& ex : batch) {
    const double p = forward(m, ex.features, false, 0.0, nullptr, trace);
    acc += bce_loss(p, ex.label);
  }
  double penalty = 0.0;
  for (const auto* w : {&m.conv1_w, &m.conv2_w, &m.fc1_w, &m.fc2_w}) {
    for (double v : *w) penalty += v * v;
  }
  return acc / static_cast<double>(batch.size()) + 0.5 * l2 * penalty;
}

Gradients batch_gradients(const DetectorModel& m, const TaskView& batch, double l2) {
  if (batch.empty()) throw ValidationError("batch_gradients: empty batch");
  Gradients g;
  g.zero_like(m);
  ForwardTrace trace;
  for (const auto& ex : batch) {
    const double p = forward(m, ex.features, false, 0.0, nullptr, trace);
    double dlogit = 0.0;
    if (p > kBceEps && p < 1.0 - kBceEps) dlogit = p - static_cast<double>(ex.label);
    backward(m, trace, dlogit, g);
  }
  g.scale(1.0 / static_cast<double>(batch.size()));
  const std::vector<double>* weights[] = {&m.conv1_w, &m.conv2_w, &m.fc1_w, &m.fc2_w};
  std::vector<double>* wgrads[] = {&g.conv1_w, &g.conv2_w, &g.fc1_w, &g.fc2_w};
  for (int t = 0; t < 4; ++t) {
    for (std::size_t i = 0; i < weights[t]->size(); ++i) {
      (*wgrads[t])[i] += l2 * (*weights[t])[i];
    }
  }
  return g;
}

double predict(const DetectorModel& m, const MelSpectrogram& x) {
  ForwardTrace trace;
  return forward(m, x, false, 0.0, nullptr, trace);
}

std::vector<double> embed(const DetectorModel& m, const MelSpectrogram& x) {
  ForwardTrace trace;
  forward(m, x, false, 0.0, nullptr, trace);
  return trace.h;
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
  return cfg.lr0 * std::pow(cfg.decay_factor, epoch / cfg.decay_every);
}

std::vector<EpochStats> train_stage(DetectorModel& m, const TaskView& view,
                                    const TrainConfig& cfg, Freeze freeze) {
  if (view.empty()) throw ValidationError("train_stage: empty view");
  if (cfg.epochs < 1 || cfg.batch < 1 || cfg.lr0 <= 0.0 || cfg.decay_every < 1) {
    throw ValidationError("train_stage: bad config");
  }
  if (cfg.dropout_p < 0.0 || cfg.dropout_p >= 1.0) {
    throw ValidationError("train_stage: dropout must be in [0, 1)");
  }
  for (const auto& ex : view) {
    if (ex.features.n_mels != m.in_rows || ex.features.n_frames != m.in_cols) {
      throw ValidationError("train_stage: feature shape mismatch for " + ex.file_id);
    }
  }

  Rng rng(Rng::splitmix(cfg.seed ^ 0x545241494E494E47ULL));

  // Frozen extractor means every example's GAP vector is constant across the
  // stage; compute them once and train the head on those.
  const bool head_only = freeze == Freeze::extractor;
  std::vector<std::vector<double>> cached_gap;
  if (head_only) {
    cached_gap.resize(view.size());
    ForwardTrace t;
    for (std::size_t i = 0; i < view.size(); ++i) {
      extractor_forward(m, view[i].features, t);
      cached_gap[i] = t.gap;
    }
  }

  Gradients grads, velocity;
  grads.zero_like(m);
  velocity.zero_like(m);
  const auto refs = param_refs(m);

  std::vector<std::size_t> order(view.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<EpochStats> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  ForwardTrace trace;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg, epoch);
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = rng.uniform_int(i);
      std::swap(order[i - 1], order[j]);
    }

    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      const auto batch_n = static_cast<double>(stop - start);

      grads.zero_like(m);
      double batch_bce = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const auto& ex = view[order[k]];
        double p;
        if (head_only) {
          p = head_forward(m, cached_gap[order[k]], true, cfg.dropout_p, &rng, trace);
        } else {
          p = forward(m, ex.features, true, cfg.dropout_p, &rng, trace);
        }
        batch_bce += bce_loss(p, ex.label);
        double dlogit = 0.0;
        if (p > kBceEps && p < 1.0 - kBceEps) dlogit = p - static_cast<double>(ex.label);
        if (head_only) {
          head_backward(m, trace, dlogit, grads, nullptr);
        } else {
          backward(m, trace, dlogit, grads);
        }
      }
      grads.scale(1.0 / batch_n);

      double penalty = 0.0;
      for (const auto& ref : refs) {
        if (!ref.weight) continue;
        auto& grad = grads.*(ref.grad);
        const auto& w = *ref.values;
        for (std::size_t i = 0; i < w.size(); ++i) {
          grad[i] += cfg.l2 * w[i];
          penalty += w[i] * w[i];
        }
      }
      epoch_loss += batch_bce / batch_n + 0.5 * cfg.l2 * penalty;
      ++n_batches;

      for (const auto& ref : refs) {
        if (!trainable(ref, freeze)) continue;
        auto& vel = velocity.*(ref.grad);
        auto& grad = grads.*(ref.grad);
        auto& w = *ref.values;
        for (std::size_t i = 0; i < w.size(); ++i) {
          vel[i] = cfg.momentum * vel[i] - lr * grad[i];
          w[i] += vel[i];
        }
      }
    }

    history.push_back(EpochStats{epoch, epoch_loss / static_cast<double>(n_batches), lr});
  }
  return history;
}

ProtocolResult run_protocol(const TaskView& main_train, const TaskView& adm_train,
                            const TrainConfig& cfg, const ProtocolHooks& hooks) {
  if (main_train.empty() || adm_train.empty()) {
    throw ValidationError("run_protocol: both task views must be non-empty");
  }

  ProtocolResult result;
  const int rows = main_train.front().features.n_mels;
  const int cols = main_train.front().features.n_frames;

  DetectorModel model = DetectorModel::init(cfg.seed, rows, cols);
  model.set_input_stats(main_train);

  TrainConfig stage_cfg = cfg;

  stage_cfg.seed = Rng::splitmix(cfg.seed ^ kStageSalt[0]);
  if (hooks.on_stage_start) hooks.on_stage_start(Stage::baseline, model);
  result.baseline_history = train_stage(model, main_train, stage_cfg, Freeze::none);
  result.baseline = model;
  if (hooks.on_stage_end) hooks.on_stage_end(Stage::baseline, model);

  stage_cfg.seed = Rng::splitmix(cfg.seed ^ kStageSalt[1]);
  if (hooks.on_stage_start) hooks.on_stage_start(Stage::adm, model);
  result.adm_history = train_stage(model, adm_train, stage_cfg, Freeze::extractor);
  result.adm = model;
  if (hooks.on_stage_end) hooks.on_stage_end(Stage::adm, model);

  stage_cfg.seed = Rng::splitmix(cfg.seed ^ kStageSalt[2]);
  if (hooks.on_stage_start) hooks.on_stage_start(Stage::final_stage, model);
  result.final_history = train_stage(model, main_train, stage_cfg, Freeze::none);
  result.final_model = model;
  if (hooks.on_stage_end) hooks.on_stage_end(Stage::final_stage, model);

  return result;
}

std::vector<std::uint8_t> serialize_model(const DetectorModel& m) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'S', 'P', 'F', 'W'});
  put_u32le(out, 1);
  put_u32le(out, 11);

  const auto rows = static_cast<std::size_t>(m.in_rows);
  put_tensor(out, "input_shape", {2},
             {static_cast<double>(m.in_rows), static_cast<double>(m.in_cols)});
  put_tensor(out, "input_mean", {rows}, m.input_mean);
  put_tensor(out, "input_std", {rows}, m.input_std);
  put_tensor(out, "conv1_w", {kC1, 1, kK, kK}, m.conv1_w);
  put_tensor(out, "conv1_b", {kC1}, m.conv1_b);
  put_tensor(out, "conv2_w", {kC2, kC1, kK, kK}, m.conv2_w);
  put_tensor(out, "conv2_b", {kC2}, m.conv2_b);
  put_tensor(out, "fc1_w", {kEmbed, kC2}, m.fc1_w);
  put_tensor(out, "fc1_b", {kEmbed}, m.fc1_b);
  put_tensor(out, "fc2_w", {1, kEmbed}, m.fc2_w);
  put_tensor(out, "fc2_b", {1}, m.fc2_b);
  return out;
}

std::vector<std::uint8_t> extractor_bytes(const DetectorModel& m) {
  std::vector<std::uint8_t> out;
  put_tensor(out, "conv1_w", {kC1, 1, kK, kK}, m.conv1_w);
  put_tensor(out, "conv1_b", {kC1}, m.conv1_b);
  put_tensor(out, "conv2_w", {kC2, kC1, kK, kK}, m.conv2_w);
  put_tensor(out, "conv2_b", {kC2}, m.conv2_b);
  return out;
}

DetectorModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "SPFW", 4) != 0) {
    throw FormatError("checkpoint: bad magic");
  }
  TensorReader r{bytes, 4};
  const std::uint32_t version = r.u32();
  if (version != 1) throw FormatError("checkpoint: unsupported version");
  const std::uint32_t n_tensors = r.u32();

  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<double>>> table;
  for (std::uint32_t t = 0; t < n_tensors; ++t) {
    const std::uint32_t name_len = r.u32();
    const std::string name = r.str(name_len);
    const std::uint32_t ndim = r.u32();
    std::vector<std::size_t> dims;
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      dims.push_back(r.u32());
      total *= dims.back();
    }
    std::vector<double> data(total);
    for (auto& v : data) v = static_cast<double>(r.f32());
    table[name] = {std::move(dims), std::move(data)};
  }

  auto need = [&](const char* name) -> std::vector<double>& {
    auto it = table.find(name);
    if (it == table.end()) {
      throw ParseError(std::string("checkpoint: missing tensor '") + name + "'");
    }
    return it->second.second;
  };

  const auto& shape = need("input_shape");
  if (shape.size() != 2) throw ParseError("checkpoint: bad input_shape");
  DetectorModel m;
  m.in_rows = static_cast<int>(shape[0]);
  m.in_cols = static_cast<int>(shape[1]);
  if (m.in_rows < 8 || m.in_cols < 8) throw ParseError("checkpoint: bad input dimensions");

  m.input_mean = need("input_mean");
  m.input_std = need("input_std");
  m.conv1_w = need("conv1_w");
  m.conv1_b = need("conv1_b");
  m.conv2_w = need("conv2_w");
  m.conv2_b = need("conv2_b");
  m.fc1_w = need("fc1_w");
  m.fc1_b = need("fc1_b");
  m.fc2_w = need("fc2_w");
  m.fc2_b = need("fc2_b");

  const DetectorModel ref = DetectorModel::init(0, m.in_rows, m.in_cols);
  if (m.input_mean.size() != ref.input_mean.size() || m.input_std.size() != ref.input_std.size() ||
      m.conv1_w.size() != ref.conv1_w.size() || m.conv1_b.size() != ref.conv1_b.size() ||
      m.conv2_w.size() != ref.conv2_w.size() || m.conv2_b.size() != ref.conv2_b.size() ||
      m.fc1_w.size() != ref.fc1_w.size() || m.fc1_b.size() != ref.fc1_b.size() ||
      m.fc2_w.size() != ref.fc2_w.size() || m.fc2_b.size() != ref.fc2_b.size()) {
    throw ParseError("checkpoint: tensor sizes do not match the architecture");
  }
  return m;
}

void save_checkpoint(const DetectorModel& m, const std::filesystem::path& path) {
  const auto bytes = serialize_model(m);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("save_checkpoint: cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("save_checkpoint: write failed: " + path.string());
}

DetectorModel load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInputError("load_checkpoint: no such file: " + path.string());
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_checkpoint: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("write_history_csv: cannot open for writing: " + path.string());
  f << "epoch,loss,lr\n";
  f.precision(17);
  for (const auto& e : history) f << e.epoch << ',' << e.loss << ',' << e.lr << '\n';
  if (!f) throw IoError("write_history_csv: write failed: " + path.string());
}

}  // namespace spoofkit
