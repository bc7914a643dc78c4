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

#ifndef SPOOFKIT_MODEL_HPP_
#define SPOOFKIT_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "spoofkit/dataset.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/spectral.hpp"

namespace spoofkit {

// Two 3x3 valid convolution blocks (8 then 16 channels, ReLU, 2x2 max-pool),
// global average pool, dense 16->128 with ReLU and dropout, dense 128->1
// with sigmoid. Inputs are standardized per mel band with dataset-level
// statistics held in the model (input_mean/input_std). All math is double
// precision; checkpoints store 32-bit floats.
class DetectorModel {
 public:
  static constexpr int kConv1Channels = 8;
  static constexpr int kConv2Channels = 16;
  static constexpr int kKernel = 3;
  static constexpr int kEmbedDim = 128;

  int in_rows = 0;
  int in_cols = 0;

  std::vector<double> conv1_w;  // [8][1][3][3]
  std::vector<double> conv1_b;  // [8]
  std::vector<double> conv2_w;  // [16][8][3][3]
  std::vector<double> conv2_b;  // [16]
  std::vector<double> fc1_w;    // [128][16]
  std::vector<double> fc1_b;    // [128]
  std::vector<double> fc2_w;    // [1][128]
  std::vector<double> fc2_b;    // [1]
  std::vector<double> input_mean;  // [in_rows], not trainable
  std::vector<double> input_std;   // [in_rows], not trainable

  // Gaussian init scaled by fan-in, zero biases, identity input stats.
  static DetectorModel init(std::uint64_t seed, int in_rows = 128, int in_cols = 94);

  // Per-mel-band mean/std over every frame of the view's examples.
  void set_input_stats(const TaskView& view);

  // Derived layer sizes (valid convolutions, floor-halving pools).
  int conv1_out_rows() const { return in_rows - 2; }
  int conv1_out_cols() const { return in_cols - 2; }
  int pool1_rows() const { return conv1_out_rows() / 2; }
  int pool1_cols() const { return conv1_out_cols() / 2; }
  int conv2_out_rows() const { return pool1_rows() - 2; }
  int conv2_out_cols() const { return pool1_cols() - 2; }
  int pool2_rows() const { return conv2_out_rows() / 2; }
  int pool2_cols() const { return conv2_out_cols() / 2; }
};

// Clamped binary cross-entropy, eps = 1e-7.
double bce_loss(double p, int y);

struct ForwardTrace {
  std::vector<double> xs;    // standardized input
  std::vector<double> a1;    // conv1 post-ReLU
  std::vector<int> arg1;     // pool1 argmax (flat per-channel-plane index)
  std::vector<double> p1;    // pool1 output
  std::vector<double> a2;    // conv2 post-ReLU
  std::vector<int> arg2;     // pool2 argmax
  std::vector<double> p2;    // pool2 output
  std::vector<double> gap;   // [16]
  std::vector<double> h;     // dense-128 post-ReLU (the embedding)
  std::vector<double> mask;  // dropout multipliers, all 1 in eval mode
  std::vector<double> hd;    // h after dropout
  double p = 0.0;            // sigmoid output
};

// Runs the network. In train mode, dropout draws kEmbedDim uniforms from
// rng; eval mode is deterministic and touches no rng. Throws
// ValidationError on a shape mismatch.
double forward(const DetectorModel& m, const MelSpectrogram& x, bool train_mode,
               double dropout_p, Rng* rng, ForwardTrace& trace);

struct Gradients {
  std::vector<double> conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b;

  void zero_like(const DetectorModel& m);
  void scale(double s);
};

// Accumulates exact analytic gradients for d(loss)/d(logit) = dlogit.
void backward(const DetectorModel& m, const ForwardTrace& trace, double dlogit, Gradients& acc);

// Mean clamped BCE over the batch plus 0.5 * l2 * sum of squared weights
// (biases excluded), evaluated without dropout. This is the scalar the
// finite-difference checks differentiate.
double batch_loss(const DetectorModel& m, const TaskView& batch, double l2);

// Analytic gradients of batch_loss.
Gradients batch_gradients(const DetectorModel& m, const TaskView& batch, double l2);

// Eval-mode probability / dense-128 embedding.
double predict(const DetectorModel& m, const MelSpectrogram& x);
std::vector<double> embed(const DetectorModel& m, const MelSpectrogram& x);

struct TrainConfig {
  int epochs = 50;
  double lr0 = 1e-3;
  double decay_factor = 0.5;  // applied every decay_every epochs
  int decay_every = 10;
  double l2 = 1e-4;
  double dropout_p = 0.5;
  int batch = 16;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

enum class Freeze {
  none,          // all parameter tensors trainable
  extractor,     // conv blocks frozen, head trains
  all_but_last,  // only the final dense layer trains
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
};

double lr_at_epoch(const TrainConfig& cfg, int epoch);

// SGD with momentum over shuffled mini-batches. Frozen tensors are byte
// identical before and after. With freeze == extractor the (constant)
// convolutional features are computed once per example, which is
// mathematically identical to running the full network every step.
std::vector<EpochStats> train_stage(DetectorModel& m, const TaskView& view,
                                    const TrainConfig& cfg, Freeze freeze);

enum class Stage { baseline, adm, final_stage };

struct ProtocolHooks {
  std::function<void(Stage, const DetectorModel&)> on_stage_start;
  std::function<void(Stage, const DetectorModel&)> on_stage_end;
};

struct ProtocolResult {
  DetectorModel baseline;
  DetectorModel adm;
  DetectorModel final_model;
  std::vector<EpochStats> baseline_history;
  std::vector<EpochStats> adm_history;
  std::vector<EpochStats> final_history;
};

// Stage 1: real-vs-fake, nothing frozen. Stage 2: copy of the baseline with
// the feature extractor frozen, trained on fake-vs-artifact. Stage 3: starts
// from the stage-2 weights, nothing frozen, real-vs-fake again.
ProtocolResult run_protocol(const TaskView& main_train, const TaskView& adm_train,
                            const TrainConfig& cfg, const ProtocolHooks& hooks = {});

// SPFW checkpoint: magic "SPFW", u32 version=1, u32 tensor count, then per
// tensor (u32 name length, name, u32 ndim, u32 dims..., f32 data
// little-endian). Tensor order is fixed, so identical models serialize to
// identical bytes.
std::vector<std::uint8_t> serialize_model(const DetectorModel& m);
DetectorModel deserialize_model(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const DetectorModel& m, const std::filesystem::path& path);
DetectorModel load_checkpoint(const std::filesystem::path& path);

// Serialized bytes of the convolutional tensors only, for staging checks.
std::vector<std::uint8_t> extractor_bytes(const DetectorModel& m);

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::filesystem::path& path);

}  // namespace spoofkit

#endif  // SPOOFKIT_MODEL_HPP_
