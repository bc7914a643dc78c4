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

#ifndef SPOOFKIT_TESTS_GRADCHECK_UTIL_HPP_
#define SPOOFKIT_TESTS_GRADCHECK_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "spoofkit/model.hpp"
#include "spoofkit/rng.hpp"

namespace spoofkit::testing {

struct GradTensorView {
  const char* name;
  std::vector<double> DetectorModel::* values;
  std::vector<double> Gradients::* grads;
};

inline constexpr GradTensorView kGradTensors[] = {
    {"conv1_w", &DetectorModel::conv1_w, &Gradients::conv1_w},
    {"conv1_b", &DetectorModel::conv1_b, &Gradients::conv1_b},
    {"conv2_w", &DetectorModel::conv2_w, &Gradients::conv2_w},
    {"conv2_b", &DetectorModel::conv2_b, &Gradients::conv2_b},
    {"fc1_w", &DetectorModel::fc1_w, &Gradients::fc1_w},
    {"fc1_b", &DetectorModel::fc1_b, &Gradients::fc1_b},
    {"fc2_w", &DetectorModel::fc2_w, &Gradients::fc2_w},
    {"fc2_b", &DetectorModel::fc2_b, &Gradients::fc2_b},
};

// ReLU masks and pool argmaxes across the batch. The loss is differentiable
// in a weight-space neighborhood exactly while this pattern is constant, so
// matching signatures at w+h and w-h certify that the central difference is
// estimating a derivative rather than straddling a kink.
inline std::vector<int> activation_signature(const DetectorModel& m, const TaskView& batch) {
  std::vector<int> sig;
  ForwardTrace t;
  for (const auto& ex : batch) {
    forward(m, ex.features, false, 0.0, nullptr, t);
    for (double v : t.a1) sig.push_back(v > 0.0);
    for (int a : t.arg1) sig.push_back(a);
    for (double v : t.a2) sig.push_back(v > 0.0);
    for (int a : t.arg2) sig.push_back(a);
    for (double v : t.h) sig.push_back(v > 0.0);
  }
  return sig;
}

struct GradCheckResult {
  double worst_rel = 0.0;
  int checked = 0;
  int skipped_kinks = 0;
};

// Central difference (step h, 64-bit) against batch_gradients, sampling
// coords from every tensor. Coordinates whose +/-h evaluations land in
// different activation regions are skipped and resampled.
inline GradCheckResult gradient_check(DetectorModel& model, const TaskView& batch, Rng& rng,
                                      double h = 1e-3, int coords_per_tensor = 6) {
  const double l2 = 1e-4;
  const Gradients analytic = batch_gradients(model, batch, l2);
  GradCheckResult result;
  for (const auto& tv : kGradTensors) {
    auto& values = model.*(tv.values);
    const auto& grads = analytic.*(tv.grads);
    int taken = 0;
    int attempts = 0;
    const int max_attempts = coords_per_tensor * 60;
    while (taken < coords_per_tensor && attempts < max_attempts) {
      ++attempts;
      const std::size_t i = rng.uniform_int(values.size());
      const double keep = values[i];
      values[i] = keep + h;
      const auto sig_up = activation_signature(model, batch);
      const double up = batch_loss(model, batch, l2);
      values[i] = keep - h;
      const auto sig_down = activation_signature(model, batch);
      const double down = batch_loss(model, batch, l2);
      values[i] = keep;
      if (sig_up != sig_down) {
        ++result.skipped_kinks;
        continue;
      }
      const double fd = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(grads[i]), 1e-6});
      result.worst_rel = std::max(result.worst_rel, std::abs(fd - grads[i]) / denom);
      ++taken;
      ++result.checked;
    }
  }
  return result;
}

}  // namespace spoofkit::testing

#endif  // SPOOFKIT_TESTS_GRADCHECK_UTIL_HPP_
