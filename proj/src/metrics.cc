/* Copyright 2026 The attnshare Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "attnshare/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "attnshare/errors.h"

namespace attnshare {

double mrae(const Tensor& o, const Tensor& o_prime) {
  if (o.shape() != o_prime.shape()) {
    throw DimensionError("mrae: shape " + shape_str(o.shape()) + " vs " +
                         shape_str(o_prime.shape()));
  }
  if (o.size() == 0) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < o.size(); ++i) {
    const double a = o[i], b = o_prime[i];
    const double ratio =
        std::fabs(a - b) / (std::max(std::fabs(a), std::fabs(b)) + kMraeEpsilon);
    sum += std::clamp(ratio, 0.0, kMraeClip);
  }
  return sum / static_cast<double>(o.size());
}

double cosine_similarity(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("cosine_similarity: shape " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw UndefinedSimilarityError("cosine_similarity: zero-norm input");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::string SimilarityMatrix::to_csv() const {
  std::ostringstream os;
  for (size_t c = 0; c < labels.size(); ++c) {
    if (c) os << ",";
    os << labels[c];
  }
  os << "\n";
  char buf[32];
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.6f", at(r, c));
      os << (c ? "," : "") << buf;
    }
    os << "\n";
  }
  return os.str();
}

std::vector<SimilarityMatrix> similarity_report(
    const std::vector<StepTrace>& traces, SimilarityMode mode) {
  if (traces.empty()) throw Error("similarity_report: no traces recorded");
  const size_t layers = traces.front().attention[0].size();
  for (const auto& tr : traces) {
    for (const auto& per_branch : tr.attention) {
      if (per_branch.size() != layers || layers == 0) {
        throw Error("similarity_report: trace for step " +
                    std::to_string(tr.step) + " is incomplete");
      }
    }
  }
  const int steps = static_cast<int>(traces.size());
  std::vector<int> labels;
  for (const auto& tr : traces) labels.push_back(tr.step);
  const int cond = static_cast<int>(Branch::kCond);
  const int uncond = static_cast<int>(Branch::kUncond);

  std::vector<SimilarityMatrix> out;
  for (size_t layer = 0; layer < layers; ++layer) {
    SimilarityMatrix m;
    m.layer = static_cast<int>(layer);
    m.labels = labels;
    m.cols = steps;
    if (mode == SimilarityMode::kStepWise) {
      m.rows = steps;
      m.values.assign(static_cast<size_t>(steps) * steps, 0.0f);
      for (int r = 0; r < steps; ++r) {
        m.values[static_cast<size_t>(r) * steps + r] = 1.0f;
        for (int c = r + 1; c < steps; ++c) {
          const auto v = static_cast<float>(
              cosine_similarity(traces[r].attention[cond][layer],
                                traces[c].attention[cond][layer]));
          m.values[static_cast<size_t>(r) * steps + c] = v;
          m.values[static_cast<size_t>(c) * steps + r] = v;
        }
      }
    } else {
      m.rows = 1;
      for (int c = 0; c < steps; ++c) {
        m.values.push_back(static_cast<float>(
            cosine_similarity(traces[c].attention[cond][layer],
                              traces[c].attention[uncond][layer])));
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace attnshare
