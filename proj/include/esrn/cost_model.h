// Copyright 2026 The ESRN Search Authors.
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

// Analytical parameter / FLOPs accounting for the backbone blocks and the
// full network. Everything is exact integer arithmetic; overflow throws.
//
// Conventions:
//   * one multiply-add = 2 FLOPs, multi_adds = flops / 2;
//   * bias terms are not counted;
//   * feature maps live at LR resolution (hr / scale); only the final 1x1
//     RGB conv after the sub-pixel upsampler runs at HR;
//   * group convolutions use kGroupCount groups;
//   * contextual blocks run their dense layers at a quarter of the pixel
//     count (2x2 average pooling) and restore it with a sub-pixel conv.

#ifndef ESRN_COST_MODEL_H_
#define ESRN_COST_MODEL_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "esrn/genome.h"
#include "json.hpp"

namespace esrn {

inline constexpr int kKernelSize = 3;
inline constexpr int kGroupCount = 4;
inline constexpr int kFusionChannels = 64;

class CostOverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

struct CostReport {
  int64_t params = 0;
  int64_t flops = 0;
  int64_t multi_adds = 0;
  int lr_width = 0;
  int lr_height = 0;

  bool operator==(const CostReport&) const = default;
};

struct ResolutionSpec {
  int hr_width = 1280;
  int hr_height = 720;
  int scale = 2;

  // Throws std::invalid_argument unless both HR dims divide by scale.
  static ResolutionSpec Make(int hr_width, int hr_height, int scale);

  int lr_width() const { return hr_width / scale; }
  int lr_height() const { return hr_height / scale; }
  int64_t lr_pixels() const {
    return static_cast<int64_t>(lr_width()) * lr_height();
  }
};

// 2 * G^2 * S2 * (C*K^2 + C(C+3)/2): a dense block with 1x1 squeezes whose
// input/output width equals the growth rate.
int64_t FlopsRdb(int64_t layers, int64_t kernel, int64_t growth,
                 int64_t pixels);

// 2 * G^2 * S2 * (C*K^2*R/4 + (C+7)(C+1)/8). Throws std::domain_error when
// the result is not integral.
int64_t FlopsCrdb(int64_t layers, int64_t kernel, int64_t growth,
                  int64_t recursion, int64_t pixels);

enum class LayerKind { kPointwise, kSpatial, kSubpixel };

struct LayerRecord {
  LayerKind kind = LayerKind::kPointwise;
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 1;
  int groups = 1;
  // Pixel-count divisor relative to the block input: 1, or 4 after pooling.
  int area_divisor = 1;
  // Times the (weight-shared) layer is applied.
  int recursion = 1;

  int64_t Params() const;
  // pixels is the block-input pixel count; must divide by area_divisor.
  int64_t Flops(int64_t pixels) const;
};

std::vector<LayerRecord> BlockLayerInventory(const BlockGene& gene);

// Inactive genes cost nothing. Contextual genes require pixels % 4 == 0.
CostReport BlockCost(const BlockGene& gene, int64_t pixels);

struct NetworkCostReport {
  CostReport total;
  CostReport head;
  CostReport fusion;
  CostReport tail;
  // One entry per chromosome position; inactive positions are zero.
  std::vector<CostReport> per_block;
};

NetworkCostReport NetworkCost(const Genome& genome, const ResolutionSpec& res);

// Same accounting for an arbitrary list of active blocks; skips the genome
// grammar checks (used for hand-built reference configurations).
NetworkCostReport NetworkCostOfBlocks(std::span<const BlockGene> blocks,
                                      const ResolutionSpec& res);

// Four S-blocks with six 32-channel layers: the light RDN baseline layout.
NetworkCostReport BaselineRdnCost(const ResolutionSpec& res);

nlohmann::json ToJson(const CostReport& report);
nlohmann::json ToJson(const NetworkCostReport& report,
                      const ResolutionSpec& res);

}  // namespace esrn

#endif  // ESRN_COST_MODEL_H_
