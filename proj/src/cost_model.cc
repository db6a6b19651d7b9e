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

#include "esrn/cost_model.h"

#include <string>

namespace esrn {

namespace {

int64_t Mul(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw CostOverflowError("cost arithmetic overflow");
  }
  return r;
}

int64_t Add(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_add_overflow(a, b, &r)) {
    throw CostOverflowError("cost arithmetic overflow");
  }
  return r;
}

void RequirePositive(int64_t v, const char* name) {
  if (v < 1) throw std::invalid_argument(std::string(name) + " must be >= 1");
}

CostReport FromFlops(int64_t params, int64_t flops) {
  return CostReport{params, flops, flops / 2, 0, 0};
}

void Accumulate(CostReport& into, const CostReport& c) {
  into.params = Add(into.params, c.params);
  into.flops = Add(into.flops, c.flops);
  into.multi_adds = into.flops / 2;
}

CostReport ConvCost(int in_ch, int out_ch, int kernel, int64_t pixels) {
  LayerRecord conv{LayerKind::kSpatial, in_ch, out_ch, kernel, 1, 1, 1};
  return FromFlops(conv.Params(), conv.Flops(pixels));
}

}  // namespace

ResolutionSpec ResolutionSpec::Make(int hr_width, int hr_height, int scale) {
  if (hr_width <= 0 || hr_height <= 0 || scale <= 0) {
    throw std::invalid_argument("resolution and scale must be positive");
  }
  if (hr_width % scale != 0 || hr_height % scale != 0) {
    throw std::invalid_argument(
        "HR " + std::to_string(hr_width) + "x" + std::to_string(hr_height) +
        " is not divisible by scale " + std::to_string(scale));
  }
  return ResolutionSpec{hr_width, hr_height, scale};
}

int64_t FlopsRdb(int64_t layers, int64_t kernel, int64_t growth,
                 int64_t pixels) {
  RequirePositive(layers, "layers");
  RequirePositive(kernel, "kernel");
  RequirePositive(growth, "growth");
  RequirePositive(pixels, "pixels");
  // C(C+3) is always even.
  const int64_t bracket = Add(Mul(layers, Mul(kernel, kernel)),
                              Mul(layers, layers + 3) / 2);
  return Mul(Mul(2, Mul(growth, growth)), Mul(pixels, bracket));
}

int64_t FlopsCrdb(int64_t layers, int64_t kernel, int64_t growth,
                  int64_t recursion, int64_t pixels) {
  RequirePositive(layers, "layers");
  RequirePositive(kernel, "kernel");
  RequirePositive(growth, "growth");
  RequirePositive(recursion, "recursion");
  RequirePositive(pixels, "pixels");
  // 2*(a/4 + b/8) = (2a + b)/4 with a = C K^2 R, b = (C+7)(C+1).
  const int64_t numerator =
      Add(Mul(2, Mul(layers, Mul(Mul(kernel, kernel), recursion))),
          Mul(layers + 7, layers + 1));
  const int64_t total = Mul(Mul(growth, growth), Mul(pixels, numerator));
  if (total % 4 != 0) {
    throw std::domain_error("cost formula undefined for this C (C=" +
                            std::to_string(layers) + ")");
  }
  return total / 4;
}

int64_t LayerRecord::Params() const {
  return Mul(Mul(in_ch / groups, out_ch), Mul(kernel, kernel));
}

int64_t LayerRecord::Flops(int64_t pixels) const {
  if (pixels % area_divisor != 0) {
    throw std::invalid_argument("pixel count " + std::to_string(pixels) +
                                " not divisible by " +
                                std::to_string(area_divisor));
  }
  return Mul(Mul(2, Params()), Mul(pixels / area_divisor, recursion));
}

std::vector<LayerRecord> BlockLayerInventory(const BlockGene& gene) {
  const bool contextual = gene.type == BlockType::kContextual;
  const int groups = gene.type == BlockType::kGroup ? kGroupCount : 1;
  const int divisor = contextual ? 4 : 1;
  const int recursion = contextual ? gene.recursion : 1;
  const int g = gene.growth;

  std::vector<LayerRecord> layers;
  for (int i = 1; i <= gene.layers; ++i) {
    layers.push_back({LayerKind::kPointwise, i * g, g, 1, 1, divisor, 1});
    layers.push_back(
        {LayerKind::kSpatial, g, g, kKernelSize, groups, divisor, recursion});
  }
  if (contextual) {
    layers.push_back({LayerKind::kSubpixel, g, 4 * g, 1, 1, 4, 1});
  }
  layers.push_back({LayerKind::kPointwise, gene.layers * g, gene.out, 1, 1, 1, 1});
  return layers;
}

CostReport BlockCost(const BlockGene& gene, int64_t pixels) {
  if (!gene.active) return CostReport{};
  if (gene.type == BlockType::kContextual && pixels % 4 != 0) {
    throw std::invalid_argument(
        "contextual block needs a pixel count divisible by 4");
  }
  CostReport r;
  for (const auto& layer : BlockLayerInventory(gene)) {
    r.params = Add(r.params, layer.Params());
    r.flops = Add(r.flops, layer.Flops(pixels));
  }
  r.multi_adds = r.flops / 2;
  return r;
}

NetworkCostReport NetworkCostOfBlocks(std::span<const BlockGene> blocks,
                                      const ResolutionSpec& res) {
  const int64_t lr = res.lr_pixels();
  const int64_t hr = Mul(lr, Mul(res.scale, res.scale));
  NetworkCostReport r;

  int first_growth = 0;
  int concat_channels = 0;
  for (const auto& b : blocks) {
    CostReport c = BlockCost(b, lr);
    if (b.active) {
      if (first_growth == 0) first_growth = b.growth;
      concat_channels += b.out;
    }
    c.lr_width = res.lr_width();
    c.lr_height = res.lr_height();
    Accumulate(r.total, c);
    r.per_block.push_back(c);
  }

  if (first_growth > 0) {
    r.head = ConvCost(3, first_growth, kKernelSize, lr);
    r.fusion = ConvCost(concat_channels, kFusionChannels, 1, lr);
  }
  // Sub-pixel upsampling (the shuffle itself is free), then a 1x1 conv to RGB
  // at HR. A 3x3 RGB conv at HR would break the flops/params proportionality
  // by over 1% on small networks.
  r.tail = ConvCost(kFusionChannels, kFusionChannels * res.scale * res.scale,
                    kKernelSize, lr);
  Accumulate(r.tail, ConvCost(kFusionChannels, 3, 1, hr));

  Accumulate(r.total, r.head);
  Accumulate(r.total, r.fusion);
  Accumulate(r.total, r.tail);
  for (CostReport* c : {&r.total, &r.head, &r.fusion, &r.tail}) {
    c->lr_width = res.lr_width();
    c->lr_height = res.lr_height();
  }
  return r;
}

NetworkCostReport NetworkCost(const Genome& genome, const ResolutionSpec& res) {
  const ValidationResult v = Validate(genome);
  if (!v.ok()) {
    throw std::invalid_argument("invalid genome: " + v.violations.front());
  }
  if (genome.scale != res.scale) {
    throw std::invalid_argument("genome scale differs from resolution scale");
  }
  return NetworkCostOfBlocks(genome.blocks, res);
}

NetworkCostReport BaselineRdnCost(const ResolutionSpec& res) {
  const BlockGene rdb =
      BlockGene::Make(true, BlockType::kShrink, 6, 32, 32, 1);
  const std::vector<BlockGene> blocks(4, rdb);
  return NetworkCostOfBlocks(blocks, res);
}

nlohmann::json ToJson(const CostReport& report) {
  return {{"params", report.params},
          {"flops", report.flops},
          {"multi_adds", report.multi_adds}};
}

nlohmann::json ToJson(const NetworkCostReport& report,
                      const ResolutionSpec& res) {
  nlohmann::json per_block = nlohmann::json::array();
  for (const auto& c : report.per_block) per_block.push_back(ToJson(c));
  return {{"params", report.total.params},
          {"flops", report.total.flops},
          {"multi_adds", report.total.multi_adds},
          {"hr", {res.hr_width, res.hr_height}},
          {"scale", res.scale},
          {"per_block", std::move(per_block)}};
}

}  // namespace esrn
