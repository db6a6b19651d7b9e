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

#include "esrn/genome.h"

#include <algorithm>
#include <charconv>
#include <string>

#include "esrn/rng.h"

namespace esrn {

namespace {

template <size_t N>
int IndexIn(const std::array<int, N>& choices, int value) {
  auto it = std::find(choices.begin(), choices.end(), value);
  return it == choices.end() ? -1 : static_cast<int>(it - choices.begin());
}

template <size_t N>
bool Contains(const std::array<int, N>& choices, int value) {
  return IndexIn(choices, value) >= 0;
}

template <size_t N>
int Pick(const std::array<int, N>& choices, Rng& rng) {
  return choices[rng.UniformInt(N)];
}

constexpr int kPerTypeShape = 3 * 5 * 5;

BlockGene RandomGene(Rng& rng) {
  const bool active = rng.UniformInt(2) == 1;
  const BlockType type = kBlockTypes[rng.UniformInt(kBlockTypes.size())];
  const int layers = Pick(kLayerChoices, rng);
  const int growth = Pick(kWidthChoices, rng);
  const int out = Pick(kWidthChoices, rng);
  // Drawn for every gene so the stream position does not depend on type.
  const int recursion = Pick(kRecursionChoices, rng);
  return BlockGene::Make(active, type, layers, growth, out, recursion);
}

// Parses a decimal integer starting at pos and advances pos.
bool ReadInt(std::string_view s, size_t& pos, int& value) {
  const char* first = s.data() + pos;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr == first) return false;
  pos += static_cast<size_t>(ptr - first);
  return true;
}

}  // namespace

char BlockTypeSymbol(BlockType type) {
  switch (type) {
    case BlockType::kShrink:
      return 'S';
    case BlockType::kGroup:
      return 'G';
    case BlockType::kContextual:
      return 'C';
  }
  throw std::invalid_argument("unknown block type");
}

BlockType ParseBlockType(char symbol) {
  switch (symbol) {
    case 'S':
      return BlockType::kShrink;
    case 'G':
      return BlockType::kGroup;
    case 'C':
      return BlockType::kContextual;
    default:
      throw std::invalid_argument(std::string("unknown block type '") +
                                  symbol + "'");
  }
}

BlockGene BlockGene::Make(bool active, BlockType type, int layers, int growth,
                          int out, int recursion) {
  return BlockGene{active, type, layers, growth, out,
                   type == BlockType::kContextual ? recursion : 1};
}

int Genome::ActiveCount() const {
  return static_cast<int>(std::count_if(
      blocks.begin(), blocks.end(), [](const BlockGene& g) { return g.active; }));
}

std::vector<int> Genome::ActivePositions() const {
  std::vector<int> positions;
  for (int i = 0; i < static_cast<int>(blocks.size()); ++i) {
    if (blocks[i].active) positions.push_back(i);
  }
  return positions;
}

GenotypeId GenotypeIdOf(const BlockGene& gene) {
  if (!ValidateGene(gene).ok()) {
    throw std::invalid_argument("genotype id of invalid gene " +
                                EncodeGene(gene));
  }
  const int shape = (IndexIn(kLayerChoices, gene.layers) * 5 +
                     IndexIn(kWidthChoices, gene.growth)) *
                        5 +
                    IndexIn(kWidthChoices, gene.out);
  switch (gene.type) {
    case BlockType::kShrink:
      return {shape};
    case BlockType::kGroup:
      return {kPerTypeShape + shape};
    case BlockType::kContextual:
      return {2 * kPerTypeShape + shape * 4 +
              IndexIn(kRecursionChoices, gene.recursion)};
  }
  throw std::invalid_argument("unknown block type");
}

BlockGene GeneFromGenotype(GenotypeId id, bool active) {
  int v = id.value;
  if (v < 0 || v >= kNumGenotypes) {
    throw std::out_of_range("genotype id " + std::to_string(v) +
                            " outside [0, 450)");
  }
  BlockType type;
  int recursion = 1;
  if (v < kPerTypeShape) {
    type = BlockType::kShrink;
  } else if (v < 2 * kPerTypeShape) {
    type = BlockType::kGroup;
    v -= kPerTypeShape;
  } else {
    type = BlockType::kContextual;
    v -= 2 * kPerTypeShape;
    recursion = kRecursionChoices[v % 4];
    v /= 4;
  }
  const int out = kWidthChoices[v % 5];
  const int growth = kWidthChoices[(v / 5) % 5];
  const int layers = kLayerChoices[v / 25];
  return BlockGene::Make(active, type, layers, growth, out, recursion);
}

ValidationResult ValidateGene(const BlockGene& gene) {
  ValidationResult r;
  const int t = static_cast<int>(gene.type);
  if (t < 0 || t > 2) r.violations.push_back("unknown block type");
  if (!Contains(kLayerChoices, gene.layers)) {
    r.violations.push_back("layers " + std::to_string(gene.layers) +
                           " not in {4,6,8}");
  }
  if (!Contains(kWidthChoices, gene.growth)) {
    r.violations.push_back("growth " + std::to_string(gene.growth) +
                           " not in {16,24,32,48,64}");
  }
  if (!Contains(kWidthChoices, gene.out)) {
    r.violations.push_back("out " + std::to_string(gene.out) +
                           " not in {16,24,32,48,64}");
  }
  if (!Contains(kRecursionChoices, gene.recursion)) {
    r.violations.push_back("recursion " + std::to_string(gene.recursion) +
                           " not in {1,2,3,4}");
  } else if (gene.type != BlockType::kContextual && gene.recursion != 1) {
    r.violations.push_back("recursion>1 on non-contextual block");
  }
  return r;
}

ValidationResult Validate(const Genome& genome) {
  ValidationResult r;
  if (static_cast<int>(genome.blocks.size()) != kMaxBlocks) {
    r.violations.push_back("length " + std::to_string(genome.blocks.size()) +
                           " != 20");
  }
  for (size_t i = 0; i < genome.blocks.size(); ++i) {
    for (auto& v : ValidateGene(genome.blocks[i]).violations) {
      r.violations.push_back("block " + std::to_string(i) + ": " + v);
    }
  }
  const int active = genome.ActiveCount();
  if (active < kMinActiveBlocks) {
    r.violations.push_back("active blocks " + std::to_string(active) +
                           " < 5");
  }
  if (!Contains(kScaleChoices, genome.scale)) {
    r.violations.push_back("scale " + std::to_string(genome.scale) +
                           " not in {2,3,4}");
  }
  return r;
}

Genome RandomGenome(uint64_t seed, int scale) {
  Rng rng(seed);
  return RandomGenome(rng, scale);
}

Genome RandomGenome(Rng& rng, int scale) {
  if (!Contains(kScaleChoices, scale)) {
    throw std::invalid_argument("scale must be one of {2,3,4}");
  }
  Genome g;
  g.scale = scale;
  do {
    g.blocks.clear();
    for (int i = 0; i < kMaxBlocks; ++i) g.blocks.push_back(RandomGene(rng));
  } while (g.ActiveCount() < kMinActiveBlocks);
  return g;
}

void RepairActiveCount(Genome& genome, Rng& rng) {
  while (genome.ActiveCount() < kMinActiveBlocks) {
    std::vector<int> inactive;
    for (int i = 0; i < static_cast<int>(genome.blocks.size()); ++i) {
      if (!genome.blocks[i].active) inactive.push_back(i);
    }
    if (inactive.empty()) return;
    genome.blocks[inactive[rng.UniformInt(inactive.size())]].active = true;
  }
}

std::string EncodeGene(const BlockGene& gene) {
  std::string s;
  s += gene.active ? '1' : '0';
  s += BlockTypeSymbol(gene.type);
  s += std::to_string(gene.layers);
  s += 'g';
  s += std::to_string(gene.growth);
  s += 'o';
  s += std::to_string(gene.out);
  s += 'r';
  s += std::to_string(gene.recursion);
  return s;
}

std::string EncodeText(const Genome& genome) {
  std::string s;
  for (size_t i = 0; i < genome.blocks.size(); ++i) {
    if (i > 0) s += '-';
    s += EncodeGene(genome.blocks[i]);
  }
  return s;
}

BlockGene DecodeGene(std::string_view token, int token_index) {
  auto fail = [&](const std::string& why) {
    return GenomeParseError(token_index, "token " + std::to_string(token_index) +
                                             " '" + std::string(token) +
                                             "': " + why);
  };
  if (token.size() < 2) throw fail("too short");
  BlockGene gene;
  if (token[0] == '1') {
    gene.active = true;
  } else if (token[0] != '0') {
    throw fail("state must be 0 or 1");
  }
  try {
    gene.type = ParseBlockType(token[1]);
  } catch (const std::invalid_argument& e) {
    throw fail(e.what());
  }
  size_t pos = 2;
  auto field = [&](char tag, int& value) {
    if (tag != '\0') {
      if (pos >= token.size() || token[pos] != tag) {
        throw fail(std::string("expected '") + tag + "'");
      }
      ++pos;
    }
    if (!ReadInt(token, pos, value)) throw fail("expected integer");
  };
  field('\0', gene.layers);
  field('g', gene.growth);
  field('o', gene.out);
  field('r', gene.recursion);
  if (pos != token.size()) throw fail("trailing characters");
  return gene;
}

Genome DecodeText(std::string_view text, int scale) {
  Genome g;
  g.scale = scale;
  int index = 0;
  size_t start = 0;
  while (true) {
    const size_t dash = text.find('-', start);
    const std::string_view token =
        text.substr(start, dash == std::string_view::npos ? std::string_view::npos
                                                          : dash - start);
    g.blocks.push_back(DecodeGene(token, index));
    if (dash == std::string_view::npos) break;
    start = dash + 1;
    ++index;
  }
  return g;
}

nlohmann::json ToJson(const Genome& genome) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : genome.blocks) {
    blocks.push_back({{"state", b.active},
                      {"type", std::string(1, BlockTypeSymbol(b.type))},
                      {"layers", b.layers},
                      {"growth", b.growth},
                      {"out", b.out},
                      {"rec", b.recursion}});
  }
  return {{"scale", genome.scale}, {"blocks", std::move(blocks)}};
}

Genome GenomeFromJson(const nlohmann::json& j) {
  try {
    Genome g;
    g.scale = j.at("scale").get<int>();
    for (const auto& b : j.at("blocks")) {
      const std::string type = b.at("type").get<std::string>();
      if (type.size() != 1) throw std::invalid_argument("bad block type");
      BlockGene gene;
      gene.active = b.at("state").get<bool>();
      gene.type = ParseBlockType(type[0]);
      gene.layers = b.at("layers").get<int>();
      gene.growth = b.at("growth").get<int>();
      gene.out = b.at("out").get<int>();
      gene.recursion = b.at("rec").get<int>();
      g.blocks.push_back(gene);
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("genome json: ") + e.what());
  }
}

}  // namespace esrn
