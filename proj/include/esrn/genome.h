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

// Block-level search space: one gene per backbone position, a fixed-length
// chromosome of kMaxBlocks genes, and its text / JSON encodings.

#ifndef ESRN_GENOME_H_
#define ESRN_GENOME_H_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace esrn {

class Rng;

inline constexpr int kMaxBlocks = 20;
inline constexpr int kMinActiveBlocks = 5;
inline constexpr std::array<int, 3> kLayerChoices = {4, 6, 8};
inline constexpr std::array<int, 5> kWidthChoices = {16, 24, 32, 48, 64};
inline constexpr std::array<int, 4> kRecursionChoices = {1, 2, 3, 4};
inline constexpr std::array<int, 3> kScaleChoices = {2, 3, 4};

// Shrink, group and contextual residual dense blocks.
enum class BlockType : uint8_t { kShrink = 0, kGroup = 1, kContextual = 2 };

inline constexpr std::array<BlockType, 3> kBlockTypes = {
    BlockType::kShrink, BlockType::kGroup, BlockType::kContextual};

char BlockTypeSymbol(BlockType type);
// Throws std::invalid_argument for anything but 'S', 'G', 'C'.
BlockType ParseBlockType(char symbol);

struct BlockGene {
  bool active = false;
  BlockType type = BlockType::kShrink;
  int layers = 4;
  int growth = 16;
  int out = 16;
  int recursion = 1;

  // Builds a gene with recursion forced to 1 for non-contextual types.
  static BlockGene Make(bool active, BlockType type, int layers, int growth,
                       int out, int recursion);

  bool operator==(const BlockGene&) const = default;
};

struct Genome {
  std::vector<BlockGene> blocks;
  int scale = 2;

  int ActiveCount() const;
  // Chromosome positions of active blocks, ascending.
  std::vector<int> ActivePositions() const;

  bool operator==(const Genome&) const = default;
};

// Index into the flattened space of distinct block architectures. Ordering is
// type-major, then layers, growth, out channels, recursion. S and G blocks
// have no recursion axis: ids [0, 75) are S, [75, 150) G, [150, 450) C.
struct GenotypeId {
  int value = 0;
  bool operator==(const GenotypeId&) const = default;
};

inline constexpr int kNumGenotypes = 2 * (3 * 5 * 5) + 3 * 5 * 5 * 4;

// Throws std::invalid_argument if the gene's fields are outside the grammar.
GenotypeId GenotypeIdOf(const BlockGene& gene);
BlockGene GeneFromGenotype(GenotypeId id, bool active);

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationResult ValidateGene(const BlockGene& gene);
ValidationResult Validate(const Genome& genome);

// Uniform per-field sampling, redrawn until the active-count floor holds.
Genome RandomGenome(uint64_t seed, int scale);
Genome RandomGenome(Rng& rng, int scale);

// Activates uniformly chosen inactive genes until kMinActiveBlocks are active.
void RepairActiveCount(Genome& genome, Rng& rng);

class GenomeParseError : public std::runtime_error {
 public:
  GenomeParseError(int token_index, const std::string& what)
      : std::runtime_error(what), token_index_(token_index) {}
  int token_index() const { return token_index_; }

 private:
  int token_index_;
};

// "<state><type><layers>g<growth>o<out>r<rec>" per block, joined by '-'.
std::string EncodeGene(const BlockGene& gene);
std::string EncodeText(const Genome& genome);
BlockGene DecodeGene(std::string_view token, int token_index = 0);
// The scale is not part of the text form and is supplied by the caller.
Genome DecodeText(std::string_view text, int scale = 2);

nlohmann::json ToJson(const Genome& genome);
// Throws std::invalid_argument on missing or mistyped keys.
Genome GenomeFromJson(const nlohmann::json& j);

}  // namespace esrn

#endif  // ESRN_GENOME_H_
