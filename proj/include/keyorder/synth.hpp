#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "keyorder/model.hpp"

namespace keyorder {

enum class LemmaOrdering : std::uint8_t { Dependency, Random, None };

struct ChainSpec {
  std::size_t depth = 2;  // even, at least 2
  bool reuse = false;
  LemmaOrdering ordering = LemmaOrdering::Dependency;
  std::uint64_t seed = 0;  // used by LemmaOrdering::Random
};

/// Parses `dep`, `none` or `rand:SEED`. Throws std::invalid_argument.
ChainSpec parse_ordering(std::string_view text, ChainSpec base = {});

/// Key indices 1..depth in the order their secrecy lemmas are emitted.
/// Random uses std::mt19937_64 seeded with `seed` and a Fisher-Yates shuffle
/// drawing `rng() % (i + 1)` for i = depth-1 down to 1.
std::vector<std::size_t> lemma_order(const ChainSpec& spec);

/// Ping-pong key chain: a setup rule shares k0 between roles A and B; the
/// exchange rule for i = 1..depth lets A (odd i) or B (even i) create ~k_i
/// and send it encrypted under k_{i-1}. Throws std::invalid_argument when
/// the depth is odd or below 2.
Model generate_chain_model(const ChainSpec& spec);

}  // namespace keyorder
