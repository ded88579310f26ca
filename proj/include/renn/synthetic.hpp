#pragma once

#include <cstdint>
#include <string>

#include "renn/corpus.hpp"
#include "renn/rule_engine.hpp"

namespace renn {

// Everything one run of the generator writes, plus the in-memory datasets.
struct SyntheticCorpus {
  Dataset train, test;
  std::string train_path, test_path;
  std::string intent_rule_path;       // intent rules with clue groups
  std::string slot_simple_rule_path;  // simplified tags + target label expansion
  std::string slot_full_rule_path;    // full slot labels as tags, with clue groups
  std::string macro_path;
};

// Template-grammar corpus over four intents and six slot labels; the city
// word list is shared across three target slot labels. Rules span simple
// (1-2 group) and complex (3+ group) tiers, with deliberately incomplete
// template coverage. Output is byte-identical for a fixed seed.
SyntheticCorpus generate_synthetic(std::uint64_t seed, const std::string& out_dir);

}  // namespace renn
