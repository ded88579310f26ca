#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "renn/tensor.hpp"

namespace renn {

struct Sentence {
  std::vector<std::string> tokens;
  std::string intent;
  std::vector<std::string> slots;  // BIO tags, one per token
};

enum class SplitTag { train, test, few_shot, partial_few_shot };

struct Dataset {
  std::vector<Sentence> sentences;
  std::vector<std::string> intent_labels;  // sorted, unique
  std::vector<std::string> slot_labels;    // sorted, unique, includes "O"
  SplitTag split_tag = SplitTag::train;
};

// One selected subset of a training set, with enough bookkeeping to
// reproduce it exactly.
struct Split {
  Dataset data;
  std::vector<std::size_t> selected_ids;  // indices into the source dataset
  std::size_t k = 0;
  std::uint64_t seed = 0;
};

// File format: one block per sentence of "token<TAB>slot" lines followed by
// "#intent<TAB>label"; blocks separated by blank lines.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

// Whitespace split, lower-cased, possessive "'s" split off as its own token.
std::vector<std::string> tokenize(const std::string& raw);

// Per intent with at least k instances, selects exactly k (all otherwise).
// Selections for smaller k are prefixes of those for larger k under the same
// seed.
Split few_shot_split_intent(const Dataset& ds, std::size_t k, std::uint64_t seed);

// Walks slot labels from rarest to most frequent, topping each label up to at
// least k mentions. Built incrementally over shot counts so that the k1-shot
// selection contains the k2-shot selection for k1 > k2 under the same seed.
Split few_shot_split_slot(const Dataset& ds, std::size_t k, std::uint64_t seed);

// The 3 most frequent intents get up to 300 instances, the rest follow the
// k-shot rule.
Split partial_few_shot_intent(const Dataset& ds, std::size_t k, std::uint64_t seed);

void save_split_manifest(const Split& split, const std::string& path);

struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<std::string> words;
  std::unordered_map<std::string, std::size_t> index;
  Tensor matrix;  // [vocab x dim]
  std::vector<bool> from_file;

  std::size_t id(const std::string& word) const;
};

// Text format: "word v1 ... vd" per line. Words in `vocab` missing from the
// file get a deterministic per-word uniform(-0.25, 0.25) vector derived from
// (word, seed). An empty path or empty file yields an all-random table (with
// a warning on stderr).
EmbeddingTable load_embeddings(const std::string& path,
                               const std::vector<std::string>& vocab,
                               std::uint64_t seed, std::size_t fallback_dim = 100);

}  // namespace renn
