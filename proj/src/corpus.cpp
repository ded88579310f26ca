#include "renn/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace renn {

namespace {

bool valid_bio_tag(const std::string& tag) {
  if (tag == "O") return true;
  return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

bool valid_bio_transition(const std::string& prev, const std::string& cur) {
  if (cur.empty() || cur[0] != 'I') return true;
  std::string type = cur.substr(2);
  return (prev.size() > 2 && prev.substr(2) == type &&
          (prev[0] == 'B' || prev[0] == 'I'));
}

std::string bare_slot_label(const std::string& tag) {
  return tag.size() > 2 && tag[1] == '-' ? tag.substr(2) : tag;
}

void collect_labels(Dataset& ds) {
  std::set<std::string> intents, slots;
  for (const auto& s : ds.sentences) {
    intents.insert(s.intent);
    for (const auto& t : s.slots) slots.insert(t);
  }
  ds.intent_labels.assign(intents.begin(), intents.end());
  ds.slot_labels.assign(slots.begin(), slots.end());
}

Split make_split(const Dataset& ds, std::vector<std::size_t> ids, std::size_t k,
                 std::uint64_t seed, SplitTag tag) {
  std::sort(ids.begin(), ids.end());
  Split out;
  out.selected_ids = std::move(ids);
  out.k = k;
  out.seed = seed;
  out.data.split_tag = tag;
  // Label sets stay those of the source so the model's output space does not
  // shrink with the selection.
  out.data.intent_labels = ds.intent_labels;
  out.data.slot_labels = ds.slot_labels;
  for (std::size_t id : out.selected_ids) out.data.sentences.push_back(ds.sentences[id]);
  return out;
}

// Per-class permutations drawn from one seeded stream, classes visited in
// sorted label order. Prefixes are therefore independent of k.
std::map<std::string, std::vector<std::size_t>> class_permutations(
    const Dataset& ds, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.sentences.size(); ++i)
    by_class[ds.sentences[i].intent].push_back(i);
  std::mt19937_64 rng(seed);
  for (auto& [label, ids] : by_class) shuffle_vec(ids, rng);
  return by_class;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset: " + path);
  Dataset ds;
  Sentence cur;
  std::string line;
  std::size_t lineno = 0;
  bool in_block = false;
  auto fail = [&](const std::string& msg) {
    throw Error(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  auto flush = [&]() {
    if (!in_block) return;
    fail("sentence block without an #intent line");
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) fail("expected token<TAB>slot or #intent<TAB>label");
    std::string left = line.substr(0, tab);
    std::string right = line.substr(tab + 1);
    if (left == "#intent") {
      if (!in_block || cur.tokens.empty()) fail("#intent before any token line");
      if (right.empty()) fail("empty intent label");
      cur.intent = right;
      ds.sentences.push_back(std::move(cur));
      cur = Sentence{};
      in_block = false;
      continue;
    }
    if (left.empty()) fail("empty token");
    if (right.empty()) fail("missing slot tag");
    if (!valid_bio_tag(right)) fail("bad slot tag '" + right + "'");
    std::string prev = cur.slots.empty() ? std::string("O") : cur.slots.back();
    if (!valid_bio_transition(prev, right))
      fail("invalid BIO transition " + prev + " -> " + right);
    cur.tokens.push_back(left);
    cur.slots.push_back(right);
    in_block = true;
  }
  flush();
  collect_labels(ds);
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset: " + path);
  for (const auto& s : ds.sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i)
      out << s.tokens[i] << "\t" << s.slots[i] << "\n";
    out << "#intent\t" << s.intent << "\n\n";
  }
}

std::vector<std::string> tokenize(const std::string& raw) {
  std::vector<std::string> out;
  std::istringstream iss(raw);
  std::string tok;
  while (iss >> tok) {
    for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (tok.size() > 2 && tok.compare(tok.size() - 2, 2, "'s") == 0) {
      out.push_back(tok.substr(0, tok.size() - 2));
      out.push_back("'s");
    } else {
      out.push_back(tok);
    }
  }
  return out;
}

Split few_shot_split_intent(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error("few_shot_split_intent: k must be >= 1");
  auto by_class = class_permutations(ds, seed);
  std::vector<std::size_t> ids;
  for (const auto& [label, perm] : by_class) {
    std::size_t take = std::min(k, perm.size());
    ids.insert(ids.end(), perm.begin(), perm.begin() + static_cast<long>(take));
  }
  return make_split(ds, std::move(ids), k, seed, SplitTag::few_shot);
}

Split few_shot_split_slot(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error("few_shot_split_slot: k must be >= 1");

  // Mentions of a label = tokens carrying B-<label>.
  auto mentions_in = [](const Sentence& s, const std::string& label) {
    std::size_t n = 0;
    for (const auto& t : s.slots)
      if (t.size() > 2 && t[0] == 'B' && t.substr(2) == label) ++n;
    return n;
  };

  std::map<std::string, std::size_t> freq;
  for (const auto& s : ds.sentences)
    for (const auto& t : s.slots)
      if (t.size() > 2 && t[0] == 'B') ++freq[bare_slot_label(t)];

  // Rarest first, ties by label.
  std::vector<std::string> order;
  for (const auto& [label, n] : freq) order.push_back(label);
  std::stable_sort(order.begin(), order.end(),
                   [&](const std::string& a, const std::string& b) {
                     if (freq[a] != freq[b]) return freq[a] < freq[b];
                     return a < b;
                   });

  std::map<std::string, std::vector<std::size_t>> candidates;
  for (const std::string& label : order) {
    std::vector<std::size_t>& c = candidates[label];
    for (std::size_t i = 0; i < ds.sentences.size(); ++i)
      if (mentions_in(ds.sentences[i], label) > 0) c.push_back(i);
  }
  std::mt19937_64 rng(seed);
  for (const std::string& label : order) shuffle_vec(candidates[label], rng);

  std::set<std::size_t> selected;
  std::map<std::string, std::size_t> counts;
  std::map<std::string, std::size_t> cursor;
  auto add_sentence = [&](std::size_t id) {
    if (!selected.insert(id).second) return;
    for (const auto& t : ds.sentences[id].slots)
      if (t.size() > 2 && t[0] == 'B') ++counts[bare_slot_label(t)];
  };
  // Grow shot targets one at a time so any smaller-k selection is a subset.
  for (std::size_t target = 1; target <= k; ++target) {
    for (const std::string& label : order) {
      const auto& perm = candidates[label];
      std::size_t& cur = cursor[label];
      while (counts[label] < target && cur < perm.size()) {
        add_sentence(perm[cur]);
        ++cur;
      }
    }
  }
  return make_split(ds, {selected.begin(), selected.end()}, k, seed, SplitTag::few_shot);
}

Split partial_few_shot_intent(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error("partial_few_shot_intent: k must be >= 1");
  auto by_class = class_permutations(ds, seed);
  std::vector<std::pair<std::string, std::size_t>> sizes;
  for (const auto& [label, perm] : by_class) sizes.emplace_back(label, perm.size());
  std::stable_sort(sizes.begin(), sizes.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::set<std::string> top;
  for (std::size_t i = 0; i < sizes.size() && i < 3; ++i) top.insert(sizes[i].first);

  std::vector<std::size_t> ids;
  for (const auto& [label, perm] : by_class) {
    std::size_t take = std::min(top.count(label) ? std::size_t{300} : k, perm.size());
    ids.insert(ids.end(), perm.begin(), perm.begin() + static_cast<long>(take));
  }
  return make_split(ds, std::move(ids), k, seed, SplitTag::partial_few_shot);
}

void save_split_manifest(const Split& split, const std::string& path) {
  nlohmann::json j;
  j["k"] = split.k;
  j["seed"] = split.seed;
  j["selected_sentence_ids"] = split.selected_ids;
  std::ofstream out(path);
  if (!out) throw Error("cannot write split manifest: " + path);
  out << j.dump(2) << "\n";
}

std::size_t EmbeddingTable::id(const std::string& word) const {
  auto it = index.find(word);
  if (it == index.end()) throw Error("word not in embedding table: " + word);
  return it->second;
}

EmbeddingTable load_embeddings(const std::string& path,
                               const std::vector<std::string>& vocab,
                               std::uint64_t seed, std::size_t fallback_dim) {
  EmbeddingTable table;
  for (const auto& w : vocab) {
    if (table.index.count(w)) continue;
    table.index.emplace(w, table.words.size());
    table.words.push_back(w);
  }

  std::unordered_map<std::string, std::vector<double>> file_vecs;
  std::size_t dim = 0;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embedding file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream iss(line);
      std::string word;
      iss >> word;
      std::vector<double> vec;
      double x;
      while (iss >> x) vec.push_back(x);
      if (vec.empty())
        throw Error(path + ":" + std::to_string(lineno) + ": no vector values");
      if (dim == 0)
        dim = vec.size();
      else if (vec.size() != dim)
        throw Error(path + ":" + std::to_string(lineno) + ": dimension " +
                    std::to_string(vec.size()) + " != " + std::to_string(dim));
      if (table.index.count(word)) file_vecs.emplace(word, std::move(vec));
    }
  }
  if (dim == 0) {
    dim = fallback_dim;
    std::cerr << "warning: no pre-trained vectors loaded"
              << (path.empty() ? "" : " from " + path)
              << "; all words get random vectors\n";
  }

  table.dim = dim;
  table.matrix = Tensor({table.words.size(), dim});
  table.from_file.assign(table.words.size(), false);
  for (std::size_t i = 0; i < table.words.size(); ++i) {
    auto it = file_vecs.find(table.words[i]);
    if (it != file_vecs.end()) {
      std::copy(it->second.begin(), it->second.end(),
                table.matrix.v.begin() + static_cast<long>(i * dim));
      table.from_file[i] = true;
    } else {
      // Vector depends only on (word, seed), not on vocab order.
      std::mt19937_64 rng(fnv1a64(table.words[i]) ^ seed);
      for (std::size_t d = 0; d < dim; ++d)
        table.matrix.v[i * dim + d] = rand_uniform(rng, -0.25, 0.25);
    }
  }
  return table;
}

}  // namespace renn
