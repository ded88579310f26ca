#include "renn/synthetic.hpp"

#include <filesystem>
#include <map>
#include <set>

namespace renn {

namespace {

struct Item {
  std::string lit;   // literal text (tokenized on emission)
  std::string list;  // macro name when a placeholder
  std::string slot;  // slot label for placeholder tokens ("" -> O)
};

Item lit(std::string text) { return {std::move(text), "", ""}; }
Item ph(std::string list, std::string slot) { return {"", std::move(list), std::move(slot)}; }

struct Template {
  std::string intent;
  std::vector<Item> items;
  std::vector<std::vector<Item>> tails;  // one picked per sentence; may be empty
};

MacroTable make_macros() {
  return {
      {"__CITY",
       {"boston", "miami", "denver", "chicago", "seattle", "atlanta", "portland",
        "dallas", "new york", "los angeles", "tucson", "memphis"}},
      {"__AIRLINE", {"delta", "united", "continental", "lufthansa", "klm", "northwest"}},
      {"__MEAL", {"breakfast", "lunch", "dinner", "snack"}},
      {"__DAY",
       {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"}},
  };
}

std::vector<Template> make_templates() {
  std::vector<std::vector<Item>> flight_tails = {
      {},
      {lit("on"), ph("__DAY", "day.name")},
      {lit("with a stop in"), ph("__CITY", "stoploc.city")},
  };
  std::vector<Template> ts;
  // flight
  ts.push_back({"flight",
                {lit("show me the flights from"), ph("__CITY", "fromloc.city"),
                 lit("to"), ph("__CITY", "toloc.city")},
                flight_tails});
  ts.push_back({"flight",
                {lit("list all flights from"), ph("__CITY", "fromloc.city"), lit("to"),
                 ph("__CITY", "toloc.city")},
                flight_tails});
  ts.push_back({"flight",
                {lit("i need a flight from"), ph("__CITY", "fromloc.city"), lit("to"),
                 ph("__CITY", "toloc.city")},
                flight_tails});
  ts.push_back({"flight",
                {lit("what flights leave"), ph("__CITY", "fromloc.city"), lit("for"),
                 ph("__CITY", "toloc.city")},
                {{}}});
  ts.push_back({"flight",
                {lit("are there any flights to"), ph("__CITY", "toloc.city"), lit("on"),
                 ph("__DAY", "day.name")},
                {{}}});
  // airline
  ts.push_back({"airline",
                {lit("which airlines fly from"), ph("__CITY", "fromloc.city"), lit("to"),
                 ph("__CITY", "toloc.city")},
                {{}}});
  ts.push_back({"airline", {lit("what airline is"), ph("__AIRLINE", "airline.name")}, {{}}});
  ts.push_back({"airline",
                {lit("list the"), ph("__AIRLINE", "airline.name"), lit("flights to"),
                 ph("__CITY", "toloc.city")},
                {{}}});
  ts.push_back({"airline",
                {lit("show me the airlines serving"), ph("__CITY", "toloc.city")},
                {{}}});
  ts.push_back({"airline",
                {lit("what is"), ph("__AIRLINE", "airline.name"), lit("'s hub city")},
                {{}}});
  // meal
  ts.push_back({"meal",
                {lit("do you serve"), ph("__MEAL", "meal.type"),
                 lit("on the flight from"), ph("__CITY", "fromloc.city"), lit("to"),
                 ph("__CITY", "toloc.city")},
                {{}}});
  ts.push_back({"meal",
                {lit("is"), ph("__MEAL", "meal.type"), lit("served on the flight to"),
                 ph("__CITY", "toloc.city")},
                {{}}});
  ts.push_back({"meal",
                {lit("are there"), ph("__MEAL", "meal.type"), lit("options on the"),
                 ph("__DAY", "day.name"), lit("flight")},
                {{}}});
  ts.push_back({"meal",
                {lit("tell me about the"), ph("__MEAL", "meal.type"), lit("on the"),
                 ph("__AIRLINE", "airline.name"), lit("flight")},
                {{}}});
  ts.push_back({"meal", {lit("what meals does"), ph("__AIRLINE", "airline.name"), lit("offer")}, {{}}});
  // ground
  ts.push_back({"ground",
                {lit("what ground transportation is available in"),
                 ph("__CITY", "toloc.city")},
                {{}}});
  ts.push_back({"ground",
                {lit("how do i get from the airport to downtown"),
                 ph("__CITY", "toloc.city")},
                {{}}});
  ts.push_back({"ground",
                {lit("show me ground transport options in"), ph("__CITY", "toloc.city")},
                {{}}});
  ts.push_back({"ground", {lit("i need a rental car in"), ph("__CITY", "toloc.city")}, {{}}});
  ts.push_back({"ground",
                {lit("is there a shuttle to downtown"), ph("__CITY", "toloc.city")},
                {{}}});
  return ts;
}

std::vector<RuleSpec> make_intent_rules() {
  auto rule = [](std::string id, std::string pattern, std::string retag,
                 std::vector<std::size_t> clues) {
    RuleSpec r;
    r.id = std::move(id);
    r.scope = RuleScope::intent;
    r.pattern = std::move(pattern);
    r.retag = std::move(retag);
    r.clue_groups = std::move(clues);
    r.target_labels = {r.retag};
    return r;
  };
  return {
      rule("int.flight.from", R"((flights?)\s(from)\s(__CITY))", "flight", {1, 2}),
      rule("int.flight.to", R"((flights?)\s(to)\s(__CITY))", "flight", {1, 2}),
      rule("int.flight.what", R"(^(what\sflights|show\sme\sthe\sflights))", "flight", {1}),
      rule("int.airline.fly", R"((which|what)\s(airlines?)\s(fly|is))", "airline", {2, 3}),
      rule("int.airline.word", R"((airlines?))", "airline", {1}),
      rule("int.airline.list", R"((list\sthe)\s(__AIRLINE))", "airline", {2}),
      rule("int.airline.poss", R"((__AIRLINE)\s('s))", "airline", {1}),
      rule("int.meal.serve", R"((is|do\syou\sserve)\s(__MEAL)\s(served\s)?(on))", "meal",
           {2, 4}),
      rule("int.meal.word", R"((meals?))", "meal", {1}),
      rule("int.meal.options", R"((__MEAL)\s(options))", "meal", {1, 2}),
      rule("int.ground.transport", R"((ground)\s(transport\w*))", "ground", {1, 2}),
      rule("int.ground.car", R"((rental\scar|shuttle))", "ground", {1}),
      rule("int.ground.airport", R"((airport|downtown))", "ground", {1}),
  };
}

std::vector<RuleSpec> make_slot_simple_rules() {
  std::vector<std::string> city_targets = {"fromloc.city", "toloc.city", "stoploc.city"};
  auto rule = [](std::string id, std::string pattern, std::string retag,
                 std::vector<GroupTag> gtags, std::vector<std::string> targets) {
    RuleSpec r;
    r.id = std::move(id);
    r.scope = RuleScope::slot;
    r.pattern = std::move(pattern);
    r.retag = std::move(retag);
    r.group_tags = std::move(gtags);
    r.target_labels = std::move(targets);
    return r;
  };
  return {
      rule("slt.city.list", R"((__CITY))", "city", {{1, "city"}}, city_targets),
      rule("slt.city.from", R"((from)\s(__CITY))", "city", {{2, "city"}}, city_targets),
      rule("slt.city.fromto", R"((from)\s(__CITY)\s(to)\s(__CITY))", "city",
           {{2, "city"}, {4, "city"}}, city_targets),
      rule("slt.airline.list", R"((__AIRLINE))", "airline", {{1, "airline"}},
           {"airline.name"}),
      rule("slt.meal.list", R"((__MEAL))", "meal", {{1, "meal"}}, {"meal.type"}),
      rule("slt.day.on", R"((on)\s(__DAY))", "day", {{2, "day"}}, {"day.name"}),
      rule("slt.day.list", R"((__DAY))", "day", {{1, "day"}}, {"day.name"}),
  };
}

std::vector<RuleSpec> make_slot_full_rules() {
  auto rule = [](std::string id, std::string pattern, std::string retag,
                 std::vector<GroupTag> gtags, std::vector<std::size_t> clues) {
    RuleSpec r;
    r.id = std::move(id);
    r.scope = RuleScope::slot;
    r.pattern = std::move(pattern);
    r.retag = std::move(retag);
    r.group_tags = std::move(gtags);
    r.clue_groups = std::move(clues);
    return r;
  };
  return {
      rule("slf.from", R"((from)\s(__CITY))", "fromloc.city",
           {{2, "fromloc.city"}}, {1}),
      rule("slf.to", R"((to|for)\s(__CITY))", "toloc.city", {{2, "toloc.city"}}, {1}),
      rule("slf.stop", R"((stop\sin)\s(__CITY))", "stoploc.city",
           {{2, "stoploc.city"}}, {1}),
      rule("slf.downtown", R"((downtown)\s(__CITY))", "toloc.city",
           {{2, "toloc.city"}}, {1}),
      rule("slf.in", R"((in)\s(__CITY))", "toloc.city", {{2, "toloc.city"}}, {1}),
      rule("slf.airline", R"((__AIRLINE))", "airline.name", {{1, "airline.name"}}, {}),
      rule("slf.meal", R"((__MEAL))", "meal.type", {{1, "meal.type"}}, {}),
      rule("slf.day.on", R"((on)\s(__DAY))", "day.name", {{2, "day.name"}}, {1}),
      rule("slf.day", R"((__DAY))", "day.name", {{1, "day.name"}}, {}),
  };
}

class Builder {
 public:
  Builder(const MacroTable& macros, std::uint64_t seed) : macros_(macros), rng_(seed) {}

  Sentence realize(const Template& t) {
    Sentence s;
    s.intent = t.intent;
    used_cities_.clear();
    for (const Item& item : t.items) emit(item, s);
    const auto& tail = t.tails[rand_index(rng_, t.tails.size())];
    for (const Item& item : tail) emit(item, s);
    return s;
  }

  Sentence realize_with_tail(const Template& t, std::size_t tail_idx) {
    Sentence s;
    s.intent = t.intent;
    used_cities_.clear();
    for (const Item& item : t.items) emit(item, s);
    for (const Item& item : t.tails[tail_idx]) emit(item, s);
    return s;
  }

 private:
  void emit(const Item& item, Sentence& s) {
    if (!item.lit.empty()) {
      for (const auto& tok : tokenize(item.lit)) {
        s.tokens.push_back(tok);
        s.slots.push_back("O");
      }
      return;
    }
    const auto& words = macros_.at(item.list);
    std::string word = words[rand_index(rng_, words.size())];
    if (item.list == "__CITY") {
      // Avoid a sentence travelling from a city to itself.
      std::size_t guard = 0;
      while (used_cities_.count(word) && guard++ < words.size())
        word = words[rand_index(rng_, words.size())];
      used_cities_.insert(word);
    }
    auto toks = tokenize(word);
    for (std::size_t i = 0; i < toks.size(); ++i) {
      s.tokens.push_back(toks[i]);
      if (item.slot.empty())
        s.slots.push_back("O");
      else
        s.slots.push_back((i == 0 ? "B-" : "I-") + item.slot);
    }
  }

  const MacroTable& macros_;
  std::mt19937_64 rng_;
  std::set<std::string> used_cities_;
};

std::map<std::string, std::size_t> mention_counts(const std::vector<Sentence>& ss) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : ss)
    for (const auto& t : s.slots)
      if (t.size() > 2 && t[0] == 'B') ++counts[t.substr(2)];
  return counts;
}

Dataset generate_part(const std::vector<Template>& templates, const MacroTable& macros,
                      std::uint64_t seed, std::size_t per_intent,
                      std::size_t min_mentions) {
  std::vector<std::string> intents = {"flight", "airline", "meal", "ground"};
  std::map<std::string, std::vector<std::size_t>> by_intent;
  for (std::size_t t = 0; t < templates.size(); ++t)
    by_intent[templates[t].intent].push_back(t);

  Builder builder(macros, seed);
  std::mt19937_64 pick(seed ^ 0xd6e8feb86659fd93ull);
  Dataset ds;
  for (std::size_t i = 0; i < per_intent; ++i) {
    for (const auto& intent : intents) {
      const auto& ids = by_intent.at(intent);
      ds.sentences.push_back(builder.realize(templates[ids[rand_index(pick, ids.size())]]));
    }
  }
  // Top up rare labels; the covering template per label is fixed.
  struct Cover { std::size_t tmpl; std::size_t tail; };
  std::map<std::string, Cover> cover = {
      {"fromloc.city", {0, 0}}, {"toloc.city", {0, 0}},
      {"stoploc.city", {0, 2}}, {"day.name", {0, 1}},
      {"airline.name", {6, 0}}, {"meal.type", {10, 0}},
  };
  auto counts = mention_counts(ds.sentences);
  for (const auto& [label, cv] : cover) {
    while (counts[label] < min_mentions) {
      Sentence s = builder.realize_with_tail(templates[cv.tmpl], cv.tail);
      for (const auto& t : s.slots)
        if (t.size() > 2 && t[0] == 'B') ++counts[t.substr(2)];
      ds.sentences.push_back(std::move(s));
    }
  }
  std::set<std::string> ilabels, slabels;
  for (const auto& s : ds.sentences) {
    ilabels.insert(s.intent);
    for (const auto& t : s.slots) slabels.insert(t);
  }
  ds.intent_labels.assign(ilabels.begin(), ilabels.end());
  ds.slot_labels.assign(slabels.begin(), slabels.end());
  return ds;
}

}  // namespace

SyntheticCorpus generate_synthetic(std::uint64_t seed, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  MacroTable macros = make_macros();
  std::vector<Template> templates = make_templates();

  SyntheticCorpus out;
  out.train = generate_part(templates, macros, seed * 2 + 1, 100, 20);
  out.test = generate_part(templates, macros, seed * 2 + 2, 50, 20);

  auto path = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  out.train_path = path("train.txt");
  out.test_path = path("test.txt");
  out.intent_rule_path = path("rules_intent.jsonl");
  out.slot_simple_rule_path = path("rules_slot_simple.jsonl");
  out.slot_full_rule_path = path("rules_slot_full.jsonl");
  out.macro_path = path("macros.json");

  save_dataset(out.train, out.train_path);
  save_dataset(out.test, out.test_path);
  save_rule_file(make_intent_rules(), out.intent_rule_path);
  save_rule_file(make_slot_simple_rules(), out.slot_simple_rule_path);
  save_rule_file(make_slot_full_rules(), out.slot_full_rule_path);
  save_macro_file(macros, out.macro_path);
  return out;
}

}  // namespace renn
