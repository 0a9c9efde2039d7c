#include <doctest.h>

#include <set>

#include <json.hpp>

#include "support.hpp"
#include "unlearn/corpus.hpp"

using namespace unlearn;

namespace {

std::string words(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " w" : "w") + std::to_string(i);
  return out;
}

std::string record_line(const std::string& name, std::size_t background_words, std::size_t qa = 20) {
  nlohmann::json qas = nlohmann::json::array();
  for (std::size_t i = 0; i < qa; ++i)
    qas.push_back({{"question", "Question " + std::to_string(i) + " about " + name + "?"}, {"answer", "ans"}});
  return nlohmann::json{{"name", name}, {"background", words(background_words)}, {"popularity", 12}, {"qa_pairs", qas}}
      .dump();
}

}  // namespace

TEST_CASE("load_corpus: one valid record round-trips") {
  const auto lc = parse_corpus(record_line("Ada Lovelace", 150) + "\n");
  REQUIRE(lc.records.size() == 1);
  CHECK(lc.issues.empty());
  CHECK(lc.records[0].usable());
  CHECK(lc.records[0].qa_pairs.size() == 20);
  CHECK(lc.records[0].qa_pairs[3].owner_name == "Ada Lovelace");
}

TEST_CASE("load_corpus: background word bounds are inclusive") {
  for (auto [n, ok] : {std::pair{99, false}, {100, true}, {500, true}, {501, false}}) {
    const auto lc = parse_corpus(record_line("Ada Lovelace", n));
    CHECK(lc.records[0].validated == ok);
    CHECK(lc.issues.empty() == ok);
  }
}

TEST_CASE("load_corpus: incomplete records are kept but not usable") {
  const auto lc = parse_corpus(record_line("Ada Lovelace", 150, 19));
  REQUIRE(lc.records.size() == 1);
  CHECK_FALSE(lc.records[0].complete);
  CHECK(lc.usable().empty());
}

TEST_CASE("load_corpus: question must contain its owner's name") {
  auto line = nlohmann::json::parse(record_line("Ada Lovelace", 150));
  line["qa_pairs"][0]["question"] = "Who is she?";
  const auto lc = parse_corpus(line.dump());
  CHECK_FALSE(lc.issues.empty());
  CHECK(lc.usable().empty());
}

TEST_CASE("load_corpus: malformed line names its line number") {
  const std::string text = record_line("A B", 150) + "\n\n{not json\n";
  try {
    parse_corpus(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("load_corpus: duplicate names are rejected") {
  CHECK_THROWS_AS(parse_corpus(record_line("A B", 150) + "\n" + record_line("A B", 150)), DuplicateError);
}

TEST_CASE("load_corpus: thousands of complete records") {
  std::string text;
  for (int i = 0; i < 2492; ++i) text += record_line("Person " + std::to_string(i), 120) + "\n";
  const auto lc = parse_corpus(text);
  CHECK(lc.records.size() == 2492);
  CHECK(lc.usable().size() == 2492);
}

TEST_CASE("save_corpus(load_corpus(p)) is byte-identical for canonical files") {
  const auto corpus = generate_synthetic_corpus(5, 20, 3);
  const std::string canonical = serialize_corpus(corpus);
  CHECK(serialize_corpus(parse_corpus(canonical).records) == canonical);
}

TEST_CASE("synthetic corpus: counts, determinism and name containment") {
  const auto a = generate_synthetic_corpus(60, 20, 1);
  std::size_t qa = 0;
  std::set<std::string> names;
  for (const auto& r : a) {
    qa += r.qa_pairs.size();
    names.insert(r.name);
    CHECK(r.usable());
  }
  CHECK(a.size() == 60);
  CHECK(qa == 1200);
  CHECK(names.size() == 60);
  CHECK(serialize_corpus(a) == serialize_corpus(generate_synthetic_corpus(60, 20, 1)));
  CHECK(serialize_corpus(a) != serialize_corpus(generate_synthetic_corpus(60, 20, 2)));

  const auto small = generate_synthetic_corpus(2, 2, 7);
  REQUIRE(small.size() == 2);
  for (const auto& r : small)
    for (const auto& q : r.qa_pairs) CHECK(q.question.find(r.name) != std::string::npos);
}

TEST_CASE("synthetic corpus: answers are pairwise distinct within a record") {
  for (const auto& r : generate_synthetic_corpus(40, 20, 9)) {
    std::set<std::string> answers;
    for (const auto& q : r.qa_pairs) answers.insert(q.gold_answer);
    CHECK(answers.size() == r.qa_pairs.size());
  }
}

TEST_CASE("synthetic corpus: preconditions") {
  CHECK_THROWS_AS(generate_synthetic_corpus(1, 20, 0), ValidationError);
  CHECK_THROWS_AS(generate_synthetic_corpus(5, 1, 0), ValidationError);
}

TEST_CASE("make_split: rounding rule") {
  const auto names = testing::numbered("person ", 466);
  auto sizes = [&](SplitRatio r) {
    const auto s = make_split(names, 20, r, 0);
    return std::pair{s.forget_names.size(), s.retain_names.size()};
  };
  CHECK(sizes({1, 9}) == std::pair<std::size_t, std::size_t>{46, 420});
  CHECK(sizes({10, 90}) == std::pair<std::size_t, std::size_t>{46, 420});
  CHECK(sizes({20, 80}) == std::pair<std::size_t, std::size_t>{93, 373});
  CHECK(sizes({5, 95}) == std::pair<std::size_t, std::size_t>{23, 443});
  CHECK(sizes({1, 99}) == std::pair<std::size_t, std::size_t>{4, 462});
  // Minimum of one forget individual.
  const auto tiny = make_split(testing::numbered("p", 5), 4, {1, 99}, 0);
  CHECK(tiny.forget_names.size() == 1);
}

TEST_CASE("make_split: partition, halves and determinism (property)") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(80);
    const std::size_t qa = 2 + rng.uniform_index(23);
    const SplitRatio ratio{static_cast<unsigned>(1 + rng.uniform_index(20)),
                           static_cast<unsigned>(1 + rng.uniform_index(99))};
    const auto names = testing::numbered("n", n);
    const auto s = make_split(names, qa, ratio, trial);
    std::set<std::string> all(s.forget_names.begin(), s.forget_names.end());
    for (const auto& r : s.retain_names) CHECK(all.insert(r).second);
    CHECK(all.size() == n);
    const std::size_t expect = std::max<std::size_t>(1, n * ratio.forget / (ratio.forget + ratio.retain));
    CHECK(s.forget_names.size() == expect);
    for (const auto& [name, halves] : s.qa_halves) {
      REQUIRE(halves.size() == qa);
      const auto train = std::count(halves.begin(), halves.end(), Half::train);
      CHECK(static_cast<std::size_t>(train) == (qa + 1) / 2);
    }
    CHECK(make_split(names, qa, ratio, trial) == s);
    // Input order does not matter.
    auto shuffled = names;
    rng.shuffle(shuffled);
    CHECK(make_split(shuffled, qa, ratio, trial) == s);
  }
}

TEST_CASE("make_split: errors") {
  CHECK_THROWS_AS(make_split(std::vector<std::string>{}, 20, {1, 9}, 0), ValidationError);
  CHECK_THROWS_AS(make_split(testing::numbered("p", 4), 20, {0, 9}, 0), ValidationError);
  CHECK_THROWS_AS(parse_ratio("1-9"), Error);
  CHECK(parse_ratio("10:90") == SplitRatio{10, 90});
}

TEST_CASE("split files round-trip") {
  const auto s = make_split(generate_synthetic_corpus(30, 20, 4), {1, 9}, 17);
  CHECK(parse_split(serialize_split(s)) == s);
  testing::TempDir dir;
  save_split(dir.file("split.json"), s);
  CHECK(load_split(dir.file("split.json")) == s);
}

TEST_CASE("generation prompt") {
  PersonRecord r;
  r.name = "X";
  r.background = "B";
  const std::string p = build_generation_prompt(r);
  CHECK(p.find("B\n") == 0);
  CHECK(p.find("Given the above X's background information") != std::string::npos);
  CHECK(p.find("Q1:") != std::string::npos);
  CHECK(p.find("- X -") != std::string::npos);

  r.name = "A.*+?[NAME]$1";
  const std::string special = build_generation_prompt(r);
  CHECK(special.find("A.*+?[NAME]$1's background") != std::string::npos);

  PersonRecord other = r;
  r.name = "Jo";
  other.name = "Al";
  const std::string pa = build_generation_prompt(r), pb = build_generation_prompt(other);
  REQUIRE(pa.size() == pb.size());
  std::size_t diffs = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) diffs += pa[i] != pb[i];
  CHECK(diffs == 4);  // two name sites, two characters each

  r.background.clear();
  CHECK_THROWS_AS(build_generation_prompt(r), ValidationError);
}

TEST_CASE("QA generation hook") {
  PersonRecord r = generate_synthetic_corpus(2, 2, 1)[0];
  std::string completion;
  for (int i = 1; i <= 20; ++i)
    completion += "Q" + std::to_string(i) + ": What is fact " + std::to_string(i) + " of " + r.name + "?\nA" +
                  std::to_string(i) + ": value" + std::to_string(i) + ".\n\n";
  std::string seen_prompt;
  generate_qa_with_hook(r, [&](const std::string& p) {
    seen_prompt = p;
    return completion;
  });
  CHECK(seen_prompt == build_generation_prompt(r));
  CHECK(r.qa_pairs.size() == 20);
  CHECK(r.complete);
  CHECK(r.qa_pairs[4].gold_answer == "value5.");
  CHECK_THROWS_AS(generate_qa_with_hook(r, nullptr), ConfigError);
}
