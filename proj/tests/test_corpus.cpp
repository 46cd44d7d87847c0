#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "culr/corpus.hpp"
#include "culr/error.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

using namespace culr;

namespace {

std::string record(const std::string& id, const std::vector<std::string>& sentences,
                   const std::vector<std::string>& labels) {
  nlohmann::json j = {{"id", id}, {"sentences", sentences}, {"labels", labels}};
  return j.dump() + "\n";
}

Corpus numbered_corpus(std::size_t n) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) docs.push_back(oracle::make_doc("d" + std::to_string(100 + i), {0, 1}));
  return Corpus(RoleInventory({"A", "B"}), std::move(docs));
}

}  // namespace

TEST_CASE("inventory is the sorted union of labels") {
  const Corpus c = parse_corpus(record("x", {"s1", "s2"}, {"B", "A"}) + record("y", {"s"}, {"A"}));
  CHECK(c.inventory().names() == std::vector<std::string>{"A", "B"});
  CHECK(c.inventory().id("A") == 0);
  CHECK(c.inventory().id("B") == 1);
  CHECK(c.documents()[0].labels == std::vector<RoleId>{1, 0});
}

TEST_CASE("length mismatch and empty documents are rejected with a line number") {
  const std::string bad = record("ok", {"a"}, {"A"}) + record("x", {"a", "b", "c"}, {"A", "B"});
  try {
    parse_corpus(bad);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("length mismatch") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_corpus(record("e", {}, {})), DataError);
  CHECK_THROWS_AS(parse_corpus("{not json}\n"), DataError);
  CHECK_THROWS_AS(parse_corpus(record("d", {"a"}, {"A"}) + record("d", {"b"}, {"A"})), DataError);
}

TEST_CASE("explicit inventory rejects unknown roles") {
  const RoleInventory inv({"A"});
  CHECK_THROWS_AS(parse_corpus(record("x", {"a"}, {"B"}), &inv), DataError);
  CHECK(parse_corpus(record("x", {"a"}, {"A"}), &inv).inventory() == inv);
}

TEST_CASE("parse and serialize round-trip on random corpora") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> nd(1, 6), ld(1, 8), rd(1, 5);
    const int roles = rd(rng);
    std::vector<std::string> names;
    for (int r = 0; r < roles; ++r) names.push_back("R" + std::to_string(r));
    std::vector<Document> docs;
    const int n = nd(rng);
    for (int d = 0; d < n; ++d) {
      std::vector<RoleId> labels(static_cast<std::size_t>(ld(rng)));
      for (auto& l : labels) l = static_cast<RoleId>(std::uniform_int_distribution<int>(0, roles - 1)(rng));
      Document doc = oracle::make_doc("doc" + std::to_string(d), labels);
      doc.sentences[0] = "quote \" tab\t unicode \xC3\xA9";
      docs.push_back(doc);
    }
    // Only used roles survive a round-trip, so build the inventory from them.
    std::vector<std::string> used;
    for (const auto& d : docs)
      for (RoleId l : d.labels) used.push_back(names[l]);
    const RoleInventory inv = RoleInventory::from_names(used);
    for (auto& d : docs)
      for (auto& l : d.labels) l = inv.id(names[l]);
    const Corpus c(inv, docs);
    const std::string text = serialize_corpus(c);
    const Corpus back = parse_corpus(text);
    CHECK(serialize_corpus(back) == text);
    REQUIRE(back.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(back.documents()[i].sentences == c.documents()[i].sentences);
      CHECK(back.documents()[i].labels == c.documents()[i].labels);
    }
  }
}

TEST_CASE("build conversion sorts spans and uses code-point offsets") {
  const std::string text = "\xC3\xA9t\xC3\xA9 one. Two here.";  // "été one. Two here."
  nlohmann::json rec = {
      {"id", 7},
      {"data", {{"text", text}}},
      {"annotations",
       {{{"result",
          {{{"value", {{"start", 9}, {"end", 18}, {"labels", {"RULING"}}}}},
           {{"value", {{"start", 0}, {"end", 8}, {"labels", {"PREAMBLE"}}}}}}}}}}};
  const Corpus c = parse_corpus(convert_build(rec.dump()));
  REQUIRE(c.size() == 1);
  const Document& d = c.documents()[0];
  CHECK(d.id == "7");
  CHECK(d.sentences == std::vector<std::string>{"\xC3\xA9t\xC3\xA9 one.", "Two here."});
  CHECK(c.inventory().name(d.labels[0]) == "PREAMBLE");
  CHECK(c.inventory().name(d.labels[1]) == "RULING");

  nlohmann::json single = {{"id", "s"},
                           {"data", {{"text", "In the court."}}},
                           {"annotations", {{{"result", {{{"value", {{"start", 0}, {"end", 13}, {"labels", {"PREAMBLE"}}}}}}}}}}};
  const Corpus one = parse_corpus(convert_build("[" + single.dump() + "]"));
  CHECK(one.documents()[0].sentences == std::vector<std::string>{"In the court."});

  nlohmann::json overlap = single;
  overlap["annotations"][0]["result"].push_back({{"value", {{"start", 3}, {"end", 5}, {"labels", {"FACTS"}}}}});
  CHECK_THROWS_AS(convert_build(overlap.dump()), DataError);
  nlohmann::json outside = single;
  outside["annotations"][0]["result"][0]["value"]["end"] = 99;
  CHECK_THROWS_AS(convert_build(outside.dump()), DataError);
}

TEST_CASE("tsv directory conversion") {
  const auto dir = std::filesystem::temp_directory_path() / "culr_tsv_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "case2.txt") << "The appeal is allowed.\tRULING\n";
  std::ofstream(dir / "case1.txt") << "Facts are these.\tFACTS\nWe hold so.\tRATIO\n";
  const Corpus c = parse_corpus(convert_tsv_directory(dir.string()));
  REQUIRE(c.size() == 2);
  CHECK(c.documents()[0].id == "case1");
  CHECK(c.documents()[0].size() == 2);
  CHECK(c.num_sentences() == 3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("split sizes follow floor rounding with remainder to train") {
  const Corpus c = numbered_corpus(50);
  const Corpus s = split_corpus(c, {0.8, 0.1, 0.1}, 3);
  CHECK(s.documents_in(Split::train).size() == 40);
  CHECK(s.documents_in(Split::val).size() == 5);
  CHECK(s.documents_in(Split::test).size() == 5);

  const Corpus all = split_corpus(numbered_corpus(10), {1.0, 0.0, 0.0}, 1);
  CHECK(all.documents_in(Split::train).size() == 10);

  const Corpus odd = split_corpus(numbered_corpus(13), {0.8, 0.1, 0.1}, 1);
  CHECK(odd.documents_in(Split::val).size() == 1);
  CHECK(odd.documents_in(Split::test).size() == 1);
  CHECK(odd.documents_in(Split::train).size() == 11);

  CHECK_THROWS_AS(split_corpus(c, {0.5, 0.1, 0.1}, 1), DataError);
  CHECK_THROWS_AS(split_corpus(numbered_corpus(2), {0.8, 0.1, 0.1}, 1), DataError);
}

TEST_CASE("split is deterministic and independent of document order") {
  const Corpus c = numbered_corpus(37);
  CHECK(serialize_splits(split_corpus(c, {0.8, 0.1, 0.1}, 9)) == serialize_splits(split_corpus(c, {0.8, 0.1, 0.1}, 9)));
  CHECK(serialize_splits(split_corpus(c, {0.8, 0.1, 0.1}, 9)) != serialize_splits(split_corpus(c, {0.8, 0.1, 0.1}, 10)));

  std::vector<Document> reversed(c.documents().rbegin(), c.documents().rend());
  const Corpus r(c.inventory(), reversed);
  const Corpus a = split_corpus(c, {0.6, 0.2, 0.2}, 4);
  const Corpus b = split_corpus(r, {0.6, 0.2, 0.2}, 4);
  for (const auto& d : c.documents()) {
    std::size_t ia = 0, ib = 0;
    while (a.documents()[ia].id != d.id) ++ia;
    while (b.documents()[ib].id != d.id) ++ib;
    CHECK(a.split_of(ia) == b.split_of(ib));
  }
}

TEST_CASE("split sidecar round-trip") {
  const Corpus s = split_corpus(numbered_corpus(20), {0.5, 0.25, 0.25}, 2);
  std::istringstream in(serialize_splits(s));
  const Corpus back = apply_splits(numbered_corpus(20), in);
  CHECK(back.splits() == s.splits());

  std::istringstream missing("{\"id\": \"d100\", \"split\": \"val\"}\n");
  CHECK_THROWS_AS(apply_splits(numbered_corpus(2), missing), DataError);
  std::istringstream unknown("{\"id\": \"nope\", \"split\": \"val\"}\n");
  CHECK_THROWS_AS(apply_splits(numbered_corpus(1), unknown), DataError);
}

TEST_CASE("tokenizer lowercases and splits on punctuation") {
  CHECK(tokenize("The Court, in 2019: held!") == std::vector<std::string>{"the", "court", "in", "2019", "held"});
  CHECK(tokenize("  ").empty());
}

TEST_CASE("corpus stats and role frequencies") {
  const Corpus c = parse_corpus(record("x", {"a", "b", "c"}, {"A", "B", "B"}) + record("y", {"a"}, {"B"}));
  const CorpusStats s = corpus_stats(c);
  CHECK(s.documents == 2);
  CHECK(s.sentences == 4);
  CHECK(s.roles == 2);
  CHECK(s.train == 2);
  CHECK(role_frequencies(c.documents_in(Split::train), 2) == std::vector<std::size_t>{1, 3});
}
