#include "culr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "culr/error.hpp"
#include "culr/hashing.hpp"
#include "json.hpp"

namespace culr {

using nlohmann::json;

namespace {

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

// Byte offset of every UTF-8 code point, plus a trailing end offset. Build span
// offsets count code points, not bytes.
std::vector<std::size_t> code_point_offsets(std::string_view text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) offsets.push_back(i);
  }
  offsets.push_back(text.size());
  return offsets;
}

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string id_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw DataError("document id must be a string or integer");
}

}  // namespace

// ---------------------------------------------------------------------------
// RoleInventory

RoleInventory::RoleInventory(std::vector<std::string> roles) : roles_(std::move(roles)) {
  for (std::size_t i = 0; i < roles_.size(); ++i) {
    if (roles_[i].empty()) throw DataError("role names must be non-empty");
    if (!index_.emplace(roles_[i], static_cast<RoleId>(i)).second) {
      throw DataError("duplicate role name: " + roles_[i]);
    }
  }
}

RoleInventory RoleInventory::from_names(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return RoleInventory(std::move(names));
}

std::optional<RoleId> RoleInventory::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

RoleId RoleInventory::id(std::string_view name) const {
  if (auto found = find(name)) return *found;
  throw DataError("unknown role: " + std::string(name));
}

std::string RoleInventory::fingerprint() const {
  std::uint64_t h = fnv1a64("");
  for (const auto& r : roles_) {
    h = fnv1a64(r, h);
    h = fnv1a64(std::string_view("\n", 1), h);
  }
  return to_hex(h);
}

// ---------------------------------------------------------------------------
// Split / Corpus

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  throw DataError("unknown split: " + std::string(text));
}

Corpus::Corpus(RoleInventory inventory, std::vector<Document> documents)
    : inventory_(std::move(inventory)),
      documents_(std::move(documents)),
      splits_(documents_.size(), Split::train) {
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& doc = documents_[i];
    if (doc.labels.empty()) throw DataError("document " + doc.id + " is empty");
    if (doc.labels.size() != doc.sentences.size()) {
      throw DataError("document " + doc.id + ": sentence/label length mismatch");
    }
    for (RoleId l : doc.labels) {
      if (l >= inventory_.size()) throw DataError("document " + doc.id + ": invalid label id");
    }
    if (!by_id_.emplace(doc.id, i).second) throw DataError("duplicate document id: " + doc.id);
  }
}

std::vector<const Document*> Corpus::documents_in(Split split) const {
  std::vector<const Document*> out;
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    if (splits_[i] == split) out.push_back(&documents_[i]);
  }
  return out;
}

const Document* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &documents_[it->second];
}

std::size_t Corpus::num_sentences() const {
  std::size_t n = 0;
  for (const auto& d : documents_) n += d.size();
  return n;
}

Corpus Corpus::with_splits(std::vector<Split> splits) const {
  if (splits.size() != documents_.size()) throw DataError("split tags must cover every document");
  Corpus copy = *this;
  copy.splits_ = std::move(splits);
  return copy;
}

// ---------------------------------------------------------------------------
// Line-delimited records

namespace {

struct RawRecord {
  std::string id;
  std::vector<std::string> sentences;
  std::vector<std::string> labels;
};

RawRecord parse_record(const std::string& line, std::size_t line_no) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(line_prefix(line_no) + "malformed record: " + e.what());
  }
  RawRecord raw;
  try {
    if (!record.is_object()) throw DataError("record is not an object");
    if (!record.contains("id") || !record.contains("sentences") || !record.contains("labels")) {
      throw DataError("record needs id, sentences and labels");
    }
    raw.id = id_string(record.at("id"));
    raw.sentences = record.at("sentences").get<std::vector<std::string>>();
    raw.labels = record.at("labels").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(line_prefix(line_no) + "malformed record: " + e.what());
  } catch (const DataError& e) {
    throw DataError(line_prefix(line_no) + e.what());
  }
  if (raw.sentences.size() != raw.labels.size()) {
    throw DataError(line_prefix(line_no) + "length mismatch: " +
                    std::to_string(raw.sentences.size()) + " sentences, " +
                    std::to_string(raw.labels.size()) + " labels");
  }
  if (raw.labels.empty()) throw DataError(line_prefix(line_no) + "empty document " + raw.id);
  return raw;
}

}  // namespace

Corpus parse_corpus(std::istream& in, const RoleInventory* inventory) {
  std::vector<RawRecord> records;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    records.push_back(parse_record(line, line_no));
    line_numbers.push_back(line_no);
  }

  RoleInventory inv;
  if (inventory) {
    inv = *inventory;
  } else {
    std::vector<std::string> names;
    for (const auto& r : records) names.insert(names.end(), r.labels.begin(), r.labels.end());
    inv = RoleInventory::from_names(std::move(names));
  }

  std::vector<Document> docs;
  docs.reserve(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    auto& r = records[k];
    Document doc{std::move(r.id), std::move(r.sentences), {}};
    doc.labels.reserve(r.labels.size());
    for (const auto& name : r.labels) {
      auto id = inv.find(name);
      if (!id) throw DataError(line_prefix(line_numbers[k]) + "unknown role: " + name);
      doc.labels.push_back(*id);
    }
    docs.push_back(std::move(doc));
  }
  try {
    return Corpus(std::move(inv), std::move(docs));
  } catch (const DataError& e) {
    throw DataError(std::string("corpus: ") + e.what());
  }
}

Corpus parse_corpus(std::string_view text, const RoleInventory* inventory) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in, inventory);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.documents()) {
    json labels = json::array();
    for (RoleId l : doc.labels) labels.push_back(corpus.inventory().name(l));
    json record = {{"id", doc.id}, {"sentences", doc.sentences}, {"labels", std::move(labels)}};
    out += record.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Source-format conversion

namespace {

struct Span {
  std::size_t start;
  std::size_t end;
  std::string label;
};

json convert_build_record(const json& rec) {
  const std::string id = id_string(rec.at("id"));
  const std::string text = rec.at("data").at("text").get<std::string>();
  const auto offsets = code_point_offsets(text);
  const std::size_t length = offsets.size() - 1;

  std::vector<Span> spans;
  for (const auto& ann : rec.at("annotations")) {
    for (const auto& res : ann.at("result")) {
      const auto& value = res.at("value");
      const auto& labels = value.at("labels");
      if (labels.empty()) throw DataError("document " + id + ": span without label");
      long long start = value.at("start").get<long long>();
      long long end = value.at("end").get<long long>();
      if (start < 0 || end < start || static_cast<std::size_t>(end) > length) {
        throw DataError("document " + id + ": span [" + std::to_string(start) + ", " +
                        std::to_string(end) + ") outside document bounds");
      }
      spans.push_back({static_cast<std::size_t>(start), static_cast<std::size_t>(end),
                       labels.at(0).get<std::string>()});
    }
  }
  if (spans.empty()) throw DataError("document " + id + ": no labeled spans");
  std::stable_sort(spans.begin(), spans.end(),
                   [](const Span& a, const Span& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].start < spans[i - 1].end) {
      throw DataError("document " + id + ": overlapping spans at offset " +
                      std::to_string(spans[i].start));
    }
  }

  json sentences = json::array();
  json labels = json::array();
  for (const auto& s : spans) {
    const std::size_t b = offsets[s.start];
    const std::size_t e = offsets[s.end];
    sentences.push_back(trim(std::string_view(text).substr(b, e - b)));
    labels.push_back(s.label);
  }
  return {{"id", id}, {"sentences", std::move(sentences)}, {"labels", std::move(labels)}};
}

}  // namespace

std::string convert_build(std::string_view build_json) {
  std::vector<json> records;
  const std::string text(build_json);
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && text[first] == '[') {
      for (auto& r : json::parse(text)) records.push_back(std::move(r));
    } else {
      std::istringstream in(text);
      std::string line;
      while (std::getline(in, line)) {
        if (!trim(line).empty()) records.push_back(json::parse(line));
      }
    }
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed Build input: ") + e.what());
  }

  std::string out;
  for (const auto& rec : records) {
    try {
      out += convert_build_record(rec).dump();
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed Build record: ") + e.what());
    }
    out += '\n';
  }
  return out;
}

std::string convert_tsv_directory(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) throw DataError("not a directory: " + directory);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::string out;
  for (const auto& path : files) {
    std::ifstream in(path);
    json sentences = json::array();
    json labels = json::array();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto tab = line.rfind('\t');
      if (tab == std::string::npos) {
        throw DataError(path.string() + ": " + line_prefix(line_no) + "expected sentence<TAB>label");
      }
      sentences.push_back(trim(std::string_view(line).substr(0, tab)));
      labels.push_back(trim(std::string_view(line).substr(tab + 1)));
    }
    if (labels.empty()) throw DataError(path.string() + ": empty document");
    json record = {{"id", path.stem().string()},
                   {"sentences", std::move(sentences)},
                   {"labels", std::move(labels)}};
    out += record.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits

Corpus split_corpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed) {
  const double parts[3] = {ratios.train, ratios.val, ratios.test};
  for (double r : parts) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DataError("split ratios must be non-negative");
  }
  if (std::abs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9) {
    throw DataError("split ratios must sum to 1");
  }
  const std::size_t n = corpus.size();
  const auto non_zero = static_cast<std::size_t>(std::count_if(
      std::begin(parts), std::end(parts), [](double r) { return r > 0.0; }));
  if (n < non_zero) {
    throw DataError("cannot split " + std::to_string(n) + " documents into " +
                    std::to_string(non_zero) + " non-empty parts");
  }

  auto part_size = [n](double r) -> std::size_t {
    if (r <= 0.0) return 0;
    auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9));
    return std::max<std::size_t>(k, 1);
  };
  std::size_t n_val = part_size(parts[1]);
  std::size_t n_test = part_size(parts[2]);
  if (n_val + n_test + (parts[0] > 0.0 ? 1 : 0) > n) {
    throw DataError("split ratios leave no documents for train");
  }

  // Permute in id order so the assignment does not depend on input order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& docs = corpus.documents();
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return docs[a].id < docs[b].id; });
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Split> tags(n, Split::train);
  const std::size_t n_train = n - n_val - n_test;
  for (std::size_t k = 0; k < n; ++k) {
    if (k < n_train) {
      tags[order[k]] = Split::train;
    } else if (k < n_train + n_val) {
      tags[order[k]] = Split::val;
    } else {
      tags[order[k]] = Split::test;
    }
  }
  return corpus.with_splits(std::move(tags));
}

std::string serialize_splits(const Corpus& corpus) {
  std::string out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    json rec = {{"id", corpus.documents()[i].id}, {"split", to_string(corpus.split_of(i))}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

Corpus apply_splits(const Corpus& corpus, std::istream& sidecar) {
  std::vector<std::optional<Split>> tags(corpus.size());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.size(); ++i) index.emplace(corpus.documents()[i].id, i);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(sidecar, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::string id;
    Split split;
    try {
      auto rec = json::parse(line);
      id = id_string(rec.at("id"));
      split = parse_split(rec.at("split").get<std::string>());
    } catch (const json::exception& e) {
      throw DataError("splits " + line_prefix(line_no) + e.what());
    }
    auto it = index.find(id);
    if (it == index.end()) throw DataError("splits " + line_prefix(line_no) + "unknown document " + id);
    if (tags[it->second]) throw DataError("splits " + line_prefix(line_no) + "duplicate document " + id);
    tags[it->second] = split;
  }
  std::vector<Split> out;
  out.reserve(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!tags[i]) throw DataError("splits: no tag for document " + corpus.documents()[i].id);
    out.push_back(*tags[i]);
  }
  return corpus.with_splits(std::move(out));
}

// ---------------------------------------------------------------------------

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : sentence) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || (c < 0x80 && std::ispunct(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  s.documents = corpus.size();
  s.sentences = corpus.num_sentences();
  s.roles = corpus.inventory().size();
  for (Split sp : corpus.splits()) {
    switch (sp) {
      case Split::train: ++s.train; break;
      case Split::val: ++s.val; break;
      case Split::test: ++s.test; break;
    }
  }
  return s;
}

std::vector<std::size_t> role_frequencies(const std::vector<const Document*>& docs,
                                          std::size_t num_roles) {
  std::vector<std::size_t> freq(num_roles, 0);
  for (const auto* d : docs) {
    for (RoleId l : d->labels) ++freq.at(l);
  }
  return freq;
}

}  // namespace culr
