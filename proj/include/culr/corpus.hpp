#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace culr {

using RoleId = std::uint32_t;

/// Ordered set of rhetorical role names with contiguous ids.
class RoleInventory {
 public:
  RoleInventory() = default;
  /// Keeps the given order. Names must be unique and non-empty.
  explicit RoleInventory(std::vector<std::string> roles);

  /// Lexicographically sorted inventory over the distinct names.
  static RoleInventory from_names(std::vector<std::string> names);

  std::size_t size() const { return roles_.size(); }
  bool empty() const { return roles_.empty(); }
  const std::string& name(RoleId id) const { return roles_.at(id); }
  const std::vector<std::string>& names() const { return roles_; }
  std::optional<RoleId> find(std::string_view name) const;
  /// Throws DataError for an unknown role.
  RoleId id(std::string_view name) const;
  /// Stable hex fingerprint of the ordered role names.
  std::string fingerprint() const;

  bool operator==(const RoleInventory& other) const { return roles_ == other.roles_; }

 private:
  std::vector<std::string> roles_;
  std::unordered_map<std::string, RoleId> index_;
};

struct Document {
  std::string id;
  std::vector<std::string> sentences;
  std::vector<RoleId> labels;

  std::size_t size() const { return labels.size(); }
};

enum class Split { train, val, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// Documents over one inventory, each tagged with a split. Immutable once built.
class Corpus {
 public:
  Corpus() = default;
  /// Every document starts in the train split.
  Corpus(RoleInventory inventory, std::vector<Document> documents);

  const RoleInventory& inventory() const { return inventory_; }
  const std::vector<Document>& documents() const { return documents_; }
  const std::vector<Split>& splits() const { return splits_; }
  std::size_t size() const { return documents_.size(); }

  Split split_of(std::size_t index) const { return splits_.at(index); }
  std::vector<const Document*> documents_in(Split split) const;
  const Document* find(std::string_view id) const;
  std::size_t num_sentences() const;

  /// Returns a copy with the given split tags (one per document).
  Corpus with_splits(std::vector<Split> splits) const;

 private:
  RoleInventory inventory_;
  std::vector<Document> documents_;
  std::vector<Split> splits_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Parses one-document-per-line JSON records. With an explicit inventory,
/// labels outside it are an error; otherwise the inventory is the sorted union
/// of observed labels. Blank lines are skipped.
Corpus parse_corpus(std::istream& in, const RoleInventory* inventory = nullptr);
Corpus parse_corpus(std::string_view text, const RoleInventory* inventory = nullptr);

std::string serialize_corpus(const Corpus& corpus);

/// Converts Build-style annotated judgments (a JSON array, or one JSON object
/// per line) into the line-delimited corpus format.
std::string convert_build(std::string_view build_json);

/// Converts a directory of `sentence<TAB>label` files (one document per file,
/// id = file stem) into the line-delimited corpus format.
std::string convert_tsv_directory(const std::string& directory);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// Document-level seeded split. Non-zero parts get floor(n * ratio) documents
/// (at least one); the remainder goes to train.
Corpus split_corpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

std::string serialize_splits(const Corpus& corpus);
Corpus apply_splits(const Corpus& corpus, std::istream& sidecar);

/// Lowercased tokens split on whitespace and ASCII punctuation.
std::vector<std::string> tokenize(std::string_view sentence);

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::size_t roles = 0;
  std::size_t train = 0, val = 0, test = 0;
};

CorpusStats corpus_stats(const Corpus& corpus);

/// Label frequencies over the given documents, indexed by role id.
std::vector<std::size_t> role_frequencies(const std::vector<const Document*>& docs,
                                          std::size_t num_roles);

}  // namespace culr
