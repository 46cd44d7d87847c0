#include "culr/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "culr/error.hpp"

namespace culr {

std::vector<std::string> synthetic_role_names(std::size_t num_roles) {
  static const char* const kLegal[] = {"PREAMBLE", "FACTS",    "ISSUE",  "ARGUMENT",
                                       "ANALYSIS", "RATIO",    "RULING"};
  std::vector<std::string> names;
  for (std::size_t r = 0; r < num_roles; ++r) {
    names.push_back(num_roles <= 7 ? kLegal[r] : "ROLE" + std::to_string(r));
  }
  return names;
}

namespace {

// Sibling of role r in the pairs (1,2), (3,4), ...; 0 and an unpaired last role have none.
std::size_t pair_of(std::size_t r, std::size_t num_roles) {
  if (r == 0) return num_roles;
  const std::size_t p = (r - 1) / 2;
  const std::size_t mate = r % 2 == 1 ? r + 1 : r - 1;
  return mate < num_roles ? p : num_roles;
}

std::string sentence_for(std::size_t role, const SyntheticConfig& cfg, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> len(cfg.min_tokens, cfg.max_tokens);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> role_word(0, cfg.role_vocab - 1);
  std::uniform_int_distribution<std::size_t> pair_word(0, cfg.pair_vocab - 1);
  std::uniform_int_distribution<std::size_t> general_word(0, cfg.general_vocab - 1);
  const std::size_t pair = pair_of(role, cfg.num_roles);

  std::string out;
  const std::size_t n = len(rng);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = u(rng);
    char buf[32];
    if (x < cfg.role_word_prob) {
      std::snprintf(buf, sizeof buf, "r%zuw%zu", role, role_word(rng));
    } else if (x < cfg.role_word_prob + cfg.pair_word_prob && pair < cfg.num_roles) {
      std::snprintf(buf, sizeof buf, "p%zuw%zu", pair, pair_word(rng));
    } else {
      std::snprintf(buf, sizeof buf, "g%zu", general_word(rng));
    }
    if (!out.empty()) out += ' ';
    out += buf;
  }
  out += '.';
  return out;
}

}  // namespace

Corpus generate_synthetic_corpus(const SyntheticConfig& cfg) {
  if (cfg.num_roles < 1 || cfg.num_documents < 1) throw DataError("synthetic corpus needs roles and documents");
  if (cfg.max_segment < 1 || cfg.min_tokens < 1 || cfg.max_tokens < cfg.min_tokens) {
    throw DataError("bad synthetic corpus shape");
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> seg_len(1, cfg.max_segment);
  std::uniform_int_distribution<std::size_t> any_role(0, cfg.num_roles - 1);

  auto names = synthetic_role_names(cfg.num_roles);
  RoleInventory inventory = RoleInventory::from_names(names);
  std::vector<RoleId> canonical;
  for (const auto& n : names) canonical.push_back(inventory.id(n));

  std::vector<Document> docs;
  for (std::size_t d = 0; d < cfg.num_documents; ++d) {
    char id[32];
    std::snprintf(id, sizeof id, "doc%04zu", d);

    std::vector<std::vector<std::size_t>> segments;  // planted-order role indices
    for (std::size_t r = 0; r < cfg.num_roles; ++r) {
      if (r > 0 && u(rng) < cfg.skip_role) continue;
      segments.emplace_back(seg_len(rng), r);
    }
    double noise = cfg.noise;
    if (cfg.order == SyntheticOrder::bimodal) {
      noise = 0.0;
      if (d % 2 == 1) std::shuffle(segments.begin(), segments.end(), rng);
    }

    Document doc;
    doc.id = id;
    for (const auto& seg : segments) {
      for (std::size_t r : seg) {
        std::size_t role = r;
        if (noise > 0.0 && u(rng) < noise) role = any_role(rng);
        doc.sentences.push_back(sentence_for(role, cfg, rng));
        doc.labels.push_back(canonical[role]);
      }
    }
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(inventory), std::move(docs));
}

}  // namespace culr
