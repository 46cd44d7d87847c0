#pragma once

#include <cstdint>
#include <vector>

#include "culr/corpus.hpp"

namespace culr {

enum class SyntheticOrder {
  /// Every document follows the planted order; each sentence's role is
  /// resampled uniformly with probability `noise`.
  noisy,
  /// Half the documents follow the planted order exactly, the other half
  /// present their role segments in a random order.
  bimodal,
};

struct SyntheticConfig {
  std::size_t num_documents = 200;
  std::size_t num_roles = 7;
  SyntheticOrder order = SyntheticOrder::noisy;
  double noise = 0.2;
  std::size_t max_segment = 5;         // sentences per role segment, uniform in [1, max]
  double skip_role = 0.1;              // probability a non-initial role is absent
  std::size_t role_vocab = 20;
  std::size_t pair_vocab = 20;         // shared by sibling roles (1,2), (3,4), ...
  std::size_t general_vocab = 300;
  double role_word_prob = 0.3;
  double pair_word_prob = 0.15;
  std::size_t min_tokens = 6;
  std::size_t max_tokens = 14;
  std::uint64_t seed = 1;
};

/// Role names in planted canonical order.
std::vector<std::string> synthetic_role_names(std::size_t num_roles);

/// Generated documents (ids `doc0000`, ...), all tagged train.
Corpus generate_synthetic_corpus(const SyntheticConfig& config);

}  // namespace culr
