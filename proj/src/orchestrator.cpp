#include "culr/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "culr/error.hpp"
#include "culr/hashing.hpp"

namespace culr {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Strategy naming and config

std::string_view to_string(StrategyMode mode) {
  switch (mode) {
    case StrategyMode::baseline: return "baseline";
    case StrategyMode::dc_only: return "dc_only";
    case StrategyMode::rc_only: return "rc_only";
    case StrategyMode::hierarchical: return "hierarchical";
    case StrategyMode::reverse_hierarchical: return "reverse_hierarchical";
    case StrategyMode::sequential_dc_rc: return "sequential_dc_rc";
    case StrategyMode::sequential_rc_dc: return "sequential_rc_dc";
  }
  return "baseline";
}

StrategyMode parse_strategy_mode(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), '-', '_');
  static const std::map<std::string, StrategyMode, std::less<>> names{
      {"baseline", StrategyMode::baseline},
      {"dc_only", StrategyMode::dc_only},
      {"dc", StrategyMode::dc_only},
      {"rc_only", StrategyMode::rc_only},
      {"rc", StrategyMode::rc_only},
      {"hierarchical", StrategyMode::hierarchical},
      {"hiculr", StrategyMode::hierarchical},
      {"reverse_hierarchical", StrategyMode::reverse_hierarchical},
      {"reverse_hiculr", StrategyMode::reverse_hierarchical},
      {"sequential_dc_rc", StrategyMode::sequential_dc_rc},
      {"seq_dc_rc", StrategyMode::sequential_dc_rc},
      {"sequential_rc_dc", StrategyMode::sequential_rc_dc},
      {"seq_rc_dc", StrategyMode::sequential_rc_dc},
  };
  auto it = names.find(s);
  if (it == names.end()) throw DataError("unknown strategy: " + std::string(text));
  return it->second;
}

bool uses_document_curriculum(StrategyMode mode) {
  return mode != StrategyMode::baseline && mode != StrategyMode::rc_only;
}

bool uses_role_curriculum(StrategyMode mode) {
  return mode != StrategyMode::baseline && mode != StrategyMode::dc_only;
}

void validate(const StrategyConfig& c) {
  if (c.total_epochs < 1) throw DataError("total_epochs must be at least 1");
  if (c.batch_size < 1) throw DataError("batch_size must be at least 1");
  if (!(c.lr > 0.0) || !std::isfinite(c.lr)) throw DataError("lr must be positive");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw DataError("dropout must lie in [0, 1)");
  if (uses_document_curriculum(c.mode)) {
    if (c.num_buckets < 1) throw DataError("num_buckets must be at least 1");
    if (c.epochs_per_stage < 1) throw DataError("epochs_per_stage must be at least 1");
    if (!(c.alpha >= 0.0)) throw DataError("alpha must be non-negative");
  }
  if (uses_role_curriculum(c.mode)) {
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw DataError("epsilon must lie in (0, 1)");
    if (!(c.eta >= 0.0 && c.eta < 1.0)) throw DataError("eta must lie in [0, 1)");
    if (c.rc_interval < 1) throw DataError("rc_interval must be at least 1");
    if (!(c.identity_tolerance > 0.0)) throw DataError("identity_tolerance must be positive");
  }
}

json to_json(const StrategyConfig& c) {
  return {{"mode", to_string(c.mode)},
          {"dc_metric", to_string(c.dc_metric)},
          {"num_buckets", c.num_buckets},
          {"epochs_per_stage", c.epochs_per_stage},
          {"alpha", c.alpha},
          {"include_start", c.include_start},
          {"rc_source", to_string(c.rc_source)},
          {"epsilon", c.epsilon},
          {"eta", c.eta},
          {"rc_interval", c.rc_interval},
          {"max_rc_steps", c.max_rc_steps},
          {"identity_tolerance", c.identity_tolerance},
          {"total_epochs", c.total_epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"dropout", c.dropout},
          {"reset_optimizer", c.reset_optimizer},
          {"seed", c.seed},
          {"head", to_string(c.head)},
          {"hash_bits", c.features.hash_bits},
          {"window", c.features.window},
          {"bigrams", c.features.bigrams},
          {"embedding_dim", c.features.embedding_dim}};
}

std::vector<std::string> apply_overrides(StrategyConfig& c, const json& overrides) {
  if (!overrides.is_object()) throw DataError("config overrides must be a JSON object");
  static const std::set<std::string> dc_keys{"dc_metric", "num_buckets", "epochs_per_stage",
                                             "alpha", "include_start"};
  static const std::set<std::string> rc_keys{"rc_source", "epsilon", "eta", "rc_interval",
                                             "max_rc_steps", "identity_tolerance"};
  try {
    if (overrides.contains("mode")) c.mode = parse_strategy_mode(overrides.at("mode").get<std::string>());
    std::vector<std::string> warnings;
    for (const auto& [key, value] : overrides.items()) {
      if (key == "mode") continue;
      if (key == "dc_metric") c.dc_metric = parse_difficulty_metric(value.get<std::string>());
      else if (key == "num_buckets") c.num_buckets = value.get<std::size_t>();
      else if (key == "epochs_per_stage") c.epochs_per_stage = value.get<std::size_t>();
      else if (key == "alpha") c.alpha = value.get<double>();
      else if (key == "include_start") c.include_start = value.get<bool>();
      else if (key == "rc_source") c.rc_source = parse_similarity_source(value.get<std::string>());
      else if (key == "epsilon") c.epsilon = value.get<double>();
      else if (key == "eta") c.eta = value.get<double>();
      else if (key == "rc_interval") c.rc_interval = value.get<std::size_t>();
      else if (key == "max_rc_steps") c.max_rc_steps = value.get<std::size_t>();
      else if (key == "identity_tolerance") c.identity_tolerance = value.get<double>();
      else if (key == "total_epochs") c.total_epochs = value.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else if (key == "reset_optimizer") c.reset_optimizer = value.get<bool>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "head") c.head = parse_head_kind(value.get<std::string>());
      else if (key == "hash_bits") c.features.hash_bits = value.get<unsigned>();
      else if (key == "window") c.features.window = value.get<unsigned>();
      else if (key == "bigrams") c.features.bigrams = value.get<bool>();
      else if (key == "embedding_dim") c.features.embedding_dim = value.get<std::size_t>();
      else throw DataError("unknown config key: " + key);

      if (dc_keys.count(key) && !uses_document_curriculum(c.mode)) {
        warnings.push_back(key + " is ignored by strategy " + std::string(to_string(c.mode)));
      }
      if (rc_keys.count(key) && !uses_role_curriculum(c.mode)) {
        warnings.push_back(key + " is ignored by strategy " + std::string(to_string(c.mode)));
      }
    }
    return warnings;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad config value: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Epoch plans

std::vector<PlannedEpoch> plan_epochs(const StrategyConfig& c, std::size_t num_buckets, int rc_steps) {
  std::vector<PlannedEpoch> plan;
  const std::size_t B = std::max<std::size_t>(num_buckets, 1);
  const std::size_t sweep_len = B * c.epochs_per_stage;

  auto sweep = [&](int t) {
    for (std::size_t k = 0; k < B; ++k) {
      for (std::size_t e = 0; e < c.epochs_per_stage; ++e) {
        plan.push_back(B == 1 ? PlannedEpoch{0, 1, t} : PlannedEpoch{k, B, t});
      }
    }
  };
  // One annealing cycle on a fixed stage: rc_interval epochs per V^t.
  auto cycle = [&](std::size_t stage, std::size_t stages) {
    for (int t = 0; t < rc_steps; ++t) {
      for (std::size_t e = 0; e < c.rc_interval; ++e) plan.push_back({stage, stages, t});
    }
  };

  switch (c.mode) {
    case StrategyMode::baseline:
      break;
    case StrategyMode::dc_only:
      sweep(-1);
      break;
    case StrategyMode::rc_only:
      cycle(0, 1);
      break;
    case StrategyMode::hierarchical:
      // Each target step runs a complete easy-to-hard sweep, padded with
      // full-data epochs up to rc_interval.
      for (int t = 0; t < rc_steps; ++t) {
        sweep(t);
        for (std::size_t e = sweep_len; e < c.rc_interval; ++e) {
          plan.push_back(B == 1 ? PlannedEpoch{0, 1, t} : PlannedEpoch{B - 1, B, t});
        }
      }
      break;
    case StrategyMode::reverse_hierarchical:
      // V restarts from V^0 in every stage.
      for (std::size_t k = 0; k < B; ++k) {
        const std::size_t stage = B == 1 ? 0 : k;
        cycle(stage, B);
        for (std::size_t e = static_cast<std::size_t>(rc_steps) * c.rc_interval; e < c.epochs_per_stage; ++e) {
          plan.push_back({stage, B, -1});
        }
      }
      break;
    case StrategyMode::sequential_dc_rc:
      sweep(-1);
      cycle(0, 1);
      break;
    case StrategyMode::sequential_rc_dc:
      cycle(0, 1);
      sweep(-1);
      break;
  }
  while (plan.size() < c.total_epochs) plan.push_back({0, 1, -1});
  return plan;
}

// ---------------------------------------------------------------------------
// Training

namespace {

std::string corpus_content_hash(const Corpus& corpus) {
  return git_blob_hash(serialize_corpus(corpus) + serialize_splits(corpus));
}

std::vector<std::string> sorted_ids(const std::vector<const Document*>& docs) {
  std::vector<std::string> ids;
  for (const auto* d : docs) ids.push_back(d->id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

Metrics evaluate_encoded(const LabelerParams& params, const std::vector<const Document*>& docs,
                         const std::vector<EncodedDocument>& features, std::size_t num_roles) {
  const auto L = static_cast<Eigen::Index>(num_roles);
  Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(L, L);
  for (std::size_t k = 0; k < docs.size(); ++k) {
    tally_confusion(confusion, docs[k]->labels, predict(features[k], params));
  }
  return compute_metrics(confusion);
}

TargetMatrix initial_target_matrix(const Corpus& corpus, const StrategyConfig& c,
                                   const CurriculumInputs& inputs) {
  const std::size_t L = corpus.inventory().size();
  if (c.eta == 0.0) {
    // No off-diagonal mass: the similarity source is irrelevant.
    SimilarityMatrix none{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(L)),
                          c.rc_source, false};
    return init_target_matrix(none, 0.0, c.epsilon);
  }
  if (c.rc_source == SimilaritySource::confusion) {
    if (!inputs.confusion) {
      throw DataError(
          "rc_source=confusion needs the validation confusion matrix of a random-order model: "
          "train with --strategy baseline, export it with the confusion command, then pass it "
          "with --confusion");
    }
    if (inputs.confusion->rows() != static_cast<Eigen::Index>(L) || inputs.confusion->cols() != static_cast<Eigen::Index>(L)) {
      throw DataError("confusion matrix size does not match the role inventory");
    }
    return init_target_matrix(similarity_from_confusion(*inputs.confusion), c.eta, c.epsilon);
  }
  if (!inputs.label_embeddings) {
    throw DataError("rc_source=embedding needs label embeddings (--label-embeddings)");
  }
  if (inputs.label_embeddings->size() != L) {
    throw DataError("label embeddings do not cover the role inventory");
  }
  return init_target_matrix(similarity_from_embeddings(*inputs.label_embeddings), c.eta, c.epsilon);
}

}  // namespace

std::vector<DifficultyScore> training_difficulty(const Corpus& corpus, const StrategyConfig& c,
                                                 const CurriculumInputs& inputs) {
  const auto train_docs = corpus.documents_in(Split::train);
  ScoringInputs si;
  si.include_start = c.include_start;
  si.expert_order = inputs.expert_order;
  std::optional<TransitionMatrix> tm;
  if (c.dc_metric == DifficultyMetric::data_inversions || c.dc_metric == DifficultyMetric::neg_loglik) {
    tm = estimate_transition_matrix(train_docs, corpus.inventory().size(), c.alpha);
    si.transitions = &*tm;
  }
  return score_documents(train_docs, c.dc_metric, si);
}

TrainResult train(const Corpus& corpus, const StrategyConfig& config, const CurriculumInputs& inputs) {
  validate(config);
  const auto train_docs = corpus.documents_in(Split::train);
  const auto val_docs = corpus.documents_in(Split::val);
  const auto test_docs = corpus.documents_in(Split::test);
  if (train_docs.empty()) throw DataError("corpus has no training documents");
  if (val_docs.empty()) throw DataError("corpus has no validation documents");
  const std::size_t L = corpus.inventory().size();

  TrainResult result;
  result.corpus_hash = corpus_content_hash(corpus);

  StrategyConfig cfg = config;
  if (inputs.sentence_embeddings) cfg.features.embedding_dim = inputs.sentence_embeddings->dim();

  std::size_t num_buckets = 1;
  if (uses_document_curriculum(cfg.mode)) {
    result.schedule = build_schedule(rank_and_bucket(training_difficulty(corpus, cfg, inputs), cfg.num_buckets),
                                     cfg.epochs_per_stage);
    num_buckets = result.schedule->num_stages();
  }

  std::vector<TargetMatrix> target_steps;
  if (uses_role_curriculum(cfg.mode)) {
    TargetMatrix v = initial_target_matrix(corpus, cfg, inputs);
    for (RoleId r : v.uniform_rows) {
      result.warnings.push_back("role " + corpus.inventory().name(r) +
                                " has no similar roles; its soft targets spread uniformly");
    }
    result.initial_targets = v;
    result.rc_steps = annealing_steps(v, cfg.identity_tolerance, static_cast<int>(cfg.max_rc_steps));
    for (int t = 0; t < result.rc_steps; ++t) {
      target_steps.push_back(v);
      v = update_target_matrix(v);
    }
    if (!v.near_identity(cfg.identity_tolerance)) {
      result.warnings.push_back("annealing capped at " + std::to_string(result.rc_steps) +
                                " steps before the targets reached one-hot");
    }
  }
  result.plan = plan_epochs(cfg, num_buckets, result.rc_steps);

  // Features.
  FeatureEncoder encoder(cfg.features);
  encoder.fit(train_docs);
  auto encode_all = [&](const std::vector<const Document*>& docs) {
    std::vector<EncodedDocument> out;
    out.reserve(docs.size());
    for (const auto* d : docs) out.push_back(encode_document(encoder, *d, inputs.sentence_embeddings));
    return out;
  };
  const auto train_features = encode_all(train_docs);
  const auto val_features = encode_all(val_docs);
  std::map<std::string, std::size_t> train_index;
  for (std::size_t k = 0; k < train_docs.size(); ++k) train_index.emplace(train_docs[k]->id, k);
  const std::vector<std::string> all_train_ids = sorted_ids(train_docs);

  LabelerParams params = LabelerParams::zeros(L, encoder.feature_dim(), cfg.head);
  LabelerOptimizer optimizer(params, AdamConfig{cfg.lr});
  LabelerGradient grad = LabelerGradient::zeros_like(params);
  std::mt19937_64 rng(cfg.seed);

  LabelerParams best_params = params;
  double best_micro = -1.0;
  std::optional<std::pair<std::size_t, std::size_t>> previous_stage;

  for (std::size_t epoch = 0; epoch < result.plan.size(); ++epoch) {
    const PlannedEpoch& pe = result.plan[epoch];
    const std::vector<std::string>& stage_ids =
        pe.num_stages == 1 ? all_train_ids : stage_documents(*result.schedule, pe.stage);

    if (cfg.reset_optimizer && previous_stage &&
        *previous_stage != std::make_pair(pe.stage, pe.num_stages)) {
      optimizer.reset(params);
    }
    previous_stage = std::make_pair(pe.stage, pe.num_stages);

    std::vector<std::string> order = stage_ids;
    std::shuffle(order.begin(), order.end(), rng);

    const TargetMatrix* targets = pe.target_step >= 0 ? &target_steps.at(static_cast<std::size_t>(pe.target_step)) : nullptr;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      grad.set_zero();
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t k = train_index.at(order[b]);
        const Document& doc = *train_docs[k];
        const EncodedDocument features = feature_dropout(train_features[k], encoder, cfg.dropout, rng);
        const Eigen::MatrixXd q = targets ? soft_targets(doc, *targets) : one_hot_targets(doc, L);
        loss_sum += accumulate_loss_and_gradient(features, q, params, grad, scale);
      }
      optimizer.step(params, grad);
    }
    const double mean_loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(mean_loss) || !params.all_finite()) {
      throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
    }

    const Metrics val = evaluate_encoded(params, val_docs, val_features, L);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.stage = pe.stage;
    rec.num_stages = pe.num_stages;
    rec.target_step = pe.target_step;
    rec.off_diagonal_mass = targets ? targets->max_off_diagonal_mass() : 0.0;
    rec.active_documents = order.size();
    rec.train_loss = mean_loss;
    rec.val_macro_f1 = val.macro_f1;
    rec.val_micro_f1 = val.micro_f1;
    rec.documents = std::move(order);
    result.log.push_back(std::move(rec));

    if (val.micro_f1 > best_micro) {
      best_micro = val.micro_f1;
      best_params = params;
      result.best_epoch = epoch;
      result.best_val = val;
    }
  }

  result.model = Model{corpus.inventory(), encoder, std::move(best_params)};
  if (!test_docs.empty()) result.test = evaluate(result.model, test_docs, inputs.sentence_embeddings);
  return result;
}

Metrics evaluate(const Model& model, const std::vector<const Document*>& docs,
                 const SentenceEmbeddings* embeddings) {
  if (docs.empty()) throw DataError("no documents to evaluate");
  return compute_metrics(confusion_matrix(model, docs, embeddings));
}

Eigen::MatrixXd confusion_matrix(const Model& model, const std::vector<const Document*>& docs,
                                 const SentenceEmbeddings* embeddings) {
  const auto L = static_cast<Eigen::Index>(model.inventory.size());
  Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(L, L);
  for (const auto* d : docs) {
    tally_confusion(confusion, d->labels, predict(encode_document(model.encoder, *d, embeddings), model.params));
  }
  return confusion;
}

// ---------------------------------------------------------------------------
// Reports

json epoch_log_json(const TrainResult& r) {
  json epochs = json::array();
  for (const auto& e : r.log) {
    epochs.push_back({{"epoch", e.epoch},
                      {"stage", e.stage},
                      {"num_stages", e.num_stages},
                      {"target_step", e.target_step},
                      {"off_diagonal_mass", e.off_diagonal_mass},
                      {"active_documents", e.active_documents},
                      {"train_loss", e.train_loss},
                      {"val_macro_f1", e.val_macro_f1},
                      {"val_micro_f1", e.val_micro_f1},
                      {"documents", e.documents}});
  }
  return {{"best_epoch", r.best_epoch}, {"epochs", std::move(epochs)}};
}

json metrics_json(const TrainResult& r) {
  json out = {{"best_epoch", r.best_epoch}, {"validation", to_json(r.best_val, r.model.inventory)}};
  if (r.test) out["test"] = to_json(*r.test, r.model.inventory);
  return out;
}

json manifest_json(const TrainResult& r, const StrategyConfig& config) {
  json notes = json::array();
  if (config.mode == StrategyMode::reverse_hierarchical) {
    notes.push_back("target matrix re-initialized to V^0 at every document stage");
  }
  if (config.mode == StrategyMode::hierarchical) {
    notes.push_back("each target-matrix step runs one complete easy-to-hard document sweep");
  }
  json out = {{"tool", "culr"},
              {"config", to_json(config)},
              {"corpus_hash", r.corpus_hash},
              {"epochs", r.plan.size()},
              {"rc_steps", r.rc_steps},
              {"num_stages", r.schedule ? r.schedule->num_stages() : 1},
              {"best_epoch", r.best_epoch},
              {"warnings", r.warnings},
              {"notes", std::move(notes)}};
  if (r.schedule) out["schedule"] = to_json(*r.schedule);
  if (r.initial_targets) out["initial_targets"] = to_json(*r.initial_targets, r.model.inventory);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<NamedStrategy> ablation_strategies(const StrategyConfig& base) {
  auto with = [&](StrategyMode mode, DifficultyMetric metric, SimilaritySource source) {
    StrategyConfig c = base;
    c.mode = mode;
    c.dc_metric = metric;
    c.rc_source = source;
    return c;
  };
  using M = StrategyMode;
  using D = DifficultyMetric;
  using S = SimilaritySource;
  return {
      {"baseline", with(M::baseline, base.dc_metric, base.rc_source)},
      {"dc-shifts", with(M::dc_only, D::shifts, base.rc_source)},
      {"dc-expert-inv", with(M::dc_only, D::expert_inversions, base.rc_source)},
      {"dc-data-inv", with(M::dc_only, D::data_inversions, base.rc_source)},
      {"dc-neg-loglik", with(M::dc_only, D::neg_loglik, base.rc_source)},
      {"rc-confusion", with(M::rc_only, base.dc_metric, S::confusion)},
      {"rc-embedding", with(M::rc_only, base.dc_metric, S::embedding)},
      {"hiculr-confusion", with(M::hierarchical, D::neg_loglik, S::confusion)},
      {"hiculr-embedding", with(M::hierarchical, D::neg_loglik, S::embedding)},
      {"seq-dc-rc", with(M::sequential_dc_rc, D::neg_loglik, S::confusion)},
      {"seq-rc-dc", with(M::sequential_rc_dc, D::neg_loglik, S::confusion)},
      {"reverse-hiculr", with(M::reverse_hierarchical, D::neg_loglik, S::confusion)},
  };
}

std::vector<GridResult> run_grid(const Corpus& corpus, const StrategyConfig& base, const GridSpec& grid,
                                 const CurriculumInputs& inputs) {
  auto or_base = [](const auto& axis, auto value) {
    using T = std::decay_t<decltype(value)>;
    return axis.empty() ? std::vector<T>{value} : std::vector<T>(axis.begin(), axis.end());
  };
  std::vector<GridResult> results;
  for (double lr : or_base(grid.lr, base.lr)) {
    for (std::size_t interval : or_base(grid.rc_interval, base.rc_interval)) {
      for (double eps : or_base(grid.epsilon, base.epsilon)) {
        for (std::size_t buckets : or_base(grid.num_buckets, base.num_buckets)) {
          for (std::size_t eps_stage : or_base(grid.epochs_per_stage, base.epochs_per_stage)) {
            StrategyConfig c = base;
            c.lr = lr;
            c.rc_interval = interval;
            c.epsilon = eps;
            c.num_buckets = buckets;
            c.epochs_per_stage = eps_stage;
            const TrainResult r = train(corpus, c, inputs);
            results.push_back({c, r.best_epoch, r.best_val.macro_f1, r.best_val.micro_f1});
          }
        }
      }
    }
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const GridResult& a, const GridResult& b) { return a.val_micro_f1 > b.val_micro_f1; });
  return results;
}

}  // namespace culr
