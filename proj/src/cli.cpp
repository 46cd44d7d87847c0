#include "culr/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "culr/corpus.hpp"
#include "culr/difficulty.hpp"
#include "culr/discourse.hpp"
#include "culr/error.hpp"
#include "culr/hashing.hpp"
#include "culr/label_curriculum.hpp"
#include "culr/labeler.hpp"
#include "culr/metrics.hpp"
#include "culr/orchestrator.hpp"
#include "culr/pacing.hpp"
#include "culr/synthetic.hpp"
#include "json.hpp"

namespace culr::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError("malformed JSON in " + path + ": " + e.what());
  }
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string default_splits_path(const std::string& corpus_path) { return corpus_path + ".splits.jsonl"; }

/// Loads a corpus and its split sidecar (explicit, or `<corpus>.splits.jsonl`
/// when present). Without a sidecar every document is train.
Corpus load_corpus(const std::string& path, const std::string& splits_path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  Corpus corpus = parse_corpus(in);
  const std::string sidecar = splits_path.empty() ? default_splits_path(path) : splits_path;
  if (!splits_path.empty() || fs::exists(sidecar)) {
    std::ifstream s(sidecar);
    if (!s) throw DataError("cannot read " + sidecar);
    corpus = apply_splits(corpus, s);
  }
  return corpus;
}

json stats_json(const Corpus& corpus) {
  const CorpusStats s = corpus_stats(corpus);
  return {{"documents", s.documents}, {"sentences", s.sentences}, {"roles", s.roles},
          {"role_names", corpus.inventory().names()},
          {"train", s.train}, {"val", s.val}, {"test", s.test}};
}

SplitRatios parse_ratios(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      parts.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw DataError("bad split ratio: " + tok);
    }
  }
  if (parts.size() != 3) throw DataError("split ratios need three comma-separated values");
  return {parts[0], parts[1], parts[2]};
}

std::uint64_t seed_from_env() {
  const char* env = std::getenv("CULR_SEED");
  if (!env || !*env) return 0;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw DataError(std::string("CULR_SEED is not an integer: ") + env);
  }
}

// ---------------------------------------------------------------------------
// Training options shared by `train` and `grid`.

struct TrainOptions {
  std::string corpus, splits, config_file, out;
  std::string expert_order, confusion, label_embeddings, sentence_embeddings;
  std::string strategy, dc_metric, rc_source, head;
  std::size_t num_buckets = 0, epochs_per_stage = 0, rc_interval = 0, max_rc_steps = 0;
  std::size_t total_epochs = 0, batch_size = 0;
  unsigned hash_bits = 0, window = 0;
  double alpha = 0, epsilon = 0, eta = 0, lr = 0, dropout = 0;
  std::uint64_t seed = 0;
  bool reset_optimizer = false, no_start = false, no_bigrams = false;
  std::map<std::string, CLI::Option*> flags;
};

void add_train_options(CLI::App* app, TrainOptions& o) {
  app->add_option("--corpus", o.corpus, "Corpus file (one JSON document per line)")->required();
  app->add_option("--splits", o.splits, "Split sidecar (default: <corpus>.splits.jsonl)");
  app->add_option("--config", o.config_file, "JSON config; explicit flags take precedence");
  auto& f = o.flags;
  f["mode"] = app->add_option("--strategy", o.strategy,
                              "baseline | dc | rc | hiculr | reverse-hiculr | seq-dc-rc | seq-rc-dc");
  f["dc_metric"] = app->add_option("--dc-metric", o.dc_metric, "shifts | expert-inv | data-inv | neg-loglik");
  f["rc_source"] = app->add_option("--rc-source", o.rc_source, "confusion | embedding");
  f["num_buckets"] = app->add_option("--num-buckets", o.num_buckets, "Difficulty buckets (grid 3,5,7,10,12,15)");
  f["epochs_per_stage"] = app->add_option("--epochs-per-stage", o.epochs_per_stage,
                                          "Epochs per baby step (grid 2,4,6,8,10)");
  f["alpha"] = app->add_option("--alpha", o.alpha, "Transition smoothing for data-based metrics");
  f["include_start"] = app->add_flag("--no-start", o.no_start, "Drop the initial-role term of neg-loglik");
  f["epsilon"] = app->add_option("--epsilon", o.epsilon, "Target decay factor (grid 0.8,0.9,0.95,0.99,0.999)");
  f["eta"] = app->add_option("--eta", o.eta, "Initial off-diagonal target mass in [0,1)");
  f["rc_interval"] = app->add_option("--rc-interval", o.rc_interval,
                                     "Epochs between target updates (grid 5,10,15,20,25)");
  f["max_rc_steps"] = app->add_option("--max-rc-steps", o.max_rc_steps, "Cap on target updates (0 = until one-hot)");
  f["total_epochs"] = app->add_option("--total-epochs", o.total_epochs, "Minimum number of epochs");
  f["batch_size"] = app->add_option("--batch-size", o.batch_size, "Documents per Adam step");
  f["lr"] = app->add_option("--lr", o.lr, "Adam learning rate");
  f["dropout"] = app->add_option("--dropout", o.dropout, "Feature dropout rate");
  f["reset_optimizer"] = app->add_flag("--reset-optimizer", o.reset_optimizer, "Reset Adam state at stage changes");
  f["seed"] = app->add_option("--seed", o.seed, "Random seed (default: $CULR_SEED, else 0)");
  f["head"] = app->add_option("--head", o.head, "crf | softmax");
  f["hash_bits"] = app->add_option("--hash-bits", o.hash_bits, "log2 of the hashed feature dimension");
  f["window"] = app->add_option("--window", o.window, "Neighbor sentences concatenated on each side");
  f["bigrams"] = app->add_flag("--no-bigrams", o.no_bigrams, "Unigram features only");
  app->add_option("--expert-order", o.expert_order, "Expert role order, one role per line");
  app->add_option("--confusion", o.confusion, "Validation confusion JSON of a baseline model");
  app->add_option("--label-embeddings", o.label_embeddings, "role<TAB>vector file");
  app->add_option("--sentence-embeddings", o.sentence_embeddings, "doc<TAB>index<TAB>vector file");
}

json explicit_overrides(const TrainOptions& o) {
  json j = json::object();
  auto set = [&](const char* key) { return o.flags.at(key)->count() > 0; };
  if (set("mode")) j["mode"] = o.strategy;
  if (set("dc_metric")) j["dc_metric"] = o.dc_metric;
  if (set("rc_source")) j["rc_source"] = o.rc_source;
  if (set("num_buckets")) j["num_buckets"] = o.num_buckets;
  if (set("epochs_per_stage")) j["epochs_per_stage"] = o.epochs_per_stage;
  if (set("alpha")) j["alpha"] = o.alpha;
  if (set("include_start")) j["include_start"] = !o.no_start;
  if (set("epsilon")) j["epsilon"] = o.epsilon;
  if (set("eta")) j["eta"] = o.eta;
  if (set("rc_interval")) j["rc_interval"] = o.rc_interval;
  if (set("max_rc_steps")) j["max_rc_steps"] = o.max_rc_steps;
  if (set("total_epochs")) j["total_epochs"] = o.total_epochs;
  if (set("batch_size")) j["batch_size"] = o.batch_size;
  if (set("lr")) j["lr"] = o.lr;
  if (set("dropout")) j["dropout"] = o.dropout;
  if (set("reset_optimizer")) j["reset_optimizer"] = o.reset_optimizer;
  if (set("seed")) j["seed"] = o.seed;
  if (set("head")) j["head"] = o.head;
  if (set("hash_bits")) j["hash_bits"] = o.hash_bits;
  if (set("window")) j["window"] = o.window;
  if (set("bigrams")) j["bigrams"] = !o.no_bigrams;
  return j;
}

struct PreparedRun {
  Corpus corpus;
  StrategyConfig config;
  std::vector<std::string> warnings;
  std::optional<CanonicalOrder> expert_order;
  std::optional<SentenceEmbeddings> sentence_embeddings;
  CurriculumInputs inputs;
  json input_hashes = json::object();
};

void prepare_run(const TrainOptions& o, PreparedRun& run) {
  run.corpus = load_corpus(o.corpus, o.splits);
  run.input_hashes["corpus"] = git_blob_hash(read_file(o.corpus));
  const std::string sidecar = o.splits.empty() ? default_splits_path(o.corpus) : o.splits;
  if (fs::exists(sidecar)) run.input_hashes["splits"] = git_blob_hash(read_file(sidecar));

  run.config.seed = seed_from_env();
  if (!o.config_file.empty()) {
    const std::string text = read_file(o.config_file);
    run.input_hashes["config"] = git_blob_hash(text);
    json cfg;
    try {
      cfg = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DataError("malformed config " + o.config_file + ": " + e.what());
    }
    auto w = apply_overrides(run.config, cfg);
    run.warnings.insert(run.warnings.end(), w.begin(), w.end());
  }
  json flags = explicit_overrides(o);
  // A mode set only in the config file still decides which flags are relevant.
  auto w = apply_overrides(run.config, flags);
  run.warnings.insert(run.warnings.end(), w.begin(), w.end());

  const auto train_docs = run.corpus.documents_in(Split::train);
  if (!o.expert_order.empty()) {
    std::ifstream in(o.expert_order);
    if (!in) throw DataError("cannot read " + o.expert_order);
    run.expert_order = load_expert_order(in, run.corpus.inventory(),
                                         role_frequencies(train_docs, run.corpus.inventory().size()));
    run.inputs.expert_order = &*run.expert_order;
    run.input_hashes["expert_order"] = git_blob_hash(read_file(o.expert_order));
  }
  if (!o.confusion.empty()) {
    run.inputs.confusion = confusion_from_json(read_json(o.confusion), run.corpus.inventory());
    run.input_hashes["confusion"] = git_blob_hash(read_file(o.confusion));
  }
  if (!o.label_embeddings.empty()) {
    std::ifstream in(o.label_embeddings);
    if (!in) throw DataError("cannot read " + o.label_embeddings);
    run.inputs.label_embeddings = load_label_embeddings(in, run.corpus.inventory());
    run.input_hashes["label_embeddings"] = git_blob_hash(read_file(o.label_embeddings));
  }
  if (!o.sentence_embeddings.empty()) {
    std::ifstream in(o.sentence_embeddings);
    if (!in) throw DataError("cannot read " + o.sentence_embeddings);
    run.sentence_embeddings = SentenceEmbeddings::read(in);
    run.inputs.sentence_embeddings = &*run.sentence_embeddings;
    run.input_hashes["sentence_embeddings"] = git_blob_hash(read_file(o.sentence_embeddings));
  }
}

std::optional<SentenceEmbeddings> maybe_sentence_embeddings(const std::string& path) {
  if (path.empty()) return std::nullopt;
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  return SentenceEmbeddings::read(in);
}

// ---------------------------------------------------------------------------
// Commands

void cmd_ingest(const std::vector<std::string>& inputs, const std::string& format, const std::string& out_path,
                const std::string& split, std::uint64_t seed, std::ostream& out) {
  std::string records;
  for (const auto& in : inputs) {
    if (format == "jsonl") {
      records += serialize_corpus(parse_corpus(read_file(in)));
    } else if (format == "build") {
      records += convert_build(read_file(in));
    } else if (format == "tsv") {
      records += convert_tsv_directory(in);
    } else {
      throw DataError("unknown format: " + format);
    }
  }
  Corpus corpus = parse_corpus(records);
  write_file(out_path, serialize_corpus(corpus));
  if (!split.empty()) {
    corpus = split_corpus(corpus, parse_ratios(split), seed);
    write_file(default_splits_path(out_path), serialize_splits(corpus));
  }
  out << stats_json(corpus).dump() << '\n';
}

void cmd_score(const std::string& corpus_path, const std::string& splits, const std::string& metric_name,
               const std::string& expert_path, double alpha, bool no_start, const std::string& out_path,
               std::size_t num_buckets, const std::string& buckets_out, const std::string& transitions_out) {
  const Corpus corpus = load_corpus(corpus_path, splits);
  const auto docs = corpus.documents_in(Split::train);
  if (docs.empty()) throw DataError("no training documents to score");
  const DifficultyMetric metric = parse_difficulty_metric(metric_name);

  const TransitionMatrix tm = estimate_transition_matrix(docs, corpus.inventory().size(), alpha);
  std::optional<CanonicalOrder> expert;
  ScoringInputs si;
  si.transitions = &tm;
  si.include_start = !no_start;
  if (metric == DifficultyMetric::expert_inversions) {
    if (expert_path.empty()) throw DataError("--metric expert-inv needs --expert-order");
    std::ifstream in(expert_path);
    if (!in) throw DataError("cannot read " + expert_path);
    expert = load_expert_order(in, corpus.inventory(), tm.role_counts);
    si.expert_order = &*expert;
  }
  const auto scores = score_documents(docs, metric, si);

  std::string csv = "doc_id,metric,value\n";
  for (const auto& s : scores) csv += s.doc_id + "," + std::string(to_string(s.metric)) + "," + format_double(s.value) + "\n";
  write_file(out_path, csv);
  if (!transitions_out.empty()) write_json(transitions_out, to_json(tm, corpus.inventory()));
  if (!buckets_out.empty()) {
    write_json(buckets_out, to_json(build_schedule(rank_and_bucket(scores, num_buckets), 1)));
  }
}

std::vector<DifficultyScore> read_scores_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<DifficultyScore> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("doc_id,", 0) == 0)) continue;
    const auto c2 = line.rfind(',');
    const auto c1 = c2 == std::string::npos || c2 == 0 ? std::string::npos : line.rfind(',', c2 - 1);
    if (c1 == std::string::npos) throw DataError(path + " line " + std::to_string(line_no) + ": expected doc_id,metric,value");
    DifficultyScore s;
    s.doc_id = line.substr(0, c1);
    s.metric = parse_difficulty_metric(line.substr(c1 + 1, c2 - c1 - 1));
    try {
      s.value = std::stod(line.substr(c2 + 1));
    } catch (const std::exception&) {
      throw DataError(path + " line " + std::to_string(line_no) + ": bad value");
    }
    scores.push_back(std::move(s));
  }
  return scores;
}

void cmd_simmatrix(const std::string& source_name, const std::string& in_path, double eta, double epsilon,
                   std::size_t max_steps, const std::string& out_path) {
  const SimilaritySource source = parse_similarity_source(source_name);
  RoleInventory inventory;
  SimilarityMatrix sim;
  if (source == SimilaritySource::confusion) {
    const json j = read_json(in_path);
    try {
      inventory = RoleInventory(j.at("roles").get<std::vector<std::string>>());
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed confusion matrix: ") + e.what());
    }
    sim = similarity_from_confusion(confusion_from_json(j, inventory));
  } else {
    std::ifstream in(in_path);
    if (!in) throw DataError("cannot read " + in_path);
    auto rows = read_label_embeddings(in);
    std::vector<std::string> names;
    for (const auto& r : rows) names.push_back(r.first);
    inventory = RoleInventory::from_names(names);
    std::vector<std::vector<double>> vectors(inventory.size());
    for (auto& [name, vec] : rows) vectors[inventory.id(name)] = std::move(vec);
    sim = similarity_from_embeddings(vectors);
  }
  const TargetMatrix v0 = init_target_matrix(sim, eta, epsilon);
  const int steps = annealing_steps(v0, 1e-4, static_cast<int>(max_steps));
  json trajectory = json::array();
  TargetMatrix v = v0;
  for (int t = 0; t <= steps; ++t) {
    trajectory.push_back(v.max_off_diagonal_mass());
    v = update_target_matrix(v);
  }
  write_json(out_path, {{"similarity", to_json(sim, inventory)},
                        {"initial_targets", to_json(v0, inventory)},
                        {"eta", eta},
                        {"annealing_steps", steps},
                        {"off_diagonal_mass_by_step", std::move(trajectory)}});
}

void cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  PreparedRun run;
  prepare_run(o, run);
  for (const auto& w : run.warnings) err << "warning: " << w << '\n';
  const TrainResult result = train(run.corpus, run.config, run.inputs);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';

  StrategyConfig resolved = run.config;
  resolved.features = result.model.encoder.config();
  json manifest = manifest_json(result, resolved);
  manifest["inputs"] = run.input_hashes;
  manifest["config_warnings"] = run.warnings;

  const fs::path dir(o.out);
  fs::create_directories(dir);
  save_model(result.model, (dir / "model.json").string());
  write_json((dir / "metrics.json").string(), metrics_json(result));
  write_json((dir / "epochs.json").string(), epoch_log_json(result));
  write_json((dir / "manifest.json").string(), manifest);
  out << metrics_json(result).dump() << '\n';
}

void cmd_grid(const TrainOptions& o, const std::vector<std::string>& axes, std::ostream& out, std::ostream& err) {
  PreparedRun run;
  prepare_run(o, run);
  for (const auto& w : run.warnings) err << "warning: " << w << '\n';
  GridSpec grid;
  for (const auto& a : axes) {
    if (a == "lr") grid.lr = kLearningRateGrid;
    else if (a == "rc-interval") grid.rc_interval = kRcIntervalGrid;
    else if (a == "epsilon") grid.epsilon = kEpsilonGrid;
    else if (a == "num-buckets") grid.num_buckets = kBucketGrid;
    else if (a == "epochs-per-stage") grid.epochs_per_stage = kEpochsPerStageGrid;
    else throw DataError("unknown sweep axis: " + a);
  }
  const auto results = run_grid(run.corpus, run.config, grid, run.inputs);
  json rows = json::array();
  for (const auto& r : results) {
    rows.push_back({{"config", to_json(r.config)},
                    {"best_epoch", r.best_epoch},
                    {"val_macro_f1", r.val_macro_f1},
                    {"val_micro_f1", r.val_micro_f1}});
  }
  write_json(o.out, {{"results", rows}, {"inputs", run.input_hashes}});
  out << rows.size() << " grid points written to " << o.out << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Curriculum learning toolkit for rhetorical role labeling", "culr"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate or convert a corpus into line-delimited records");
  std::vector<std::string> ingest_in;
  std::string ingest_format = "jsonl", ingest_out, ingest_split;
  std::uint64_t ingest_seed = 0;
  ingest->add_option("--in", ingest_in, "Input file(s); a directory for --format tsv")->required();
  ingest->add_option("--format", ingest_format, "jsonl | build | tsv")
      ->check(CLI::IsMember({"jsonl", "build", "tsv"}));
  ingest->add_option("--out", ingest_out, "Output corpus file")->required();
  ingest->add_option("--split", ingest_split, "Also write <out>.splits.jsonl with train,val,test ratios, e.g. 0.8,0.1,0.1");
  ingest->add_option("--seed", ingest_seed, "Split seed");

  // split
  auto* split = app.add_subcommand("split", "Write a document-level split sidecar");
  std::string split_corpus_path, split_ratios = "0.8,0.1,0.1", split_out;
  std::uint64_t split_seed = 0;
  split->add_option("--corpus", split_corpus_path, "Corpus file")->required();
  split->add_option("--ratios", split_ratios, "train,val,test ratios");
  split->add_option("--seed", split_seed, "Split seed");
  split->add_option("--out", split_out, "Sidecar path (default: <corpus>.splits.jsonl)");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with a planted discourse order");
  SyntheticConfig synth_cfg;
  std::string synth_out, synth_order = "noisy", synth_split = "0.8,0.1,0.1";
  synth->add_option("--out", synth_out, "Output corpus file")->required();
  synth->add_option("--documents", synth_cfg.num_documents, "Number of documents");
  synth->add_option("--roles", synth_cfg.num_roles, "Number of roles");
  synth->add_option("--order", synth_order, "noisy | bimodal")->check(CLI::IsMember({"noisy", "bimodal"}));
  synth->add_option("--noise", synth_cfg.noise, "Per-sentence role noise for --order noisy");
  synth->add_option("--seed", synth_cfg.seed, "Generator and split seed");
  synth->add_option("--split", synth_split, "train,val,test ratios for <out>.splits.jsonl");

  // score
  auto* score = app.add_subcommand("score", "Per-document difficulty of the training split");
  std::string score_corpus, score_splits, score_metric, score_expert, score_out, score_buckets_out, score_tm_out;
  double score_alpha = 1.0;
  bool score_no_start = false;
  std::size_t score_buckets = 5;
  score->add_option("--corpus", score_corpus, "Corpus file")->required();
  score->add_option("--splits", score_splits, "Split sidecar (default: <corpus>.splits.jsonl)");
  score->add_option("--metric", score_metric, "shifts | expert-inv | data-inv | neg-loglik")
      ->required()
      ->check(CLI::IsMember({"shifts", "expert-inv", "data-inv", "neg-loglik"}));
  score->add_option("--expert-order", score_expert, "Expert role order, one role per line");
  score->add_option("--alpha", score_alpha, "Additive transition smoothing");
  score->add_flag("--no-start", score_no_start, "Drop the initial-role term of neg-loglik");
  score->add_option("--out", score_out, "Output CSV doc_id,metric,value")->required();
  score->add_option("--num-buckets", score_buckets, "Buckets for --buckets-out");
  score->add_option("--buckets-out", score_buckets_out, "Also write a JSON bucket report");
  score->add_option("--transitions-out", score_tm_out, "Also write the transition matrix as JSON");

  // buckets
  auto* buckets = app.add_subcommand("buckets", "Cut difficulty scores into baby-step stages");
  std::string buckets_scores, buckets_out;
  std::size_t buckets_num = 0, buckets_epochs = 1;
  buckets->add_option("--scores", buckets_scores, "CSV from the score command")->required();
  buckets->add_option("--num-buckets", buckets_num, "Number of buckets (grid 3,5,7,10,12,15)")->required();
  buckets->add_option("--epochs-per-stage", buckets_epochs, "Epochs per stage");
  buckets->add_option("--out", buckets_out, "Output JSON stage plan")->required();

  // simmatrix
  auto* simm = app.add_subcommand("simmatrix", "Build a role similarity and initial target matrix");
  std::string sim_source, sim_in, sim_out;
  double sim_eta = 0.5, sim_epsilon = 0.9;
  std::size_t sim_max_steps = 0;
  simm->add_option("--source", sim_source, "confusion | embedding")
      ->required()
      ->check(CLI::IsMember({"confusion", "embedding"}));
  simm->add_option("--in", sim_in, "Confusion JSON or role<TAB>vector file")->required();
  simm->add_option("--eta", sim_eta, "Initial off-diagonal target mass");
  simm->add_option("--epsilon", sim_epsilon, "Decay factor");
  simm->add_option("--max-steps", sim_max_steps, "Cap on reported annealing steps (0 = until one-hot)");
  simm->add_option("--out", sim_out, "Output JSON")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a labeler under a curriculum strategy");
  TrainOptions train_opts;
  add_train_options(train_cmd, train_opts);
  train_cmd->add_option("--out", train_opts.out, "Output directory")->required();

  // grid
  auto* grid_cmd = app.add_subcommand("grid", "Sweep hyperparameter grids and rank by validation micro-F1");
  TrainOptions grid_opts;
  std::vector<std::string> grid_axes;
  add_train_options(grid_cmd, grid_opts);
  grid_cmd->add_option("--sweep", grid_axes, "Axes: lr, rc-interval, epsilon, num-buckets, epochs-per-stage")
      ->delimiter(',');
  grid_cmd->add_option("--out", grid_opts.out, "Output JSON")->required();

  // eval / confusion
  std::string eval_model, eval_corpus, eval_splits, eval_split = "test", eval_out, eval_emb;
  auto* eval_cmd = app.add_subcommand("eval", "Score a trained model on one split");
  eval_cmd->add_option("--model", eval_model, "model.json from train")->required();
  eval_cmd->add_option("--corpus", eval_corpus, "Corpus file")->required();
  eval_cmd->add_option("--splits", eval_splits, "Split sidecar (default: <corpus>.splits.jsonl)");
  eval_cmd->add_option("--split", eval_split, "train | val | test")->check(CLI::IsMember({"train", "val", "test"}));
  eval_cmd->add_option("--sentence-embeddings", eval_emb, "doc<TAB>index<TAB>vector file");
  eval_cmd->add_option("--out", eval_out, "Output metrics JSON")->required();

  std::string conf_model, conf_corpus, conf_splits, conf_split = "val", conf_out, conf_emb;
  auto* conf_cmd = app.add_subcommand("confusion", "Export a model's confusion matrix on one split");
  conf_cmd->add_option("--model", conf_model, "model.json from train")->required();
  conf_cmd->add_option("--corpus", conf_corpus, "Corpus file")->required();
  conf_cmd->add_option("--splits", conf_splits, "Split sidecar (default: <corpus>.splits.jsonl)");
  conf_cmd->add_option("--split", conf_split, "train | val | test")->check(CLI::IsMember({"train", "val", "test"}));
  conf_cmd->add_option("--sentence-embeddings", conf_emb, "doc<TAB>index<TAB>vector file");
  conf_cmd->add_option("--out", conf_out, "Output confusion JSON")->required();

  std::vector<std::string> argv_store{"culr"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*ingest) {
      cmd_ingest(ingest_in, ingest_format, ingest_out, ingest_split, ingest_seed, out);
    } else if (*split) {
      Corpus corpus = load_corpus(split_corpus_path, "");
      corpus = split_corpus(corpus, parse_ratios(split_ratios), split_seed);
      write_file(split_out.empty() ? default_splits_path(split_corpus_path) : split_out, serialize_splits(corpus));
      out << stats_json(corpus).dump() << '\n';
    } else if (*synth) {
      synth_cfg.order = synth_order == "bimodal" ? SyntheticOrder::bimodal : SyntheticOrder::noisy;
      Corpus corpus = generate_synthetic_corpus(synth_cfg);
      corpus = split_corpus(corpus, parse_ratios(synth_split), synth_cfg.seed);
      write_file(synth_out, serialize_corpus(corpus));
      write_file(default_splits_path(synth_out), serialize_splits(corpus));
      out << stats_json(corpus).dump() << '\n';
    } else if (*score) {
      cmd_score(score_corpus, score_splits, score_metric, score_expert, score_alpha, score_no_start, score_out,
                score_buckets, score_buckets_out, score_tm_out);
    } else if (*buckets) {
      const auto schedule = build_schedule(rank_and_bucket(read_scores_csv(buckets_scores), buckets_num), buckets_epochs);
      write_json(buckets_out, to_json(schedule));
    } else if (*simm) {
      cmd_simmatrix(sim_source, sim_in, sim_eta, sim_epsilon, sim_max_steps, sim_out);
    } else if (*train_cmd) {
      cmd_train(train_opts, out, err);
    } else if (*grid_cmd) {
      cmd_grid(grid_opts, grid_axes, out, err);
    } else if (*eval_cmd) {
      const Model model = load_model(eval_model);
      const Corpus corpus = load_corpus(eval_corpus, eval_splits);
      if (!(corpus.inventory() == model.inventory)) throw DataError("corpus roles differ from the model's roles");
      const auto emb = maybe_sentence_embeddings(eval_emb);
      const Metrics m = evaluate(model, corpus.documents_in(parse_split(eval_split)), emb ? &*emb : nullptr);
      json j = to_json(m, model.inventory);
      j["split"] = eval_split;
      write_json(eval_out, j);
      out << json{{"macro_f1", m.macro_f1}, {"micro_f1", m.micro_f1}}.dump() << '\n';
    } else if (*conf_cmd) {
      const Model model = load_model(conf_model);
      const Corpus corpus = load_corpus(conf_corpus, conf_splits);
      if (!(corpus.inventory() == model.inventory)) throw DataError("corpus roles differ from the model's roles");
      const auto docs = corpus.documents_in(parse_split(conf_split));
      if (docs.empty()) throw DataError("split " + conf_split + " has no documents");
      const auto emb = maybe_sentence_embeddings(conf_emb);
      json j = confusion_json(confusion_matrix(model, docs, emb ? &*emb : nullptr), model.inventory);
      j["split"] = conf_split;
      write_json(conf_out, j);
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kSuccess;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace culr::cli
