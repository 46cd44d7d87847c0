#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "culr/cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run culr_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = culr::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

const char* kToy =
    "{\"id\": \"a\", \"sentences\": [\"x\", \"y\", \"z\", \"w\"], \"labels\": [\"A\", \"B\", \"A\", \"B\"]}\n"
    "{\"id\": \"b\", \"sentences\": [\"x\", \"y\", \"z\"], \"labels\": [\"A\", \"A\", \"A\"]}\n"
    "{\"id\": \"c\", \"sentences\": [\"p\", \"q\", \"r\", \"s\", \"t\"], \"labels\": [\"F\", \"F\", \"Arg\", \"R\", \"R\"]}\n";

}  // namespace

TEST_CASE("cli: usage errors and help") {
  CHECK(culr_run({}).code == culr::cli::kUsageError);
  CHECK(culr_run({"frobnicate"}).code == culr::cli::kUsageError);
  CHECK(culr_run({"train", "--out", "x"}).code == culr::cli::kUsageError);
  const Run help = culr_run({"train", "--help"});
  CHECK(help.code == culr::cli::kSuccess);
  for (const char* flag : {"--strategy", "--dc-metric", "--rc-source", "--epsilon", "--rc-interval", "--seed",
                           "--num-buckets", "--epochs-per-stage", "--eta", "--confusion", "--config"}) {
    CHECK(help.out.find(flag) != std::string::npos);
  }
}

TEST_CASE("cli: shifts scores on the toy corpus") {
  TempDir dir("culr_cli_score");
  std::ofstream(dir / "toy.jsonl") << kToy;
  const Run r = culr_run({"score", "--corpus", dir / "toy.jsonl", "--metric", "shifts", "--out", dir / "s.csv"});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "s.csv") == "doc_id,metric,value\na,shifts,0.75\nb,shifts,0\nc,shifts,0.40000000000000002\n");

  const Run b = culr_run({"buckets", "--scores", dir / "s.csv", "--num-buckets", "2", "--out", dir / "b.json"});
  REQUIRE(b.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "b.json"));
  CHECK(j.at("buckets").at(0) == nlohmann::json::array({"b", "c"}));

  CHECK(culr_run({"score", "--corpus", dir / "toy.jsonl", "--metric", "expert-inv", "--out", dir / "e.csv"}).code ==
        culr::cli::kDataError);
  CHECK(culr_run({"score", "--corpus", dir / "missing.jsonl", "--metric", "shifts", "--out", dir / "e.csv"}).code ==
        culr::cli::kDataError);
}

TEST_CASE("cli: synth, train, eval and confusion") {
  TempDir dir("culr_cli_train");
  REQUIRE(culr_run({"synth", "--out", dir / "c.jsonl", "--documents", "30", "--roles", "3", "--seed", "2"}).code == 0);
  CHECK(fs::exists(dir / "c.jsonl.splits.jsonl"));

  const std::vector<std::string> base{"train", "--corpus", dir / "c.jsonl", "--strategy", "baseline", "--seed", "7",
                                      "--total-epochs", "3", "--hash-bits", "8"};
  auto with_out = [&](std::vector<std::string> args, const std::string& out) {
    args.push_back("--out");
    args.push_back(out);
    return args;
  };
  REQUIRE(culr_run(with_out(base, dir / "r1")).code == 0);
  REQUIRE(culr_run(with_out(base, dir / "r2")).code == 0);
  for (const char* f : {"metrics.json", "epochs.json", "model.json"}) {
    CHECK(slurp(dir.path / "r1" / f) == slurp(dir.path / "r2" / f));
  }
  const auto manifest = nlohmann::json::parse(slurp(dir.path / "r1" / "manifest.json"));
  CHECK(manifest.at("config").at("seed") == 7);
  CHECK(manifest.at("inputs").contains("corpus"));
  CHECK(manifest.at("inputs").contains("splits"));

  const Run hi = culr_run(with_out({"train", "--corpus", dir / "c.jsonl", "--strategy", "hiculr"}, dir / "h"));
  CHECK(hi.code == culr::cli::kDataError);
  CHECK(hi.err.find("--confusion") != std::string::npos);

  REQUIRE(culr_run({"confusion", "--model", dir / "r1/model.json", "--corpus", dir / "c.jsonl", "--split", "val",
                    "--out", dir / "conf.json"})
              .code == 0);
  const Run h2 = culr_run(with_out({"train", "--corpus", dir / "c.jsonl", "--strategy", "hiculr", "--confusion",
                                    dir / "conf.json", "--hash-bits", "8", "--epsilon", "0.2", "--rc-interval", "1",
                                    "--num-buckets", "2", "--epochs-per-stage", "1", "--total-epochs", "2"},
                                   dir / "h2"));
  CHECK(h2.code == 0);

  const Run ev = culr_run({"eval", "--model", dir / "r1/model.json", "--corpus", dir / "c.jsonl", "--split", "test",
                           "--out", dir / "ev.json"});
  CHECK(ev.code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "ev.json")).at("split") == "test");

  REQUIRE(culr_run({"simmatrix", "--source", "confusion", "--in", dir / "conf.json", "--out", dir / "sim.json"}).code ==
          0);
  const auto sim = nlohmann::json::parse(slurp(dir / "sim.json"));
  CHECK(sim.at("initial_targets").at("step") == 0);

  std::ofstream(dir / "cfg.json") << "{\"seed\": 7, \"total_epochs\": 3, \"hash_bits\": 8, \"bogus\": 1}";
  CHECK(culr_run(with_out({"train", "--corpus", dir / "c.jsonl", "--config", dir / "cfg.json"}, dir / "r3")).code ==
        culr::cli::kDataError);
  std::ofstream(dir / "cfg.json") << "{\"seed\": 7, \"total_epochs\": 3, \"hash_bits\": 8, \"epsilon\": 0.5}";
  const Run cfg = culr_run(with_out({"train", "--corpus", dir / "c.jsonl", "--config", dir / "cfg.json"}, dir / "r3"));
  CHECK(cfg.code == 0);
  CHECK(cfg.err.find("epsilon is ignored") != std::string::npos);
  CHECK(slurp(dir.path / "r3" / "metrics.json") == slurp(dir.path / "r1" / "metrics.json"));
}

TEST_CASE("cli: seed defaults to CULR_SEED") {
  TempDir dir("culr_cli_seed");
  REQUIRE(culr_run({"synth", "--out", dir / "c.jsonl", "--documents", "20", "--roles", "2"}).code == 0);
  ::setenv("CULR_SEED", "41", 1);
  const Run r = culr_run({"train", "--corpus", dir / "c.jsonl", "--total-epochs", "1", "--hash-bits", "6", "--out",
                          dir / "r"});
  ::unsetenv("CULR_SEED");
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(slurp(dir.path / "r" / "manifest.json")).at("config").at("seed") == 41);
}

TEST_CASE("cli: ingest with split sidecar") {
  TempDir dir("culr_cli_ingest");
  std::ofstream(dir / "toy.jsonl") << kToy;
  const Run r = culr_run({"ingest", "--in", dir / "toy.jsonl", "--out", dir / "out.jsonl", "--split", "0.34,0.33,0.33"});
  REQUIRE(r.code == 0);
  const auto stats = nlohmann::json::parse(r.out);
  CHECK(stats.at("documents") == 3);
  CHECK(stats.at("sentences") == 12);
  CHECK(stats.at("roles") == 5);
  CHECK(fs::exists(dir / "out.jsonl.splits.jsonl"));
  std::ofstream(dir / "bad.jsonl") << "{\"id\": \"x\", \"sentences\": [\"a\"], \"labels\": []}\n";
  const Run bad = culr_run({"ingest", "--in", dir / "bad.jsonl", "--out", dir / "o.jsonl"});
  CHECK(bad.code == culr::cli::kDataError);
  CHECK(bad.err.find("line 1") != std::string::npos);
}
