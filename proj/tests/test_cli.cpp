#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ssc/cli.hpp"
#include "ssc/corpus.hpp"
#include "support/helpers.hpp"

using namespace ssc;
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  std::string err;
  CHECK(run({}, nullptr, &err) == 1);
  CHECK(run({"train", "--model", "cls-crf", "--task", "summarize", "--train",
             "x", "--dev", "x", "--test", "x", "--out", "x"},
            nullptr, &err) == 1);
  CHECK(err.find("classification-only") != std::string::npos);
  CHECK(run({"no-such-command"}, nullptr, &err) == 1);
}

TEST_CASE("missing data paths exit with code 2") {
  CHECK(run({"train", "--train", "/no/such/file", "--dev", "x", "--test", "x",
             "--out", "x"}) == 2);
  CHECK(run({"eval", "--ckpt", "/no/such/dir", "--data", "/no/such/file"}) ==
        2);
}

TEST_CASE("gen writes deterministic files with the requested sizes") {
  const std::string dir = ssct::scratch_dir("cli_gen");
  const std::vector<std::string> args = {
      "gen",   "--task", "classify", "--seed",      "5",
      "--train", "12",   "--dev",    "4",           "--test", "6",
      "--sentences", "5", "--out",   dir + "/first"};
  CHECK(run(args) == 0);
  CHECK(load_jsonl(dir + "/first/train.jsonl").size() == 12);
  CHECK(load_jsonl(dir + "/first/dev.jsonl").size() == 4);
  CHECK(load_jsonl(dir + "/first/test.jsonl").size() == 6);

  std::vector<std::string> again = args;
  again.back() = dir + "/second";
  CHECK(run(again) == 0);
  for (const char* name : {"train.jsonl", "dev.jsonl", "test.jsonl"}) {
    CHECK(ssct::bytes_equal(dir + "/first/" + name, dir + "/second/" + name));
  }
}

TEST_CASE("train, eval and attn run end to end") {
  const std::string dir = ssct::scratch_dir("cli_train");
  REQUIRE(run({"gen", "--seed", "9", "--train", "24", "--dev", "8", "--test",
               "8", "--sentences", "4", "--out", dir + "/data"}) == 0);

  std::string out;
  const int code = run(
      {"train",
       "--task", "classify",
       "--model", "joint",
       "--train", dir + "/data/train.jsonl",
       "--dev", dir + "/data/dev.jsonl",
       "--test", dir + "/data/test.jsonl",
       "--out", dir + "/run",
       "--lr", "1e-3",
       "--epochs", "2",
       "--seeds", "1",
       "--layers", "1",
       "--heads", "2",
       "--hidden", "16",
       "--ff", "32",
       "--micro-batch", "8",
       "--effective-batch", "8"},
      &out);
  CHECK(code == 0);
  CHECK(fs::exists(dir + "/run/checkpoint/model.json"));
  CHECK(fs::exists(dir + "/run/checkpoint/manifest.txt"));
  CHECK(fs::exists(dir + "/run/metrics.json"));
  CHECK(fs::exists(dir + "/run/run_manifest.json"));
  // one json object per epoch appears on stdout
  CHECK(out.find("\"epoch\":1") != std::string::npos);
  CHECK(out.find("\"epoch\":2") != std::string::npos);

  std::string eval_out;
  CHECK(run({"eval", "--ckpt", dir + "/run/checkpoint", "--data",
             dir + "/data/test.jsonl"},
            &eval_out) == 0);
  CHECK(eval_out.find("micro_f1") != std::string::npos);

  // attention export: header + one row per token, single layer selected
  std::string attn_out;
  CHECK(run({"attn", "--ckpt", dir + "/run/checkpoint", "--data",
             dir + "/data/test.jsonl", "--layer", "0", "--out",
             dir + "/attn"},
            &attn_out) == 0);
  std::ifstream csv(dir + "/attn/attn_layer0.csv");
  REQUIRE(csv.good());
  std::string line;
  std::size_t rows = 0, cols = 0;
  while (std::getline(csv, line)) {
    if (rows == 0) {
      cols = std::count(line.begin(), line.end(), ',');
    }
    ++rows;
  }
  // ordered_json report on stdout gives the token count
  const auto report = ordered_json::parse(
      attn_out.substr(attn_out.rfind('\n', attn_out.size() - 2) + 1));
  CHECK(rows == report["tokens"].get<std::size_t>() + 1);
  CHECK(cols == report["tokens"].get<std::size_t>());

  CHECK(run({"attn", "--ckpt", dir + "/run/checkpoint", "--data",
             dir + "/data/test.jsonl", "--layer", "7", "--out",
             dir + "/attn"}) == 1);

  // single-head trace: max over one head is the softmax itself, so every
  // data row of the exported matrix sums to 1
  REQUIRE(run({"attn", "--random-init", "--vocab",
               dir + "/run/checkpoint/vocab.txt", "--seed", "3", "--layers",
               "1", "--heads", "1", "--hidden", "16", "--ff", "32", "--data",
               dir + "/data/test.jsonl", "--all", "--out",
               dir + "/attn_single"}) == 0);
  std::ifstream single_csv(dir + "/attn_single/attn_layer0.csv");
  REQUIRE(single_csv.good());
  std::string header;
  std::getline(single_csv, header);
  std::string row;
  std::size_t data_rows = 0;
  while (std::getline(single_csv, row)) {
    ++data_rows;
    double total = 0.0;
    std::size_t at = row.find("\","), count = 0;
    REQUIRE(at != std::string::npos);
    std::stringstream values(row.substr(at + 2));
    std::string cell;
    while (std::getline(values, cell, ',')) {
      total += std::stod(cell);
      ++count;
    }
    CHECK(count > 0);
    CHECK(std::abs(total - 1.0) <= 1e-6);
  }
  CHECK(data_rows > 0);

  // label-set mismatch between checkpoint and data
  write_file(dir + "/weird.jsonl",
             R"({"doc_id":"w","sentences":["a b"],"labels":["gamma"]})" "\n");
  std::string err;
  CHECK(run({"eval", "--ckpt", dir + "/run/checkpoint", "--data",
             dir + "/weird.jsonl"},
            nullptr, &err) == 2);
  CHECK(err.find("label-set mismatch") != std::string::npos);
}

TEST_CASE("summarization eval selects the whole document when short") {
  const std::string dir = ssct::scratch_dir("cli_summ");
  REQUIRE(run({"gen", "--task", "summarize", "--seed", "11", "--train", "8",
               "--dev", "2", "--test", "4", "--sentences", "8",
               "--highlights", "2", "--out", dir + "/data"}) == 0);
  REQUIRE(run({"train", "--task", "summarize", "--train",
               dir + "/data/train.jsonl", "--dev", dir + "/data/dev.jsonl",
               "--test", dir + "/data/test.jsonl", "--out", dir + "/run",
               "--lr", "1e-3", "--epochs", "1", "--seeds", "1", "--layers",
               "1", "--heads", "2", "--hidden", "16", "--ff", "32",
               "--micro-batch", "4", "--effective-batch", "4"}) == 0);
  std::string out;
  REQUIRE(run({"eval", "--ckpt", dir + "/run/checkpoint", "--data",
               dir + "/data/test.jsonl"},
              &out) == 0);
  // 8 sentences < top-10: every sentence is selected, so all planted
  // highlights are recovered no matter how poorly the model scores
  const auto report = ordered_json::parse(
      out.substr(out.rfind('\n', out.size() - 2) + 1));
  CHECK(report["task"] == "summarize");
  CHECK(report["highlight_recall"].get<double>() == 1.0);
  CHECK(report["rouge_l_f"].get<double>() > 0.0);
}

TEST_CASE("train repeated with the same seed is byte-identical") {
  const std::string dir = ssct::scratch_dir("cli_det");
  REQUIRE(run({"gen", "--seed", "3", "--train", "12", "--dev", "4", "--test",
               "4", "--sentences", "4", "--out", dir + "/data"}) == 0);
  const auto train_into = [&dir](const std::string& out_dir) {
    return run({"train", "--train", dir + "/data/train.jsonl", "--dev",
                dir + "/data/dev.jsonl", "--test", dir + "/data/test.jsonl",
                "--out", out_dir, "--lr", "1e-3", "--epochs", "2", "--seeds",
                "7", "--layers", "1", "--heads", "2", "--hidden", "16",
                "--ff", "32", "--micro-batch", "4", "--effective-batch",
                "8"});
  };
  REQUIRE(train_into(dir + "/a") == 0);
  REQUIRE(train_into(dir + "/b") == 0);
  CHECK(ssct::bytes_equal(dir + "/a/metrics.json", dir + "/b/metrics.json"));
  for (const auto& entry :
       fs::directory_iterator(dir + "/a/checkpoint")) {
    const std::string name = entry.path().filename().string();
    CHECK(ssct::bytes_equal(entry.path().string(),
                            dir + "/b/checkpoint/" + name));
  }
}

TEST_CASE("config file supplies options and flags override it") {
  const std::string dir = ssct::scratch_dir("cli_config");
  write_file(dir + "/gen.cfg",
             "task=classify\nseed=5\ntrain=6\ndev=2\ntest=2\nsentences=3\n"
             "out=" + dir + "/from_config\n");
  CHECK(run({"gen", "--config", dir + "/gen.cfg"}) == 0);
  CHECK(load_jsonl(dir + "/from_config/train.jsonl").size() == 6);
  CHECK(load_jsonl(dir + "/from_config/train.jsonl")[0].sentences.size() == 3);

  // the command line wins over the file
  CHECK(run({"gen", "--config", dir + "/gen.cfg", "--sentences", "5", "--out",
             dir + "/override"}) == 0);
  CHECK(load_jsonl(dir + "/override/train.jsonl")[0].sentences.size() == 5);
}

TEST_CASE("aggregate applies qualification and confidence splitting") {
  const std::string dir = ssct::scratch_dir("cli_agg");
  // w_low is below the default 0.75 threshold and must not influence anything
  write_file(dir + "/workers.json",
             R"({"w1":0.9,"w2":0.8,"w3":0.8,"w4":0.78,"w5":0.77,)"
             R"("w_low":0.74,"w_perfect":1.0})");
  std::ostringstream votes;
  // accuracy-weighted plurality over the qualified voters; the disqualified
  // worker's extra vote for A must not flip the result
  votes << R"({"doc_id":"d1","sentences":["s1"],"votes":[[)"
        << R"({"worker":"w1","label":"A"},{"worker":"w2","label":"A"},)"
        << R"({"worker":"w3","label":"B"},{"worker":"w4","label":"B"},)"
        << R"({"worker":"w5","label":"B"},{"worker":"w_low","label":"A"}]]})"
        << "\n";
  // several unanimous documents so the split has material
  for (int i = 0; i < 9; ++i) {
    votes << R"({"doc_id":"u)" << i
          << R"(","sentences":["s"],"votes":[[{"worker":"w_perfect","label":"A"}]]})"
          << "\n";
  }
  write_file(dir + "/votes.jsonl", votes.str());

  std::string out;
  CHECK(run({"aggregate", "--votes", dir + "/votes.jsonl", "--workers",
             dir + "/workers.json", "--out", dir + "/agg", "--labels",
             "A,B"},
            &out) == 0);
  const auto docs = load_jsonl(dir + "/agg/aggregated.jsonl");
  REQUIRE(docs.size() == 10);
  CHECK(docs[0].labels == std::vector<std::string>{"B"});  // 2.35 beats 1.7
  CHECK(*docs[0].confidence ==
        doctest::Approx(2.35 / 4.05).epsilon(1e-12));
  for (std::size_t i = 1; i < docs.size(); ++i) {
    CHECK(*docs[i].confidence == 1.0);  // unanimous
  }
  CHECK(load_jsonl(dir + "/agg/train.jsonl").size() +
            load_jsonl(dir + "/agg/dev.jsonl").size() +
            load_jsonl(dir + "/agg/test.jsonl").size() ==
        10);

  // a sentence left with no qualified votes names itself in the error
  write_file(dir + "/starved.jsonl",
             R"({"doc_id":"d9","sentences":["s1","s2"],"votes":[)"
             R"([{"worker":"w1","label":"A"}],[{"worker":"w_low","label":"A"}]]})"
             "\n");
  std::string err;
  CHECK(run({"aggregate", "--votes", dir + "/starved.jsonl", "--workers",
             dir + "/workers.json", "--out", dir + "/agg2"},
            nullptr, &err) == 2);
  CHECK(err.find("d9[1]") != std::string::npos);
}
