#include "ssc/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssc/corpus.hpp"
#include "ssc/error.hpp"
#include "ssc/hash.hpp"
#include "ssc/metrics.hpp"
#include "ssc/trainer.hpp"

namespace ssc {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---- shared helpers ---------------------------------------------------------

std::vector<Document> load_documents(const std::string& path,
                                     const std::string& format) {
  if (format == "jsonl") return load_jsonl(path);
  if (format == "rct") return load_rct(path);
  throw UsageError("unknown format '" + format + "' (expected jsonl or rct)");
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) {
    throw DataError(std::string(what) + " not found: " + path);
  }
}

/// Start-of-run record: the command, every effective option, and content
/// hashes of the inputs. Enough to reproduce the run.
void emit_manifest(const std::string& command, const json& options,
                   const std::vector<std::string>& input_paths,
                   std::ostream& out, const std::string& save_dir = "") {
  json manifest;
  manifest["command"] = command;
  manifest["options"] = options;
  json inputs = json::object();
  for (const std::string& path : input_paths) {
    inputs[path] = git_blob_hash(path);
  }
  manifest["inputs"] = inputs;
  out << manifest.dump() << '\n';
  if (!save_dir.empty()) {
    fs::create_directories(save_dir);
    std::ofstream file(fs::path(save_dir) / "run_manifest.json",
                       std::ios::binary);
    file << manifest.dump(2) << '\n';
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

/// Expands `--config FILE` into `--key=value` arguments. Keys already given
/// on the command line keep their values: flags override the file.
std::vector<std::string> expand_config_args(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (config_path.empty()) {
    return args;
  }
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    throw UsageError("cannot open config file: " + config_path);
  }
  auto already_given = [&args](const std::string& key) {
    const std::string bare = "--" + key;
    const std::string with_value = bare + "=";
    for (const std::string& arg : args) {
      if (arg == bare || arg.rfind(with_value, 0) == 0) return true;
    }
    return false;
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw UsageError(config_path + ":" + std::to_string(line_no) +
                       ": expected key=value");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || key == "config") {
      throw UsageError(config_path + ":" + std::to_string(line_no) +
                       ": bad key");
    }
    if (!already_given(key)) {
      args.push_back("--" + key + "=" + value);
    }
  }
  return args;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out.push_back(c);
  }
  out += '"';
  return out;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string task = "classify";
  std::string model = "joint";
  std::string train_path, dev_path, test_path;
  std::string format = "jsonl";
  std::string vocab_path;
  std::size_t vocab_cap = 5000;
  std::string out_dir;
  std::vector<double> learning_rates = {2e-5};
  std::size_t epochs = 3;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::size_t threshold = 10;
  std::size_t baseline_split = 30;
  std::size_t micro_batch = 8;
  std::size_t effective_batch = 32;
  double dropout = 0.1;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t hidden = 64;
  std::size_t ff = 256;
  std::size_t max_positions = 512;
  std::size_t head_hidden = 0;
  std::vector<std::string> labels;
  bool sentence_cls = false;
  bool no_context = false;
  bool use_abstract_rouge = false;
};

void add_train_command(CLI::App& app, TrainArgs& a, int& result,
                       std::ostream& out) {
  CLI::App* cmd = app.add_subcommand("train", "Train a model");
  cmd->add_option("--config", "Read options from a key=value file (flags override it)")->type_name("FILE");
  cmd->add_option("--task", a.task, "classify | summarize");
  cmd->add_option("--model", a.model, "joint | cls-baseline | cls-crf");
  cmd->add_option("--train", a.train_path, "Training data")->required();
  cmd->add_option("--dev", a.dev_path, "Validation data")->required();
  cmd->add_option("--test", a.test_path, "Test data")->required();
  cmd->add_option("--format", a.format, "jsonl | rct");
  cmd->add_option("--vocab", a.vocab_path,
                  "Existing vocabulary file (default: build from train)");
  cmd->add_option("--vocab-cap", a.vocab_cap, "Vocabulary size cap");
  cmd->add_option("--out", a.out_dir, "Output directory")->required();
  cmd->add_option("--lr", a.learning_rates,
                  "Learning rate(s); several values run a grid")
      ->delimiter(',');
  cmd->add_option("--epochs", a.epochs, "Training epochs");
  cmd->add_option("--seeds", a.seeds, "Random seeds")->delimiter(',');
  cmd->add_option("--threshold", a.threshold,
                  "Sentence-count threshold for joint splits");
  cmd->add_option("--baseline-split", a.baseline_split,
                  "Chunk size for the per-sentence baselines");
  cmd->add_option("--micro-batch", a.micro_batch, "Examples per backward");
  cmd->add_option("--effective-batch", a.effective_batch,
                  "Examples per optimizer step (gradient accumulation)");
  cmd->add_option("--dropout", a.dropout, "Dropout rate");
  cmd->add_option("--layers", a.layers, "Encoder layers");
  cmd->add_option("--heads", a.heads, "Attention heads");
  cmd->add_option("--hidden", a.hidden, "Hidden width");
  cmd->add_option("--ff", a.ff, "Feedforward width");
  cmd->add_option("--max-positions", a.max_positions, "Position table size");
  cmd->add_option("--head-hidden", a.head_hidden,
                  "Head hidden width (0 = hidden)");
  cmd->add_option("--labels", a.labels, "Label order override")
      ->delimiter(',');
  cmd->add_flag("--sentence-cls", a.sentence_cls,
                "Classify on per-sentence [CLS] tokens instead of [SEP]");
  cmd->add_flag("--no-context", a.no_context,
                "Drop the baseline's contextualizing layer");
  cmd->add_flag("--abstract-rouge", a.use_abstract_rouge,
                "Append the abstract-overlap feature (summarization)");

  cmd->callback([&a, &result, &out]() {
    const ModelKind kind = model_kind_from(a.model);
    const TaskKind task = task_kind_from(a.task);
    if (kind == ModelKind::ClsCrf && task == TaskKind::Summarize) {
      throw UsageError("--model cls-crf cannot be combined with --task "
                       "summarize (the CRF baseline is classification-only)");
    }
    if (a.use_abstract_rouge && task != TaskKind::Summarize) {
      throw UsageError("--abstract-rouge requires --task summarize");
    }
    require_file(a.train_path, "training data");
    require_file(a.dev_path, "validation data");
    require_file(a.test_path, "test data");

    CorpusSplit corpus;
    corpus.train = load_documents(a.train_path, a.format);
    corpus.dev = load_documents(a.dev_path, a.format);
    corpus.test = load_documents(a.test_path, a.format);

    Vocab vocab;
    if (!a.vocab_path.empty()) {
      require_file(a.vocab_path, "vocabulary");
      vocab = Vocab::load(a.vocab_path);
    } else {
      vocab = Vocab::build(corpus.train, a.vocab_cap);
    }

    ModelSpec spec;
    spec.kind = kind;
    spec.task = task;
    spec.encoder.num_layers = a.layers;
    spec.encoder.num_heads = a.heads;
    spec.encoder.hidden_dim = a.hidden;
    spec.encoder.ff_dim = a.ff;
    spec.encoder.vocab_size = vocab.size();
    spec.encoder.max_positions = a.max_positions;
    spec.encoder.dropout_rate = a.dropout;
    spec.head_hidden = a.head_hidden;
    spec.bisect_threshold = a.threshold;
    spec.baseline_split = a.baseline_split;
    spec.sentence_cls_tokens = a.sentence_cls;
    spec.context_layer = !a.no_context;
    spec.abstract_rouge = a.use_abstract_rouge;
    spec.labels = a.labels;

    TrainConfig config;
    config.epochs = a.epochs;
    config.dropout = a.dropout;
    config.micro_batch = a.micro_batch;
    config.effective_batch = a.effective_batch;
    config.seeds = a.seeds;

    json options;
    options["task"] = a.task;
    options["model"] = a.model;
    options["train"] = a.train_path;
    options["dev"] = a.dev_path;
    options["test"] = a.test_path;
    options["format"] = a.format;
    options["learning_rates"] = a.learning_rates;
    options["epochs"] = a.epochs;
    options["seeds"] = a.seeds;
    options["threshold"] = a.threshold;
    options["baseline_split"] = a.baseline_split;
    options["micro_batch"] = a.micro_batch;
    options["effective_batch"] = a.effective_batch;
    options["dropout"] = a.dropout;
    options["layers"] = a.layers;
    options["heads"] = a.heads;
    options["hidden"] = a.hidden;
    options["ff"] = a.ff;
    options["max_positions"] = a.max_positions;
    options["sentence_cls"] = a.sentence_cls;
    options["no_context"] = a.no_context;
    options["abstract_rouge"] = a.use_abstract_rouge;

    fs::create_directories(a.out_dir);
    const std::string vocab_out =
        (fs::path(a.out_dir) / "vocab.txt").string();
    vocab.save(vocab_out);
    std::vector<std::string> inputs = {a.train_path, a.dev_path, a.test_path,
                                       vocab_out};
    emit_manifest("train", options, inputs, out, a.out_dir);

    double chosen_lr = a.learning_rates.front();
    TrainResult trained;
    if (a.learning_rates.size() == 1) {
      config.learning_rate = chosen_lr;
      trained = train(corpus, spec, config, vocab, &out);
    } else {
      trained = train_grid(corpus, spec, config, a.learning_rates, vocab,
                           &out, &chosen_lr);
    }

    save_model((fs::path(a.out_dir) / "checkpoint").string(), trained.model,
               vocab);

    json metrics;
    metrics["task"] = a.task;
    metrics["model"] = a.model;
    metrics["learning_rate"] = chosen_lr;
    metrics["epochs"] = a.epochs;
    metrics["initial_dev_metric"] = trained.initial_dev_metric;
    json per_seed = json::array();
    for (const SeedResult& r : trained.per_seed) {
      json s;
      s["seed"] = r.seed;
      s["best_dev"] = r.best_dev;
      s["best_epoch"] = r.best_epoch;
      s["test_metric"] = r.test_metric;
      per_seed.push_back(s);
    }
    metrics["per_seed"] = per_seed;
    metrics["mean_test"] = trained.mean_test;
    metrics["selected_seed"] = trained.selected_seed;
    std::ofstream metrics_out(fs::path(a.out_dir) / "metrics.json",
                              std::ios::binary);
    metrics_out << metrics.dump(2) << '\n';
    out << metrics.dump() << '\n';
    result = 0;
  });
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string ckpt_dir;
  std::string data_path;
  std::string format = "jsonl";
  std::string out_path;
  std::size_t top_k = 10;
};

void add_eval_command(CLI::App& app, EvalArgs& a, int& result,
                      std::ostream& out) {
  CLI::App* cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  cmd->add_option("--config", "Read options from a key=value file (flags override it)")->type_name("FILE");
  cmd->add_option("--ckpt", a.ckpt_dir, "Checkpoint directory")->required();
  cmd->add_option("--data", a.data_path, "Evaluation data")->required();
  cmd->add_option("--format", a.format, "jsonl | rct");
  cmd->add_option("--out", a.out_path, "Write the metrics report here too");
  cmd->add_option("--top-k", a.top_k, "Summary size (summarization)");

  cmd->callback([&a, &result, &out]() {
    require_file(a.data_path, "evaluation data");
    if (!fs::exists(fs::path(a.ckpt_dir) / "model.json")) {
      throw DataError("checkpoint not found in " + a.ckpt_dir);
    }
    LoadedModel loaded = load_model(a.ckpt_dir);
    const std::vector<Document> docs = load_documents(a.data_path, a.format);
    if (docs.empty()) {
      throw DataError("no documents in " + a.data_path);
    }

    json options;
    options["ckpt"] = a.ckpt_dir;
    options["data"] = a.data_path;
    options["format"] = a.format;
    options["top_k"] = a.top_k;
    emit_manifest("eval", options, {a.data_path}, out);

    json report;
    if (loaded.model.spec.task == TaskKind::Classify) {
      const LabelSet labels(loaded.model.spec.labels);
      std::size_t n_sentences = 0;
      for (const Document& doc : docs) {
        for (const std::string& label : doc.labels) {
          if (!labels.contains(label)) {
            throw DataError("label-set mismatch: data label '" + label +
                            "' is unknown to the checkpoint");
          }
        }
        n_sentences += doc.sentences.size();
      }
      report["task"] = "classify";
      report["micro_f1"] =
          evaluate_micro_f1(loaded.model, docs, loaded.vocab, labels);
      report["n_docs"] = docs.size();
      report["n_sentences"] = n_sentences;
    } else {
      double rouge_sum = 0.0;
      double recall_sum = 0.0;
      std::size_t recall_docs = 0;
      for (const Document& doc : docs) {
        if (doc.highlights.empty()) {
          throw DataError("document '" + doc.doc_id +
                          "' has no reference highlights");
        }
        const std::vector<double> scores =
            predict_document_scores(loaded.model, doc, loaded.vocab);
        // top-k by score; ties and ranking resolved toward earlier sentences
        std::vector<std::size_t> order(scores.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&scores](std::size_t x, std::size_t y) {
                           return scores[x] > scores[y];
                         });
        const std::size_t k = std::min<std::size_t>(a.top_k, order.size());
        std::vector<std::size_t> chosen(order.begin(), order.begin() + k);
        std::sort(chosen.begin(), chosen.end());  // document order

        std::vector<std::string> summary_tokens;
        for (std::size_t s : chosen) {
          const auto toks = tokenize(doc.sentences[s]);
          summary_tokens.insert(summary_tokens.end(), toks.begin(),
                                toks.end());
        }
        std::vector<std::string> reference_tokens;
        for (const std::string& h : doc.highlights) {
          const auto toks = tokenize(h);
          reference_tokens.insert(reference_tokens.end(), toks.begin(),
                                  toks.end());
        }
        rouge_sum += rouge_l(summary_tokens, reference_tokens).f;

        // verbatim planted highlights, when present, give a recall number
        std::set<std::string> highlight_text(doc.highlights.begin(),
                                             doc.highlights.end());
        std::vector<std::size_t> planted;
        for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
          if (highlight_text.count(doc.sentences[s])) planted.push_back(s);
        }
        if (!planted.empty()) {
          std::size_t hit = 0;
          for (std::size_t s : planted) {
            if (std::find(chosen.begin(), chosen.end(), s) != chosen.end()) {
              ++hit;
            }
          }
          recall_sum +=
              static_cast<double>(hit) / static_cast<double>(planted.size());
          ++recall_docs;
        }
      }
      report["task"] = "summarize";
      report["rouge_l_f"] = rouge_sum / static_cast<double>(docs.size());
      if (recall_docs > 0) {
        report["highlight_recall"] =
            recall_sum / static_cast<double>(recall_docs);
      }
      report["n_docs"] = docs.size();
    }
    out << report.dump() << '\n';
    if (!a.out_path.empty()) {
      std::ofstream file(a.out_path, std::ios::binary);
      file << report.dump(2) << '\n';
    }
    result = 0;
  });
}

// ---- aggregate ----------------------------------------------------------------

struct AggregateArgs {
  std::string votes_path;
  std::string workers_path;
  std::string out_dir;
  std::vector<std::string> labels;
  double threshold = 0.75;
  std::vector<double> split = {0.75, 0.15, 0.10};
  std::uint64_t seed = 1;
};

struct VotedDocument {
  std::string doc_id;
  std::vector<std::string> sentences;
  std::vector<std::vector<Vote>> votes;  // per sentence
};

std::vector<VotedDocument> load_votes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open votes file: " + path);
  }
  std::vector<VotedDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": invalid JSON: " + e.what());
    }
    VotedDocument doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.sentences = j.at("sentences").get<std::vector<std::string>>();
    if (!j.contains("votes") || !j["votes"].is_array() ||
        j["votes"].size() != doc.sentences.size()) {
      throw DataError(where + ": votes do not align with sentences");
    }
    for (const auto& sentence_votes : j["votes"]) {
      std::vector<Vote> votes;
      for (const auto& v : sentence_votes) {
        votes.push_back(
            {v.at("worker").get<std::string>(),
             v.at("label").get<std::string>()});
      }
      doc.votes.push_back(std::move(votes));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

void add_aggregate_command(CLI::App& app, AggregateArgs& a, int& result,
                           std::ostream& out) {
  CLI::App* cmd = app.add_subcommand(
      "aggregate", "Aggregate crowd votes into a labeled corpus");
  cmd->add_option("--config", "Read options from a key=value file (flags override it)")->type_name("FILE");
  cmd->add_option("--votes", a.votes_path, "Votes file (jsonl)")->required();
  cmd->add_option("--workers", a.workers_path,
                  "Worker accuracy file (json object)")
      ->required();
  cmd->add_option("--out", a.out_dir, "Output directory")->required();
  cmd->add_option("--labels", a.labels, "Label order (tie-breaks)")
      ->delimiter(',');
  cmd->add_option("--threshold", a.threshold, "Qualification accuracy");
  cmd->add_option("--split", a.split, "train,dev,test fractions")
      ->delimiter(',');
  cmd->add_option("--seed", a.seed, "Shuffle seed for the split");

  cmd->callback([&a, &result, &out]() {
    require_file(a.votes_path, "votes file");
    require_file(a.workers_path, "worker accuracy file");
    if (a.split.size() != 3) {
      throw UsageError("--split needs exactly three fractions");
    }

    std::ifstream workers_in(a.workers_path, std::ios::binary);
    json workers_json;
    try {
      workers_in >> workers_json;
    } catch (const json::parse_error& e) {
      throw DataError(a.workers_path + ": invalid JSON: " + e.what());
    }
    std::map<std::string, double> accuracies;
    for (const auto& [worker, acc] : workers_json.items()) {
      accuracies[worker] = acc.get<double>();
    }
    const std::set<std::string> qualified = qualify(accuracies, a.threshold);

    const std::vector<VotedDocument> voted = load_votes(a.votes_path);

    json options;
    options["votes"] = a.votes_path;
    options["workers"] = a.workers_path;
    options["threshold"] = a.threshold;
    options["split"] = a.split;
    options["seed"] = a.seed;
    emit_manifest("aggregate", options, {a.votes_path, a.workers_path}, out,
                  a.out_dir);

    // label order: explicit flag or sorted unique over qualified votes
    LabelSet labels;
    if (!a.labels.empty()) {
      labels = LabelSet(a.labels);
    } else {
      std::set<std::string> names;
      for (const VotedDocument& doc : voted) {
        for (const auto& votes : doc.votes) {
          for (const Vote& vote : votes) {
            if (qualified.count(vote.worker)) names.insert(vote.label);
          }
        }
      }
      labels = LabelSet(std::vector<std::string>(names.begin(), names.end()));
    }

    std::vector<std::string> starved;  // sentences with no qualified votes
    std::vector<Document> docs;
    std::size_t n_sentences = 0;
    for (const VotedDocument& voted_doc : voted) {
      Document doc;
      doc.doc_id = voted_doc.doc_id;
      doc.sentences = voted_doc.sentences;
      double confidence_sum = 0.0;
      for (std::size_t s = 0; s < voted_doc.sentences.size(); ++s) {
        std::vector<Vote> kept;
        for (const Vote& vote : voted_doc.votes[s]) {
          if (qualified.count(vote.worker)) kept.push_back(vote);
        }
        if (kept.empty()) {
          starved.push_back(voted_doc.doc_id + "[" + std::to_string(s) + "]");
          continue;
        }
        const AggregateResult agg = aggregate(kept, accuracies, labels);
        doc.labels.push_back(agg.label);
        confidence_sum += agg.confidence;
        ++n_sentences;
      }
      if (!doc.sentences.empty() && starved.empty()) {
        doc.confidence =
            confidence_sum / static_cast<double>(doc.sentences.size());
        docs.push_back(std::move(doc));
      }
    }
    if (!starved.empty()) {
      std::string list;
      for (const std::string& s : starved) {
        if (!list.empty()) list += ", ";
        list += s;
      }
      throw DataError("sentences with no qualified votes: " + list);
    }

    fs::create_directories(a.out_dir);
    save_jsonl((fs::path(a.out_dir) / "aggregated.jsonl").string(), docs);
    const CorpusSplit split = split_by_confidence(
        docs, {a.split[0], a.split[1], a.split[2]}, a.seed);
    save_jsonl((fs::path(a.out_dir) / "train.jsonl").string(), split.train);
    save_jsonl((fs::path(a.out_dir) / "dev.jsonl").string(), split.dev);
    save_jsonl((fs::path(a.out_dir) / "test.jsonl").string(), split.test);

    json summary;
    summary["documents"] = docs.size();
    summary["sentences"] = n_sentences;
    summary["qualified_workers"] = qualified.size();
    summary["labels"] = labels.names();
    json sizes;
    sizes["train"] = split.train.size();
    sizes["dev"] = split.dev.size();
    sizes["test"] = split.test.size();
    summary["split"] = sizes;
    out << summary.dump() << '\n';
    result = 0;
  });
}

// ---- attn -------------------------------------------------------------------

struct AttnArgs {
  std::string ckpt_dir;
  std::string data_path;
  std::string doc_id;
  std::string out_dir;
  int layer = -1;
  bool all_layers = false;
  bool random_init = false;
  std::string vocab_path;
  std::uint64_t seed = 1;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t hidden = 64;
  std::size_t ff = 256;
  std::size_t max_positions = 512;
};

void add_attn_command(CLI::App& app, AttnArgs& a, int& result,
                      std::ostream& out) {
  CLI::App* cmd = app.add_subcommand(
      "attn", "Export max-over-heads attention matrices as CSV");
  cmd->add_option("--config", "Read options from a key=value file (flags override it)")->type_name("FILE");
  cmd->add_option("--ckpt", a.ckpt_dir, "Checkpoint directory");
  cmd->add_option("--data", a.data_path, "Document file (jsonl)")->required();
  cmd->add_option("--doc-id", a.doc_id, "Document to trace (default: first)");
  cmd->add_option("--out", a.out_dir, "Output directory")->required();
  cmd->add_option("--layer", a.layer, "Single layer to export");
  cmd->add_flag("--all", a.all_layers, "Export every layer");
  cmd->add_flag("--random-init", a.random_init,
                "Trace an untrained encoder instead of a checkpoint");
  cmd->add_option("--vocab", a.vocab_path, "Vocabulary (with --random-init)");
  cmd->add_option("--seed", a.seed, "Init seed (with --random-init)");
  cmd->add_option("--layers", a.layers, "Encoder layers (with --random-init)");
  cmd->add_option("--heads", a.heads, "Attention heads (with --random-init)");
  cmd->add_option("--hidden", a.hidden, "Hidden width (with --random-init)");
  cmd->add_option("--ff", a.ff, "Feedforward width (with --random-init)");
  cmd->add_option("--max-positions", a.max_positions,
                  "Position table size (with --random-init)");

  cmd->callback([&a, &result, &out]() {
    require_file(a.data_path, "document file");
    if (a.random_init && !a.ckpt_dir.empty()) {
      throw UsageError("--random-init conflicts with --ckpt");
    }
    if (!a.random_init && a.ckpt_dir.empty()) {
      throw UsageError("attn needs --ckpt or --random-init");
    }
    if (a.random_init && a.vocab_path.empty()) {
      throw UsageError("--random-init needs --vocab");
    }

    EncoderParams encoder;
    Vocab vocab;
    if (!a.random_init) {
      LoadedModel loaded = load_model(a.ckpt_dir);
      encoder = loaded.model.encoder;
      vocab = loaded.vocab;
    } else {
      require_file(a.vocab_path, "vocabulary");
      vocab = Vocab::load(a.vocab_path);
      EncoderConfig config;
      config.num_layers = a.layers;
      config.num_heads = a.heads;
      config.hidden_dim = a.hidden;
      config.ff_dim = a.ff;
      config.vocab_size = vocab.size();
      config.max_positions = a.max_positions;
      Rng rng(a.seed);
      encoder = EncoderParams::init(config, rng);
    }
    const std::size_t num_layers = encoder.config.num_layers;
    if (!a.all_layers && a.layer < 0) {
      a.all_layers = true;
    }
    if (a.layer >= 0 && static_cast<std::size_t>(a.layer) >= num_layers) {
      throw UsageError("--layer " + std::to_string(a.layer) +
                       " out of range (model has " +
                       std::to_string(num_layers) + " layers)");
    }

    const std::vector<Document> docs = load_documents(a.data_path, "jsonl");
    if (docs.empty()) {
      throw DataError("no documents in " + a.data_path);
    }
    const Document* doc = &docs.front();
    if (!a.doc_id.empty()) {
      doc = nullptr;
      for (const Document& d : docs) {
        if (d.doc_id == a.doc_id) {
          doc = &d;
          break;
        }
      }
      if (doc == nullptr) {
        throw DataError("document '" + a.doc_id + "' not found");
      }
    }

    json options;
    options["ckpt"] = a.ckpt_dir;
    options["data"] = a.data_path;
    options["doc_id"] = doc->doc_id;
    options["layer"] = a.layer;
    options["all"] = a.all_layers;
    options["random_init"] = a.random_init;
    options["seed"] = a.seed;
    emit_manifest("attn", options, {a.data_path}, out);

    PackOptions pack_options;
    pack_options.max_tokens = encoder.config.max_positions;
    const PackedInput packed =
        pack(doc->sentences, {0, doc->sentences.size()}, vocab, pack_options);

    Tape tape(false);
    const EncodeResult encoded =
        encode(tape, packed, encoder, false, nullptr, /*want_trace=*/true);

    std::vector<std::string> token_strings;
    token_strings.reserve(packed.token_ids.size());
    for (std::size_t id : packed.token_ids) {
      token_strings.push_back(vocab.token(id));
    }

    fs::create_directories(a.out_dir);
    const std::size_t first = a.all_layers ? 0 : a.layer;
    const std::size_t last = a.all_layers ? num_layers : a.layer + 1;
    const std::size_t t_len = packed.token_ids.size();
    for (std::size_t layer = first; layer < last; ++layer) {
      const std::vector<double> matrix =
          max_over_heads(*encoded.trace, layer);
      std::ofstream csv(
          fs::path(a.out_dir) / ("attn_layer" + std::to_string(layer) + ".csv"),
          std::ios::binary);
      csv << "token";
      for (const std::string& tok : token_strings) {
        csv << ',' << csv_quote(tok);
      }
      csv << '\n';
      for (std::size_t i = 0; i < t_len; ++i) {
        csv << csv_quote(token_strings[i]);
        for (std::size_t j = 0; j < t_len; ++j) {
          csv << ',' << format_double(matrix[i * t_len + j]);
        }
        csv << '\n';
      }
    }
    json report;
    report["doc_id"] = doc->doc_id;
    report["tokens"] = t_len;
    report["layers_written"] = last - first;
    out << report.dump() << '\n';
    result = 0;
  });
}

// ---- gen --------------------------------------------------------------------

struct GenArgs {
  std::string task = "classify";
  std::uint64_t seed = 1;
  std::size_t n_train = 2000;
  std::size_t n_dev = 500;
  std::size_t n_test = 500;
  std::size_t sentences = 6;
  std::size_t highlights = 3;
  std::string out_dir;
};

void add_gen_command(CLI::App& app, GenArgs& a, int& result,
                     std::ostream& out) {
  CLI::App* cmd =
      app.add_subcommand("gen", "Generate a synthetic corpus");
  cmd->add_option("--config", "Read options from a key=value file (flags override it)")->type_name("FILE");
  cmd->add_option("--task", a.task, "classify | summarize");
  cmd->add_option("--seed", a.seed, "Generator seed");
  cmd->add_option("--train", a.n_train, "Training documents");
  cmd->add_option("--dev", a.n_dev, "Validation documents");
  cmd->add_option("--test", a.n_test, "Test documents");
  cmd->add_option("--sentences", a.sentences, "Sentences per document");
  cmd->add_option("--highlights", a.highlights,
                  "Highlight sentences per document (summarize)");
  cmd->add_option("--out", a.out_dir, "Output directory")->required();

  cmd->callback([&a, &result, &out]() {
    const TaskKind task = task_kind_from(a.task);
    const std::size_t total = a.n_train + a.n_dev + a.n_test;
    std::vector<Document> docs;
    if (task == TaskKind::Classify) {
      docs = gen_synthetic(a.seed, total, a.sentences);
    } else {
      docs = gen_synthetic_summ(a.seed, total, a.sentences, a.highlights);
    }

    json options;
    options["task"] = a.task;
    options["seed"] = a.seed;
    options["train"] = a.n_train;
    options["dev"] = a.n_dev;
    options["test"] = a.n_test;
    options["sentences"] = a.sentences;
    if (task == TaskKind::Summarize) options["highlights"] = a.highlights;
    emit_manifest("gen", options, {}, out, a.out_dir);

    fs::create_directories(a.out_dir);
    const auto slice = [&docs](std::size_t begin, std::size_t end) {
      return std::vector<Document>(docs.begin() + begin, docs.begin() + end);
    };
    save_jsonl((fs::path(a.out_dir) / "train.jsonl").string(),
               slice(0, a.n_train));
    save_jsonl((fs::path(a.out_dir) / "dev.jsonl").string(),
               slice(a.n_train, a.n_train + a.n_dev));
    save_jsonl((fs::path(a.out_dir) / "test.jsonl").string(),
               slice(a.n_train + a.n_dev, total));

    json summary;
    summary["documents"] = total;
    summary["train"] = a.n_train;
    summary["dev"] = a.n_dev;
    summary["test"] = a.n_test;
    out << summary.dump() << '\n';
    result = 0;
  });
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Sequential sentence classification toolkit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  EvalArgs eval_args;
  AggregateArgs aggregate_args;
  AttnArgs attn_args;
  GenArgs gen_args;
  int result = 0;

  add_train_command(app, train_args, result, out);
  add_eval_command(app, eval_args, result, out);
  add_aggregate_command(app, aggregate_args, result, out);
  add_attn_command(app, attn_args, result, out);
  add_gen_command(app, gen_args, result, out);

  try {
    const std::vector<std::string> expanded = expand_config_args(args);
    std::vector<const char*> argv;
    argv.push_back("ssc");
    for (const std::string& arg : expanded) {
      argv.push_back(arg.c_str());
    }
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const TrainError& e) {
    err << "training error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return result;
}

}  // namespace ssc
