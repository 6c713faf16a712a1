// tempmark: temperature-watermarking toolkit for token streams.
//
// Subcommands: train-lm, generate, detect, attack, evaluate. Every run
// writes a manifest JSON with the fully resolved configuration so outputs
// can be reproduced byte for byte.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tempmark/attack.hpp"
#include "tempmark/eval.hpp"
#include "tempmark/greenlist.hpp"
#include "tempmark/ngram_lm.hpp"
#include "tempmark/records_io.hpp"
#include "tempmark/seeded_random.hpp"
#include "tempmark/vocab.hpp"
#include "tempmark/watermark.hpp"

namespace {

using nlohmann::json;
using namespace tempmark;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_manifest(const std::filesystem::path& path, const json& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open manifest for writing: " + path.string());
  out << manifest.dump(2) << '\n';
}

json to_json(const WatermarkParams& p) {
  return json{{"t0", p.base_temperature},
              {"m", p.min_multiplier},
              {"M", p.max_multiplier},
              {"h", p.window_len}};
}

json to_json(const BaselineParams& p) {
  return json{{"gamma", p.green_fraction},
              {"delta", p.green_bias},
              {"h", p.window_len},
              {"key_seed", p.key_seed}};
}

struct WatermarkFlags {
  WatermarkParams params;

  void attach(CLI::App* cmd) {
    cmd->add_option("--t0", params.base_temperature, "Base temperature T0")
        ->capture_default_str();
    cmd->add_option("--m", params.min_multiplier, "Lower temperature multiplier")
        ->capture_default_str();
    cmd->add_option("--M", params.max_multiplier, "Upper temperature multiplier")
        ->capture_default_str();
    cmd->add_option("--h", params.window_len, "Context-window length for hashing")
        ->capture_default_str();
  }
};

struct BaselineFlags {
  BaselineParams params;

  void attach(CLI::App* cmd) {
    cmd->add_option("--gamma", params.green_fraction, "Green-list fraction")
        ->capture_default_str();
    cmd->add_option("--delta", params.green_bias, "Green-token logit bias")
        ->capture_default_str();
    cmd->add_option("--key-seed", params.key_seed, "Key seed mixed into the context hash")
        ->capture_default_str();
  }
};

struct TrainArgs {
  std::string corpus;
  std::string out;
  std::string vocab_out;
  std::string manifest;
  int order = 3;
  double k = 1.0;
  std::size_t max_vocab = 8192;
};

int run_train(const TrainArgs& args) {
  if (args.order < 1) throw std::invalid_argument("order must be at least 1");
  if (!(args.k > 0.0)) throw std::invalid_argument("k must be positive");

  const std::string corpus_text = read_text_file(args.corpus);
  const Vocab vocab = build_vocab(corpus_text, args.max_vocab);
  const TokenSeq ids = encode(corpus_text, vocab);
  const NGramModel model = NGramModel::train(ids, args.order, args.k, vocab.size());

  const std::string vocab_path =
      args.vocab_out.empty() ? args.out + ".vocab" : args.vocab_out;
  model.save(args.out);
  save_vocab(vocab, vocab_path);

  json manifest{{"subcommand", "train-lm"},
                {"corpus", args.corpus},
                {"model", args.out},
                {"vocab", vocab_path},
                {"order", args.order},
                {"k", args.k},
                {"max_vocab", args.max_vocab},
                {"vocab_size", vocab.size()},
                {"corpus_tokens", ids.size()}};
  write_manifest(args.manifest.empty() ? args.out + ".manifest.json" : args.manifest,
                 manifest);

  std::cerr << "trained order-" << args.order << " model over " << ids.size()
            << " tokens, vocabulary " << vocab.size() << "\n";
  return 0;
}

struct GenerateArgs {
  std::string model;
  std::string vocab;
  std::string prompt;
  std::string method = "temperature";
  std::string records = "records.jsonl";
  std::string manifest;
  int length = 200;
  int count = 1;
  std::uint64_t seed = 0;
};

int run_generate(const GenerateArgs& args, const WatermarkParams& wm,
                 const BaselineParams& bl) {
  wm.validate();
  bl.validate();
  if (args.length < 1) throw std::invalid_argument("length must be at least 1");
  if (args.count < 1) throw std::invalid_argument("n must be at least 1");

  const NGramModel model = NGramModel::load(args.model);
  const std::string vocab_path = args.vocab.empty() ? args.model + ".vocab" : args.vocab;
  const Vocab vocab = load_vocab(vocab_path);
  if (vocab.size() != model.vocab_size()) {
    throw std::runtime_error("vocabulary size does not match model");
  }

  const TokenSeq prompt_ids = encode(args.prompt, vocab);
  std::vector<StoredRecord> stored;
  for (int i = 0; i < args.count; ++i) {
    const std::uint64_t record_seed =
        splitmix64_once(args.seed ^ static_cast<std::uint64_t>(i));
    StoredRecord rec;
    if (args.method == "temperature") {
      rec.record = generate(model, prompt_ids, wm, args.length, record_seed);
      rec.params = wm;
    } else if (args.method == "greenlist") {
      rec.record = generate_baseline(model, prompt_ids, bl, args.length, record_seed);
      rec.params = bl;
    } else if (args.method == "plain") {
      rec.record = generate_plain(model, prompt_ids, args.length, record_seed);
      rec.params = std::monostate{};
    } else {
      throw std::invalid_argument("unknown method: " + args.method);
    }
    std::cout << decode(rec.record.generated, vocab) << "\n";
    stored.push_back(std::move(rec));
  }
  write_records(args.records, stored);

  json manifest{{"subcommand", "generate"},
                {"model", args.model},
                {"vocab", vocab_path},
                {"prompt", args.prompt},
                {"method", args.method},
                {"length", args.length},
                {"n", args.count},
                {"seed", args.seed},
                {"records", args.records},
                {"watermark", to_json(wm)},
                {"baseline", to_json(bl)}};
  write_manifest(args.manifest.empty() ? args.records + ".manifest.json" : args.manifest,
                 manifest);
  return 0;
}

struct DetectArgs {
  std::string model;
  std::string vocab;
  std::string text_file;
  std::string method = "temperature";
  std::string manifest = "detect-manifest.json";
  double threshold = 0.5;
};

int run_detect(const DetectArgs& args, const WatermarkParams& wm, const BaselineParams& bl) {
  wm.validate();
  bl.validate();
  if (args.method != "temperature" && args.method != "greenlist") {
    throw std::invalid_argument("unknown method: " + args.method);
  }

  const NGramModel model = NGramModel::load(args.model);
  const std::string vocab_path = args.vocab.empty() ? args.model + ".vocab" : args.vocab;
  const Vocab vocab = load_vocab(vocab_path);
  if (vocab.size() != model.vocab_size()) {
    throw std::runtime_error("vocabulary size does not match model");
  }

  const TokenSeq ids = encode(read_text_file(args.text_file), vocab);

  json result;
  if (args.method == "temperature") {
    const DetectionResult res = detect(model, ids, wm, args.threshold);
    result = json{{"method", "temperature"},
                  {"score", res.score},
                  {"n_scored", res.n_scored},
                  {"watermarked", res.watermarked},
                  {"threshold", args.threshold},
                  {"per_token_probs", res.per_token_probs}};
  } else {
    const BaselineDetection res = detect_baseline(ids, bl, vocab.size());
    result = json{{"method", "greenlist"},
                  {"green_count", res.green_count},
                  {"n_scored", res.n_scored},
                  {"z", res.z},
                  {"watermarked", res.z >= args.threshold},
                  {"threshold", args.threshold}};
  }
  std::cout << result.dump(2) << "\n";

  json manifest{{"subcommand", "detect"},
                {"model", args.model},
                {"vocab", vocab_path},
                {"text", args.text_file},
                {"method", args.method},
                {"threshold", args.threshold},
                {"watermark", to_json(wm)},
                {"baseline", to_json(bl)}};
  write_manifest(args.manifest, manifest);
  return 0;
}

struct AttackArgs {
  std::string input;
  std::string model;
  std::string out;
  std::string manifest;
  double fraction = 0.3;
  std::uint64_t seed = 0;
};

int run_attack(const AttackArgs& args) {
  if (!(args.fraction >= 0.0 && args.fraction <= 1.0)) {
    throw std::invalid_argument("fraction must be in [0,1]");
  }
  const NGramModel model = NGramModel::load(args.model);
  const std::vector<StoredRecord> records = read_records(args.input);
  if (records.empty()) throw std::runtime_error("no records in " + args.input);

  const SubstitutionOracle oracle = make_lm_oracle(model);
  std::vector<StoredAttack> attacked;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::uint64_t record_seed = splitmix64_once(args.seed ^ i);
    AttackConfig config{args.fraction, record_seed, oracle};
    attacked.push_back({attack(records[i].record.generated, config), args.fraction,
                        record_seed});
  }
  write_attacks(args.out, attacked);

  json manifest{{"subcommand", "attack"},
                {"in", args.input},
                {"model", args.model},
                {"out", args.out},
                {"fraction", args.fraction},
                {"seed", args.seed},
                {"n_records", records.size()}};
  write_manifest(args.manifest.empty() ? args.out + ".manifest.json" : args.manifest,
                 manifest);
  return 0;
}

struct EvaluateArgs {
  std::string model;
  std::string vocab;
  std::string dataset;
  std::string outdir = "tempmark-eval";
  double attack_fraction = 0.3;
  bool no_attack = false;
  bool unwatermarked_negatives = false;
  int length = 200;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  unsigned max_threads = 0;
};

int run_evaluate(const EvaluateArgs& args, const WatermarkParams& wm,
                 const BaselineParams& bl) {
  EvalConfig config;
  config.watermark = wm;
  config.baseline = bl;
  config.attack_fraction =
      args.no_attack ? std::nullopt : std::optional<double>(args.attack_fraction);
  config.gen_length = args.length;
  config.rng_seed = args.seed;
  config.unwatermarked_negatives = args.unwatermarked_negatives;
  config.max_threads = args.max_threads;

  config.watermark.validate();
  config.baseline.validate();
  if (config.attack_fraction.has_value() &&
      !(*config.attack_fraction >= 0.0 && *config.attack_fraction <= 1.0)) {
    throw std::invalid_argument("fraction must be in [0,1]");
  }
  if (config.gen_length < 1) throw std::invalid_argument("length must be at least 1");

  const NGramModel model = NGramModel::load(args.model);
  const std::string vocab_path = args.vocab.empty() ? args.model + ".vocab" : args.vocab;
  const Vocab vocab = load_vocab(vocab_path);
  if (vocab.size() != model.vocab_size()) {
    throw std::runtime_error("vocabulary size does not match model");
  }
  const std::vector<EvalSample> samples = load_dataset(args.dataset);
  if (samples.empty()) throw std::runtime_error("no samples in " + args.dataset);

  std::filesystem::create_directories(args.outdir);
  const std::filesystem::path outdir(args.outdir);

  const ScoreCorpusResult result = score_corpus(samples, model, vocab, config);
  for (const std::string& warning : result.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }

  write_scores_csv(outdir / "scores.csv", result.rows);
  const std::vector<ConditionEval> evals = evaluate_table(result.rows, result.n_skipped);
  for (const ConditionEval& eval : evals) {
    const std::string name = "roc_" + std::string(to_string(eval.detector)) + "_" +
                             std::string(to_string(eval.condition)) + ".csv";
    write_roc_csv(outdir / name, eval.curve);
  }
  write_summary_json(outdir / "summary.json", evals);

  json manifest{{"subcommand", "evaluate"},
                {"model", args.model},
                {"vocab", vocab_path},
                {"dataset", args.dataset},
                {"outdir", args.outdir},
                {"watermark", to_json(wm)},
                {"baseline", to_json(bl)},
                {"attack_fraction",
                 config.attack_fraction ? json(*config.attack_fraction) : json(nullptr)},
                {"length", args.length},
                {"seed", args.seed},
                {"threshold", args.threshold},
                {"unwatermarked_negatives", args.unwatermarked_negatives},
                {"n_samples", samples.size()},
                {"n_skipped", result.n_skipped}};
  write_manifest(outdir / "manifest.json", manifest);

  for (const ConditionEval& eval : evals) {
    std::cerr << to_string(eval.detector) << "/" << to_string(eval.condition)
              << ": auc=" << eval.summary.auc
              << " tpr@2%fpr=" << eval.summary.tpr_at_fpr_002
              << " f1_at_best=" << eval.summary.f1_at_best << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tempmark: temperature watermarking toolkit for token streams"};
  app.require_subcommand(1);
  // --h is a watermark flag, so help is long-form only.
  app.set_help_flag("--help", "Print help and exit");
  auto add_subcommand = [&app](const std::string& name, const std::string& description) {
    CLI::App* cmd = app.add_subcommand(name, description);
    cmd->set_help_flag("--help", "Print help and exit");
    return cmd;
  };

  TrainArgs train_args;
  CLI::App* train = add_subcommand("train-lm", "Train an n-gram model from a text corpus");
  train->add_option("corpus", train_args.corpus, "Corpus text file")->required();
  train->add_option("-o,--out", train_args.out, "Model output path")->required();
  train->add_option("--order", train_args.order, "N-gram order")->capture_default_str();
  train->add_option("--k", train_args.k, "Add-k smoothing constant")->capture_default_str();
  train->add_option("--max-vocab", train_args.max_vocab, "Maximum vocabulary size")
      ->capture_default_str();
  train->add_option("--vocab-out", train_args.vocab_out,
                    "Vocabulary output path (default: <model>.vocab)");
  train->add_option("--manifest", train_args.manifest,
                    "Manifest path (default: <model>.manifest.json)");

  GenerateArgs gen_args;
  WatermarkFlags gen_wm;
  BaselineFlags gen_bl;
  CLI::App* gen = add_subcommand("generate", "Generate watermarked text");
  gen->add_option("model", gen_args.model, "Trained model path")->required();
  gen->add_option("--prompt", gen_args.prompt, "Prompt text")->required();
  gen->add_option("--vocab", gen_args.vocab, "Vocabulary path (default: <model>.vocab)");
  gen->add_option("--method", gen_args.method, "temperature | greenlist | plain")
      ->capture_default_str();
  gen->add_option("--length", gen_args.length, "Tokens to generate")->capture_default_str();
  gen->add_option("--n", gen_args.count, "Number of generations")->capture_default_str();
  gen->add_option("--seed", gen_args.seed, "Sampling seed")
      ->envname("TEMPMARK_SEED")
      ->capture_default_str();
  gen->add_option("--records", gen_args.records, "Record JSONL output path")
      ->capture_default_str();
  gen->add_option("--manifest", gen_args.manifest,
                  "Manifest path (default: <records>.manifest.json)");
  gen_wm.attach(gen);
  gen_bl.attach(gen);

  DetectArgs det_args;
  WatermarkFlags det_wm;
  BaselineFlags det_bl;
  CLI::App* det = add_subcommand("detect", "Score a text for the watermark");
  det->add_option("model", det_args.model, "Trained model path")->required();
  det->add_option("--text", det_args.text_file, "Text file to score")->required();
  det->add_option("--vocab", det_args.vocab, "Vocabulary path (default: <model>.vocab)");
  det->add_option("--method", det_args.method, "temperature | greenlist")
      ->capture_default_str();
  det->add_option("--threshold", det_args.threshold, "Detection threshold")
      ->capture_default_str();
  det->add_option("--manifest", det_args.manifest, "Manifest path")->capture_default_str();
  det_wm.attach(det);
  det_bl.attach(det);

  AttackArgs attack_args;
  CLI::App* att = add_subcommand("attack", "Substitution attack on generated records");
  att->add_option("--in", attack_args.input, "Input record JSONL")->required();
  att->add_option("--model", attack_args.model, "Model used as substitution oracle")
      ->required();
  att->add_option("-o,--out", attack_args.out, "Attacked record JSONL output")->required();
  att->add_option("--fraction", attack_args.fraction, "Fraction of tokens to replace")
      ->capture_default_str();
  att->add_option("--seed", attack_args.seed, "Attack seed")
      ->envname("TEMPMARK_SEED")
      ->capture_default_str();
  att->add_option("--manifest", attack_args.manifest,
                  "Manifest path (default: <out>.manifest.json)");

  EvaluateArgs eval_args;
  WatermarkFlags eval_wm;
  BaselineFlags eval_bl;
  CLI::App* eval = add_subcommand("evaluate", "Run the full detection benchmark");
  eval->add_option("model", eval_args.model, "Trained model path")->required();
  eval->add_option("--dataset", eval_args.dataset, "Dataset JSONL path")->required();
  eval->add_option("--vocab", eval_args.vocab, "Vocabulary path (default: <model>.vocab)");
  eval->add_option("-d,--outdir", eval_args.outdir, "Output directory")
      ->capture_default_str();
  eval->add_option("--attack-fraction", eval_args.attack_fraction,
                   "Substitution fraction for the attacked condition")
      ->capture_default_str();
  eval->add_flag("--no-attack", eval_args.no_attack, "Skip the attacked condition");
  eval->add_flag("--unwatermarked-negatives", eval_args.unwatermarked_negatives,
                 "Also score plain generations as negatives");
  eval->add_option("--length", eval_args.length, "Tokens per generation")
      ->capture_default_str();
  eval->add_option("--seed", eval_args.seed, "Experiment seed")
      ->envname("TEMPMARK_SEED")
      ->capture_default_str();
  eval->add_option("--threshold", eval_args.threshold, "Verdict threshold")
      ->capture_default_str();
  eval->add_option("--max-threads", eval_args.max_threads,
                   "Worker threads (0 = hardware concurrency)")
      ->capture_default_str();
  eval_wm.attach(eval);
  eval_bl.attach(eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  // One context-window length governs both schemes.
  gen_bl.params.window_len = gen_wm.params.window_len;
  det_bl.params.window_len = det_wm.params.window_len;
  eval_bl.params.window_len = eval_wm.params.window_len;

  try {
    if (*train) return run_train(train_args);
    if (*gen) return run_generate(gen_args, gen_wm.params, gen_bl.params);
    if (*det) return run_detect(det_args, det_wm.params, det_bl.params);
    if (*att) return run_attack(attack_args);
    if (*eval) return run_evaluate(eval_args, eval_wm.params, eval_bl.params);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
