#pragma once

// Labeled-corpus evaluation: generates watermarked positives from prompts,
// scores them and the human negatives with both detectors, optionally under
// the substitution attack, and reduces the score table to ROC/AUC/F1/TPR
// metrics.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tempmark/greenlist.hpp"
#include "tempmark/logits_provider.hpp"
#include "tempmark/vocab.hpp"
#include "tempmark/watermark.hpp"

namespace tempmark {

struct EvalSample {
  std::string id;
  std::string prompt;
  std::string human_text;
  std::optional<std::string> machine_text;
};

// JSONL, one object per line with fields id, prompt, human_text and optional
// machine_text. Blank lines are skipped; malformed lines and duplicate ids
// fail fast with the line number.
std::vector<EvalSample> load_dataset(const std::filesystem::path& path);

enum class Label { positive, negative };
enum class Condition { clean, attacked, unwatermarked };
enum class Detector { temperature, baseline };

std::string_view to_string(Label label);
std::string_view to_string(Condition condition);
std::string_view to_string(Detector detector);

struct ScoreRow {
  std::string id;
  Label label = Label::positive;
  Condition condition = Condition::clean;
  Detector detector = Detector::temperature;
  double score = 0.0;

  bool operator==(const ScoreRow&) const = default;
};
using ScoreTable = std::vector<ScoreRow>;

struct EvalConfig {
  WatermarkParams watermark{};
  BaselineParams baseline{};
  std::optional<double> attack_fraction = 0.3;  // nullopt disables the attack
  int gen_length = 200;
  std::uint64_t rng_seed = 0;
  bool unwatermarked_negatives = false;  // adds plain generations as extra negatives
  unsigned max_threads = 0;              // 0 = hardware concurrency
};

struct ScoreCorpusResult {
  ScoreTable rows;
  std::size_t n_skipped = 0;               // human text too short to score
  std::vector<std::string> warnings;       // one entry per skipped sample
};

// Per-sample seeds derive from splitmix64(rng_seed XOR sample_index), so the
// table is identical regardless of thread count or interleaving.
ScoreCorpusResult score_corpus(const std::vector<EvalSample>& samples,
                               const LogitsProvider& provider, const Vocab& vocab,
                               const EvalConfig& config);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // threshold descending, FPR non-decreasing
  double auc = 0.0;              // trapezoidal integral over (FPR, TPR)
};

// Threshold sweep over the sorted union of observed scores plus a +inf
// sentinel; predicted positive means score >= threshold.
RocCurve roc(const std::vector<double>& positive_scores,
             const std::vector<double>& negative_scores);

struct ThresholdMetrics {
  double f1 = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double precision = 0.0;
};

ThresholdMetrics metrics_at_threshold(const std::vector<double>& positive_scores,
                                      const std::vector<double>& negative_scores,
                                      double threshold);

// Maximum TPR over curve points with FPR <= fpr_target; 0 if none qualify.
double tpr_at_fpr(const RocCurve& curve, double fpr_target);

struct DetectorSummary {
  double auc = 0.0;
  double f1_at_best = 0.0;       // max F1 over the swept thresholds
  double tpr_at_fpr_002 = 0.0;   // TPR with FPR capped at 2%
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t n_skipped = 0;
};

struct ConditionEval {
  Detector detector = Detector::temperature;
  Condition condition = Condition::clean;
  RocCurve curve;
  DetectorSummary summary;
};

// One ROC per (detector, positive condition) present in the table. Attacked
// positives are paired against the clean human negatives.
std::vector<ConditionEval> evaluate_table(const ScoreTable& table, std::size_t n_skipped);

// CSV with header id,label,condition,detector,score.
void write_scores_csv(const std::filesystem::path& path, const ScoreTable& table);

// CSV with header threshold,fpr,tpr.
void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve);

// JSON summary keyed by detector then condition.
void write_summary_json(const std::filesystem::path& path,
                        const std::vector<ConditionEval>& evals);

}  // namespace tempmark
