#include "tempmark/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "tempmark/attack.hpp"
#include "tempmark/seeded_random.hpp"

namespace tempmark {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::vector<EvalSample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());

  std::vector<EvalSample> samples;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": parse failure");
    }

    EvalSample sample;
    try {
      sample.id = j.at("id").get<std::string>();
      sample.prompt = j.at("prompt").get<std::string>();
      sample.human_text = j.at("human_text").get<std::string>();
      if (j.contains("machine_text") && !j.at("machine_text").is_null()) {
        sample.machine_text = j.at("machine_text").get<std::string>();
      }
    } catch (const json::exception& e) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": parse failure (" +
                               e.what() + ")");
    }
    if (sample.human_text.empty()) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": parse failure (human_text is empty)");
    }
    if (!seen_ids.insert(sample.id).second) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": duplicate id \"" +
                               sample.id + "\"");
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::string_view to_string(Label label) {
  return label == Label::positive ? "positive" : "negative";
}

std::string_view to_string(Condition condition) {
  switch (condition) {
    case Condition::clean: return "clean";
    case Condition::attacked: return "attacked";
    case Condition::unwatermarked: return "unwatermarked";
  }
  return "clean";
}

std::string_view to_string(Detector detector) {
  return detector == Detector::temperature ? "temperature" : "baseline";
}

namespace {

struct PerSample {
  ScoreTable rows;
  bool skipped = false;
  std::string warning;
  std::exception_ptr error;
};

PerSample score_one(std::size_t index, const EvalSample& sample,
                    const LogitsProvider& provider, const Vocab& vocab,
                    const EvalConfig& config) {
  PerSample out;
  const auto& wm = config.watermark;
  const auto& bl = config.baseline;
  const int vocab_size = provider.vocab_size();
  const int h_needed = std::max(wm.window_len, bl.window_len);

  const TokenSeq human = encode(sample.human_text, vocab);
  if (human.size() <= static_cast<std::size_t>(h_needed)) {
    out.skipped = true;
    out.warning = "sample " + sample.id + ": human text shorter than " +
                  std::to_string(h_needed + 1) + " tokens, skipped";
    return out;
  }
  const TokenSeq prompt = encode(sample.prompt, vocab);

  const std::uint64_t sample_seed =
      splitmix64_once(config.rng_seed ^ static_cast<std::uint64_t>(index));
  SplitMix64 seeds(sample_seed);
  const std::uint64_t gen_temp_seed = seeds.next();
  const std::uint64_t gen_base_seed = seeds.next();
  const std::uint64_t attack_temp_seed = seeds.next();
  const std::uint64_t attack_base_seed = seeds.next();
  const std::uint64_t plain_seed = seeds.next();

  const GenerationRecord rec_temp =
      generate(provider, prompt, wm, config.gen_length, gen_temp_seed);
  const GenerationRecord rec_base =
      generate_baseline(provider, prompt, bl, config.gen_length, gen_base_seed);

  auto push = [&](Label label, Condition condition, Detector detector, double score) {
    out.rows.push_back({sample.id, label, condition, detector, score});
  };

  push(Label::positive, Condition::clean, Detector::temperature,
       detect(provider, detection_text(rec_temp, wm.window_len), wm, 0.0).score);
  push(Label::positive, Condition::clean, Detector::baseline,
       detect_baseline(detection_text(rec_base, bl.window_len), bl, vocab_size).z);
  push(Label::negative, Condition::clean, Detector::temperature,
       detect(provider, human, wm, 0.0).score);
  push(Label::negative, Condition::clean, Detector::baseline,
       detect_baseline(human, bl, vocab_size).z);

  if (config.attack_fraction.has_value()) {
    const SubstitutionOracle oracle = make_lm_oracle(provider);

    AttackConfig attack_temp{*config.attack_fraction, attack_temp_seed, oracle};
    const AttackRecord att_t = attack(rec_temp.generated, attack_temp);
    GenerationRecord attacked_temp = rec_temp;
    attacked_temp.generated = att_t.attacked;
    push(Label::positive, Condition::attacked, Detector::temperature,
         detect(provider, detection_text(attacked_temp, wm.window_len), wm, 0.0).score);

    AttackConfig attack_base{*config.attack_fraction, attack_base_seed, oracle};
    const AttackRecord att_b = attack(rec_base.generated, attack_base);
    GenerationRecord attacked_base = rec_base;
    attacked_base.generated = att_b.attacked;
    push(Label::positive, Condition::attacked, Detector::baseline,
         detect_baseline(detection_text(attacked_base, bl.window_len), bl, vocab_size).z);
  }

  if (config.unwatermarked_negatives) {
    const GenerationRecord rec_plain =
        generate_plain(provider, prompt, config.gen_length, plain_seed);
    push(Label::negative, Condition::unwatermarked, Detector::temperature,
         detect(provider, detection_text(rec_plain, wm.window_len), wm, 0.0).score);
    push(Label::negative, Condition::unwatermarked, Detector::baseline,
         detect_baseline(detection_text(rec_plain, bl.window_len), bl, vocab_size).z);
  }
  return out;
}

}  // namespace

ScoreCorpusResult score_corpus(const std::vector<EvalSample>& samples,
                               const LogitsProvider& provider, const Vocab& vocab,
                               const EvalConfig& config) {
  if (samples.empty()) throw std::invalid_argument("no samples to score");
  config.watermark.validate();
  config.baseline.validate();
  if (config.attack_fraction.has_value() &&
      !(*config.attack_fraction >= 0.0 && *config.attack_fraction <= 1.0)) {
    throw std::invalid_argument("fraction must be in [0,1]");
  }
  if (config.gen_length < 1) throw std::invalid_argument("length must be at least 1");

  std::vector<PerSample> results(samples.size());

  unsigned n_threads = config.max_threads != 0 ? config.max_threads
                                               : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, samples.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < samples.size(); i = next.fetch_add(1)) {
      try {
        results[i] = score_one(i, samples[i], provider, vocab, config);
      } catch (...) {
        results[i].error = std::current_exception();
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Merge in sample-index order so output is independent of interleaving.
  ScoreCorpusResult merged;
  for (PerSample& r : results) {
    if (r.error) std::rethrow_exception(r.error);
    if (r.skipped) {
      merged.n_skipped += 1;
      merged.warnings.push_back(std::move(r.warning));
      continue;
    }
    merged.rows.insert(merged.rows.end(), r.rows.begin(), r.rows.end());
  }
  if (merged.rows.empty()) throw std::runtime_error("no samples could be scored");
  return merged;
}

RocCurve roc(const std::vector<double>& positive_scores,
             const std::vector<double>& negative_scores) {
  if (positive_scores.empty() || negative_scores.empty()) {
    throw std::invalid_argument("roc requires nonempty positive and negative scores");
  }

  std::vector<double> pos_sorted = positive_scores;
  std::vector<double> neg_sorted = negative_scores;
  std::sort(pos_sorted.begin(), pos_sorted.end());
  std::sort(neg_sorted.begin(), neg_sorted.end());

  std::vector<double> thresholds;
  thresholds.reserve(pos_sorted.size() + neg_sorted.size() + 1);
  thresholds.push_back(std::numeric_limits<double>::infinity());
  thresholds.insert(thresholds.end(), pos_sorted.begin(), pos_sorted.end());
  thresholds.insert(thresholds.end(), neg_sorted.begin(), neg_sorted.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double n_pos = static_cast<double>(pos_sorted.size());
  const double n_neg = static_cast<double>(neg_sorted.size());

  auto count_at_least = [](const std::vector<double>& sorted, double threshold) {
    return static_cast<double>(sorted.end() -
                               std::lower_bound(sorted.begin(), sorted.end(), threshold));
  };

  RocCurve curve;
  curve.points.reserve(thresholds.size());
  for (const double threshold : thresholds) {
    RocPoint point;
    point.threshold = threshold;
    point.tpr = std::isinf(threshold) ? 0.0 : count_at_least(pos_sorted, threshold) / n_pos;
    point.fpr = std::isinf(threshold) ? 0.0 : count_at_least(neg_sorted, threshold) / n_neg;
    curve.points.push_back(point);
  }

  double auc = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    auc += (b.fpr - a.fpr) * (b.tpr + a.tpr) * 0.5;
  }
  curve.auc = auc;
  return curve;
}

ThresholdMetrics metrics_at_threshold(const std::vector<double>& positive_scores,
                                      const std::vector<double>& negative_scores,
                                      double threshold) {
  if (positive_scores.empty() || negative_scores.empty()) {
    throw std::invalid_argument("metrics require nonempty positive and negative scores");
  }
  double tp = 0.0;
  double fp = 0.0;
  for (double p : positive_scores) tp += (p >= threshold) ? 1.0 : 0.0;
  for (double n : negative_scores) fp += (n >= threshold) ? 1.0 : 0.0;

  ThresholdMetrics m;
  m.tpr = tp / static_cast<double>(positive_scores.size());
  m.fpr = fp / static_cast<double>(negative_scores.size());
  m.precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
  const double recall = m.tpr;
  m.f1 = (m.precision + recall) > 0.0 ? 2.0 * m.precision * recall / (m.precision + recall)
                                      : 0.0;
  return m;
}

double tpr_at_fpr(const RocCurve& curve, double fpr_target) {
  double best = 0.0;
  for (const RocPoint& p : curve.points) {
    if (p.fpr <= fpr_target) best = std::max(best, p.tpr);
  }
  return best;
}

std::vector<ConditionEval> evaluate_table(const ScoreTable& table, std::size_t n_skipped) {
  auto scores_of = [&](Detector det, Condition cond, Label label) {
    std::vector<double> scores;
    for (const ScoreRow& row : table) {
      if (row.detector == det && row.condition == cond && row.label == label) {
        scores.push_back(row.score);
      }
    }
    return scores;
  };

  std::vector<ConditionEval> evals;
  for (const Detector det : {Detector::temperature, Detector::baseline}) {
    const std::vector<double> negatives = scores_of(det, Condition::clean, Label::negative);
    for (const Condition cond : {Condition::clean, Condition::attacked}) {
      const std::vector<double> positives = scores_of(det, cond, Label::positive);
      if (positives.empty() || negatives.empty()) continue;

      ConditionEval eval;
      eval.detector = det;
      eval.condition = cond;
      eval.curve = roc(positives, negatives);
      eval.summary.auc = eval.curve.auc;
      eval.summary.tpr_at_fpr_002 = tpr_at_fpr(eval.curve, 0.02);
      double best_f1 = 0.0;
      for (const RocPoint& p : eval.curve.points) {
        best_f1 = std::max(best_f1, metrics_at_threshold(positives, negatives, p.threshold).f1);
      }
      eval.summary.f1_at_best = best_f1;
      eval.summary.n_pos = positives.size();
      eval.summary.n_neg = negatives.size();
      eval.summary.n_skipped = n_skipped;
      evals.push_back(std::move(eval));
    }
  }
  return evals;
}

void write_scores_csv(const std::filesystem::path& path, const ScoreTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open scores file for writing: " + path.string());
  out << "id,label,condition,detector,score\n";
  for (const ScoreRow& row : table) {
    out << csv_escape(row.id) << ',' << to_string(row.label) << ',' << to_string(row.condition)
        << ',' << to_string(row.detector) << ',' << format_double(row.score) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing scores file: " + path.string());
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open roc file for writing: " + path.string());
  out << "threshold,fpr,tpr\n";
  for (const RocPoint& p : curve.points) {
    out << format_double(p.threshold) << ',' << format_double(p.fpr) << ','
        << format_double(p.tpr) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing roc file: " + path.string());
}

void write_summary_json(const std::filesystem::path& path,
                        const std::vector<ConditionEval>& evals) {
  json summary = json::object();
  for (const ConditionEval& eval : evals) {
    json entry;
    entry["auc"] = eval.summary.auc;
    entry["f1_at_best"] = eval.summary.f1_at_best;
    entry["tpr_at_fpr_0.02"] = eval.summary.tpr_at_fpr_002;
    entry["n_pos"] = eval.summary.n_pos;
    entry["n_neg"] = eval.summary.n_neg;
    entry["n_skipped"] = eval.summary.n_skipped;
    summary[std::string(to_string(eval.detector))][std::string(to_string(eval.condition))] =
        std::move(entry);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open summary file for writing: " + path.string());
  out << summary.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing summary file: " + path.string());
}

}  // namespace tempmark
