#include "finsent/eval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "finsent/embeddings.hpp"
#include "finsent/errors.hpp"
#include "json.hpp"

namespace finsent {
namespace {

double require_gold(const HeadlineInstance& inst) {
  if (!inst.gold_score)
    throw DataError("instance '" + inst.id + "' has no gold score");
  return *inst.gold_score;
}

// Answered (prediction, gold) pairs in gold order.
void collect_answered(const PredictionSet& preds,
                      const std::vector<HeadlineInstance>& gold,
                      std::vector<double>& yhat, std::vector<double>& y) {
  for (const auto& inst : gold) {
    auto it = preds.scores.find(inst.id);
    if (it == preds.scores.end()) continue;
    yhat.push_back(it->second);
    y.push_back(require_gold(inst));
  }
  if (yhat.empty()) throw NoAnswersError("no answered instances");
}

}  // namespace

double metric1_weighted_cosine(const PredictionSet& preds,
                               const std::vector<HeadlineInstance>& gold) {
  std::vector<double> yhat, y;
  collect_answered(preds, gold, yhat, y);
  const double cos = cosine_similarity_unchecked<double, double>(yhat, y);
  return cos * (static_cast<double>(yhat.size()) /
                static_cast<double>(gold.size()));
}

double metric2_sentence_cosine(
    const PredictionSet& preds, const std::vector<HeadlineInstance>& gold,
    bool allow_partial,
    std::vector<std::pair<std::string, double>>* per_sentence) {
  std::unordered_map<std::string, const HeadlineInstance*> by_id;
  for (const auto& inst : gold) by_id.emplace(inst.id, &inst);

  auto groups = group_by_sentence(gold);
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& group : groups) {
    std::vector<double> yhat, y;
    for (const auto& id : group.members) {
      auto it = preds.scores.find(id);
      if (it == preds.scores.end()) {
        if (!allow_partial)
          throw MissingPredictionError("no prediction for '" + id + "'");
        continue;
      }
      yhat.push_back(it->second);
      y.push_back(require_gold(*by_id.at(id)));
    }
    if (yhat.empty()) continue;  // allow_partial: group drops out of N
    const double cos = cosine_similarity_unchecked<double, double>(yhat, y);
    if (per_sentence) per_sentence->emplace_back(group.sentence_key, cos);
    total += cos;
    ++counted;
  }
  if (counted == 0) throw NoAnswersError("no scored sentence groups");
  return total / static_cast<double>(counted);
}

double metric3_task_cosine(const PredictionSet& preds,
                           const std::vector<HeadlineInstance>& gold) {
  std::vector<double> yhat, y;
  collect_answered(preds, gold, yhat, y);
  return cosine_similarity_unchecked<double, double>(yhat, y);
}

double mae(const PredictionSet& preds,
           const std::vector<HeadlineInstance>& gold) {
  std::vector<double> yhat, y;
  collect_answered(preds, gold, yhat, y);
  double total = 0.0;
  for (std::size_t i = 0; i < yhat.size(); ++i)
    total += std::abs(yhat[i] - y[i]);
  return total / static_cast<double>(yhat.size());
}

std::vector<TopError> top_errors(const PredictionSet& preds,
                                 const std::vector<HeadlineInstance>& gold,
                                 std::size_t k) {
  std::unordered_set<std::string> multi;
  for (const auto& group : group_by_sentence(gold)) {
    if (group.members.size() > 1)
      multi.insert(group.members.begin(), group.members.end());
  }
  std::vector<TopError> all;
  for (const auto& inst : gold) {
    auto it = preds.scores.find(inst.id);
    if (it == preds.scores.end()) continue;
    all.push_back({inst.id, std::abs(it->second - require_gold(inst)),
                   multi.count(inst.id) > 0});
  }
  std::sort(all.begin(), all.end(), [](const TopError& a, const TopError& b) {
    if (a.abs_error != b.abs_error) return a.abs_error > b.abs_error;
    return a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

EvalReport evaluate(const PredictionSet& preds,
                    const std::vector<HeadlineInstance>& gold,
                    std::size_t top_k, bool allow_partial) {
  EvalReport report;
  report.n_total = gold.size();
  for (const auto& inst : gold)
    if (preds.answered(inst.id)) ++report.n_answered;
  report.metric1 = metric1_weighted_cosine(preds, gold);
  report.metric2 =
      metric2_sentence_cosine(preds, gold, allow_partial, &report.per_sentence);
  report.metric3 = metric3_task_cosine(preds, gold);
  report.mae = mae(preds, gold);
  report.top_errors = top_errors(preds, gold, top_k);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json doc;
  doc["metric1"] = report.metric1;
  doc["metric2"] = report.metric2;
  doc["metric3"] = report.metric3;
  doc["mae"] = report.mae;
  doc["n_answered"] = report.n_answered;
  doc["n_total"] = report.n_total;
  doc["top_errors"] = nlohmann::json::array();
  for (const auto& e : report.top_errors) {
    doc["top_errors"].push_back({{"id", e.id},
                                 {"abs_error", e.abs_error},
                                 {"multi_aspect", e.multi_aspect}});
  }
  return doc.dump(2) + "\n";
}

std::string predictions_to_json(const PredictionSet& preds,
                                const std::vector<std::string>& id_order) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& id : id_order) {
    auto it = preds.scores.find(id);
    if (it == preds.scores.end()) continue;
    arr.push_back({{"id", id}, {"score", it->second}});
  }
  return arr.dump(2) + "\n";
}

PredictionSet predictions_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid predictions JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("predictions must be an array");
  PredictionSet preds;
  for (const auto& rec : doc) {
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("score") ||
        !rec["id"].is_string() || !rec["score"].is_number())
      throw ParseError("prediction records must be {id: string, score: number}");
    const auto id = rec["id"].get<std::string>();
    const double score = rec["score"].get<double>();
    if (!std::isfinite(score))
      throw ParseError("non-finite score for '" + id + "'");
    if (!preds.scores.emplace(id, score).second)
      throw ParseError("duplicate prediction for '" + id + "'");
  }
  return preds;
}

Metric metric_from_name(const std::string& name) {
  if (name == "metric1") return Metric::Metric1;
  if (name == "metric2") return Metric::Metric2;
  if (name == "metric3") return Metric::Metric3;
  if (name == "mae") return Metric::Mae;
  throw ConfigError("unknown metric '" + name + "'");
}

std::string metric_name(Metric metric) {
  switch (metric) {
    case Metric::Metric1: return "metric1";
    case Metric::Metric2: return "metric2";
    case Metric::Metric3: return "metric3";
    case Metric::Mae: return "mae";
  }
  return "?";
}

CvReport cross_validate(const std::vector<HeadlineInstance>& instances,
                        const FoldAssignment& folds, Metric metric,
                        const TrainPredictFn& fn) {
  std::vector<std::vector<HeadlineInstance>> per_fold(folds.k);
  for (const auto& inst : instances) {
    auto it = folds.assignment.find(canonical_sentence_key(inst.sentence));
    if (it == folds.assignment.end())
      throw DataError("instance '" + inst.id + "' not covered by the fold "
                      "assignment");
    per_fold[it->second].push_back(inst);
  }

  CvReport report;
  for (int f = 0; f < folds.k; ++f) {
    std::vector<HeadlineInstance> train;
    for (int g = 0; g < folds.k; ++g) {
      if (g == f) continue;
      train.insert(train.end(), per_fold[g].begin(), per_fold[g].end());
    }
    const auto& test = per_fold[f];
    PredictionSet preds = fn(train, test);
    double score = 0.0;
    switch (metric) {
      case Metric::Metric1: score = metric1_weighted_cosine(preds, test); break;
      case Metric::Metric2: score = metric2_sentence_cosine(preds, test); break;
      case Metric::Metric3: score = metric3_task_cosine(preds, test); break;
      case Metric::Mae: score = mae(preds, test); break;
    }
    report.fold_scores.push_back(score);
    report.mean += score;
  }
  report.mean /= static_cast<double>(folds.k);
  return report;
}

}  // namespace finsent
