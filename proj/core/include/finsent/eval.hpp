#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "finsent/corpus.hpp"

namespace finsent {

struct PredictionSet {
  std::unordered_map<std::string, double> scores;  // instance id -> y-hat

  bool answered(const std::string& id) const { return scores.count(id) > 0; }
};

struct TopError {
  std::string id;
  double abs_error = 0.0;
  bool multi_aspect = false;  // sentence group has more than one member
};

struct EvalReport {
  double metric1 = 0.0;
  double metric2 = 0.0;
  double metric3 = 0.0;
  double mae = 0.0;
  std::size_t n_answered = 0;
  std::size_t n_total = 0;
  std::vector<std::pair<std::string, double>> per_sentence;  // metric 2 terms
  std::vector<TopError> top_errors;
};

// Metric 1: cosine over answered instances (in gold order) times the
// coverage weight |answered| / |gold|.
double metric1_weighted_cosine(const PredictionSet& preds,
                               const std::vector<HeadlineInstance>& gold);

// Metric 2: mean over unique sentences of the cosine between the
// predicted and gold score vectors of the sentence's aspects. With
// allow_partial, groups are restricted to their answered members and
// fully unanswered groups drop out of N; otherwise any missing member
// prediction throws MissingPredictionError.
double metric2_sentence_cosine(
    const PredictionSet& preds, const std::vector<HeadlineInstance>& gold,
    bool allow_partial = false,
    std::vector<std::pair<std::string, double>>* per_sentence = nullptr);

// Metric 3: plain cosine over answered instances, no coverage weight.
double metric3_task_cosine(const PredictionSet& preds,
                           const std::vector<HeadlineInstance>& gold);

double mae(const PredictionSet& preds,
           const std::vector<HeadlineInstance>& gold);

// k largest |y-hat - y|, descending, ties by id.
std::vector<TopError> top_errors(const PredictionSet& preds,
                                 const std::vector<HeadlineInstance>& gold,
                                 std::size_t k = 50);

EvalReport evaluate(const PredictionSet& preds,
                    const std::vector<HeadlineInstance>& gold,
                    std::size_t top_k = 50, bool allow_partial = false);

std::string report_to_json(const EvalReport& report);

std::string predictions_to_json(const PredictionSet& preds,
                                const std::vector<std::string>& id_order);
PredictionSet predictions_from_json(const std::string& text);

enum class Metric { Metric1, Metric2, Metric3, Mae };

Metric metric_from_name(const std::string& name);
std::string metric_name(Metric metric);

struct CvReport {
  std::vector<double> fold_scores;
  double mean = 0.0;
};

// Trains on the in-fold instances and predicts the held-out ones.
using TrainPredictFn = std::function<PredictionSet(
    const std::vector<HeadlineInstance>& train,
    const std::vector<HeadlineInstance>& test)>;

// Runs fn once per fold (train = all other folds) and scores the held-out
// predictions with the selected metric. Instances must be covered by the
// fold assignment.
CvReport cross_validate(const std::vector<HeadlineInstance>& instances,
                        const FoldAssignment& folds, Metric metric,
                        const TrainPredictFn& fn);

}  // namespace finsent
