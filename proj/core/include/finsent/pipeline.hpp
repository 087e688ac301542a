#pragma once

#include <optional>
#include <string>
#include <vector>

#include "finsent/blstm.hpp"
#include "finsent/config.hpp"
#include "finsent/corpus.hpp"
#include "finsent/eval.hpp"
#include "finsent/features.hpp"
#include "finsent/svr.hpp"

namespace finsent {

// A trained experiment: the config plus whichever artifact set the model
// kind requires (vocabulary + replacements + SVR weights, or the BLSTM
// parameter container).
struct TrainedPipeline {
  ExperimentConfig config;
  Vocabulary vocab;                 // SVR only
  ReplacementConfig replacements;   // SVR only
  SvrModel svr;                     // SVR only
  BlstmModel blstm;                 // BLSTM only
};

// Tokenize -> escape reserved collisions -> word replacements; the shared
// front end of the SVR feature path.
TokenSequence feature_tokens(const std::string& sentence,
                             const ExperimentConfig& cfg,
                             const ReplacementConfig& replacements);

// wv may be null when nothing needs embeddings (SVR without lexicon
// replacements); otherwise ConfigError.
TrainedPipeline train_pipeline(const ExperimentConfig& cfg,
                               const std::vector<HeadlineInstance>& train,
                               const WordVectors* wv);

PredictionSet predict_pipeline(const TrainedPipeline& pipeline,
                               const std::vector<HeadlineInstance>& instances,
                               const WordVectors* wv, bool clamp = false);

// Model directory layout: manifest.json plus model.json/vocab.json/
// replacements.json (SVR) or model.bin (BLSTM).
void save_pipeline(const std::string& dir, const TrainedPipeline& pipeline,
                   const std::string& dataset_path,
                   const std::string& dataset_bytes);
TrainedPipeline load_pipeline(const std::string& dir);

// Convenience wrapper over eval::cross_validate: splits by sentence group
// with k folds (seeded from cfg.root_seed) and trains cfg's model per fold.
CvReport run_cross_validation(const ExperimentConfig& cfg,
                              const std::vector<HeadlineInstance>& instances,
                              int k, Metric metric, const WordVectors* wv);

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

// Cartesian product of the axes applied over the base config.
std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base,
                                          const std::vector<GridAxis>& axes);

// The default sweep: C and epsilon values, both tokenizers, the three
// n-gram settings, replacements off or on with each lexicon size.
std::vector<GridAxis> default_grid();

}  // namespace finsent
