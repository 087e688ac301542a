#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "finsent/features.hpp"

namespace finsent {

struct SvrConfig {
  double C = 0.1;        // penalty parameter, > 0
  double epsilon = 0.01; // tube half-width, >= 0
  double tol = 1e-6;     // duality-gap stop threshold
  int max_iter = 10000;  // outer epoch cap
  std::uint64_t seed = 0;
};

struct SvrTrainingSummary {
  int epochs = 0;
  double primal_objective = 0.0;
  double duality_gap = 0.0;
  std::vector<double> primal_trace;  // objective at each epoch boundary
};

// Linear epsilon-insensitive SVR: w, unregularized bias b.
struct SvrModel {
  std::vector<double> weights;
  double bias = 0.0;
  SvrConfig config;
  SvrTrainingSummary training_summary;
  // Dual variables at termination (training diagnostic, not serialized).
  std::vector<double> dual_coefficients;
};

// Minimizes 1/2 |w|^2 + C sum_i max(0, |w.x_i + b - y_i| - epsilon) via
// pairwise coordinate descent on the equality-constrained dual (the bias
// makes single-coordinate moves infeasible, so coordinates move in
// sum-preserving pairs). Pair order is a seeded random permutation per
// epoch plus a greedy max-violating-pair tail. Stops when the duality gap
// is <= tol or after max_iter epochs. Deterministic for a fixed seed.
SvrModel train_svr(const std::vector<SparseFeatureVector>& X,
                   const std::vector<double>& y, const SvrConfig& cfg);

// w.x + b, unclamped.
double predict_svr(const SvrModel& model, const SparseFeatureVector& x);

// Primal objective of the model on (X, y) under model.config.
double svr_objective(const SvrModel& model,
                     const std::vector<SparseFeatureVector>& X,
                     const std::vector<double>& y);

// Exact minimizer of sum_i max(0, |b - r_i| - epsilon) over b (midpoint of
// the flat minimum interval). Exposed for the solver and the tests.
double optimal_bias(std::span<const double> residuals, double epsilon);

std::string svr_model_to_json(const SvrModel& model);
SvrModel svr_model_from_json(const std::string& text);

}  // namespace finsent
