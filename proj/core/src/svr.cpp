#include "finsent/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "finsent/errors.hpp"
#include "finsent/rng.hpp"
#include "json.hpp"

namespace finsent {
namespace {

double sparse_dot(const SparseFeatureVector& a, const SparseFeatureVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    if (a.entries[i].first == b.entries[j].first) {
      s += a.entries[i].second * b.entries[j].second;
      ++i;
      ++j;
    } else if (a.entries[i].first < b.entries[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

double dot_dense(const std::vector<double>& w, const SparseFeatureVector& x) {
  double s = 0.0;
  for (const auto& [col, val] : x.entries) s += w[col] * val;
  return s;
}

void axpy(std::vector<double>& w, double a, const SparseFeatureVector& x) {
  for (const auto& [col, val] : x.entries) w[col] += a * val;
}

struct DualState {
  const std::vector<SparseFeatureVector>& X;
  const std::vector<double>& y;
  double C;
  double eps;
  std::vector<double> beta;   // alpha+ - alpha-, |beta_i| <= C, sum = 0
  std::vector<double> w;      // sum_i beta_i x_i
  std::vector<double> q_diag; // |x_i|^2

  double margin_error(std::size_t i) const { return dot_dense(w, X[i]) - y[i]; }

  // Exact maximizer of the pair subproblem: beta_i += t, beta_j -= t.
  // psi(t) = -eta t^2/2 - t d - eps(|beta_i + t| + |beta_j - t|), concave
  // piecewise quadratic; the best of the clipped stationary points, the
  // kinks and the box ends is the exact solution.
  bool update_pair(std::size_t i, std::size_t j) {
    const double bi = beta[i], bj = beta[j];
    const double lo = std::max(-C - bi, bj - C);
    const double hi = std::min(C - bi, bj + C);
    if (lo >= hi) return false;

    const double d = margin_error(i) - margin_error(j);
    const double eta = q_diag[i] + q_diag[j] - 2.0 * sparse_dot(X[i], X[j]);

    auto psi = [&](double t) {
      return -0.5 * eta * t * t - t * d -
             eps * (std::abs(bi + t) + std::abs(bj - t));
    };

    double cands[8];
    int nc = 0;
    auto clip = [&](double t) { cands[nc++] = std::clamp(t, lo, hi); };
    clip(lo);
    clip(hi);
    clip(-bi);
    clip(bj);
    if (eta > 0.0) {
      for (double s1 : {-1.0, 1.0})
        for (double s2 : {-1.0, 1.0}) clip((-d - eps * s1 + eps * s2) / eta);
    }

    double best_t = 0.0, best_v = 0.0;  // psi(0) == value of staying put
    const double base = psi(0.0);
    for (int k = 0; k < nc; ++k) {
      double v = psi(cands[k]) - base;
      if (v > best_v) {
        best_v = v;
        best_t = cands[k];
      }
    }
    if (best_v <= 0.0 || best_t == 0.0) return false;

    beta[i] += best_t;
    beta[j] -= best_t;
    axpy(w, best_t, X[i]);
    axpy(w, -best_t, X[j]);
    return true;
  }

  // Directional derivatives of the dual cost for growing/shrinking one
  // coordinate; used by the greedy max-violating-pair phase.
  double up_deriv(std::size_t i, double g) const {
    return g + (beta[i] >= 0.0 ? eps : -eps);
  }
  double down_deriv(std::size_t i, double g) const {
    return -g + (beta[i] > 0.0 ? -eps : eps);
  }

  double primal(double b) const {
    double obj = 0.0;
    for (double v : w) obj += v * v;
    obj *= 0.5;
    for (std::size_t i = 0; i < X.size(); ++i) {
      double viol = std::abs(dot_dense(w, X[i]) + b - y[i]) - eps;
      if (viol > 0.0) obj += C * viol;
    }
    return obj;
  }

  double dual() const {
    double ww = 0.0;
    for (double v : w) ww += v * v;
    double val = -0.5 * ww;
    for (std::size_t i = 0; i < X.size(); ++i)
      val += y[i] * beta[i] - eps * std::abs(beta[i]);
    return val;
  }

  void recompute_w() {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < X.size(); ++i) axpy(w, beta[i], X[i]);
  }
};

}  // namespace

double optimal_bias(std::span<const double> residuals, double epsilon) {
  std::vector<double> lows, highs;
  lows.reserve(residuals.size());
  highs.reserve(residuals.size());
  for (double r : residuals) {
    lows.push_back(r - epsilon);
    highs.push_back(r + epsilon);
  }
  std::sort(lows.begin(), lows.end());
  std::sort(highs.begin(), highs.end());

  std::vector<double> points;
  points.reserve(2 * residuals.size());
  points.insert(points.end(), lows.begin(), lows.end());
  points.insert(points.end(), highs.begin(), highs.end());
  std::sort(points.begin(), points.end());

  // The loss is convex piecewise linear; its minimum is the interval
  // between the first point whose right derivative is >= 0 and the last
  // whose left derivative is <= 0.
  auto right_deriv = [&](double b) {
    auto nh = std::upper_bound(highs.begin(), highs.end(), b) - highs.begin();
    auto nl = lows.end() - std::upper_bound(lows.begin(), lows.end(), b);
    return static_cast<double>(nh - nl);
  };
  auto left_deriv = [&](double b) {
    auto nh = std::lower_bound(highs.begin(), highs.end(), b) - highs.begin();
    auto nl = lows.end() - std::lower_bound(lows.begin(), lows.end(), b);
    return static_cast<double>(nh - nl);
  };

  double u = points.back(), v = points.front();
  for (double p : points) {
    if (right_deriv(p) >= 0.0) {
      u = p;
      break;
    }
  }
  for (auto it = points.rbegin(); it != points.rend(); ++it) {
    if (left_deriv(*it) <= 0.0) {
      v = *it;
      break;
    }
  }
  return 0.5 * (u + v);
}

SvrModel train_svr(const std::vector<SparseFeatureVector>& X,
                   const std::vector<double>& y, const SvrConfig& cfg) {
  if (X.empty() || X.size() != y.size())
    throw DimensionMismatchError("need |X| == |y| >= 1, got " +
                                 std::to_string(X.size()) + " and " +
                                 std::to_string(y.size()));
  if (cfg.C <= 0.0 || cfg.epsilon < 0.0 || cfg.tol <= 0.0 || cfg.max_iter < 1)
    throw ConfigError("invalid SvrConfig (need C > 0, epsilon >= 0, tol > 0, "
                      "max_iter >= 1)");
  const std::uint32_t width = X[0].width;
  for (const auto& x : X) {
    if (x.width != width)
      throw DimensionMismatchError("non-uniform feature width");
    for (const auto& [col, val] : x.entries) {
      if (!std::isfinite(val)) throw NonFiniteError("feature value");
    }
  }
  for (double t : y) {
    if (!std::isfinite(t)) throw NonFiniteError("target value");
  }

  const std::size_t n = X.size();
  DualState st{X, y, cfg.C, cfg.epsilon, std::vector<double>(n, 0.0),
               std::vector<double>(width, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) st.q_diag[i] = sparse_dot(X[i], X[i]);

  Rng rng(derive_seed(cfg.seed, "svr-permutation"));
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  SvrModel model;
  model.config = cfg;

  int epoch = 0;
  double gap = std::numeric_limits<double>::infinity();
  double primal = 0.0, bias = 0.0;
  std::vector<double> residuals(n);

  auto evaluate = [&] {
    st.recompute_w();  // clears incremental drift before measuring
    for (std::size_t i = 0; i < n; ++i)
      residuals[i] = y[i] - dot_dense(st.w, X[i]);
    bias = optimal_bias(residuals, cfg.epsilon);
    primal = st.primal(bias);
    gap = primal - st.dual();
    model.training_summary.primal_trace.push_back(primal);
  };

  evaluate();
  while (gap > cfg.tol && epoch < cfg.max_iter && n >= 2) {
    // Random sweep: permute, pair consecutive indices.
    rng.shuffle(perm);
    for (std::size_t k = 0; k + 1 < n; k += 2) st.update_pair(perm[k], perm[k + 1]);
    if (n % 2 == 1 && n > 1) st.update_pair(perm[n - 1], perm[0]);

    // Greedy tail: repeatedly take the steepest feasible pair. This is
    // what drives the gap below tight tolerances once the sweep has done
    // the bulk of the work.
    const std::size_t greedy_budget = std::min<std::size_t>(n, 64);
    for (std::size_t g = 0; g < greedy_budget; ++g) {
      std::size_t best_i = n, best_j = n;
      double best_up = std::numeric_limits<double>::infinity();
      double best_down = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const double gi = st.margin_error(i);
        if (st.beta[i] < cfg.C) {
          double du = st.up_deriv(i, gi);
          if (du < best_up) {
            best_up = du;
            best_i = i;
          }
        }
        if (st.beta[i] > -cfg.C) {
          double dd = st.down_deriv(i, gi);
          if (dd < best_down) {
            best_down = dd;
            best_j = i;
          }
        }
      }
      if (best_i >= n || best_j >= n || best_i == best_j) break;
      if (best_up + best_down >= -1e-14) break;  // no improving direction
      if (!st.update_pair(best_i, best_j)) break;
    }

    ++epoch;
    evaluate();
  }

  model.weights = st.w;
  model.bias = bias;
  model.training_summary.epochs = epoch;
  model.training_summary.primal_objective = primal;
  model.training_summary.duality_gap = gap;
  model.dual_coefficients = std::move(st.beta);
  return model;
}

double predict_svr(const SvrModel& model, const SparseFeatureVector& x) {
  if (x.width != model.weights.size())
    throw DimensionMismatchError("feature width " + std::to_string(x.width) +
                                 " vs model width " +
                                 std::to_string(model.weights.size()));
  return dot_dense(model.weights, x) + model.bias;
}

double svr_objective(const SvrModel& model,
                     const std::vector<SparseFeatureVector>& X,
                     const std::vector<double>& y) {
  if (X.size() != y.size())
    throw DimensionMismatchError("|X| != |y|");
  double obj = 0.0;
  for (double w : model.weights) obj += w * w;
  obj *= 0.5;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double viol = std::abs(predict_svr(model, X[i]) - y[i]) - model.config.epsilon;
    if (viol > 0.0) obj += model.config.C * viol;
  }
  return obj;
}

std::string svr_model_to_json(const SvrModel& model) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["config"] = {{"c", model.config.C},
                   {"epsilon", model.config.epsilon},
                   {"tol", model.config.tol},
                   {"max_iter", model.config.max_iter},
                   {"seed", model.config.seed}};
  doc["bias"] = model.bias;
  doc["weights"] = model.weights;
  return doc.dump(2) + "\n";
}

SvrModel svr_model_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid model JSON: ") + e.what());
  }
  if (doc.value("version", 0) != 1)
    throw FormatError("unsupported model version");
  SvrModel model;
  const auto& c = doc.at("config");
  model.config.C = c.at("c").get<double>();
  model.config.epsilon = c.at("epsilon").get<double>();
  model.config.tol = c.at("tol").get<double>();
  model.config.max_iter = c.at("max_iter").get<int>();
  model.config.seed = c.at("seed").get<std::uint64_t>();
  model.bias = doc.at("bias").get<double>();
  model.weights = doc.at("weights").get<std::vector<double>>();
  for (double w : model.weights) {
    if (!std::isfinite(w)) throw FormatError("non-finite weight");
  }
  return model;
}

}  // namespace finsent
