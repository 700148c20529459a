// rfa/svm.cc

#include <algorithm>
#include <cmath>
#include <limits>

#include "rfa/classifier.h"
#include "rfa/error.h"

namespace rfa {
namespace {

constexpr double kTau = 1e-12;

double rbf(std::span<const double> u, std::span<const double> v, double gamma) {
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double t = u[i] - v[i];
    d += t * t;
  }
  return std::exp(-gamma * d);
}

}  // namespace

Scaler Scaler::fit(const Matrix& train) {
  if (train.rows() == 0) throw Error(Errc::kEmptyInput, "scaler: no training rows");
  Scaler s;
  const std::size_t n = train.rows(), d = train.cols();
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += train(r, c);
  }
  for (double& m : s.mean) m /= n;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double t = train(r, c) - s.mean[c];
      s.stddev[c] += t * t;
    }
  }
  for (double& v : s.stddev) v = std::sqrt(v / n);
  return s;
}

std::vector<double> Scaler::apply(std::span<const double> row) const {
  std::vector<double> out(row.begin(), row.end());
  if (empty()) return out;
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (stddev[c] > 0.0) out[c] = (out[c] - mean[c]) / stddev[c];
  }
  return out;
}

Matrix Scaler::apply(const Matrix& x) const {
  Matrix out = x;
  if (empty()) return out;
  if (x.cols() != mean.size()) {
    throw Error(Errc::kDimensionMismatch, "scaler: column count mismatch");
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (stddev[c] > 0.0) out(r, c) = (x(r, c) - mean[c]) / stddev[c];
    }
  }
  return out;
}

Standardized standardize(const Matrix& train, const Matrix& apply_to) {
  Standardized s;
  s.scaler = Scaler::fit(train);
  s.train = s.scaler.apply(train);
  s.applied = s.scaler.apply(apply_to);
  return s;
}

SvmModel svm_train(const Matrix& x, std::span<const int> y, double C, double gamma,
                   const SvmOptions& opts) {
  const std::size_t n = x.rows();
  if (n == 0) throw Error(Errc::kEmptyInput, "svm_train: no rows");
  if (y.size() != n) throw Error(Errc::kDimensionMismatch, "svm_train: label count mismatch");
  if (!(C > 0) || !(gamma > 0)) {
    throw Error(Errc::kInvalidArgument, "svm_train: C and gamma must be positive");
  }
  bool has_pos = false, has_neg = false;
  for (int label : y) {
    if (label == 1) {
      has_pos = true;
    } else if (label == -1) {
      has_neg = true;
    } else {
      throw Error(Errc::kInvalidArgument, "svm_train: labels must be +1/-1");
    }
  }
  if (!has_pos || !has_neg) throw Error(Errc::kSingleClass, "svm_train: single-class input");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(Errc::kNonFinite, "svm_train: non-finite feature");
  }

  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) k(i, j) = k(j, i) = rbf(x.row(i), x.row(j), gamma);
  }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a
  auto upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto dual_objective = [&] {
    double f = 0.0;
    for (std::size_t t = 0; t < n; ++t) f += alpha[t] * (grad[t] - 1.0);
    return -0.5 * f;
  };

  SvmModel model;
  model.C = C;
  model.gamma = gamma;
  if (opts.record_objective) model.objective_history.push_back(dual_objective());

  std::size_t iter = 0;
  double gap = 0.0;
  for (; iter < opts.max_iterations; ++iter) {
    // i maximizes -y_t G_t over the "up" set.
    double g_max = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1 ? !upper(t) : !lower(t)) {
        const double v = -y[t] * grad[t];
        if (v > g_max) {
          g_max = v;
          i = t;
        }
      }
    }
    // j minimizes the second-order objective decrease over the "low" set.
    double g_max2 = -std::numeric_limits<double>::infinity();
    double best_drop = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1 ? !lower(t) : !upper(t)) {
        const double v = y[t] * grad[t];
        g_max2 = std::max(g_max2, v);
        const double diff = g_max + v;
        if (i < n && diff > 0) {
          double quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
          if (quad <= 0) quad = kTau;
          const double drop = -(diff * diff) / quad;
          if (drop < best_drop) {
            best_drop = drop;
            j = t;
          }
        }
      }
    }
    gap = g_max + g_max2;
    if (i == n || j == n || gap < opts.tolerance) break;

    const double qij = y[i] * y[j] * k(i, j);
    const double old_i = alpha[i], old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = k(i, i) + k(j, j) + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * k(i, t) * di + y[j] * k(j, t) * dj);
    }
    if (opts.record_objective) model.objective_history.push_back(dual_objective());
  }
  model.iterations = iter;
  model.kkt_gap = gap;

  // Offset from free vectors, or the midpoint of the feasible interval.
  double sum_free = 0.0;
  std::size_t free = 0;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      sum_free += yg;
      ++free;
    }
  }
  const double rho = free > 0 ? sum_free / free : 0.5 * (ub + lb);
  model.bias = -rho;

  std::size_t sv = 0;
  for (double a : alpha) sv += a > 0.0;
  model.support_vectors = Matrix(sv, x.cols());
  std::size_t r = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    std::copy(x.row(t).begin(), x.row(t).end(), model.support_vectors.row(r).begin());
    model.alphas.push_back(alpha[t]);
    model.labels.push_back(y[t]);
    ++r;
  }
  return model;
}

SvmPrediction svm_predict(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) {
    throw Error(Errc::kDimensionMismatch, "svm_predict: expected " +
                                              std::to_string(model.dim()) + " features, got " +
                                              std::to_string(x.size()));
  }
  const std::vector<double> q = model.scaler.apply(x);
  double f = model.bias;
  for (std::size_t i = 0; i < model.alphas.size(); ++i) {
    f += model.alphas[i] * model.labels[i] * rbf(model.support_vectors.row(i), q, model.gamma);
  }
  return {f >= 0.0 ? 1 : -1, f};
}

}  // namespace rfa
