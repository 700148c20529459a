// rfa/classifier.h
//
// Binary RBF-kernel SVM trained with SMO, speaker-independent k-fold
// cross-validation with an inner grid search over (C, gamma), and
// accuracy / per-class F1 reporting.

#ifndef RFA_CLASSIFIER_H_
#define RFA_CLASSIFIER_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rfa/audio_io.h"
#include "rfa/features.h"
#include "rfa/matrix.h"

namespace rfa {

// Per-dimension z-scoring fitted on training rows. Dimensions with zero
// spread pass through untouched.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Scaler fit(const Matrix& train);
  bool empty() const { return mean.empty(); }
  std::vector<double> apply(std::span<const double> row) const;
  Matrix apply(const Matrix& x) const;
};

struct Standardized {
  Matrix train;
  Matrix applied;
  Scaler scaler;
};

Standardized standardize(const Matrix& train, const Matrix& apply_to);

struct SvmOptions {
  double tolerance = 1e-3;  // stop when the maximal KKT violation drops below
  std::size_t max_iterations = 10'000'000;
  bool record_objective = false;
};

struct SvmModel {
  Matrix support_vectors;  // in scaled feature space
  std::vector<double> alphas;
  std::vector<int> labels;  // +1 / -1
  double bias = 0.0;
  double gamma = 0.0;
  double C = 0.0;
  Scaler scaler;  // applied to queries; empty means identity

  // Diagnostics from training.
  std::size_t iterations = 0;
  double kkt_gap = 0.0;
  std::vector<double> objective_history;  // dual objective, if recorded

  std::size_t dim() const { return support_vectors.cols(); }
};

// SMO with second-order working-set selection on the dual of the
// soft-margin SVM, K(u,v) = exp(-gamma |u - v|^2). `x` is expected to be
// standardized already; the returned model carries an identity scaler.
// Throws kSingleClass, kNonFinite, kDimensionMismatch, kInvalidArgument.
SvmModel svm_train(const Matrix& x, std::span<const int> y, double C, double gamma,
                   const SvmOptions& opts = {});

struct SvmPrediction {
  int label = 1;
  double decision = 0.0;
};

// sign(sum_i alpha_i y_i K(sv_i, scaled x) + b); an exact zero maps to +1.
SvmPrediction svm_predict(const SvmModel& model, std::span<const double> x);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::string> test_speakers;
};

// Speaker-level k-fold partition. Speakers are grouped by class label,
// shuffled within each class by a seeded generator and dealt round-robin
// into k folds, so fold sizes differ by at most one speaker and every class
// with at least k speakers appears in every fold. Row order does not
// affect the partition. Throws kDegenerateFolds with fewer than k speakers.
std::vector<Fold> speaker_kfold(std::span<const std::string> speakers,
                                std::span<const std::string> groups, std::size_t k,
                                std::uint64_t seed);

std::vector<Fold> speaker_kfold(const DatasetManifest& manifest, std::size_t k,
                                std::uint64_t seed);

struct SvmGrid {
  std::vector<double> C = {0.1, 1.0, 10.0, 100.0};
  std::vector<double> gamma = {0.001, 0.01, 0.1, 1.0};
};

struct GridChoice {
  double C = 0.0;
  double gamma = 0.0;
  double accuracy = 0.0;  // mean inner-fold accuracy
};

// Inner speaker-independent k-fold over the given rows. Ties go to the
// smaller C, then the smaller gamma.
GridChoice grid_search(const Matrix& x, std::span<const int> y,
                       std::span<const std::string> speakers, const SvmGrid& grid,
                       std::size_t inner_k = 3, std::uint64_t seed = 0);

struct BinaryMetrics {
  double accuracy = 0.0;
  double f1_positive = 0.0;  // label +1 as the positive class
  double f1_negative = 0.0;  // label -1 as the positive class
};

BinaryMetrics binary_metrics(std::span<const int> truth, std::span<const int> predicted);

struct LabeledData {
  Matrix features;
  std::vector<std::string> utterance_ids;
  std::vector<std::string> speaker_ids;
  std::vector<std::string> groups;
  std::vector<std::string> feature_names;
};

// Rows of the two groups with the named columns; rows with a missing value
// in any selected column are dropped and counted in `dropped`.
LabeledData select_features(const FeatureTable& table,
                            std::span<const std::string> feature_names,
                            const std::string& group_a, const std::string& group_b,
                            std::size_t* dropped = nullptr);

struct EvalOptions {
  std::size_t k = 3;
  std::size_t inner_k = 3;
  std::uint64_t seed = 0;
  SvmGrid grid;
};

struct FoldReport {
  double accuracy = 0.0;
  std::map<std::string, double> f1;  // per group label
  double C = 0.0;
  double gamma = 0.0;
  double inner_accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<std::string> test_speakers;
};

struct CvReport {
  std::string feature_set;
  std::string group_a;  // as named by the caller
  std::string group_b;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::size_t dimension = 0;
  std::vector<FoldReport> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::map<std::string, double> mean_f1;
  std::map<std::string, double> std_f1;
};

// Outer speaker-independent k-fold: per fold, standardize on the training
// rows, grid search (C, gamma) by inner k-fold, train, and score the test
// rows. Rows are processed in utterance-id order and the smaller group label
// is trained as +1, so swapping the pair only swaps the per-group entries.
// Standard deviations are population (divide by k).
CvReport evaluate(const LabeledData& data, const std::string& group_a,
                  const std::string& group_b, const EvalOptions& opts = {},
                  const std::string& feature_set = {});

std::string report_to_json(const CvReport& report);
std::string report_to_text(const CvReport& report);

}  // namespace rfa

#endif  // RFA_CLASSIFIER_H_
