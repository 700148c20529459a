// tests/classifier_test.cc

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>
#include <json.hpp>

#include "rfa/classifier.h"
#include "rfa/error.h"

namespace rfa {
namespace {

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

double kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * d);
}

TEST(Standardize, Examples) {
  auto s = standardize(rows_to_matrix({{0, 5}, {2, 5}}), rows_to_matrix({{4, 7}}));
  EXPECT_DOUBLE_EQ(s.train(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(s.train(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.train(0, 1), 5.0);  // constant dim untouched
  EXPECT_DOUBLE_EQ(s.applied(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(s.applied(0, 1), 7.0);
}

TEST(SvmTrain, SeparableLine) {
  Matrix x = rows_to_matrix({{-2}, {-1}, {-0.5}, {0}, {1}, {1.5}, {2}, {3}});
  std::vector<int> y = {-1, -1, -1, -1, 1, 1, 1, 1};
  SvmModel m = svm_train(x, y, 10.0, 1.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    EXPECT_EQ(svm_predict(m, x.row(i)).label, y[i]);
  }
}

TEST(SvmTrain, Xor) {
  Matrix x = rows_to_matrix({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
  std::vector<int> y = {-1, -1, 1, 1};
  SvmModel m = svm_train(x, y, 10.0, 1.0);
  for (std::size_t i = 0; i < 4; ++i) {
    auto p = svm_predict(m, x.row(i));
    EXPECT_EQ(p.label, y[i]);
    EXPECT_GT(p.decision * y[i], 0.0);
  }
}

struct Blobs {
  Matrix x;
  std::vector<int> y;
};

Blobs blobs(std::size_t n, double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Blobs b{Matrix(n, 3), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 ? 1 : -1;
    for (std::size_t d = 0; d < 3; ++d) b.x(i, d) = g(rng) + (d == 0 ? label * separation : 0);
    b.y.push_back(label);
  }
  return b;
}

TEST(SvmTrain, KktFeasibilityAndOptimality) {
  Blobs b = blobs(80, 0.8, 3);  // overlapping: bounded and free alphas
  const double C = 1.0, gamma = 0.5;
  SvmOptions opts;
  opts.record_objective = true;
  SvmModel m = svm_train(b.x, b.y, C, gamma, opts);
  double sum = 0.0;
  for (std::size_t i = 0; i < m.alphas.size(); ++i) {
    EXPECT_GT(m.alphas[i], 0.0);
    EXPECT_LE(m.alphas[i], C + 1e-12);
    sum += m.alphas[i] * m.labels[i];
  }
  EXPECT_NEAR(sum, 0.0, 1e-6);
  EXPECT_LT(m.kkt_gap, 1e-3);

  // Recompute the KKT conditions from scratch over all training points:
  // y f(x) >= 1 at alpha 0, = 1 when free, <= 1 at C.
  std::vector<double> alpha_of(b.y.size(), 0.0);
  for (std::size_t s = 0; s < m.alphas.size(); ++s) {
    for (std::size_t i = 0; i < b.y.size(); ++i) {
      if (std::equal(b.x.row(i).begin(), b.x.row(i).end(), m.support_vectors.row(s).begin())) {
        alpha_of[i] = m.alphas[s];
      }
    }
  }
  for (std::size_t i = 0; i < b.y.size(); ++i) {
    const double margin = b.y[i] * svm_predict(m, b.x.row(i)).decision;
    if (alpha_of[i] == 0.0) EXPECT_GT(margin, 1 - 2e-3) << i;
    else if (alpha_of[i] >= C - 1e-12) EXPECT_LT(margin, 1 + 2e-3) << i;
    else EXPECT_NEAR(margin, 1.0, 2e-3) << i;
  }

  ASSERT_GE(m.objective_history.size(), 2u);
  for (std::size_t t = 1; t < m.objective_history.size(); ++t) {
    ASSERT_GE(m.objective_history[t], m.objective_history[t - 1] - 1e-12) << t;
  }
}

TEST(SvmTrain, Errors) {
  Matrix x = rows_to_matrix({{0}, {1}});
  auto code = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::kIo;
  };
  EXPECT_EQ(code([&] { svm_train(x, std::vector<int>{1, 1}, 1, 1); }), Errc::kSingleClass);
  Matrix bad = rows_to_matrix({{0}, {std::nan("")}});
  EXPECT_EQ(code([&] { svm_train(bad, std::vector<int>{1, -1}, 1, 1); }), Errc::kNonFinite);
  EXPECT_EQ(code([&] { svm_train(x, std::vector<int>{1}, 1, 1); }), Errc::kDimensionMismatch);
  EXPECT_EQ(code([&] { svm_train(x, std::vector<int>{1, -1}, -1, 1); }),
            Errc::kInvalidArgument);
  SvmModel m = svm_train(x, std::vector<int>{1, -1}, 1, 1);
  std::vector<double> q = {0.0, 1.0};
  EXPECT_EQ(code([&] { svm_predict(m, q); }), Errc::kDimensionMismatch);
}

TEST(SvmPredict, HardMarginSupportVectors) {
  Matrix x = rows_to_matrix({{-2, 0}, {-1.5, 1}, {-1, -1}, {1, 0}, {1.5, -1}, {2, 1}});
  std::vector<int> y = {-1, -1, -1, 1, 1, 1};
  SvmModel m = svm_train(x, y, 1e6, 0.2);
  for (std::size_t s = 0; s < m.alphas.size(); ++s) {
    EXPECT_GE(std::abs(svm_predict(m, m.support_vectors.row(s)).decision), 1 - 1e-3);
  }
}

TEST(SvmPredict, FarPointAndMidpoint) {
  Matrix x = rows_to_matrix({{-1, 0}, {1, 0}});
  std::vector<int> y = {-1, 1};
  SvmModel m = svm_train(x, y, 10, 0.5);
  std::vector<double> far = {1e3, 1e3};
  EXPECT_NEAR(svm_predict(m, far).decision, m.bias, 1e-12);
  std::vector<double> mid = {0, 0};
  EXPECT_NEAR(svm_predict(m, mid).decision, m.bias, 1e-12);
  // Direct evaluation of the decision function.
  std::vector<double> q = {0.3, -0.2};
  double f = m.bias;
  for (std::size_t s = 0; s < m.alphas.size(); ++s)
    f += m.alphas[s] * m.labels[s] * kernel(m.support_vectors.row(s), q, m.gamma);
  EXPECT_NEAR(svm_predict(m, q).decision, f, 1e-12);
}

TEST(SvmPredict, ScalerAppliedToQueries) {
  Matrix raw = rows_to_matrix({{10, 100}, {12, 300}, {20, 100}, {22, 300}});
  std::vector<int> y = {-1, -1, 1, 1};
  auto st = standardize(raw, raw);
  SvmModel m = svm_train(st.train, y, 10, 0.5);
  m.scaler = st.scaler;
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(svm_predict(m, raw.row(i)).label, y[i]);
}

std::vector<std::string> speaker_names(std::size_t n, const std::string& prefix) {
  std::vector<std::string> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(prefix + std::to_string(i));
  return s;
}

TEST(SpeakerKfold, SizesAndDeterminism) {
  auto sizes = [](std::size_t n_speakers, std::size_t k) {
    std::vector<std::string> spk, grp;
    for (std::size_t s = 0; s < n_speakers; ++s) {
      for (int u = 0; u < 3; ++u) {
        spk.push_back("spk" + std::to_string(s));
        grp.push_back(s % 2 ? "A" : "P");
      }
    }
    auto folds = speaker_kfold(spk, grp, k, 42);
    std::vector<std::size_t> out;
    for (const auto& f : folds) out.push_back(f.test_speakers.size());
    std::sort(out.rbegin(), out.rend());
    return out;
  };
  EXPECT_EQ(sizes(12, 3), (std::vector<std::size_t>{4, 4, 4}));
  EXPECT_EQ(sizes(19, 3), (std::vector<std::size_t>{7, 6, 6}));

  std::vector<std::string> spk = speaker_names(10, "s"), grp(10, "A");
  auto a = speaker_kfold(spk, grp, 3, 9);
  auto b = speaker_kfold(spk, grp, 3, 9);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].test, b[i].test);
  EXPECT_THROW(speaker_kfold(speaker_names(2, "s"), std::vector<std::string>(2, "A"), 3, 0),
               Error);
}

TEST(SpeakerKfold, NoSpeakerOverlapAndFullCoverage) {
  std::vector<std::string> spk, grp;
  for (int s = 0; s < 19; ++s)
    for (int u = 0; u < 5 + s % 4; ++u) {
      spk.push_back("spk" + std::to_string(s));
      grp.push_back(s < 9 ? "A" : "D");
    }
  auto folds = speaker_kfold(spk, grp, 3, 1);
  std::vector<int> seen(spk.size(), 0);
  for (const auto& f : folds) {
    std::set<std::string> train, test;
    for (auto i : f.train) train.insert(spk[i]);
    for (auto i : f.test) {
      test.insert(spk[i]);
      ++seen[i];
    }
    for (const auto& s : test) EXPECT_EQ(train.count(s), 0u) << s;
    EXPECT_EQ(f.train.size() + f.test.size(), spk.size());
    std::set<std::string> classes;
    for (auto i : f.test) classes.insert(grp[i]);
    EXPECT_EQ(classes.size(), 2u);
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(SpeakerKfold, RowOrderDoesNotChangePartition) {
  std::vector<std::string> spk, grp;
  for (int s = 0; s < 9; ++s)
    for (int u = 0; u < 3; ++u) {
      spk.push_back("spk" + std::to_string(s));
      grp.push_back(s % 3 ? "A" : "P");
    }
  auto folds = speaker_kfold(spk, grp, 3, 5);
  std::vector<std::string> rspk(spk.rbegin(), spk.rend()), rgrp(grp.rbegin(), grp.rend());
  auto rfolds = speaker_kfold(rspk, rgrp, 3, 5);
  for (std::size_t f = 0; f < 3; ++f) {
    auto a = folds[f].test_speakers, b = rfolds[f].test_speakers;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
}

TEST(BinaryMetrics, Examples) {
  std::vector<int> truth = {1, 1, -1, -1};
  auto perfect = binary_metrics(truth, truth);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.f1_positive, 1.0);
  EXPECT_EQ(perfect.f1_negative, 1.0);
  auto ones = binary_metrics(truth, std::vector<int>{1, 1, 1, 1});
  EXPECT_EQ(ones.accuracy, 0.5);
  EXPECT_EQ(ones.f1_negative, 0.0);
  EXPECT_DOUBLE_EQ(ones.f1_positive, 2.0 / 3.0);
}

TEST(BinaryMetrics, LabelSwapSymmetry) {
  std::vector<int> truth = {1, 1, 1, -1, -1, 1, -1, 1, -1};
  std::vector<int> pred = {1, -1, 1, -1, 1, 1, -1, -1, -1};
  auto m = binary_metrics(truth, pred);
  for (int& v : truth) v = -v;
  for (int& v : pred) v = -v;
  auto s = binary_metrics(truth, pred);
  EXPECT_EQ(m.accuracy, s.accuracy);
  EXPECT_EQ(m.f1_positive, s.f1_negative);
  EXPECT_EQ(m.f1_negative, s.f1_positive);
}

struct Dataset {
  Matrix x;
  std::vector<int> y;
  std::vector<std::string> speakers;
};

Dataset speaker_blobs(double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Dataset d{Matrix(72, 2), {}, {}};
  for (std::size_t i = 0; i < 72; ++i) {
    const int label = i < 36 ? 1 : -1;
    d.x(i, 0) = g(rng) + label * separation;
    d.x(i, 1) = g(rng);
    d.y.push_back(label);
    d.speakers.push_back((label > 0 ? "a" : "b") + std::to_string(i % 6));
  }
  return d;
}

TEST(GridSearch, SingleCellAndTies) {
  Dataset d = speaker_blobs(5.0, 1);
  SvmGrid one{{3.0}, {0.25}};
  auto c = grid_search(d.x, d.y, d.speakers, one);
  EXPECT_EQ(c.C, 3.0);
  EXPECT_EQ(c.gamma, 0.25);
  // Far apart blobs: every cell is perfect, so the tie-break decides.
  auto t = grid_search(d.x, d.y, d.speakers, SvmGrid{});
  EXPECT_EQ(t.accuracy, 1.0);
  EXPECT_EQ(t.C, 0.1);
  EXPECT_EQ(t.gamma, 0.001);
}

TEST(GridSearch, DegenerateInnerFolds) {
  Dataset d = speaker_blobs(5.0, 1);
  // Class b has a single speaker: some inner training fold lacks it.
  for (std::size_t i = 36; i < 72; ++i) d.speakers[i] = "b0";
  EXPECT_THROW(grid_search(d.x, d.y, d.speakers, SvmGrid{}), Error);
}

LabeledData labeled(const Dataset& d) {
  LabeledData out;
  out.features = d.x;
  out.feature_names = {"f1", "f2"};
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    out.utterance_ids.push_back("u" + std::to_string(100 + i));
    out.speaker_ids.push_back(d.speakers[i]);
    out.groups.push_back(d.y[i] > 0 ? "A" : "P");
  }
  return out;
}

TEST(Evaluate, SeparableDataAndReportShape) {
  LabeledData data = labeled(speaker_blobs(4.0, 2));
  CvReport r = evaluate(data, "A", "P", EvalOptions{}, "blobs");
  ASSERT_EQ(r.folds.size(), 3u);
  EXPECT_EQ(r.dimension, 2u);
  EXPECT_EQ(r.mean_accuracy, 1.0);
  EXPECT_EQ(r.std_accuracy, 0.0);
  EXPECT_EQ(r.mean_f1.at("A"), 1.0);
  EXPECT_EQ(r.mean_f1.at("P"), 1.0);
  auto j = nlohmann::json::parse(report_to_json(r));
  EXPECT_EQ(j["folds"].size(), 3u);
  EXPECT_EQ(j["feature_set"], "blobs");
  EXPECT_EQ(j["seed"], 0);
  const std::string text = report_to_text(r);
  EXPECT_NE(text.find("100.00 ± 0.00"), std::string::npos);
}

TEST(Evaluate, InvariantToRowOrder) {
  LabeledData data = labeled(speaker_blobs(1.0, 3));
  CvReport r = evaluate(data, "A", "P");
  std::vector<std::size_t> perm(data.groups.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(8);
  std::shuffle(perm.begin(), perm.end(), rng);
  LabeledData shuffled = data;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t c = 0; c < 2; ++c) shuffled.features(i, c) = data.features(perm[i], c);
    shuffled.utterance_ids[i] = data.utterance_ids[perm[i]];
    shuffled.speaker_ids[i] = data.speaker_ids[perm[i]];
    shuffled.groups[i] = data.groups[perm[i]];
  }
  CvReport s = evaluate(shuffled, "A", "P");
  EXPECT_EQ(r.mean_accuracy, s.mean_accuracy);
  EXPECT_EQ(r.std_accuracy, s.std_accuracy);
  EXPECT_EQ(r.mean_f1, s.mean_f1);
}

TEST(Evaluate, GroupSwapSwapsF1) {
  LabeledData data = labeled(speaker_blobs(1.0, 4));
  CvReport ab = evaluate(data, "A", "P");
  CvReport ba = evaluate(data, "P", "A");
  EXPECT_NEAR(ab.mean_accuracy, ba.mean_accuracy, 1e-12);
  EXPECT_NEAR(ab.mean_f1.at("A"), ba.mean_f1.at("A"), 1e-12);
  EXPECT_NEAR(ab.mean_f1.at("P"), ba.mean_f1.at("P"), 1e-12);
}

TEST(SelectFeatures, DropsMissingRows) {
  FeatureTable t;
  t.names = {"x", "y", "z"};
  t.rows.push_back({t.names, {1, 2, 3}, "u1", "s1", "A"});
  t.rows.push_back({t.names, {1, std::nan(""), 3}, "u2", "s1", "A"});
  t.rows.push_back({t.names, {4, 5, 6}, "u3", "s2", "P"});
  t.rows.push_back({t.names, {7, 8, 9}, "u4", "s3", "D"});
  std::size_t dropped = 0;
  std::vector<std::string> cols = {"z", "y"};
  LabeledData d = select_features(t, cols, "A", "P", &dropped);
  EXPECT_EQ(dropped, 1u);
  ASSERT_EQ(d.features.rows(), 2u);
  EXPECT_EQ(d.features(0, 0), 3.0);
  EXPECT_EQ(d.features(1, 1), 5.0);
  std::vector<std::string> bad = {"w"};
  EXPECT_THROW(select_features(t, bad, "A", "P"), Error);
}

}  // namespace
}  // namespace rfa
