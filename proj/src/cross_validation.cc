// rfa/cross_validation.cc

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include <json.hpp>

#include "rfa/classifier.h"
#include "rfa/error.h"
#include "rfa/io_util.h"
#include "rfa/random.h"

namespace rfa {
namespace {

Matrix take_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(x.row(rows[i]).begin(), x.row(rows[i]).end(), out.row(i).begin());
  }
  return out;
}

template <typename T>
std::vector<T> take(std::span<const T> v, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(v[r]);
  return out;
}

double f1_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
}

// Fits on `train`, returns the accuracy on `test`.
double holdout_accuracy(const Matrix& x, std::span<const int> y, const Fold& fold, double C,
                        double gamma) {
  const Matrix train = take_rows(x, fold.train);
  const auto train_y = take(y, fold.train);
  const auto scaled = standardize(train, take_rows(x, fold.test));
  const SvmModel model = svm_train(scaled.train, train_y, C, gamma);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < fold.test.size(); ++i) {
    correct += svm_predict(model, scaled.applied.row(i)).label == y[fold.test[i]];
  }
  return static_cast<double>(correct) / fold.test.size();
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

}  // namespace

std::vector<Fold> speaker_kfold(std::span<const std::string> speakers,
                                std::span<const std::string> groups, std::size_t k,
                                std::uint64_t seed) {
  if (k < 2) throw Error(Errc::kInvalidArgument, "speaker_kfold: k must be at least 2");
  if (groups.size() != speakers.size()) {
    throw Error(Errc::kDimensionMismatch, "speaker_kfold: speakers/groups length mismatch");
  }
  // A speaker belongs to the smallest group label among its rows, which
  // keeps the assignment independent of row order.
  std::map<std::string, std::string> speaker_group;
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    auto [it, inserted] = speaker_group.emplace(speakers[i], groups[i]);
    if (!inserted && groups[i] < it->second) it->second = groups[i];
  }
  if (speaker_group.size() < k) {
    throw Error(Errc::kDegenerateFolds, "speaker_kfold: " +
                                            std::to_string(speaker_group.size()) +
                                            " speakers cannot fill " + std::to_string(k) +
                                            " folds");
  }
  std::map<std::string, std::vector<std::string>> by_group;
  for (const auto& [spk, grp] : speaker_group) by_group[grp].push_back(spk);

  Rng rng(seed);
  std::map<std::string, std::size_t> fold_of;
  std::size_t next = 0;
  for (auto& [grp, spks] : by_group) {
    shuffle(spks, rng);
    for (const auto& s : spks) {
      fold_of[s] = next;
      next = (next + 1) % k;
    }
  }

  std::vector<Fold> folds(k);
  for (const auto& [spk, f] : fold_of) folds[f].test_speakers.push_back(spk);
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    const std::size_t f = fold_of.at(speakers[i]);
    for (std::size_t j = 0; j < k; ++j) {
      (j == f ? folds[j].test : folds[j].train).push_back(i);
    }
  }
  return folds;
}

std::vector<Fold> speaker_kfold(const DatasetManifest& manifest, std::size_t k,
                                std::uint64_t seed) {
  std::vector<std::string> speakers, groups;
  for (const auto& e : manifest.entries) {
    speakers.push_back(e.speaker_id);
    groups.push_back(e.group);
  }
  return speaker_kfold(speakers, groups, k, seed);
}

GridChoice grid_search(const Matrix& x, std::span<const int> y,
                       std::span<const std::string> speakers, const SvmGrid& grid,
                       std::size_t inner_k, std::uint64_t seed) {
  if (grid.C.empty() || grid.gamma.empty()) {
    throw Error(Errc::kInvalidArgument, "grid_search: empty grid");
  }
  std::vector<std::string> labels;
  for (int v : y) labels.push_back(v == 1 ? "+" : "-");
  const auto folds = speaker_kfold(speakers, labels, inner_k, seed);
  for (const auto& f : folds) {
    std::set<int> seen;
    for (std::size_t r : f.train) seen.insert(y[r]);
    if (seen.size() < 2 || f.test.empty()) {
      throw Error(Errc::kDegenerateFolds, "grid_search: inner fold lacks a class");
    }
  }

  std::vector<double> cs = grid.C, gammas = grid.gamma;
  std::sort(cs.begin(), cs.end());
  std::sort(gammas.begin(), gammas.end());
  GridChoice best{cs.front(), gammas.front(), -1.0};
  for (double c : cs) {
    for (double g : gammas) {
      double acc = 0.0;
      for (const auto& f : folds) acc += holdout_accuracy(x, y, f, c, g);
      acc /= static_cast<double>(folds.size());
      if (acc > best.accuracy) best = {c, g, acc};
    }
  }
  return best;
}

BinaryMetrics binary_metrics(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size() || truth.empty()) {
    throw Error(Errc::kDimensionMismatch, "binary_metrics: bad input lengths");
  }
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) {
      predicted[i] == 1 ? ++tp : ++fn;
    } else {
      predicted[i] == 1 ? ++fp : ++tn;
    }
  }
  BinaryMetrics m;
  m.accuracy = static_cast<double>(tp + tn) / truth.size();
  m.f1_positive = f1_score(tp, fp, fn);
  m.f1_negative = f1_score(tn, fn, fp);
  return m;
}

LabeledData select_features(const FeatureTable& table,
                            std::span<const std::string> feature_names,
                            const std::string& group_a, const std::string& group_b,
                            std::size_t* dropped) {
  std::vector<std::size_t> cols;
  for (const auto& name : feature_names) {
    auto it = std::find(table.names.begin(), table.names.end(), name);
    if (it == table.names.end()) {
      throw Error(Errc::kMissingColumn, "feature '" + name + "' not present in the table");
    }
    cols.push_back(static_cast<std::size_t>(it - table.names.begin()));
  }
  LabeledData out;
  out.feature_names.assign(feature_names.begin(), feature_names.end());
  std::vector<double> flat;
  std::size_t skipped = 0;
  for (const auto& row : table.rows) {
    if (row.group != group_a && row.group != group_b) continue;
    bool ok = true;
    for (std::size_t c : cols) ok = ok && !std::isnan(row.values[c]);
    if (!ok) {
      ++skipped;
      continue;
    }
    for (std::size_t c : cols) flat.push_back(row.values[c]);
    out.utterance_ids.push_back(row.utterance_id);
    out.speaker_ids.push_back(row.speaker_id);
    out.groups.push_back(row.group);
  }
  out.features = Matrix(out.groups.size(), cols.size());
  out.features.data() = std::move(flat);
  if (dropped != nullptr) *dropped = skipped;
  return out;
}

CvReport evaluate(const LabeledData& data, const std::string& group_a,
                  const std::string& group_b, const EvalOptions& opts,
                  const std::string& feature_set) {
  if (group_a == group_b) {
    throw Error(Errc::kInvalidArgument, "evaluate: need two distinct groups");
  }
  // Canonical row order: utterance id.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < data.groups.size(); ++i) {
    if (data.groups[i] == group_a || data.groups[i] == group_b) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.utterance_ids[a] < data.utterance_ids[b];
  });
  const Matrix x = take_rows(data.features, order);
  const auto speakers = take(std::span<const std::string>(data.speaker_ids), order);
  const auto groups = take(std::span<const std::string>(data.groups), order);
  // The solver's pair selection is not symmetric in the labels, so train
  // with a fixed orientation (smaller label = +1) and report per group; the
  // result then does not depend on the order the pair was named in.
  const std::string& positive = std::min(group_a, group_b);
  std::vector<int> y;
  for (const auto& g : groups) y.push_back(g == positive ? 1 : -1);
  for (const auto* g : {&group_a, &group_b}) {
    if (std::find(groups.begin(), groups.end(), *g) == groups.end()) {
      throw Error(Errc::kSingleClass, "evaluate: group '" + *g + "' absent from data");
    }
  }

  CvReport report;
  report.feature_set = feature_set;
  report.group_a = group_a;
  report.group_b = group_b;
  report.k = opts.k;
  report.seed = opts.seed;
  report.dimension = x.cols();

  const auto folds = speaker_kfold(speakers, groups, opts.k, opts.seed);
  for (std::size_t fi = 0; fi < folds.size(); ++fi) {
    const Fold& fold = folds[fi];
    if (fold.test.empty()) throw Error(Errc::kEmptyInput, "evaluate: empty test fold");
    const Matrix train = take_rows(x, fold.train);
    const auto train_y = take(std::span<const int>(y), fold.train);
    const auto train_spk = take(std::span<const std::string>(speakers), fold.train);
    const auto scaled = standardize(train, take_rows(x, fold.test));

    const GridChoice choice = grid_search(scaled.train, train_y, train_spk, opts.grid,
                                          opts.inner_k, mix_seed(opts.seed, fi + 1));
    SvmModel model = svm_train(scaled.train, train_y, choice.C, choice.gamma);

    std::vector<int> truth, pred;
    for (std::size_t i = 0; i < fold.test.size(); ++i) {
      truth.push_back(y[fold.test[i]]);
      pred.push_back(svm_predict(model, scaled.applied.row(i)).label);
    }
    const BinaryMetrics m = binary_metrics(truth, pred);
    FoldReport fr;
    fr.accuracy = m.accuracy;
    fr.f1[positive] = m.f1_positive;
    fr.f1[positive == group_a ? group_b : group_a] = m.f1_negative;
    fr.C = choice.C;
    fr.gamma = choice.gamma;
    fr.inner_accuracy = choice.accuracy;
    fr.train_size = fold.train.size();
    fr.test_size = fold.test.size();
    fr.test_speakers = fold.test_speakers;
    report.folds.push_back(std::move(fr));
  }

  auto mean_std = [&](auto get) {
    double mean = 0.0;
    for (const auto& f : report.folds) mean += get(f);
    mean /= report.folds.size();
    double var = 0.0;
    for (const auto& f : report.folds) var += (get(f) - mean) * (get(f) - mean);
    return std::pair{mean, std::sqrt(var / report.folds.size())};
  };
  std::tie(report.mean_accuracy, report.std_accuracy) =
      mean_std([](const FoldReport& f) { return f.accuracy; });
  for (const auto* g : {&group_a, &group_b}) {
    std::tie(report.mean_f1[*g], report.std_f1[*g]) =
        mean_std([&](const FoldReport& f) { return f.f1.at(*g); });
  }
  return report;
}

std::string report_to_json(const CvReport& r) {
  nlohmann::ordered_json doc;
  doc["feature_set"] = r.feature_set;
  doc["dimension"] = r.dimension;
  doc["pair"] = {r.group_a, r.group_b};
  doc["k"] = r.k;
  doc["seed"] = r.seed;
  doc["protocol"] =
      "speaker-independent k-fold: speakers partitioned into k folds, each fold tested once "
      "(about 67/33 train/test for k=3)";
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.folds.size(); ++i) {
    const auto& f = r.folds[i];
    nlohmann::ordered_json jf;
    jf["fold"] = i;
    jf["accuracy"] = f.accuracy;
    nlohmann::ordered_json f1;
    f1[r.group_a] = f.f1.at(r.group_a);
    f1[r.group_b] = f.f1.at(r.group_b);
    jf["f1"] = f1;
    jf["C"] = f.C;
    jf["gamma"] = f.gamma;
    jf["inner_accuracy"] = f.inner_accuracy;
    jf["train_size"] = f.train_size;
    jf["test_size"] = f.test_size;
    jf["test_speakers"] = f.test_speakers;
    folds.push_back(std::move(jf));
  }
  doc["folds"] = std::move(folds);
  doc["mean_accuracy"] = r.mean_accuracy;
  doc["std_accuracy"] = r.std_accuracy;
  nlohmann::ordered_json mf1, sf1;
  for (const auto* g : {&r.group_a, &r.group_b}) {
    mf1[*g] = r.mean_f1.at(*g);
    sf1[*g] = r.std_f1.at(*g);
  }
  doc["mean_f1"] = mf1;
  doc["std_f1"] = sf1;
  return doc.dump(2) + "\n";
}

std::string report_to_text(const CvReport& r) {
  const std::string a = r.group_a, b = r.group_b;
  std::string out;
  out += "# " + a + " vs. " + b + ", speaker-independent " + std::to_string(r.k) +
         "-fold cross-validation (seed " + std::to_string(r.seed) + ")\n";
  out += "# folds partition speakers, so each fold trains on about " +
         std::to_string(100 * (r.k - 1) / r.k) + "% of the data\n";
  out += "fold\tC\tgamma\taccuracy\tF1-" + a + "\tF1-" + b + "\n";
  for (std::size_t i = 0; i < r.folds.size(); ++i) {
    const auto& f = r.folds[i];
    out += std::to_string(i) + "\t" + format_double(f.C) + "\t" + format_double(f.gamma) +
           "\t" + percent(f.accuracy) + "\t" + percent(f.f1.at(a)) + "\t" +
           percent(f.f1.at(b)) + "\n";
  }
  out += "\nFeatures\tAccuracy (%)\tF1-" + a + " (%)\tF1-" + b + " (%)\n";
  const std::string name = (r.feature_set.empty() ? std::string("features") : r.feature_set) +
                           " (" + std::to_string(r.dimension) + ")";
  out += name + "\t" + percent(r.mean_accuracy) + " ± " + percent(r.std_accuracy) + "\t" +
         percent(r.mean_f1.at(a)) + " ± " + percent(r.std_f1.at(a)) + "\t" +
         percent(r.mean_f1.at(b)) + " ± " + percent(r.std_f1.at(b)) + "\n";
  return out;
}

}  // namespace rfa
