#include "lpdpl/eval.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>
#include <random>

#include "lpdpl/classifier.hpp"
#include "lpdpl/parallel.hpp"

namespace lpdpl {

FoldScheme fold_scheme_from_string(const std::string& s) {
  if (s == "conventional") return FoldScheme::conventional;
  if (s == "within" || s == "within_subject") return FoldScheme::within_subject;
  if (s == "between" || s == "between_subject") return FoldScheme::between_subject;
  if (s == "fixed" || s == "fixed_split") return FoldScheme::fixed_split;
  throw Error("unknown fold scheme: " + s);
}

const char* to_string(FoldScheme s) {
  switch (s) {
    case FoldScheme::conventional: return "conventional";
    case FoldScheme::within_subject: return "within_subject";
    case FoldScheme::between_subject: return "between_subject";
    case FoldScheme::fixed_split: return "fixed_split";
  }
  return "conventional";
}

namespace {

std::vector<int> all_columns(const ClassPartitionedDataset& ds) {
  std::vector<int> cols(ds.total_samples());
  std::iota(cols.begin(), cols.end(), 0);
  return cols;
}

FoldPlan make_conventional(const ClassPartitionedDataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw Error("make_folds: conventional scheme needs k >= 2");
  FoldPlan plan;
  plan.scheme = FoldScheme::conventional;
  plan.folds.resize(k);

  // Stratified: shuffle each class's columns, deal them round-robin so
  // per-class test counts across folds differ by at most one.
  for (int i = 0; i < ds.num_classes(); ++i) {
    std::vector<int> cols(ds.class_size(i));
    std::iota(cols.begin(), cols.end(), 0);
    std::mt19937_64 rng(seed ^ (0x5851f42d4c957f2dULL * (i + 1)));
    std::shuffle(cols.begin(), cols.end(), rng);
    for (std::size_t j = 0; j < cols.size(); ++j)
      plan.folds[j % k].test.push_back(ds.global_index(i, cols[j]));
  }

  for (auto& fold : plan.folds) {
    std::sort(fold.test.begin(), fold.test.end());
    std::vector<char> in_test(ds.total_samples(), 0);
    for (int c : fold.test) in_test[c] = 1;
    for (int c = 0; c < ds.total_samples(); ++c)
      if (!in_test[c]) fold.train.push_back(c);
  }
  return plan;
}

FoldPlan make_between_subject(const ClassPartitionedDataset& ds) {
  std::map<std::string, std::vector<int>> by_subject;
  for (int c = 0; c < ds.total_samples(); ++c) {
    const SampleMeta& meta = ds.meta_of(c);
    if (meta.subject.empty())
      throw MissingMetadata("between_subject folds: sample " + meta.source +
                            " has no subject id");
    by_subject[meta.subject].push_back(c);
  }
  if (by_subject.size() < 2)
    throw MissingMetadata("between_subject folds: need at least two subjects");

  FoldPlan plan;
  plan.scheme = FoldScheme::between_subject;
  for (const auto& [subject, cols] : by_subject) {
    FoldPlan::Fold fold;
    fold.test = cols;
    for (int c = 0; c < ds.total_samples(); ++c)
      if (ds.meta_of(c).subject != subject) fold.train.push_back(c);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

FoldPlan make_within_subject(const ClassPartitionedDataset& ds, std::uint64_t seed) {
  // Repetition indices; when unrecorded, use the per-subject ordinal after a
  // seeded shuffle of that subject's samples.
  std::vector<int> repetition(ds.total_samples(), -1);
  bool any_missing = false;
  for (int c = 0; c < ds.total_samples(); ++c) {
    repetition[c] = ds.meta_of(c).repetition;
    if (repetition[c] < 0) any_missing = true;
  }

  if (any_missing) {
    std::map<std::string, std::vector<int>> by_subject;
    for (int c = 0; c < ds.total_samples(); ++c) {
      const SampleMeta& meta = ds.meta_of(c);
      if (meta.subject.empty())
        throw MissingMetadata("within_subject folds: sample " + meta.source +
                              " has neither repetition index nor subject id");
      by_subject[meta.subject].push_back(c);
    }
    std::uint64_t stream = 0;
    for (auto& [subject, cols] : by_subject) {
      std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (++stream)));
      std::shuffle(cols.begin(), cols.end(), rng);
      for (std::size_t j = 0; j < cols.size(); ++j) repetition[cols[j]] = static_cast<int>(j);
    }
  }

  std::map<int, std::vector<int>> by_rep;
  for (int c = 0; c < ds.total_samples(); ++c) by_rep[repetition[c]].push_back(c);
  if (by_rep.size() < 2)
    throw MissingMetadata("within_subject folds: need at least two repetition indices");

  FoldPlan plan;
  plan.scheme = FoldScheme::within_subject;
  for (const auto& [rep, cols] : by_rep) {
    FoldPlan::Fold fold;
    fold.test = cols;
    for (int c = 0; c < ds.total_samples(); ++c)
      if (repetition[c] != rep) fold.train.push_back(c);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

FoldPlan make_fixed_split(const ClassPartitionedDataset& ds) {
  FoldPlan plan;
  plan.scheme = FoldScheme::fixed_split;
  FoldPlan::Fold fold;
  for (int c = 0; c < ds.total_samples(); ++c) {
    if (ds.meta_of(c).split == SampleSplit::test)
      fold.test.push_back(c);
    else
      fold.train.push_back(c);
  }
  if (fold.test.empty() || fold.train.empty())
    throw MissingMetadata("fixed_split folds: corpus has no train/test split tags");
  plan.folds.push_back(std::move(fold));
  return plan;
}

} // namespace

FoldPlan make_folds(const ClassPartitionedDataset& dataset, FoldScheme scheme,
                    int k_or_reps, std::uint64_t seed) {
  switch (scheme) {
    case FoldScheme::conventional: return make_conventional(dataset, k_or_reps, seed);
    case FoldScheme::between_subject: return make_between_subject(dataset);
    case FoldScheme::within_subject: return make_within_subject(dataset, seed);
    case FoldScheme::fixed_split: return make_fixed_split(dataset);
  }
  throw Error("make_folds: unknown scheme");
}

void EvalReport::add_fold(int, const std::vector<int>& targets, const std::vector<int>& outputs) {
  if (targets.size() != outputs.size())
    throw DimensionMismatch("EvalReport: target/output count mismatch");
  int correct = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    confusion_(targets[i], outputs[i]) += 1;
    if (targets[i] == outputs[i]) ++correct;
  }
  total_ += static_cast<int>(targets.size());
  fold_accuracy_.push_back(targets.empty() ? 0.0
                                           : static_cast<double>(correct) / targets.size());
}

double EvalReport::mean_accuracy() const {
  if (fold_accuracy_.empty()) throw Error("EvalReport: no folds to aggregate");
  return std::accumulate(fold_accuracy_.begin(), fold_accuracy_.end(), 0.0) /
         fold_accuracy_.size();
}

double EvalReport::pooled_accuracy() const {
  if (fold_accuracy_.empty() || total_ == 0) throw Error("EvalReport: no folds to aggregate");
  return static_cast<double>(confusion_.trace()) / total_;
}

EvalReport run_cv(const ClassPartitionedDataset& dataset, const FoldPlan& plan,
                  const Hyperparameters& hp, std::uint64_t seed, int workers,
                  double label_weight) {
  EvalReport report(dataset.num_classes());
  report.feature_extract_ms = dataset.feature_extract_ms;
  if (plan.folds.empty()) return report;

  const int nfolds = static_cast<int>(plan.folds.size());
  std::vector<std::vector<int>> targets(nfolds), outputs(nfolds);
  std::vector<double> classify_ms(nfolds, 0.0);

  parallel_for(nfolds, workers, [&](int f) {
    const FoldPlan::Fold& fold = plan.folds[f];
    const ClassPartitionedDataset train_set = dataset.subset(fold.train);
    // One worker per fold; class-level parallelism is left to single-fold runs.
    const TrainResult trained = train(train_set, hp, seed + static_cast<std::uint64_t>(f),
                                      workers > nfolds ? workers / nfolds : 1);

    targets[f].reserve(fold.test.size());
    outputs[f].reserve(fold.test.size());
    const auto t0 = std::chrono::steady_clock::now();
    for (int col : fold.test) {
      targets[f].push_back(dataset.label_of(col));
      outputs[f].push_back(classify(dataset.column(col), trained.model, label_weight));
    }
    const auto t1 = std::chrono::steady_clock::now();
    if (!fold.test.empty())
      classify_ms[f] =
          std::chrono::duration<double, std::milli>(t1 - t0).count() / fold.test.size();
  });

  for (int f = 0; f < nfolds; ++f) report.add_fold(f, targets[f], outputs[f]);
  report.classify_ms =
      std::accumulate(classify_ms.begin(), classify_ms.end(), 0.0) / nfolds;
  return report;
}

Hyperparameters with_param(Hyperparameters hp, const std::string& param, double value) {
  if (param == "lambda1")
    hp.lambda1 = value;
  else if (param == "lambda2")
    hp.lambda2 = value;
  else if (param == "lambda3")
    hp.lambda3 = value;
  else if (param == "gamma")
    hp.gamma = value;
  else if (param == "rho")
    hp.rho = value;
  else if (param == "m")
    hp.m = static_cast<int>(value);
  else
    throw Error("unknown sweep parameter: " + param);
  return hp;
}

SweepTable sweep(const ClassPartitionedDataset& dataset, const FoldPlan& plan,
                 const Hyperparameters& base, const std::vector<SweepAxis>& axes,
                 std::uint64_t seed, int workers, double label_weight) {
  if (axes.empty() || axes.size() > 2) throw Error("sweep: needs one or two axes");
  for (const auto& axis : axes)
    if (axis.values.empty()) throw Error("sweep: axis " + axis.param + " has no values");

  SweepTable table;
  for (const auto& axis : axes) table.params.push_back(axis.param);

  std::vector<std::vector<double>> grid;
  if (axes.size() == 1) {
    for (double v : axes[0].values) grid.push_back({v});
  } else {
    for (double v0 : axes[0].values)
      for (double v1 : axes[1].values) grid.push_back({v0, v1});
  }

  for (const auto& point : grid) {
    Hyperparameters hp = base;
    for (std::size_t a = 0; a < axes.size(); ++a) hp = with_param(hp, axes[a].param, point[a]);
    const EvalReport report = run_cv(dataset, plan, hp, seed, workers, label_weight);
    SweepPoint row;
    row.values = point;
    row.mean_accuracy = report.mean_accuracy();
    row.pooled_accuracy = report.pooled_accuracy();
    table.rows.push_back(std::move(row));
  }
  return table;
}

SweepTable dict_size_study(const ClassPartitionedDataset& dataset, const FoldPlan& plan,
                           const std::vector<int>& m_values, const Hyperparameters& hp,
                           std::uint64_t seed, int workers) {
  SweepAxis axis;
  axis.param = "m";
  for (int m : m_values) axis.values.push_back(static_cast<double>(m));
  return sweep(dataset, plan, hp, {axis}, seed, workers);
}

} // namespace lpdpl
