#ifndef LPDPL_EVAL_HPP
#define LPDPL_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lpdpl/dataset.hpp"
#include "lpdpl/solver.hpp"

namespace lpdpl {

enum class FoldScheme {
  conventional,    // stratified k-fold
  within_subject,  // one fold per repetition index
  between_subject, // leave-one-subject-out
  fixed_split,     // single fold from the corpus's train/test tags
};

FoldScheme fold_scheme_from_string(const std::string& s);
const char* to_string(FoldScheme s);

struct FoldPlan {
  FoldScheme scheme = FoldScheme::conventional;
  struct Fold {
    std::vector<int> train; // global column indices
    std::vector<int> test;
  };
  std::vector<Fold> folds;
};

// conventional: stratified k-fold (k = k_or_reps) with seeded shuffling.
// between_subject: one fold per subject. within_subject: one fold per
// repetition index; unrecorded repetitions become per-subject ordinals after
// a seeded shuffle. fixed_split ignores k_or_reps.
FoldPlan make_folds(const ClassPartitionedDataset& dataset, FoldScheme scheme,
                    int k_or_reps, std::uint64_t seed);

class EvalReport {
public:
  EvalReport() = default;
  explicit EvalReport(int num_classes)
      : confusion_(Eigen::MatrixXi::Zero(num_classes, num_classes)) {}

  void add_fold(int fold_index, const std::vector<int>& targets,
                const std::vector<int>& outputs);

  int num_folds() const { return static_cast<int>(fold_accuracy_.size()); }
  const std::vector<double>& fold_accuracies() const { return fold_accuracy_; }
  // rows = target class, columns = output class
  const Eigen::MatrixXi& confusion() const { return confusion_; }
  int total_test_count() const { return total_; }

  double mean_accuracy() const;   // mean over folds; throws on zero folds
  double pooled_accuracy() const; // trace(confusion) / total; throws on zero folds

  double feature_extract_ms = 0.0;
  double classify_ms = 0.0;

private:
  std::vector<double> fold_accuracy_;
  Eigen::MatrixXi confusion_;
  int total_ = 0;
};

// Trains on each fold's train columns and classifies its test columns.
// Folds run concurrently across workers; aggregation is fold-order
// deterministic. label_weight is passed through to the classifier.
EvalReport run_cv(const ClassPartitionedDataset& dataset, const FoldPlan& plan,
                  const Hyperparameters& hp, std::uint64_t seed, int workers = 1,
                  double label_weight = 1.0);

struct SweepPoint {
  std::vector<double> values; // one per swept parameter
  double mean_accuracy = 0.0;
  double pooled_accuracy = 0.0;
};

struct SweepTable {
  std::vector<std::string> params; // 1 or 2 names
  std::vector<SweepPoint> rows;
};

// Known sweepable parameters: lambda1, lambda2, lambda3, gamma, rho, m.
struct SweepAxis {
  std::string param;
  std::vector<double> values;
};

Hyperparameters with_param(Hyperparameters hp, const std::string& param, double value);

// Grid sweep: every combination of axis values, run_cv per point.
SweepTable sweep(const ClassPartitionedDataset& dataset, const FoldPlan& plan,
                 const Hyperparameters& base, const std::vector<SweepAxis>& axes,
                 std::uint64_t seed, int workers = 1, double label_weight = 1.0);

// Accuracy as a function of dictionary size.
SweepTable dict_size_study(const ClassPartitionedDataset& dataset, const FoldPlan& plan,
                           const std::vector<int>& m_values, const Hyperparameters& hp,
                           std::uint64_t seed, int workers = 1);

} // namespace lpdpl

#endif
