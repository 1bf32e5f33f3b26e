#ifndef LPDPL_DATASET_HPP
#define LPDPL_DATASET_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "lpdpl/errors.hpp"
#include "lpdpl/pipeline.hpp"

namespace lpdpl {

enum class SampleSplit { train, test };

struct SampleMeta {
  std::string subject;   // empty when unrecorded
  int repetition = -1;   // -1 when unrecorded
  SampleSplit split = SampleSplit::train;
  std::string source;    // file path or record id, for error reporting
};

// Feature matrix partitioned by class: X_i is n x k_i with one sample per
// column. Global column indices run class-major, in per-class column order.
class ClassPartitionedDataset {
public:
  ClassPartitionedDataset() = default;
  ClassPartitionedDataset(std::vector<std::string> class_names,
                          std::vector<Eigen::MatrixXd> per_class,
                          std::vector<std::vector<SampleMeta>> meta,
                          FeaturePipeline pipeline = {});

  int num_classes() const { return static_cast<int>(per_class_.size()); }
  int feature_length() const { return n_; }
  int total_samples() const { return total_; }
  int class_size(int i) const { return static_cast<int>(per_class_[i].cols()); }

  const std::vector<std::string>& class_names() const { return class_names_; }
  const Eigen::MatrixXd& class_samples(int i) const { return per_class_[i]; }

  // Horizontal concatenation of every class except i, in class order.
  Eigen::MatrixXd complement(int i) const;

  // Q x k_i one-hot label matrix for class i (row i all ones).
  Eigen::MatrixXd label_matrix(int i) const;

  // Global column access.
  int label_of(int col) const;
  int offset_within_class(int col) const;
  Eigen::VectorXd column(int col) const;
  const SampleMeta& meta_of(int col) const;
  int global_index(int class_index, int offset) const;

  // New dataset from a global column subset (order within each class is
  // preserved). Throws if any class ends up empty.
  ClassPartitionedDataset subset(const std::vector<int>& global_cols) const;

  const FeaturePipeline& pipeline() const { return pipeline_; }
  FeaturePipeline& pipeline() { return pipeline_; }

  // Mean per-image feature extraction time recorded by the loader, ms.
  double feature_extract_ms = 0.0;
  // Samples the loader rejected (no foreground after binarization).
  std::vector<std::string> rejected;

private:
  int n_ = 0;
  int total_ = 0;
  std::vector<std::string> class_names_;
  std::vector<Eigen::MatrixXd> per_class_;
  std::vector<std::vector<SampleMeta>> meta_;
  std::vector<int> class_offset_; // global index of each class's first column
  FeaturePipeline pipeline_;
};

} // namespace lpdpl

#endif
