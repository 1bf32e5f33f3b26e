#include "lpdpl/dataset.hpp"

#include <numeric>

namespace lpdpl {

ClassPartitionedDataset::ClassPartitionedDataset(std::vector<std::string> class_names,
                                                 std::vector<Eigen::MatrixXd> per_class,
                                                 std::vector<std::vector<SampleMeta>> meta,
                                                 FeaturePipeline pipeline)
    : class_names_(std::move(class_names)),
      per_class_(std::move(per_class)),
      meta_(std::move(meta)),
      pipeline_(std::move(pipeline)) {
  if (per_class_.empty()) throw Error("dataset: needs at least one class");
  if (class_names_.size() != per_class_.size() || meta_.size() != per_class_.size())
    throw DimensionMismatch("dataset: class_names/matrices/meta size disagree");

  n_ = static_cast<int>(per_class_[0].rows());
  class_offset_.resize(per_class_.size());
  total_ = 0;
  for (std::size_t i = 0; i < per_class_.size(); ++i) {
    if (per_class_[i].rows() != n_)
      throw DimensionMismatch("dataset: class " + class_names_[i] + " feature length differs");
    if (per_class_[i].cols() == 0)
      throw Error("dataset: class " + class_names_[i] + " has no samples");
    if (meta_[i].size() != static_cast<std::size_t>(per_class_[i].cols()))
      throw DimensionMismatch("dataset: metadata count differs for class " + class_names_[i]);
    class_offset_[i] = total_;
    total_ += static_cast<int>(per_class_[i].cols());
  }
}

Eigen::MatrixXd ClassPartitionedDataset::complement(int i) const {
  Eigen::MatrixXd out(n_, total_ - class_size(i));
  Eigen::Index col = 0;
  for (int j = 0; j < num_classes(); ++j) {
    if (j == i) continue;
    out.middleCols(col, per_class_[j].cols()) = per_class_[j];
    col += per_class_[j].cols();
  }
  return out;
}

Eigen::MatrixXd ClassPartitionedDataset::label_matrix(int i) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(num_classes(), class_size(i));
  h.row(i).setOnes();
  return h;
}

int ClassPartitionedDataset::label_of(int col) const {
  for (int i = num_classes() - 1; i >= 0; --i)
    if (col >= class_offset_[i]) return i;
  throw Error("dataset: column index out of range");
}

int ClassPartitionedDataset::offset_within_class(int col) const {
  return col - class_offset_[label_of(col)];
}

Eigen::VectorXd ClassPartitionedDataset::column(int col) const {
  const int i = label_of(col);
  return per_class_[i].col(col - class_offset_[i]);
}

const SampleMeta& ClassPartitionedDataset::meta_of(int col) const {
  const int i = label_of(col);
  return meta_[i][col - class_offset_[i]];
}

int ClassPartitionedDataset::global_index(int class_index, int offset) const {
  return class_offset_[class_index] + offset;
}

ClassPartitionedDataset ClassPartitionedDataset::subset(const std::vector<int>& global_cols) const {
  std::vector<std::vector<int>> cols_per_class(per_class_.size());
  for (int col : global_cols) {
    if (col < 0 || col >= total_) throw Error("dataset subset: column index out of range");
    cols_per_class[label_of(col)].push_back(col - class_offset_[label_of(col)]);
  }

  std::vector<Eigen::MatrixXd> mats(per_class_.size());
  std::vector<std::vector<SampleMeta>> metas(per_class_.size());
  for (std::size_t i = 0; i < per_class_.size(); ++i) {
    if (cols_per_class[i].empty())
      throw Error("dataset subset: class " + class_names_[i] + " would be empty");
    mats[i].resize(n_, static_cast<Eigen::Index>(cols_per_class[i].size()));
    metas[i].reserve(cols_per_class[i].size());
    for (std::size_t j = 0; j < cols_per_class[i].size(); ++j) {
      mats[i].col(static_cast<Eigen::Index>(j)) = per_class_[i].col(cols_per_class[i][j]);
      metas[i].push_back(meta_[i][cols_per_class[i][j]]);
    }
  }
  ClassPartitionedDataset out(class_names_, std::move(mats), std::move(metas), pipeline_);
  out.feature_extract_ms = feature_extract_ms;
  return out;
}

} // namespace lpdpl
