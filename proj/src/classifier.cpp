#include "lpdpl/classifier.hpp"

#include "lpdpl/parallel.hpp"

namespace lpdpl {

namespace {

void check_dimension(const Eigen::VectorXd& x, const TrainedModel& model) {
  if (x.size() != model.feature_length)
    throw DimensionMismatch("classify: feature length " + std::to_string(x.size()) +
                            " does not match model n=" + std::to_string(model.feature_length));
}

} // namespace

ClassScore score(const Eigen::VectorXd& x, const TrainedModel& model, int class_index,
                 double label_weight) {
  check_dimension(x, model);
  if (class_index < 0 || class_index >= model.num_classes())
    throw DimensionMismatch("score: class index out of range");

  const ClassModel& mdl = model.classes[class_index];
  const Eigen::VectorXd code = mdl.P * x;

  ClassScore s;
  s.class_index = class_index;
  s.residual = (x - mdl.D * code).squaredNorm();
  Eigen::VectorXd label_diff = -(mdl.W * code);
  label_diff[class_index] += 1.0; // h_i is the class-i one-hot column
  s.label_error = label_diff.squaredNorm();
  s.total = s.residual + label_weight * s.label_error;
  return s;
}

std::vector<ClassScore> score_all(const Eigen::VectorXd& x, const TrainedModel& model,
                                  double label_weight) {
  std::vector<ClassScore> scores;
  scores.reserve(model.num_classes());
  for (int i = 0; i < model.num_classes(); ++i) scores.push_back(score(x, model, i, label_weight));
  return scores;
}

int classify(const Eigen::VectorXd& x, const TrainedModel& model, double label_weight) {
  check_dimension(x, model);
  int best = 0;
  double best_total = score(x, model, 0, label_weight).total;
  for (int i = 1; i < model.num_classes(); ++i) {
    const double total = score(x, model, i, label_weight).total;
    if (total < best_total) {
      best_total = total;
      best = i;
    }
  }
  return best;
}

std::vector<int> classify_batch(const Eigen::MatrixXd& X, const TrainedModel& model,
                                double label_weight, int workers) {
  std::vector<int> labels(X.cols());
  parallel_for(static_cast<int>(X.cols()), workers,
               [&](int c) { labels[c] = classify(X.col(c), model, label_weight); });
  return labels;
}

} // namespace lpdpl
