#ifndef LPDPL_CLASSIFIER_HPP
#define LPDPL_CLASSIFIER_HPP

#include <vector>

#include <Eigen/Core>

#include "lpdpl/solver.hpp"

namespace lpdpl {

struct ClassScore {
  int class_index = 0;      // 0-based
  double residual = 0.0;    // ||x - D_i P_i x||^2
  double label_error = 0.0; // ||h_i - W_i P_i x||^2
  double total = 0.0;       // residual + label_weight * label_error
};

// Per-class score for a test vector. label_weight scales the label term
// (1 reproduces the unweighted rule, 0 gives the residual-only classifier).
ClassScore score(const Eigen::VectorXd& x, const TrainedModel& model, int class_index,
                 double label_weight = 1.0);

std::vector<ClassScore> score_all(const Eigen::VectorXd& x, const TrainedModel& model,
                                  double label_weight = 1.0);

// Argmin of the total score; ties resolve to the lowest class index.
int classify(const Eigen::VectorXd& x, const TrainedModel& model, double label_weight = 1.0);

// Column-wise classify.
std::vector<int> classify_batch(const Eigen::MatrixXd& X, const TrainedModel& model,
                                double label_weight = 1.0, int workers = 1);

} // namespace lpdpl

#endif
