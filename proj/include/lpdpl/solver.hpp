#ifndef LPDPL_SOLVER_HPP
#define LPDPL_SOLVER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lpdpl/dataset.hpp"
#include "lpdpl/errors.hpp"
#include "lpdpl/pipeline.hpp"

namespace lpdpl {

struct Hyperparameters {
  int m = 340;            // atoms per sub-dictionary
  double lambda1 = 1e-2;  // cross-class suppression weight
  double lambda2 = 1.0;   // label-error weight
  double lambda3 = 1e-1;  // code-coupling weight
  double gamma = 1e-4;    // ridge jitter on the P and W solves
  double rho = 1.0;       // ADMM penalty
  int outer_iters = 10;
  int admm_iters = 20;
  double tol = 1e-4;      // relative objective-decrease stop
  double admm_tol = 1e-6; // relative primal residual stop
  bool compat_printed_a_update = false; // reproduce the uncorrected A formula

  void validate() const;
};

// One class's dictionary pair and classifier block.
struct ClassModel {
  Eigen::MatrixXd P; // m x n analysis sub-dictionary
  Eigen::MatrixXd D; // n x m synthesis sub-dictionary, column norms <= 1
  Eigen::MatrixXd W; // Q x m classifier matrix
};

struct TrainedModel {
  std::vector<ClassModel> classes;
  Hyperparameters hp;
  FeaturePipeline pipeline;
  std::vector<std::string> class_names;
  int feature_length = 0; // n
  int atoms = 0;          // m

  int num_classes() const { return static_cast<int>(classes.size()); }
};

// Splitting state of the dictionary sub-solver; carried across outer
// iterations so each call warm-starts from the previous one.
struct AdmmState {
  Eigen::MatrixXd S; // n x m auxiliary dictionary, always feasible
  Eigen::MatrixXd T; // n x m scaled dual
  int iterations_run = 0;
};

// Sparse-code update: the stationary point of
//   ||X - DA||_F^2 + l2||H - WA||_F^2 + l3||PX - A||_F^2,
//   A = (D'D + l2 W'W + l3 I)^-1 (D'X + l2 W'H + l3 PX).
// With compat_printed_a_update the W'W term loses its l2 factor.
Eigen::MatrixXd update_A(const Eigen::MatrixXd& X, const Eigen::MatrixXd& D,
                         const Eigen::MatrixXd& W, const Eigen::MatrixXd& P,
                         const Eigen::MatrixXd& H, const Hyperparameters& hp);

// Analysis update: P = l3 A X' (l3 X X' + l1 Xbar Xbar' + gamma I)^-1.
Eigen::MatrixXd update_P(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xbar,
                         const Eigen::MatrixXd& A, const Hyperparameters& hp);

// Classifier update: W = H A' (A A' + gamma I)^-1.
Eigen::MatrixXd update_W(const Eigen::MatrixXd& A, const Eigen::MatrixXd& H,
                         const Hyperparameters& hp);

// Constrained dictionary update by ADMM: alternate
//   D = (X A' + rho (S - T)) (A A' + rho I)^-1,
//   S = column-wise projection of D + T onto the unit l2 ball,
//   T += D - S,
// until ||D - S||_F / ||D||_F < admm_tol or admm_iters. Returns S, so the
// result is feasible exactly.
Eigen::MatrixXd update_D(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A,
                         const Hyperparameters& hp, AdmmState& state);

// Full objective: sum over classes of
//   ||X-DA||^2 + l1 ||P Xbar||^2 + l2 ||H-WA||^2 + l3 ||PX-A||^2.
double objective(const std::vector<Eigen::MatrixXd>& X,
                 const std::vector<Eigen::MatrixXd>& H,
                 const std::vector<ClassModel>& models,
                 const std::vector<Eigen::MatrixXd>& codes,
                 const Hyperparameters& hp);

struct InitState {
  std::vector<ClassModel> models;
  std::vector<Eigen::MatrixXd> codes; // A_i
  std::vector<AdmmState> admm;
};

// Random unit-variance P0/D0 (D0 columns normalized), then A0 from the
// A-update with W treated as zero, then W0 from the W-update.
InitState init(const ClassPartitionedDataset& dataset, const Hyperparameters& hp,
               std::uint64_t seed);

struct TrainResult {
  TrainedModel model;
  std::vector<double> trace; // objective after init and after each outer iteration
};

// Alternating minimization per class (A, P, W, D order) until the relative
// objective decrease falls below tol or outer_iters is reached. Classes are
// independent sub-problems and run concurrently across `workers` threads.
TrainResult train(const ClassPartitionedDataset& dataset, const Hyperparameters& hp,
                  std::uint64_t seed, int workers = 1);

} // namespace lpdpl

#endif
