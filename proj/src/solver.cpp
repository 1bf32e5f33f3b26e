#include "lpdpl/solver.hpp"

#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "lpdpl/parallel.hpp"

namespace lpdpl {

namespace {

// SplitMix64 step; decorrelates per-class streams drawn from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::LLT<Eigen::MatrixXd> factorize_spd(Eigen::MatrixXd mat, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(std::move(mat));
  if (llt.info() != Eigen::Success)
    throw SingularSystem(std::string(what) + ": system is numerically singular");
  return llt;
}

void project_columns_to_unit_ball(Eigen::MatrixXd& mat) {
  for (Eigen::Index j = 0; j < mat.cols(); ++j) {
    const double norm = mat.col(j).norm();
    if (norm > 1.0) mat.col(j) /= norm;
  }
}

// Solve Y * G = RHS for Y with G symmetric positive definite.
Eigen::MatrixXd solve_right(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& rhs) {
  return llt.solve(rhs.transpose()).transpose();
}

} // namespace

void Hyperparameters::validate() const {
  if (m < 1) throw Error("hyperparameters: m must be >= 1");
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0)
    throw Error("hyperparameters: lambda weights must be nonnegative");
  if (gamma <= 0) throw Error("hyperparameters: gamma must be positive");
  if (rho <= 0) throw Error("hyperparameters: rho must be positive");
  if (outer_iters < 0 || admm_iters < 0) throw Error("hyperparameters: iteration caps must be >= 0");
  if (tol < 0 || admm_tol < 0) throw Error("hyperparameters: tolerances must be >= 0");
}

Eigen::MatrixXd update_A(const Eigen::MatrixXd& X, const Eigen::MatrixXd& D,
                         const Eigen::MatrixXd& W, const Eigen::MatrixXd& P,
                         const Eigen::MatrixXd& H, const Hyperparameters& hp) {
  Eigen::MatrixXd gram = D.transpose() * D;
  if (W.size() > 0) {
    if (hp.compat_printed_a_update)
      gram.noalias() += W.transpose() * W;
    else
      gram.noalias() += hp.lambda2 * (W.transpose() * W).eval();
  }
  gram.diagonal().array() += hp.lambda3;

  Eigen::MatrixXd rhs = D.transpose() * X;
  if (W.size() > 0) rhs.noalias() += hp.lambda2 * (W.transpose() * H).eval();
  rhs.noalias() += hp.lambda3 * (P * X).eval();

  const auto llt = factorize_spd(std::move(gram), "update_A");
  Eigen::MatrixXd a = llt.solve(rhs);
  if (!a.allFinite()) throw SingularSystem("update_A: solve produced non-finite values");
  return a;
}

Eigen::MatrixXd update_P(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xbar,
                         const Eigen::MatrixXd& A, const Hyperparameters& hp) {
  Eigen::MatrixXd gram = hp.lambda3 * (X * X.transpose()).eval();
  if (Xbar.size() > 0) gram.noalias() += hp.lambda1 * (Xbar * Xbar.transpose()).eval();
  gram.diagonal().array() += hp.gamma;
  const auto llt = factorize_spd(std::move(gram), "update_P");
  return solve_right(llt, hp.lambda3 * (A * X.transpose()).eval());
}

Eigen::MatrixXd update_W(const Eigen::MatrixXd& A, const Eigen::MatrixXd& H,
                         const Hyperparameters& hp) {
  Eigen::MatrixXd gram = A * A.transpose();
  gram.diagonal().array() += hp.gamma;
  const auto llt = factorize_spd(std::move(gram), "update_W");
  return solve_right(llt, H * A.transpose());
}

Eigen::MatrixXd update_D(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A,
                         const Hyperparameters& hp, AdmmState& state) {
  Eigen::MatrixXd gram = A * A.transpose();
  gram.diagonal().array() += hp.rho;
  const auto llt = factorize_spd(std::move(gram), "update_D");
  const Eigen::MatrixXd xat = X * A.transpose();

  Eigen::MatrixXd d;
  for (int r = 0; r < hp.admm_iters; ++r) {
    d = solve_right(llt, xat + hp.rho * (state.S - state.T));
    Eigen::MatrixXd s = d + state.T;
    project_columns_to_unit_ball(s);
    state.T += d - s;
    state.S = std::move(s);
    ++state.iterations_run;

    const double dnorm = d.norm();
    const double residual = (d - state.S).norm();
    if (dnorm > 0 ? residual / dnorm < hp.admm_tol : residual == 0.0) break;
  }
  return state.S;
}

namespace {

struct ClassTerms {
  const Eigen::MatrixXd* X;
  const Eigen::MatrixXd* H;
  Eigen::MatrixXd gram_bar; // Xbar Xbar', materialized via total-gram identity
};

double class_objective(const ClassTerms& t, const ClassModel& mdl, const Eigen::MatrixXd& A,
                       const Hyperparameters& hp) {
  double value = (*t.X - mdl.D * A).squaredNorm();
  if (hp.lambda1 > 0 && t.gram_bar.size() > 0) {
    const Eigen::MatrixXd pg = mdl.P * t.gram_bar;
    value += hp.lambda1 * (pg.cwiseProduct(mdl.P)).sum(); // trace(P Gbar P')
  }
  if (hp.lambda2 > 0) value += hp.lambda2 * (*t.H - mdl.W * A).squaredNorm();
  value += hp.lambda3 * (mdl.P * (*t.X) - A).squaredNorm();
  return value;
}

} // namespace

double objective(const std::vector<Eigen::MatrixXd>& X,
                 const std::vector<Eigen::MatrixXd>& H,
                 const std::vector<ClassModel>& models,
                 const std::vector<Eigen::MatrixXd>& codes,
                 const Hyperparameters& hp) {
  if (X.size() != H.size() || X.size() != models.size() || X.size() != codes.size())
    throw DimensionMismatch("objective: per-class array sizes disagree");
  const std::size_t q = X.size();
  if (q == 0) return 0.0;

  const Eigen::Index n = X[0].rows();
  Eigen::MatrixXd total_gram;
  if (hp.lambda1 > 0) {
    total_gram = Eigen::MatrixXd::Zero(n, n);
    for (const auto& xi : X) total_gram.noalias() += xi * xi.transpose();
  }

  double value = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    ClassTerms t{&X[i], &H[i], {}};
    if (hp.lambda1 > 0) t.gram_bar = total_gram - X[i] * X[i].transpose();
    value += class_objective(t, models[i], codes[i], hp);
  }
  return value;
}

InitState init(const ClassPartitionedDataset& dataset, const Hyperparameters& hp,
               std::uint64_t seed) {
  hp.validate();
  const int q = dataset.num_classes();
  const int n = dataset.feature_length();

  InitState st;
  st.models.resize(q);
  st.codes.resize(q);
  st.admm.resize(q);

  for (int i = 0; i < q; ++i) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> normal(0.0, 1.0);

    ClassModel& mdl = st.models[i];
    mdl.P.resize(hp.m, n);
    for (Eigen::Index c = 0; c < mdl.P.cols(); ++c)
      for (Eigen::Index r = 0; r < mdl.P.rows(); ++r) mdl.P(r, c) = normal(rng);

    mdl.D.resize(n, hp.m);
    for (Eigen::Index c = 0; c < mdl.D.cols(); ++c)
      for (Eigen::Index r = 0; r < mdl.D.rows(); ++r) mdl.D(r, c) = normal(rng);
    for (Eigen::Index c = 0; c < mdl.D.cols(); ++c) {
      const double norm = mdl.D.col(c).norm();
      if (norm > 0) mdl.D.col(c) /= norm;
    }

    const Eigen::MatrixXd& x = dataset.class_samples(i);
    const Eigen::MatrixXd h = dataset.label_matrix(i);
    const Eigen::MatrixXd w_zero = Eigen::MatrixXd::Zero(q, hp.m);
    st.codes[i] = update_A(x, mdl.D, w_zero, mdl.P, h, hp);
    mdl.W = update_W(st.codes[i], h, hp);

    st.admm[i].S = mdl.D;
    st.admm[i].T = Eigen::MatrixXd::Zero(n, hp.m);
  }
  return st;
}

TrainResult train(const ClassPartitionedDataset& dataset, const Hyperparameters& hp,
                  std::uint64_t seed, int workers) {
  hp.validate();
  const int q = dataset.num_classes();
  if (q < 2) throw Error("train: needs at least 2 classes");
  const int n = dataset.feature_length();

  std::vector<Eigen::MatrixXd> labels(q);
  for (int i = 0; i < q; ++i) labels[i] = dataset.label_matrix(i);

  // Per-class Grams; the complement Gram is total minus own, never a
  // materialized concatenation.
  std::vector<Eigen::MatrixXd> gram(q);
  parallel_for(q, workers, [&](int i) {
    const auto& x = dataset.class_samples(i);
    gram[i].noalias() = x * x.transpose();
  });
  Eigen::MatrixXd total_gram = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < q; ++i) total_gram += gram[i];

  std::vector<ClassTerms> terms(q);
  std::vector<Eigen::LLT<Eigen::MatrixXd>> p_solver(q);
  parallel_for(q, workers, [&](int i) {
    terms[i].X = &dataset.class_samples(i);
    terms[i].H = &labels[i];
    if (hp.lambda1 > 0) terms[i].gram_bar = total_gram - gram[i];
    // G_i = l3 X X' + l1 Xbar Xbar' + gamma I is constant across iterations.
    Eigen::MatrixXd g = hp.lambda3 * gram[i];
    if (hp.lambda1 > 0) g.noalias() += hp.lambda1 * terms[i].gram_bar;
    g.diagonal().array() += hp.gamma;
    p_solver[i] = factorize_spd(std::move(g), "update_P");
  });

  InitState st = init(dataset, hp, seed);

  std::vector<double> class_obj(q);
  parallel_for(q, workers, [&](int i) {
    class_obj[i] = class_objective(terms[i], st.models[i], st.codes[i], hp);
  });
  std::vector<double> trace;
  double current = 0.0;
  for (int i = 0; i < q; ++i) current += class_obj[i];
  trace.push_back(current);

  for (int t = 0; t < hp.outer_iters; ++t) {
    parallel_for(q, workers, [&](int i) {
      const Eigen::MatrixXd& x = *terms[i].X;
      ClassModel& mdl = st.models[i];
      st.codes[i] = update_A(x, mdl.D, mdl.W, mdl.P, labels[i], hp);
      mdl.P = solve_right(p_solver[i], hp.lambda3 * (st.codes[i] * x.transpose()).eval());
      mdl.W = update_W(st.codes[i], labels[i], hp);
      mdl.D = update_D(x, st.codes[i], hp, st.admm[i]);
      class_obj[i] = class_objective(terms[i], mdl, st.codes[i], hp);
    });

    double next = 0.0;
    for (int i = 0; i < q; ++i) next += class_obj[i];
    trace.push_back(next);

    const double decrease = (current - next) / std::max(std::abs(current), 1e-300);
    current = next;
    if (decrease < hp.tol) break;
  }

  TrainResult result;
  result.model.classes = std::move(st.models);
  result.model.hp = hp;
  result.model.pipeline = dataset.pipeline();
  result.model.class_names = dataset.class_names();
  result.model.feature_length = n;
  result.model.atoms = hp.m;
  result.trace = std::move(trace);
  return result;
}

} // namespace lpdpl
