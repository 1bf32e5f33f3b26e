#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "lpdpl/classifier.hpp"
#include "lpdpl/solver.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace lpdpl;

namespace {

double eq5_objective_loops(const std::vector<Eigen::MatrixXd>& X,
                           const std::vector<Eigen::MatrixXd>& Xbar,
                           const std::vector<Eigen::MatrixXd>& H,
                           const std::vector<ClassModel>& models,
                           const std::vector<Eigen::MatrixXd>& codes,
                           const Hyperparameters& hp) {
  auto frob2 = [](const Eigen::MatrixXd& m) {
    double s = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) s += m(r, c) * m(r, c);
    return s;
  };
  double total = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    total += frob2(X[i] - models[i].D * codes[i]);
    total += hp.lambda1 * frob2(models[i].P * Xbar[i]);
    total += hp.lambda2 * frob2(H[i] - models[i].W * codes[i]);
    total += hp.lambda3 * frob2(models[i].P * X[i] - codes[i]);
  }
  return total;
}

Eigen::MatrixXd orthonormal_columns(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, m);
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index r = 0; r < n; ++r) g(r, c) = normal(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
         Eigen::MatrixXd::Identity(n, m);
}

oracles::MatrixFn a_subproblem(const synthetic::SmallInstance& inst) {
  return [&inst](const Eigen::MatrixXd& a) {
    return (inst.X - inst.D * a).squaredNorm() +
           inst.hp.lambda2 * (inst.H - inst.W * a).squaredNorm() +
           inst.hp.lambda3 * (inst.P * inst.X - a).squaredNorm();
  };
}

} // namespace

TEST_CASE("update_A: orthonormal dictionary with zero couplings gives D'X") {
  synthetic::SmallInstance inst = synthetic::random_instance(1);
  inst.D = orthonormal_columns(8, 4, 2);
  inst.X.resize(8, 5);
  inst.X.setRandom();
  inst.P.resize(4, 8);
  inst.P.setRandom();
  inst.hp.lambda2 = 0;
  inst.hp.lambda3 = 0;
  inst.W = Eigen::MatrixXd::Zero(3, 4);
  inst.H = Eigen::MatrixXd::Zero(3, 5);
  const Eigen::MatrixXd a = update_A(inst.X, inst.D, inst.W, inst.P, inst.H, inst.hp);
  CHECK((a - inst.D.transpose() * inst.X).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("update_A: dominant coupling drives A toward PX") {
  synthetic::SmallInstance inst = synthetic::random_instance(2);
  inst.hp.lambda2 = 0;
  inst.hp.lambda3 = 1e8;
  const Eigen::MatrixXd a = update_A(inst.X, inst.D, inst.W, inst.P, inst.H, inst.hp);
  const Eigen::MatrixXd px = inst.P * inst.X;
  CHECK((a - px).norm() / px.norm() < 1e-6);
}

TEST_CASE("update_A agrees with gradient descent and is stationary") {
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    synthetic::SmallInstance inst = synthetic::random_instance(seed);
    const Eigen::MatrixXd a = update_A(inst.X, inst.D, inst.W, inst.P, inst.H, inst.hp);
    const auto f = a_subproblem(inst);

    auto grad = [&](const Eigen::MatrixXd& v) {
      return (2.0 * inst.D.transpose() * (inst.D * v - inst.X) +
              2.0 * inst.hp.lambda2 * inst.W.transpose() * (inst.W * v - inst.H) +
              2.0 * inst.hp.lambda3 * (v - inst.P * inst.X))
          .eval();
    };
    const Eigen::MatrixXd a_gd =
        oracles::minimize_gd(f, grad, Eigen::MatrixXd::Zero(a.rows(), a.cols()));

    CAPTURE(seed);
    CHECK(std::abs(f(a) - f(a_gd)) / std::max(1.0, std::abs(f(a_gd))) < 1e-6);
    CHECK(f(a) <= f(a_gd) + 1e-9 * (1 + std::abs(f(a_gd))));
    const Eigen::MatrixXd fd = oracles::finite_difference_gradient(f, a);
    CHECK(fd.norm() < 1e-6 * (1.0 + std::abs(f(a))));
  }
}

TEST_CASE("update_A: printed-formula mode reproduces the uncorrected inverse") {
  synthetic::SmallInstance inst = synthetic::random_instance(3);
  inst.hp.compat_printed_a_update = true;
  const Eigen::MatrixXd got = update_A(inst.X, inst.D, inst.W, inst.P, inst.H, inst.hp);

  Eigen::MatrixXd gram = inst.D.transpose() * inst.D + inst.W.transpose() * inst.W;
  gram.diagonal().array() += inst.hp.lambda3;
  const Eigen::MatrixXd rhs = inst.D.transpose() * inst.X +
                              inst.hp.lambda2 * inst.W.transpose() * inst.H +
                              inst.hp.lambda3 * inst.P * inst.X;
  const Eigen::MatrixXd want = gram.colPivHouseholderQr().solve(rhs);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);

  // differs from the corrected form whenever lambda2 != 1
  inst.hp.compat_printed_a_update = false;
  inst.hp.lambda2 = 0.25;
  const Eigen::MatrixXd corrected = update_A(inst.X, inst.D, inst.W, inst.P, inst.H, inst.hp);
  CHECK((corrected - want).cwiseAbs().maxCoeff() > 1e-8);
}

TEST_CASE("update_A: singular system reported when unregularized") {
  synthetic::SmallInstance inst = synthetic::random_instance(4);
  inst.hp.lambda2 = 0;
  inst.hp.lambda3 = 0;
  const Eigen::MatrixXd d_zero = Eigen::MatrixXd::Zero(inst.X.rows(), 4);
  const Eigen::MatrixXd w_zero = Eigen::MatrixXd::Zero(inst.H.rows(), 4);
  const Eigen::MatrixXd p = Eigen::MatrixXd::Zero(4, inst.X.rows());
  CHECK_THROWS_AS(update_A(inst.X, d_zero, w_zero, p, inst.H, inst.hp), SingularSystem);
}

TEST_CASE("update_P: ridge limit recovers the least-squares projection") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(4, 12), a(3, 12);
  for (Eigen::Index c = 0; c < 12; ++c) {
    for (Eigen::Index r = 0; r < 4; ++r) x(r, c) = normal(rng);
    for (Eigen::Index r = 0; r < 3; ++r) a(r, c) = normal(rng);
  }
  Hyperparameters hp;
  hp.lambda1 = 0;
  hp.lambda3 = 1.0;
  hp.gamma = 1e-12;
  const Eigen::MatrixXd p = update_P(x, Eigen::MatrixXd(), a, hp);
  const Eigen::MatrixXd xxt = x * x.transpose();
  const Eigen::MatrixXd want =
      xxt.colPivHouseholderQr().solve((a * x.transpose()).transpose()).transpose();
  CHECK((p - want).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("update_P: zero codes give a zero dictionary") {
  synthetic::SmallInstance inst = synthetic::random_instance(6);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(inst.A.rows(), inst.A.cols());
  const Eigen::MatrixXd p = update_P(inst.X, inst.Xbar, a, inst.hp);
  CHECK(p.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("update_P: stationary for its ridge-included sub-problem; near-stationary for the raw one") {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    synthetic::SmallInstance inst = synthetic::random_instance(seed);
    const Eigen::MatrixXd p = update_P(inst.X, inst.Xbar, inst.A, inst.hp);

    const auto f_ridge = [&](const Eigen::MatrixXd& v) {
      return inst.hp.lambda1 * (v * inst.Xbar).squaredNorm() +
             inst.hp.lambda3 * (v * inst.X - inst.A).squaredNorm() +
             inst.hp.gamma * v.squaredNorm();
    };
    const Eigen::MatrixXd fd = oracles::finite_difference_gradient(f_ridge, p);
    CAPTURE(seed);
    CHECK(fd.norm() < 1e-6 * (1.0 + std::abs(f_ridge(p))));
  }

  // with a vanishing ridge the raw sub-problem is stationary too
  synthetic::SmallInstance inst = synthetic::random_instance(30);
  inst.hp.gamma = 1e-12;
  const Eigen::MatrixXd p = update_P(inst.X, inst.Xbar, inst.A, inst.hp);
  const auto f_raw = [&](const Eigen::MatrixXd& v) {
    return inst.hp.lambda1 * (v * inst.Xbar).squaredNorm() +
           inst.hp.lambda3 * (v * inst.X - inst.A).squaredNorm();
  };
  const Eigen::MatrixXd fd = oracles::finite_difference_gradient(f_raw, p);
  CHECK(fd.norm() < 1e-6 * (1.0 + std::abs(f_raw(p))));
}

TEST_CASE("update_W: orthonormal code rows with vanishing ridge give H A'") {
  const Eigen::MatrixXd a = orthonormal_columns(10, 4, 7).transpose(); // 4x10, AA' = I
  Eigen::MatrixXd h(3, 10);
  h.setRandom();
  Hyperparameters hp;
  hp.gamma = 1e-12;
  const Eigen::MatrixXd w = update_W(a, h, hp);
  CHECK((w - h * a.transpose()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("update_W: zero labels give zero classifier") {
  synthetic::SmallInstance inst = synthetic::random_instance(8);
  const Eigen::MatrixXd h = Eigen::MatrixXd::Zero(inst.H.rows(), inst.H.cols());
  CHECK(update_W(inst.A, h, inst.hp).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("update_W matches the QR ridge oracle") {
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    synthetic::SmallInstance inst = synthetic::random_instance(seed);
    const Eigen::MatrixXd w = update_W(inst.A, inst.H, inst.hp);
    const Eigen::MatrixXd want = oracles::ridge_qr(inst.A, inst.H, inst.hp.gamma);
    CAPTURE(seed);
    CHECK((w - want).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("update_D: feasible unconstrained optimum is reached exactly") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(4, 4);
  for (Eigen::Index c = 0; c < 4; ++c) {
    for (Eigen::Index r = 0; r < 4; ++r) x(r, c) = normal(rng);
    x.col(c) *= 0.9 / x.col(c).norm();
  }
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
  Hyperparameters hp;
  hp.admm_iters = 5000;
  hp.admm_tol = 1e-13;
  AdmmState state{Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 4)};
  const Eigen::MatrixXd d = update_D(x, a, hp, state);
  CHECK((d - x).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("update_D: zero data gives zero dictionary") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 3);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
  Hyperparameters hp;
  hp.admm_iters = 400;
  hp.admm_tol = 0.0;
  AdmmState state{Eigen::MatrixXd::Identity(3, 3) * 0.5, Eigen::MatrixXd::Zero(3, 3)};
  const Eigen::MatrixXd d = update_D(x, a, hp, state);
  CHECK(d.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("update_D matches the projected-gradient oracle") {
  for (std::uint64_t seed = 50; seed < 56; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(5, 7), a(3, 7);
    for (Eigen::Index c = 0; c < 7; ++c) {
      for (Eigen::Index r = 0; r < 5; ++r) x(r, c) = normal(rng);
      for (Eigen::Index r = 0; r < 3; ++r) a(r, c) = normal(rng);
    }
    Hyperparameters hp;
    hp.admm_iters = 3000;
    hp.admm_tol = 1e-12;
    AdmmState state{Eigen::MatrixXd::Zero(5, 3), Eigen::MatrixXd::Zero(5, 3)};
    const Eigen::MatrixXd d = update_D(x, a, hp, state);

    const Eigen::MatrixXd d_pg =
        oracles::projected_gradient_dictionary(x, a, Eigen::MatrixXd::Zero(5, 3));
    const double f_admm = (x - d * a).squaredNorm();
    const double f_pg = (x - d_pg * a).squaredNorm();
    CAPTURE(seed);
    CHECK(std::abs(f_admm - f_pg) / std::max(1.0, f_pg) < 1e-4);
    for (Eigen::Index j = 0; j < d.cols(); ++j) CHECK(d.col(j).norm() <= 1.0 + 1e-9);
  }
}

TEST_CASE("objective: all-zero operands with zero labels give zero") {
  Hyperparameters hp;
  std::vector<Eigen::MatrixXd> x{Eigen::MatrixXd::Zero(4, 3), Eigen::MatrixXd::Zero(4, 2)};
  std::vector<Eigen::MatrixXd> h{Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(2, 2)};
  std::vector<ClassModel> models(2);
  std::vector<Eigen::MatrixXd> codes(2);
  for (int i = 0; i < 2; ++i) {
    models[i].P = Eigen::MatrixXd::Zero(5, 4);
    models[i].D = Eigen::MatrixXd::Zero(4, 5);
    models[i].W = Eigen::MatrixXd::Zero(2, 5);
    codes[i] = Eigen::MatrixXd::Zero(5, x[i].cols());
  }
  CHECK(objective(x, h, models, codes, hp) == 0.0);
}

TEST_CASE("objective: one-hot labels alone contribute lambda2 * total samples") {
  Hyperparameters hp;
  hp.lambda2 = 0.7;
  std::vector<Eigen::MatrixXd> x{Eigen::MatrixXd::Zero(4, 3), Eigen::MatrixXd::Zero(4, 5)};
  std::vector<Eigen::MatrixXd> h(2);
  h[0] = Eigen::MatrixXd::Zero(2, 3);
  h[0].row(0).setOnes();
  h[1] = Eigen::MatrixXd::Zero(2, 5);
  h[1].row(1).setOnes();
  std::vector<ClassModel> models(2);
  std::vector<Eigen::MatrixXd> codes(2);
  for (int i = 0; i < 2; ++i) {
    models[i].P = Eigen::MatrixXd::Zero(5, 4);
    models[i].D = Eigen::MatrixXd::Zero(4, 5);
    models[i].W = Eigen::MatrixXd::Zero(2, 5);
    codes[i] = Eigen::MatrixXd::Zero(5, x[i].cols());
  }
  CHECK(objective(x, h, models, codes, hp) == doctest::Approx(0.7 * 8).epsilon(1e-12));
}

TEST_CASE("objective matches the loop-summation oracle") {
  for (std::uint64_t seed = 60; seed < 64; ++seed) {
    std::vector<Eigen::MatrixXd> x, h, codes;
    std::vector<ClassModel> models;
    Hyperparameters hp;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const int q = 3, n = 5, m = 4;
    std::vector<int> k{3, 4, 2};
    auto fill = [&](int rows, int cols) {
      Eigen::MatrixXd mat(rows, cols);
      for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) mat(r, c) = normal(rng);
      return mat;
    };
    for (int i = 0; i < q; ++i) {
      x.push_back(fill(n, k[i]));
      Eigen::MatrixXd hi = Eigen::MatrixXd::Zero(q, k[i]);
      hi.row(i).setOnes();
      h.push_back(hi);
      ClassModel mdl{fill(m, n), fill(n, m), fill(q, m)};
      models.push_back(mdl);
      codes.push_back(fill(m, k[i]));
    }
    std::vector<Eigen::MatrixXd> xbar(q);
    for (int i = 0; i < q; ++i) {
      Eigen::MatrixXd cat(n, 0);
      for (int j = 0; j < q; ++j) {
        if (j == i) continue;
        Eigen::MatrixXd next(n, cat.cols() + x[j].cols());
        next << cat, x[j];
        cat = next;
      }
      xbar[i] = cat;
    }
    const double got = objective(x, h, models, codes, hp);
    const double want = eq5_objective_loops(x, xbar, h, models, codes, hp);
    CAPTURE(seed);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("init: deterministic, unit-norm dictionary columns, consistent A0/W0") {
  const auto ds = synthetic::orthogonal_subspace_dataset(3, 2, 8, 123);
  Hyperparameters hp;
  hp.m = 4;
  const InitState s1 = init(ds, hp, 99);
  const InitState s2 = init(ds, hp, 99);
  for (int i = 0; i < 3; ++i) {
    CHECK(s1.models[i].P == s2.models[i].P);
    CHECK(s1.models[i].D == s2.models[i].D);
    CHECK(s1.models[i].W == s2.models[i].W);
    CHECK(s1.codes[i] == s2.codes[i]);
    for (Eigen::Index c = 0; c < s1.models[i].D.cols(); ++c)
      CHECK(std::abs(s1.models[i].D.col(c).norm() - 1.0) < 1e-12);
  }

  // A0 is the A-update at W = 0; cross-check with an independent dense solve
  const int i = 1;
  const Eigen::MatrixXd& x = ds.class_samples(i);
  Eigen::MatrixXd gram = s1.models[i].D.transpose() * s1.models[i].D;
  gram.diagonal().array() += hp.lambda3;
  const Eigen::MatrixXd rhs =
      s1.models[i].D.transpose() * x + hp.lambda3 * s1.models[i].P * x;
  const Eigen::MatrixXd a0 = gram.colPivHouseholderQr().solve(rhs);
  CHECK((s1.codes[i] - a0).cwiseAbs().maxCoeff() < 1e-10);

  const InitState s3 = init(ds, hp, 100);
  CHECK(s1.models[0].P != s3.models[0].P);
}

TEST_CASE("train: orthogonal 2-D subspaces of R^8 are learned to perfection") {
  const auto ds = synthetic::orthogonal_subspace_dataset(2, 2, 15, 7, 8);
  Hyperparameters hp;
  hp.m = 4;
  hp.outer_iters = 8;
  const TrainResult result = train(ds, hp, 11);
  CHECK(result.trace.back() < result.trace.front());

  int correct = 0;
  for (int c = 0; c < ds.total_samples(); ++c)
    if (classify(ds.column(c), result.model) == ds.label_of(c)) ++correct;
  CHECK(correct == ds.total_samples());
}

TEST_CASE("train: zero outer iterations returns the initialization") {
  const auto ds = synthetic::orthogonal_subspace_dataset(2, 2, 6, 3);
  Hyperparameters hp;
  hp.m = 3;
  hp.outer_iters = 0;
  const TrainResult result = train(ds, hp, 5);
  CHECK(result.trace.size() == 1);
  const InitState st = init(ds, hp, 5);
  for (int i = 0; i < 2; ++i) {
    CHECK(result.model.classes[i].P == st.models[i].P);
    CHECK(result.model.classes[i].D == st.models[i].D);
    CHECK(result.model.classes[i].W == st.models[i].W);
  }
}

TEST_CASE("train: objective trace is non-increasing within slack") {
  const auto ds = synthetic::orthogonal_subspace_dataset(3, 3, 12, 21);
  Hyperparameters hp;
  hp.m = 5;
  hp.outer_iters = 10;
  hp.tol = 0.0; // run all iterations
  const TrainResult result = train(ds, hp, 2);
  REQUIRE(result.trace.size() >= 2);
  for (std::size_t t = 2; t < result.trace.size(); ++t)
    CHECK(result.trace[t] <= result.trace[t - 1] + 1e-8);
}

TEST_CASE("train: deterministic across reruns and worker counts") {
  const auto ds = synthetic::orthogonal_subspace_dataset(3, 2, 10, 77);
  Hyperparameters hp;
  hp.m = 4;
  hp.outer_iters = 4;
  const TrainResult r1 = train(ds, hp, 42, 1);
  const TrainResult r2 = train(ds, hp, 42, 1);
  const TrainResult r4 = train(ds, hp, 42, 4);
  REQUIRE(r1.trace.size() == r2.trace.size());
  REQUIRE(r1.trace.size() == r4.trace.size());
  for (std::size_t t = 0; t < r1.trace.size(); ++t) {
    CHECK(r1.trace[t] == r2.trace[t]);
    CHECK(r1.trace[t] == r4.trace[t]);
  }
  for (int i = 0; i < 3; ++i) {
    CHECK(r1.model.classes[i].D == r4.model.classes[i].D);
    CHECK(r1.model.classes[i].P == r4.model.classes[i].P);
    CHECK(r1.model.classes[i].W == r4.model.classes[i].W);
  }
}

TEST_CASE("train: dictionary columns satisfy the unit-norm constraint") {
  const auto ds = synthetic::orthogonal_subspace_dataset(3, 2, 10, 31);
  Hyperparameters hp;
  hp.m = 6;
  hp.outer_iters = 6;
  const TrainResult result = train(ds, hp, 13);
  for (const auto& cls : result.model.classes)
    for (Eigen::Index j = 0; j < cls.D.cols(); ++j)
      CHECK(cls.D.col(j).norm() <= 1.0 + 1e-9);
}

TEST_CASE("A/P/W updates never increase the full objective") {
  const auto ds = synthetic::orthogonal_subspace_dataset(3, 2, 9, 55);
  Hyperparameters hp;
  hp.m = 4;
  const int q = ds.num_classes();

  std::vector<Eigen::MatrixXd> x, xbar, h;
  for (int i = 0; i < q; ++i) {
    x.push_back(ds.class_samples(i));
    xbar.push_back(ds.complement(i));
    h.push_back(ds.label_matrix(i));
  }
  InitState st = init(ds, hp, 3);

  auto full_objective = [&]() {
    return eq5_objective_loops(x, xbar, h, st.models, st.codes, hp);
  };

  double before = full_objective();
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (int i = 0; i < q; ++i) {
      st.codes[i] = update_A(x[i], st.models[i].D, st.models[i].W, st.models[i].P, h[i], hp);
      double after = full_objective();
      CHECK(after <= before + 1e-9 * (1 + std::abs(before)));
      before = after;

      st.models[i].P = update_P(x[i], xbar[i], st.codes[i], hp);
      after = full_objective();
      CHECK(after <= before + 1e-9 * (1 + std::abs(before)));
      before = after;

      st.models[i].W = update_W(st.codes[i], h[i], hp);
      after = full_objective();
      CHECK(after <= before + 1e-9 * (1 + std::abs(before)));
      before = after;

      st.models[i].D = update_D(x[i], st.codes[i], hp, st.admm[i]);
      before = full_objective();
    }
  }
}

TEST_CASE("with lambda2 = 0 the A/P/D sequence ignores the label matrix") {
  const auto ds = synthetic::orthogonal_subspace_dataset(2, 2, 7, 88);
  Hyperparameters hp;
  hp.m = 3;
  hp.lambda2 = 0.0;
  const int q = ds.num_classes();

  std::vector<Eigen::MatrixXd> x, xbar;
  for (int i = 0; i < q; ++i) {
    x.push_back(ds.class_samples(i));
    xbar.push_back(ds.complement(i));
  }

  // two different label matrices, one canonical and one scrambled
  std::vector<Eigen::MatrixXd> h1, h2;
  for (int i = 0; i < q; ++i) {
    h1.push_back(ds.label_matrix(i));
    Eigen::MatrixXd scrambled = Eigen::MatrixXd::Ones(q, ds.class_size(i));
    scrambled.row(i).setZero();
    h2.push_back(scrambled);
  }

  auto run_updates = [&](const std::vector<Eigen::MatrixXd>& h) {
    InitState st = init(ds, hp, 17);
    for (int t = 0; t < 3; ++t) {
      for (int i = 0; i < q; ++i) {
        st.codes[i] =
            update_A(x[i], st.models[i].D, st.models[i].W, st.models[i].P, h[i], hp);
        st.models[i].P = update_P(x[i], xbar[i], st.codes[i], hp);
        st.models[i].W = update_W(st.codes[i], h[i], hp);
        st.models[i].D = update_D(x[i], st.codes[i], hp, st.admm[i]);
      }
    }
    return st;
  };

  const InitState s1 = run_updates(h1);
  const InitState s2 = run_updates(h2);
  for (int i = 0; i < q; ++i) {
    CHECK(s1.codes[i] == s2.codes[i]);
    CHECK(s1.models[i].P == s2.models[i].P);
    CHECK(s1.models[i].D == s2.models[i].D);
    CHECK(s1.models[i].W != s2.models[i].W); // the classifier block does depend on labels
  }
}
