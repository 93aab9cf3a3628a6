#include "abspec/eigensolve.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <string>

namespace abspec {

namespace {

// Deterministic start vectors: 64-bit LCG mapped into (-1, 1).
struct Lcg {
  std::uint64_t state;
  explicit Lcg(std::uint64_t seed) : state(seed ? seed : 1) {}
  double next() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return (double)(state >> 11) / (double)(1ULL << 53) * 2.0 - 1.0;
  }
};

Eigen::VectorXd lcg_vector(int n, std::uint64_t seed) {
  Lcg rng(seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; i++) v[i] = rng.next();
  return v;
}

struct MOps {
  const Eigen::SparseMatrix<double>& K;
  const Eigen::SparseMatrix<double>& M;
  Eigen::VectorXd mulK(const Eigen::VectorXd& x) const {
    return K.selfadjointView<Eigen::Lower>() * x;
  }
  Eigen::VectorXd mulM(const Eigen::VectorXd& x) const {
    return M.selfadjointView<Eigen::Lower>() * x;
  }
  double mdot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return a.dot(mulM(b));
  }
};

double pair_residual(const MOps& ops, double lambda,
                     const Eigen::VectorXd& u) {
  Eigen::VectorXd ku = ops.mulK(u);
  Eigen::VectorXd r = ku - lambda * ops.mulM(u);
  double denom = ku.norm();
  return denom > 0.0 ? r.norm() / denom : r.norm();
}

}  // namespace

std::vector<int> cluster(const std::vector<double>& values, double rel_gap) {
  std::vector<int> ids(values.size(), 0);
  int c = 0;
  for (size_t i = 1; i < values.size(); i++) {
    double scale = std::max({std::fabs(values[i - 1]), std::fabs(values[i]),
                             1e-300});
    if ((values[i] - values[i - 1]) / scale >= rel_gap) c++;
    ids[i] = c;
  }
  return ids;
}

std::vector<EigenPair> dense_eigenpairs(
    const Eigen::SparseMatrix<double>& K_lower,
    const Eigen::SparseMatrix<double>& M_lower, int m) {
  int n = (int)K_lower.rows();
  if (m > n) throw PreconditionError("dense_eigenpairs: m exceeds dimension");
  Eigen::SparseMatrix<double> Kfull, Mfull;
  Kfull = K_lower.selfadjointView<Eigen::Lower>();
  Mfull = M_lower.selfadjointView<Eigen::Lower>();
  Eigen::MatrixXd K = Eigen::MatrixXd(Kfull);
  Eigen::MatrixXd M = Eigen::MatrixXd(Mfull);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
  if (es.info() != Eigen::Success)
    throw NumericalError("dense_eigenpairs: eigensolver failed");
  MOps ops{K_lower, M_lower};
  std::vector<EigenPair> out;
  for (int i = 0; i < m; i++) {
    EigenPair p;
    p.value = es.eigenvalues()[i];
    p.vector = es.eigenvectors().col(i);
    double mn = std::sqrt(ops.mdot(p.vector, p.vector));
    p.vector /= mn;
    p.residual = pair_residual(ops, p.value, p.vector);
    out.push_back(std::move(p));
  }
  std::vector<double> vals;
  for (auto& p : out) vals.push_back(p.value);
  auto ids = cluster(vals, 1e-6);
  for (size_t i = 0; i < out.size(); i++) out[i].cluster = ids[i];
  return out;
}

std::vector<EigenPair> smallest_eigenpairs(
    const Eigen::SparseMatrix<double>& K_lower,
    const Eigen::SparseMatrix<double>& M_lower, int m,
    const EigenOptions& opt) {
  int n = (int)K_lower.rows();
  if (n == 0) throw PreconditionError("eigensolve: empty system");
  if (m <= 0) throw PreconditionError("eigensolve: m must be positive");
  if (m > n) throw PreconditionError("eigensolve: m exceeds dimension");

  MOps ops{K_lower, M_lower};

  Eigen::SparseMatrix<double> A = K_lower;
  if (opt.shift != 0.0) A = K_lower - opt.shift * M_lower;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower> llt;
  llt.compute(A);
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "eigensolve: Cholesky factorization breakdown (matrix not SPD; is "
        "the shift below lambda_1?)");

  int kmax = opt.max_subspace > 0
                 ? opt.max_subspace
                 : std::min(n, std::max(2 * m + 30, 60));

  std::vector<EigenPair> locked;
  Eigen::MatrixXd locked_vecs(n, 0);
  Eigen::MatrixXd locked_mvecs(n, 0);  // M * locked vectors

  auto deflate = [&](Eigen::VectorXd& w) {
    if (locked_vecs.cols() == 0) return;
    Eigen::VectorXd c = locked_mvecs.transpose() * w;
    w -= locked_vecs * c;
  };

  int want = std::min(n, m + std::min(4, n - m));  // guard band for clusters
  double worst_residual = 1.0;

  for (int restart = 0; restart < opt.max_restarts && (int)locked.size() < want;
       restart++) {
    // Lanczos on Op = (K - shift M)^{-1} M in the M-inner product.
    Eigen::MatrixXd Q(n, kmax + 1);
    Eigen::MatrixXd MQ(n, kmax + 1);
    std::vector<double> alpha, beta;

    Eigen::VectorXd q = lcg_vector(n, opt.seed + 0x9E3779B9ULL * restart);
    deflate(q);
    Eigen::VectorXd mq = ops.mulM(q);
    double qn = std::sqrt(q.dot(mq));
    if (qn <= 0.0) throw NumericalError("eigensolve: degenerate start vector");
    q /= qn;
    Q.col(0) = q;
    MQ.col(0) = ops.mulM(q);

    int k = 0;
    bool breakdown = false;
    for (; k < kmax; k++) {
      Eigen::VectorXd w = llt.solve(MQ.col(k));
      deflate(w);
      double a = w.dot(MQ.col(k));
      alpha.push_back(a);
      w -= a * Q.col(k);
      if (k > 0) w -= beta[k - 1] * Q.col(k - 1);
      // full reorthogonalization (twice) against the current basis
      for (int pass = 0; pass < 2; pass++) {
        Eigen::VectorXd c =
            MQ.leftCols(k + 1).transpose() * w;
        w -= Q.leftCols(k + 1) * c;
      }
      deflate(w);
      Eigen::VectorXd mw = ops.mulM(w);
      double b = std::sqrt(std::max(0.0, w.dot(mw)));
      if (!(b > 1e-14)) {
        breakdown = true;  // invariant subspace exhausted
        break;
      }
      beta.push_back(b);
      Q.col(k + 1) = w / b;
      MQ.col(k + 1) = mw / b;
    }

    int kk = (int)alpha.size();
    if (kk == 0) continue;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(kk, kk);
    for (int i = 0; i < kk; i++) {
      T(i, i) = alpha[i];
      if (i + 1 < kk) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success)
      throw NumericalError("eigensolve: tridiagonal eigensolver failed");

    // Largest theta of the inverted operator <-> smallest lambda.
    for (int i = kk - 1; i >= 0; i--) {
      double theta = es.eigenvalues()[i];
      if (theta <= 0.0) continue;
      double lambda = opt.shift + 1.0 / theta;
      Eigen::VectorXd u = Q.leftCols(kk) * es.eigenvectors().col(i);
      double mn = std::sqrt(ops.mdot(u, u));
      if (!(mn > 0.0)) continue;
      u /= mn;
      double res = pair_residual(ops, lambda, u);
      worst_residual = std::min(worst_residual, res);
      if (res <= opt.tol) {
        // deflate against already locked vectors, then accept
        Eigen::VectorXd v = u;
        deflate(v);
        double vn = std::sqrt(ops.mdot(v, v));
        if (vn < 1e-6) continue;  // duplicate of a locked vector
        v /= vn;
        res = pair_residual(ops, lambda, v);
        if (res > opt.tol) continue;
        EigenPair p;
        p.value = lambda;
        p.vector = v;
        p.residual = res;
        locked.push_back(std::move(p));
        locked_vecs.conservativeResize(n, locked.size());
        locked_vecs.col(locked.size() - 1) = locked.back().vector;
        locked_mvecs.conservativeResize(n, locked.size());
        locked_mvecs.col(locked.size() - 1) =
            ops.mulM(locked.back().vector);
        if ((int)locked.size() >= want) break;
      }
    }
    if (breakdown && (int)locked.size() >= std::min(n, m)) break;
  }

  if ((int)locked.size() < m)
    throw NumericalError(
        "eigensolve: did not converge to " + std::to_string(m) +
        " eigenpairs (got " + std::to_string(locked.size()) +
        ", best residual " + std::to_string(worst_residual) + ")");

  std::sort(locked.begin(), locked.end(),
            [](const EigenPair& a, const EigenPair& b) {
              return a.value < b.value;
            });
  locked.resize(m);

  std::vector<double> vals;
  for (auto& p : locked) vals.push_back(p.value);
  auto ids = cluster(vals, opt.cluster_rel_gap);
  for (size_t i = 0; i < locked.size(); i++) locked[i].cluster = ids[i];
  return locked;
}

}  // namespace abspec
