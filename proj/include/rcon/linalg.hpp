#pragma once

#include <Eigen/Dense>
#include <optional>

namespace rcon::linalg {

/// Cholesky factor of a symmetric matrix, or nullopt when it is not
/// (numerically) positive definite.
inline std::optional<Eigen::LLT<Eigen::MatrixXd>> cholesky(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!(l(i, i) > 0.0)) return std::nullopt;
  }
  return llt;
}

inline double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

inline Eigen::MatrixXd inverse(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const auto n = llt.matrixLLT().rows();
  return llt.solve(Eigen::MatrixXd::Identity(n, n));
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double max_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(m.rows() - 1);
}

}  // namespace rcon::linalg
