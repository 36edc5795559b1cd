#include "dfm/qp.hpp"

#include "dfm/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <limits>
#include <vector>

namespace dfm {

QpResult solve_active_set_qp(const Matrix& H, const Vector& g, const Matrix& E, const Matrix& G, const Vector& h,
                             Vector z0, int max_iterations) {
  const Index n = z0.size();
  const double scale = 1.0 + g.lpNorm<Eigen::Infinity>() + H.lpNorm<Eigen::Infinity>();
  std::vector<Index> working;
  QpResult result;
  result.z = std::move(z0);
  result.inequality_multipliers = Vector::Zero(G.rows());

  for (int it = 0; it < max_iterations; ++it) {
    result.iterations = it + 1;
    Matrix C(E.rows() + static_cast<Index>(working.size()), n);
    C.topRows(E.rows()) = E;
    for (std::size_t k = 0; k < working.size(); ++k) C.row(E.rows() + static_cast<Index>(k)) = G.row(working[k]);

    const Vector grad = H * result.z + g;
    const Matrix Z = null_space_basis(C);
    Vector d = Vector::Zero(n);
    if (Z.cols() > 0) {
      const Matrix reduced = Z.transpose() * H * Z;
      d = -Z * reduced.llt().solve(Z.transpose() * grad);
    }

    if (d.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + result.z.lpNorm<Eigen::Infinity>())) {
      // Stationary on the working set: inspect the inequality multipliers.
      Vector multipliers = Vector::Zero(C.rows());
      if (C.rows() > 0)
        multipliers = C.transpose().completeOrthogonalDecomposition().solve(-(H * result.z + g));
      Index drop = -1;
      double most_negative = -1e-11 * scale;
      for (std::size_t k = 0; k < working.size(); ++k) {
        const double mu = multipliers(E.rows() + static_cast<Index>(k));
        if (mu < most_negative) {
          most_negative = mu;
          drop = static_cast<Index>(k);
        }
      }
      if (drop < 0) {
        result.inequality_multipliers.setZero();
        for (std::size_t k = 0; k < working.size(); ++k)
          result.inequality_multipliers(working[k]) = std::max(0.0, multipliers(E.rows() + static_cast<Index>(k)));
        result.converged = true;
        return result;
      }
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    Index blocking = -1;
    for (Index r = 0; r < G.rows(); ++r) {
      if (std::find(working.begin(), working.end(), r) != working.end()) continue;
      const double rate = G.row(r).dot(d);
      if (rate <= 1e-15 * scale) continue;
      const double slack = std::max(0.0, h(r) - G.row(r).dot(result.z));
      const double step = slack / rate;
      if (step < alpha) {
        alpha = step;
        blocking = r;
      }
    }
    result.z += alpha * d;
    if (blocking >= 0) working.push_back(blocking);
  }
  return result;
}

}  // namespace dfm
