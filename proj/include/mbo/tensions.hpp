#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "mbo/errors.hpp"

namespace mbo {

// Certified surface-tension matrix: symmetric, zero diagonal, positive
// off-diagonal entries, strict triangle inequality, and negative-definite
// as a bilinear form on the zero-sum subspace (1,...,1)^perp.
class SurfaceTensionMatrix {
 public:
  static SurfaceTensionMatrix validate(const std::vector<std::vector<double>>& raw) {
    const int P = static_cast<int>(raw.size());
    if (P < 2) throw Error("need at least two phases");
    for (const auto& row : raw)
      if (static_cast<int>(row.size()) != P) throw Error("surface tension matrix is not square");

    for (int i = 0; i < P; ++i)
      for (int j = 0; j < i; ++j)
        if (raw[i][j] != raw[j][i]) throw NotSymmetric();
    for (int i = 0; i < P; ++i)
      if (raw[i][i] != 0.0) throw NonzeroDiagonal();
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j)
        if (i != j && !(raw[i][j] > 0.0)) throw NonpositiveOffDiagonal();

    SurfaceTensionMatrix m;
    m.P_ = P;
    m.s_.assign(static_cast<std::size_t>(P) * P, 0.0);
    m.sigma_min_ = std::numeric_limits<double>::infinity();
    m.sigma_max_ = 0.0;
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j) {
        m.s_[static_cast<std::size_t>(i) * P + j] = raw[i][j];
        if (i != j) {
          m.sigma_min_ = std::min(m.sigma_min_, raw[i][j]);
          m.sigma_max_ = std::max(m.sigma_max_, raw[i][j]);
        }
      }

    m.triangle_slack_ = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1, bk = -1;
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j)
        for (int k = 0; k < P; ++k) {
          if (i == j || j == k || i == k) continue;
          double slack = raw[i][k] + raw[k][j] - raw[i][j];
          if (slack < m.triangle_slack_) {
            m.triangle_slack_ = slack;
            bi = i; bj = j; bk = k;
          }
        }
    if (P >= 3 && !(m.triangle_slack_ > 0.0)) throw TriangleInequalityViolated(bi, bj, bk);

    // Project onto (1,...,1)^perp with a Householder reflector and take the
    // top eigenvalue of the projected form.
    Eigen::MatrixXd S(P, P);
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j) S(i, j) = raw[i][j];
    Eigen::VectorXd w = Eigen::VectorXd::Constant(P, 1.0 / std::sqrt(double(P)));
    Eigen::VectorXd u = w;
    u(0) -= 1.0;  // reflector maps e_0 to w
    double un = u.norm();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(P, P);
    if (un > 1e-14) H -= (2.0 / (un * un)) * (u * u.transpose());
    Eigen::MatrixXd Q = H.rightCols(P - 1);
    Eigen::MatrixXd M = Q.transpose() * S * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    double lmax = es.eigenvalues().maxCoeff();
    if (!(lmax < -1e-12 * m.sigma_max_)) throw NotConditionallyNegativeDefinite();
    m.sigma_lower_ = -lmax;
    return m;
  }

  static SurfaceTensionMatrix uniform(int P, double sigma = 1.0) {
    std::vector<std::vector<double>> raw(P, std::vector<double>(P, sigma));
    for (int i = 0; i < P; ++i) raw[i][i] = 0.0;
    return validate(raw);
  }

  int phases() const { return P_; }
  double operator()(int i, int j) const { return s_[static_cast<std::size_t>(i) * P_ + j]; }
  double sigma_min() const { return sigma_min_; }
  double sigma_max() const { return sigma_max_; }
  double sigma_lower() const { return sigma_lower_; }
  double triangle_slack() const { return triangle_slack_; }

 private:
  SurfaceTensionMatrix() = default;
  int P_ = 0;
  std::vector<double> s_;
  double sigma_min_ = 0.0, sigma_max_ = 0.0, sigma_lower_ = 0.0;
  double triangle_slack_ = std::numeric_limits<double>::infinity();
};

namespace detail {

// Given theta1, the sine relation pins theta2 in (0, pi):
//   s12*sin(theta2) + s13*sin(theta1 + theta2) = 0.
inline double herring_theta2(double s12, double s13, double theta1) {
  double phi = std::atan2(s13 * std::sin(theta1), s12 + s13 * std::cos(theta1));
  return M_PI - phi;
}

inline double herring_residual(double s12, double s13, double s23, double theta1) {
  double theta2 = herring_theta2(s12, s13, theta1);
  double theta3 = 2.0 * M_PI - theta1 - theta2;
  return s12 * std::sin(theta1) - s23 * std::sin(theta3);
}

}  // namespace detail

// Opening angles (theta1, theta2, theta3) at a triple junction of phases
// (1,2,3) with pair tensions s12, s13, s23: sum is 2*pi and
// sin(theta_i) is proportional to the tension of the opposite interface.
// Solved by bracketed bisection on theta1.
inline std::array<double, 3> herring_angles(double s12, double s13, double s23) {
  if (!(s12 > 0.0) || !(s13 > 0.0) || !(s23 > 0.0)) throw NoSolution();

  const int scan = 4096;
  const double lo = 1e-9, hi = M_PI - 1e-9;
  double a = lo, fa = detail::herring_residual(s12, s13, s23, a);
  double bracket_a = 0.0, bracket_b = 0.0;
  bool found = false;
  for (int i = 1; i <= scan; ++i) {
    double b = lo + (hi - lo) * i / scan;
    double fb = detail::herring_residual(s12, s13, s23, b);
    if (fa == 0.0) { bracket_a = bracket_b = a; found = true; break; }
    if (fa * fb < 0.0) { bracket_a = a; bracket_b = b; found = true; break; }
    a = b; fa = fb;
  }
  if (!found) throw NoSolution();

  double x0 = bracket_a, x1 = bracket_b;
  for (int it = 0; it < 200 && x1 - x0 > 1e-15; ++it) {
    double mid = 0.5 * (x0 + x1);
    double fm = detail::herring_residual(s12, s13, s23, mid);
    double f0 = detail::herring_residual(s12, s13, s23, x0);
    if (f0 * fm <= 0.0)
      x1 = mid;
    else
      x0 = mid;
  }
  double theta1 = 0.5 * (x0 + x1);
  double theta2 = detail::herring_theta2(s12, s13, theta1);
  double theta3 = 2.0 * M_PI - theta1 - theta2;
  if (!(theta2 > 0.0 && theta2 < M_PI) || !(theta3 > 0.0 && theta3 < M_PI)) throw NoSolution();
  return {theta1, theta2, theta3};
}

}  // namespace mbo
