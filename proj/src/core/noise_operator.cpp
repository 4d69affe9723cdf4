// SPDX-License-Identifier: Apache-2.0
#include "noise_operator.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "normal.hpp"

namespace pmtune {

DiscreteNoiseKernel noise_kernel_from_nodes(double sigma, Eigen::VectorXd z, Eigen::VectorXd g) {
  require(z.size() == g.size() && z.size() > 0, ErrorCode::domain, "z-grid and weights must be non-empty and aligned");
  require((g.array() > 0.0).all(), ErrorCode::domain, "z-grid weights must be positive");
  g /= g.sum();
  const double shift = std::log((z.array().exp() * g.array()).sum());
  z.array() -= shift;

  DiscreteNoiseKernel k;
  k.sigma = sigma;
  const Eigen::Index m = z.size();
  k.jump.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) k.jump(i, j) = g(j) * std::min(1.0, std::exp(z(j) - z(i)));
  k.rho = k.jump.rowwise().sum();
  for (Eigen::Index i = 0; i < m; ++i) k.jump.row(i) /= k.rho(i);
  k.pi_z = (z.array().exp() * g.array()).matrix();
  k.pi_jump = (k.pi_z.array() * k.rho.array()).matrix();
  k.pi_jump /= k.pi_jump.sum();
  k.z = std::move(z);
  k.g = std::move(g);
  return k;
}

DiscreteNoiseKernel uniform_noise_kernel(double sigma, int points) {
  require(sigma > 0.0, ErrorCode::domain, "sigma must be positive");
  require(points >= 3, ErrorCode::domain, "need at least 3 grid points");
  const double lo = -0.5 * sigma * sigma - 9.0 * sigma;
  const double hi = 1.5 * sigma * sigma + 9.0 * sigma;
  const double h = (hi - lo) / (points - 1);
  Eigen::VectorXd z(points), g(points);
  for (int j = 0; j < points; ++j) {
    z(j) = lo + h * j;
    const double c = (j == 0 || j == points - 1) ? 0.5 * h : h;
    g(j) = c * norm_pdf(z(j), -0.5 * sigma * sigma, sigma);
  }
  return noise_kernel_from_nodes(sigma, std::move(z), std::move(g));
}

DiscreteNoiseKernel hermite_noise_kernel(double sigma, int points) {
  require(sigma > 0.0, ErrorCode::domain, "sigma must be positive");
  require(points >= 1, ErrorCode::domain, "need at least one node");
  // Golub-Welsch for the probabilists' Hermite weight.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  Eigen::VectorXd z = (-0.5 * sigma * sigma + sigma * eig.eigenvalues().array()).matrix();
  Eigen::VectorXd g = eig.eigenvectors().row(0).array().square().matrix();
  return noise_kernel_from_nodes(sigma, std::move(z), std::move(g));
}

KernelFunctionals kernel_functionals(const DiscreteNoiseKernel& k) {
  KernelFunctionals out;
  out.mean_accept = k.pi_z.dot(k.rho);
  out.inv_accept = k.pi_z.dot(k.rho.cwiseInverse());
  const Eigen::VectorXd d = k.pi_jump.cwiseSqrt();
  Eigen::VectorXd f = k.rho.cwiseInverse();
  f.array() -= k.pi_jump.dot(f);
  const double var = k.pi_jump.dot(f.cwiseProduct(f));
  if (!(var > 0.0)) return out;
  Eigen::MatrixXd s = d.asDiagonal() * k.jump * d.cwiseInverse().asDiagonal();
  s = 0.5 * (s + s.transpose()).eval();
  const Eigen::VectorXd u = d.cwiseProduct(f);
  out.phi1 = u.dot(s * u) / var;
  // (I - S + d d^T) is positive definite; its inverse applied to u gives sum_n S^n u.
  Eigen::MatrixXd a = -s;
  a.diagonal().array() += 1.0;
  a.noalias() += d * d.transpose();
  const Eigen::VectorXd x = a.llt().solve(u);
  out.if_z = 2.0 * u.dot(x) / var - 1.0;
  return out;
}

}  // namespace pmtune
