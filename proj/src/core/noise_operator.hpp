// SPDX-License-Identifier: Apache-2.0
//
// Finite discretization of the z-chain jump kernel
//   Qz(z, dw) = g(w) min{1, exp(w - z)} dw / rho_z(z).
#pragma once

#include <Eigen/Dense>

namespace pmtune {

struct DiscreteNoiseKernel {
  double sigma = 0.0;
  Eigen::VectorXd z;          // nodes
  Eigen::VectorXd g;          // proposal masses: sum g = 1, sum exp(z) g = 1
  Eigen::MatrixXd jump;       // row-stochastic jump kernel
  Eigen::VectorXd rho;        // acceptance probability per node
  Eigen::VectorXd pi_z;       // exp(z) g
  Eigen::VectorXd pi_jump;    // pi_z * rho / pi_z(rho)
};

// Shifts the nodes so that sum exp(z) g = 1 once g sums to one, then builds the kernel.
DiscreteNoiseKernel noise_kernel_from_nodes(double sigma, Eigen::VectorXd z, Eigen::VectorXd g);

// Uniform grid over [-sigma^2/2 - 9 sigma, 3 sigma^2/2 + 9 sigma] with trapezoid
// weights; the range covers both g and the mass of pi_z/rho_z.
DiscreteNoiseKernel uniform_noise_kernel(double sigma, int points);

// Gauss-Hermite nodes for N(-sigma^2/2, sigma^2).
DiscreteNoiseKernel hermite_noise_kernel(double sigma, int points);

struct KernelFunctionals {
  double mean_accept = 1.0;
  double inv_accept = 1.0;
  double phi1 = 0.0;
  double if_z = 1.0;
};

KernelFunctionals kernel_functionals(const DiscreteNoiseKernel& kernel);

}  // namespace pmtune
