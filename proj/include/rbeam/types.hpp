#pragma once

#include <Eigen/Core>
#include <complex>

namespace rbeam {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Relative singular-value threshold used by the solvers unless overridden.
inline constexpr double kDefaultRankEps = 1e-10;

}  // namespace rbeam
