#pragma once

#include <vector>

#include "rbeam/forward.hpp"
#include "rbeam/sketch.hpp"
#include "rbeam/types.hpp"

namespace rbeam {

enum class SolverKind { least_squares, tikhonov, sketched_least_squares, cosamp_depth };

struct ReconResult {
  CVector x;             // solution in the solved system's column space
  double residual_norm = 0.0;
  SolverKind solver = SolverKind::least_squares;
  double delta = 0.0;    // regularization actually used
  double rank_eps = kDefaultRankEps;
  int rank_used = 0;
  double imag_norm = 0.0;  // ||Im x||, should be ~0 for noiseless consistent data
  int iterations = 0;
  bool converged = true;
  std::vector<int> depth_labels;  // cosamp_depth: chosen depth index per pixel

  RVector x_real() const { return x.real(); }
};

/// Minimum-norm least squares via SVD pseudoinverse with relative
/// singular-value threshold eps_rel.
ReconResult least_squares(const CMatrix& a, const CVector& y,
                          double eps_rel = kDefaultRankEps);

/// Tikhonov solve through SVD filter factors sigma/(sigma^2 + delta);
/// delta = 0 degrades to least_squares.
ReconResult tikhonov(const CMatrix& a, const CVector& y, double delta,
                     double eps_rel = kDefaultRankEps);

/// Solves min ||Phi y - Phi A x||^2 (+ delta ||x||^2) using only the
/// sketched system.
ReconResult sketched_least_squares(const SketchOperator& sketch,
                                   const ForwardOperator& op, const CVector& y,
                                   double delta = 0.0,
                                   double eps_rel = kDefaultRankEps);
ReconResult sketched_least_squares(const SketchOperator& sketch,
                                   const std::vector<CMatrix>& blocks,
                                   const CVector& y, double delta = 0.0,
                                   double eps_rel = kDefaultRankEps);

struct CosampOptions {
  int shortlist = 2;      // candidate depths kept per pixel each iteration
  int max_iter = 20;
  double tol = 1e-9;      // relative residual-change stopping threshold
  double rank_eps = kDefaultRankEps;
};

/// Structured CoSaMP over a depth dictionary: per_depth_operators[d] maps
/// per-pixel reflectivity at candidate depth d to the (unsketched)
/// measurements; exactly one depth is active per pixel. `z` holds the
/// sketched measurements. Returns per-pixel reflectivity (x) and the chosen
/// depth label per pixel.
ReconResult cosamp_depth(const std::vector<CMatrix>& per_depth_operators,
                         const SketchOperator& sketch, const CVector& z,
                         const CosampOptions& options = {});

}  // namespace rbeam
