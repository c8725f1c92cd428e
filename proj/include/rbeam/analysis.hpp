#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rbeam/forward.hpp"
#include "rbeam/types.hpp"

namespace rbeam {

/// Full singular spectrum, descending.
RVector singular_spectrum(const CMatrix& a);
RVector singular_spectrum(const RMatrix& a);

/// Count of singular values above eps_rel * sigma_max. Zero spectrum -> 0.
int numerical_rank(const RVector& spectrum, double eps_rel = kDefaultRankEps);

/// Count of singular values above sigma_max / sqrt(2) — the half-energy
/// convention used for degrees-of-freedom readings of concentration spectra.
int effective_dimension(const RVector& spectrum);

/// Spectral norm via SVD.
double spectral_norm(const CMatrix& a);

/// Greedy block factorization A_i = sum_{j<=i} C_ij V_j^H with orthonormal V
/// columns: V_1 spans row(A_1), V_i spans the part of row(A_i) orthogonal to
/// the previous spans. d_i is the innovation added by block i.
struct BlockQRFactorization {
  CMatrix coefficients;    // stacked C, (sum rows_i) x r, block-lower-triangular
  CMatrix basis;           // V, n x r, orthonormal columns
  std::vector<int> d;      // innovation ranks, one per block
  std::vector<int> row_offsets;  // start row of each block inside `coefficients`

  int rank() const;
  /// Column range [start, size) of block j inside the factorization.
  std::pair<int, int> basis_span(int j) const;
};

BlockQRFactorization block_qr(const std::vector<CMatrix>& blocks,
                              double eps_rel = kDefaultRankEps);

/// ||(I - P_{Y*}) A*||: spectral norm of A's row content outside row(Y).
double capture_error(const CMatrix& a, const CMatrix& y,
                     double eps_rel = kDefaultRankEps);

enum class Theorem { innovation_bound, two_block, many_block };

struct ConditionReport {
  Theorem theorem;
  bool pass = false;
  std::string summary;

  // innovation_bound (theorem 1)
  std::vector<int> d;
  int d0 = 0;
  int sketch_l = 0;
  double empirical_capture_error = -1.0;

  // two_block (theorem 2)
  CVector eigenvalues;
  std::vector<std::pair<double, int>> real_clusters;  // (value, multiplicity)
  int max_real_multiplicity = 0;
  double containment_error = 0.0;

  // many_block (theorem 3)
  RVector sigma_min_samples;  // smallest/largest singular value per trial
  int passing_trials = 0;
  std::vector<int> trial_widths;  // per-block V_S rows in the stacked test

  double tolerance = 0.0;
};

struct PreconditionFailed : std::runtime_error {
  PreconditionFailed(const std::string& what, double measured)
      : std::runtime_error(what), measured_error(measured) {}
  double measured_error;
};

/// Theorem 1 checker: l >= d0 = max_i d_i is sufficient for a gaussian RBD
/// sketch to capture the full row space. The verdict is the inequality; an
/// empirical capture error with a fresh sketch is attached (the condition is
/// sufficient, not necessary, so a failing verdict may still capture).
ConditionReport check_theorem1(const std::vector<CMatrix>& blocks, int l,
                               std::uint64_t seed, double eps_rel = kDefaultRankEps);

/// Theorem 2 checker on a nested pair: forms U = A1 A2^T and inspects the
/// multiplicity of clustered real eigenvalues; pass iff no real cluster
/// exceeds n/2. Containment row(A1) within row(A2) is verified first against
/// `containment_tol` (relative); discretized imaging pairs need a loose one.
ConditionReport check_theorem2(const CMatrix& a1, const CMatrix& a2,
                               double cluster_tol = 1e-6,
                               double containment_tol = 1e-8);

/// Theorem 3 checker: samples random orthonormal V_S and tests whether the
/// stacked [V_S A_1; ...; V_S A_K] is full row rank. Any passing trial
/// certifies the condition; failures are evidence, not proof, against it.
/// l = 0 derives per-block widths from rank r: r mod K blocks get
/// floor(r/K)+1 rows, the rest floor(r/K), nested index sets.
ConditionReport check_theorem3(const std::vector<CMatrix>& blocks, int l, int trials,
                               std::uint64_t seed, double eps_rel = kDefaultRankEps);

/// Rank increments of the cumulative stacks, longest wavelength first.
std::vector<int> nestedness_profile(const ForwardOperator& op,
                                    double eps_rel = kDefaultRankEps);

/// Top of the singular spectrum via a randomized range finder (power
/// iteration + projection). Returns at most sketch_size values; used for
/// full-scale degrees-of-freedom studies where an exact SVD is too slow.
RVector randomized_spectrum(const std::vector<CMatrix>& blocks, int sketch_size,
                            int power_iters, std::uint64_t seed);

}  // namespace rbeam
