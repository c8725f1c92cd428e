#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbeam/geometry.hpp"
#include "rbeam/types.hpp"

namespace rbeam {

/// Stacked broadband imaging operator A = [A_lambda1; ...; A_lambdaK].
/// Every entry is a unit-modulus complex exponential; blocks follow the
/// excitation storage order (lambda_max first).
struct ForwardOperator {
  std::vector<CMatrix> blocks;  // K blocks, each M x column_count
  ArrayGeometry geometry;
  ExcitationSpec excitation;

  // scene support metadata (the range profile baked into the phases)
  SceneKind scene_kind = SceneKind::delta_constant_range;
  std::array<int, 2> angular_counts = {1, 1};
  RVector depths;  // delta kinds
  double range_min = 0.0, range_max = 0.0;
  int range_count = 1;

  int block_count() const { return static_cast<int>(blocks.size()); }
  int block_rows() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().rows()); }
  int rows() const { return block_count() * block_rows(); }
  int cols() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().cols()); }

  CMatrix stacked() const;
  CVector apply(const CVector& x) const;
  CVector apply(const RVector& x) const;
};

struct OperatorTooLarge : std::runtime_error {
  OperatorTooLarge(std::size_t estimate, std::size_t cap);
  std::size_t estimated_bytes;
  std::size_t cap_bytes;
};

struct BuildOptions {
  /// Refuse to materialize operators above this memory estimate.
  std::size_t max_bytes = std::size_t{2} * 1024 * 1024 * 1024;
};

ForwardOperator build_operator(const ArrayGeometry& geometry,
                               const ExcitationSpec& excitation, const Scene& scene,
                               const BuildOptions& options = {});

struct NoiseSpec {
  enum class Kind { none, gaussian } kind = Kind::none;
  double input_snr_db = 0.0;
  static NoiseSpec none() { return {}; }
  static NoiseSpec gaussian(double snr_db) { return {Kind::gaussian, snr_db}; }
};

/// Simulated measurements y = A x0 + e with per-wavelength slicing.
struct MeasurementSet {
  CVector y;
  CVector noise;  // the e actually added; empty when noiseless
  std::optional<double> input_snr_db;
  int block_size = 0;
  int block_count = 0;

  Eigen::VectorBlock<const CVector> block(int i) const {
    return y.segment(i * block_size, block_size);
  }
};

MeasurementSet simulate(const ForwardOperator& op, const Scene& scene,
                        const NoiseSpec& noise, std::uint64_t seed);

enum class Precision : std::uint8_t { complex64 = 0, complex128 = 1 };

/// Binary operator container with geometry/excitation hashes in the header.
/// complex128 round-trips exactly.
void save_operator(const ForwardOperator& op, const std::string& path,
                   Precision precision = Precision::complex128);
ForwardOperator load_operator(const std::string& path);

std::uint64_t geometry_hash(const ArrayGeometry& g);
std::uint64_t excitation_hash(const ExcitationSpec& e);

}  // namespace rbeam
