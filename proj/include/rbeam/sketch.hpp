#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbeam/forward.hpp"
#include "rbeam/geometry.hpp"
#include "rbeam/types.hpp"

namespace rbeam {

enum class SketchKind {
  gaussian,
  subsample_random,
  subsample_edge_center,
  rademacher,       // +/-1 codes; not in the measurement-model repertoire, experimental
  per_wavelength,   // distinct gaussian block per wavelength
  identity,
};

enum class MaskPattern { random, edge_center };

/// Repeated-block-diagonal sketching operator: the same l x M block phi on
/// every diagonal block, one per excitation wavelength (per_wavelength kind
/// carries K distinct blocks instead).
struct SketchOperator {
  SketchKind kind = SketchKind::identity;
  int rows_per_block = 0;  // l
  int cols_per_block = 0;  // M
  int repeat_count = 0;    // K
  std::uint64_t seed = 0;
  RMatrix block;                 // phi (all kinds except per_wavelength)
  std::vector<RMatrix> blocks;   // per_wavelength only
  std::vector<int> selected;     // subsample kinds: chosen element indices

  const RMatrix& block_for(int i) const {
    return kind == SketchKind::per_wavelength ? blocks[i] : block;
  }
  int output_size() const { return rows_per_block * repeat_count; }
  int input_size() const { return cols_per_block * repeat_count; }
};

SketchOperator gaussian_code(int l, int m, int k, std::uint64_t seed);
SketchOperator per_wavelength_gaussian(int l, int m, int k, std::uint64_t seed);
SketchOperator rademacher_code(int l, int m, int k, std::uint64_t seed);
SketchOperator identity_sketch(int m, int k);

/// Binary selection mask over array elements, repeated for `k` wavelengths.
/// edge_center splits `count` between the outermost ring and a central block
/// (edge_fraction of the budget goes to the ring), filling any shortfall
/// randomly.
SketchOperator subsample_mask(int count, const ArrayGeometry& geometry,
                              MaskPattern pattern, int k, std::uint64_t seed,
                              double edge_fraction = 0.5);

/// Block-wise application z_lambda = phi y_lambda. Never materializes the
/// full block-diagonal matrix.
CVector apply_sketch(const SketchOperator& sketch, const CVector& y);

/// Sketch an operator: returns the stacked (K*l) x N matrix [phi A_lambda].
CMatrix apply_sketch(const SketchOperator& sketch, const ForwardOperator& op);
CMatrix apply_sketch_blocks(const SketchOperator& sketch,
                            const std::vector<CMatrix>& blocks);

/// Compact replayable description: kind, dims, seed and (for masks) the
/// selected indices. Gaussian blocks are regenerated from the seed.
std::string serialize_sketch(const SketchOperator& sketch);
SketchOperator deserialize_sketch(const std::string& text);

}  // namespace rbeam
