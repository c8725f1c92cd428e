#pragma once

#include <array>
#include <string>
#include <vector>

#include "rbeam/types.hpp"

namespace rbeam {

enum class ArrayKind { linear, planar };
enum class SpacingRule { uniform_in_frequency, uniform_in_wavelength };
enum class SceneKind { delta_constant_range, delta_multi_depth, slab };

/// Uniform linear or planar antenna array, centered at the origin.
/// Positions are element coordinates in meters; the aperture D per axis is
/// the distance between the outermost elements.
struct ArrayGeometry {
  ArrayKind kind = ArrayKind::linear;
  std::array<int, 2> counts = {1, 1};  // elements per axis, counts[1] = 1 when linear
  double spacing = 0.0;                // element pitch in meters
  RMatrix positions;                   // element_count x axes

  int axes() const { return kind == ArrayKind::linear ? 1 : 2; }
  int element_count() const { return counts[0] * counts[1]; }
  double aperture(int axis) const { return (counts[axis] - 1) * spacing; }
};

ArrayGeometry make_array(ArrayKind kind, std::array<int, 2> elements_per_axis,
                         double spacing_m);
/// Linear-array shorthand.
ArrayGeometry make_array(int elements, double spacing_m);

/// Ordered excitation wavelengths, stored descending lambda_max -> lambda_min.
struct ExcitationSpec {
  std::vector<double> wavelengths;
  SpacingRule rule = SpacingRule::uniform_in_frequency;

  int count() const { return static_cast<int>(wavelengths.size()); }
  double lambda_min() const { return wavelengths.back(); }
  double lambda_max() const { return wavelengths.front(); }
};

ExcitationSpec make_excitation(double lambda_min_m, double lambda_max_m, int k,
                               SpacingRule rule = SpacingRule::uniform_in_frequency);

/// Discretized target scene. The angular grid per axis is tau_n = -0.5 + n/N.
/// Ranges are the r coordinate of the propagation phase (roundtrip distance).
///
/// Column layout of the induced linear systems:
///   delta kinds: one column per pixel, axis-0 major.
///   slab: pixel-major within each range slice, range index slowest
///         (column n decodes as d_r = n / pixels, n_pix = n % pixels).
struct Scene {
  SceneKind kind = SceneKind::delta_constant_range;
  std::array<int, 2> angular_counts = {1, 1};
  RVector reflectivity;  // pixel_count (delta) or pixel_count*range_count (slab)
  RVector depths;        // per-pixel r (delta kinds only)
  double range_min = 0.0, range_max = 0.0;  // slab bounds
  int range_count = 1;

  int axes() const { return angular_counts[1] > 1 ? 2 : 1; }
  int pixel_count() const { return angular_counts[0] * angular_counts[1]; }
  int column_count() const {
    return kind == SceneKind::slab ? pixel_count() * range_count : pixel_count();
  }
  /// tau coordinate of pixel index along one axis.
  double tau(int axis, int index) const {
    return -0.5 + static_cast<double>(index) / angular_counts[axis];
  }
};

Scene make_scene_constant_range(std::array<int, 2> angular_counts, double r0,
                                RVector reflectivity);
Scene make_scene_multi_depth(std::array<int, 2> angular_counts, RVector depths,
                             RVector reflectivity);
Scene make_scene_slab(std::array<int, 2> angular_counts, int range_count,
                      double range_min, double range_max, RVector reflectivity);

/// Named synthetic reflectivity patterns: "disc", "rings", "point", "gauss".
/// `scale` is the pattern size in tau units; 0 picks a per-pattern default.
RVector synthetic_pattern(const std::string& name, std::array<int, 2> angular_counts,
                          double scale = 0.0);

/// Pseudopolar Fourier sample coordinates induced by an array and a
/// wavelength set: one (omega_r, omega_tau per axis) row per
/// (element, wavelength) pair, wavelength-major in excitation order.
struct FourierSampleGrid {
  RMatrix samples;  // (M*K) x (1 + axes): [omega_r, omega_tau...]
  int axes = 1;
  RMatrix lateral_bound;  // (M*K) x axes: |omega_tau| bound D/lambda per axis
};

FourierSampleGrid fourier_grid(const ArrayGeometry& geometry,
                               const ExcitationSpec& excitation);

}  // namespace rbeam
