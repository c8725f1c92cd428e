#include "rbeam/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace rbeam {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

ArrayGeometry make_array(ArrayKind kind, std::array<int, 2> elements_per_axis,
                         double spacing_m) {
  require(spacing_m > 0.0, "make_array: spacing must be positive");
  require(elements_per_axis[0] >= 1, "make_array: element count must be >= 1");
  if (kind == ArrayKind::linear) {
    elements_per_axis[1] = 1;
  } else {
    require(elements_per_axis[1] >= 1, "make_array: element count must be >= 1");
  }

  ArrayGeometry g;
  g.kind = kind;
  g.counts = elements_per_axis;
  g.spacing = spacing_m;
  const int axes = g.axes();
  g.positions.resize(g.element_count(), axes);
  // axis-0 major ordering, elements centered on the origin
  int row = 0;
  for (int i = 0; i < g.counts[0]; ++i) {
    const double p0 = (i - 0.5 * (g.counts[0] - 1)) * spacing_m;
    for (int j = 0; j < g.counts[1]; ++j, ++row) {
      g.positions(row, 0) = p0;
      if (axes == 2)
        g.positions(row, 1) = (j - 0.5 * (g.counts[1] - 1)) * spacing_m;
    }
  }
  return g;
}

ArrayGeometry make_array(int elements, double spacing_m) {
  return make_array(ArrayKind::linear, {elements, 1}, spacing_m);
}

ExcitationSpec make_excitation(double lambda_min_m, double lambda_max_m, int k,
                               SpacingRule rule) {
  require(lambda_min_m > 0.0, "make_excitation: wavelengths must be positive");
  require(lambda_min_m <= lambda_max_m, "make_excitation: lambda_min > lambda_max");
  require(k >= 1, "make_excitation: need at least one wavelength");
  if (k == 1)
    require(lambda_min_m == lambda_max_m,
            "make_excitation: single wavelength requires lambda_min == lambda_max");

  ExcitationSpec spec;
  spec.rule = rule;
  spec.wavelengths.resize(k);
  if (k == 1) {
    spec.wavelengths[0] = lambda_min_m;
    return spec;
  }
  for (int i = 0; i < k; ++i) {
    const double t = static_cast<double>(i) / (k - 1);
    if (rule == SpacingRule::uniform_in_frequency) {
      // frequencies placed uniformly; stored descending in wavelength
      const double f = 1.0 / lambda_max_m + t * (1.0 / lambda_min_m - 1.0 / lambda_max_m);
      spec.wavelengths[i] = 1.0 / f;
    } else {
      spec.wavelengths[i] = lambda_max_m - t * (lambda_max_m - lambda_min_m);
    }
  }
  spec.wavelengths.front() = lambda_max_m;
  spec.wavelengths.back() = lambda_min_m;
  return spec;
}

namespace {

void validate_scene(const Scene& s) {
  require(s.angular_counts[0] >= 1 && s.angular_counts[1] >= 1,
          "scene: angular grid counts must be >= 1");
  const int pixels = s.pixel_count();
  if (s.kind == SceneKind::slab) {
    require(s.range_count >= 1, "scene: slab needs range_count >= 1");
    require(s.range_min > 0.0 && std::isfinite(s.range_max),
            "scene: slab ranges must be finite and positive");
    require(s.range_min < s.range_max, "scene: require range_min < range_max");
    require(s.reflectivity.size() == pixels * s.range_count,
            "scene: reflectivity size != pixels * range_count");
  } else {
    require(s.reflectivity.size() == pixels,
            "scene: reflectivity size != pixel count");
    require(s.depths.size() == pixels, "scene: depth profile size != pixel count");
    for (int i = 0; i < s.depths.size(); ++i)
      require(std::isfinite(s.depths[i]) && s.depths[i] > 0.0,
              "scene: depths must be finite and positive");
  }
}

}  // namespace

Scene make_scene_constant_range(std::array<int, 2> angular_counts, double r0,
                                RVector reflectivity) {
  Scene s;
  s.kind = SceneKind::delta_constant_range;
  s.angular_counts = angular_counts;
  s.reflectivity = std::move(reflectivity);
  s.depths = RVector::Constant(s.pixel_count(), r0);
  validate_scene(s);
  return s;
}

Scene make_scene_multi_depth(std::array<int, 2> angular_counts, RVector depths,
                             RVector reflectivity) {
  Scene s;
  s.kind = SceneKind::delta_multi_depth;
  s.angular_counts = angular_counts;
  s.reflectivity = std::move(reflectivity);
  s.depths = std::move(depths);
  validate_scene(s);
  return s;
}

Scene make_scene_slab(std::array<int, 2> angular_counts, int range_count,
                      double range_min, double range_max, RVector reflectivity) {
  Scene s;
  s.kind = SceneKind::slab;
  s.angular_counts = angular_counts;
  s.range_count = range_count;
  s.range_min = range_min;
  s.range_max = range_max;
  s.reflectivity = std::move(reflectivity);
  validate_scene(s);
  return s;
}

RVector synthetic_pattern(const std::string& name, std::array<int, 2> angular_counts,
                          double scale) {
  const int n1 = angular_counts[0];
  const int n2 = angular_counts[1];
  require(n1 >= 1 && n2 >= 1, "synthetic_pattern: bad grid");
  RVector img = RVector::Zero(n1 * n2);
  auto tau = [&](int axis, int i) {
    const int n = axis == 0 ? n1 : n2;
    return -0.5 + static_cast<double>(i) / n;
  };
  int idx = 0;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j, ++idx) {
      const double t1 = tau(0, i);
      const double t2 = n2 > 1 ? tau(1, j) : 0.0;
      const double r = std::sqrt(t1 * t1 + t2 * t2);
      if (name == "disc") {
        const double radius = scale > 0 ? scale : 0.2;
        img[idx] = r < radius ? 1.0 : 0.0;
      } else if (name == "rings") {
        const double period = scale > 0 ? scale : 0.12;
        img[idx] = 0.5 * (1.0 + std::cos(kTwoPi * r / period)) * (r < 0.42 ? 1.0 : 0.0);
      } else if (name == "point") {
        img[idx] = (i == n1 / 2 && j == n2 / 2) ? 1.0 : 0.0;
      } else if (name == "gauss") {
        const double sigma = scale > 0 ? scale : 0.16;
        img[idx] = std::exp(-0.5 * r * r / (sigma * sigma));
      } else {
        throw std::invalid_argument("synthetic_pattern: unknown pattern '" + name + "'");
      }
    }
  }
  return img;
}

FourierSampleGrid fourier_grid(const ArrayGeometry& geometry,
                               const ExcitationSpec& excitation) {
  const int m = geometry.element_count();
  const int k = excitation.count();
  const int axes = geometry.axes();
  FourierSampleGrid grid;
  grid.axes = axes;
  grid.samples.resize(m * k, 1 + axes);
  grid.lateral_bound.resize(m * k, axes);
  int row = 0;
  for (int ik = 0; ik < k; ++ik) {
    const double lambda = excitation.wavelengths[ik];
    for (int im = 0; im < m; ++im, ++row) {
      grid.samples(row, 0) = 1.0 / lambda;  // omega_r
      for (int a = 0; a < axes; ++a) {
        grid.samples(row, 1 + a) = 2.0 * geometry.positions(im, a) / lambda;
        grid.lateral_bound(row, a) = geometry.aperture(a) / lambda;
      }
    }
  }
  return grid;
}

}  // namespace rbeam
