#include "rbeam/forward.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "rbeam/rng.hpp"

namespace rbeam {

CMatrix ForwardOperator::stacked() const {
  CMatrix a(rows(), cols());
  for (int i = 0; i < block_count(); ++i)
    a.middleRows(i * block_rows(), block_rows()) = blocks[i];
  return a;
}

CVector ForwardOperator::apply(const CVector& x) const {
  CVector y(rows());
  for (int i = 0; i < block_count(); ++i)
    y.segment(i * block_rows(), block_rows()).noalias() = blocks[i] * x;
  return y;
}

CVector ForwardOperator::apply(const RVector& x) const {
  return apply(CVector(x.cast<Complex>()));
}

OperatorTooLarge::OperatorTooLarge(std::size_t estimate, std::size_t cap)
    : std::runtime_error("operator too large: estimated " + std::to_string(estimate) +
                         " bytes exceeds cap of " + std::to_string(cap) + " bytes"),
      estimated_bytes(estimate),
      cap_bytes(cap) {}

ForwardOperator build_operator(const ArrayGeometry& geometry,
                               const ExcitationSpec& excitation, const Scene& scene,
                               const BuildOptions& options) {
  if (geometry.axes() != scene.axes() && !(geometry.axes() == 2 && scene.axes() == 1))
    throw std::invalid_argument("build_operator: 2D scene requires a planar array");

  const int m = geometry.element_count();
  const int k = excitation.count();
  const int n_cols = scene.column_count();
  const std::size_t estimate =
      static_cast<std::size_t>(m) * k * n_cols * sizeof(Complex);
  if (estimate > options.max_bytes) throw OperatorTooLarge(estimate, options.max_bytes);

  ForwardOperator op;
  op.geometry = geometry;
  op.excitation = excitation;
  op.scene_kind = scene.kind;
  op.angular_counts = scene.angular_counts;
  op.depths = scene.depths;
  op.range_min = scene.range_min;
  op.range_max = scene.range_max;
  op.range_count = scene.range_count;

  const int pixels = scene.pixel_count();
  const int n2 = scene.angular_counts[1];

  // lateral phase argument 2 * <d_m, tau_n>, shared across wavelengths
  RMatrix lateral(m, pixels);
  for (int im = 0; im < m; ++im) {
    for (int p = 0; p < pixels; ++p) {
      const double t1 = scene.tau(0, p / n2);
      double acc = geometry.positions(im, 0) * t1;
      if (geometry.axes() == 2 && n2 > 1) {
        const double t2 = scene.tau(1, p % n2);
        acc += geometry.positions(im, 1) * t2;
      }
      lateral(im, p) = 2.0 * acc;
    }
  }

  op.blocks.reserve(k);
  for (int ik = 0; ik < k; ++ik) {
    const double lambda = excitation.wavelengths[ik];
    CMatrix block(m, n_cols);
    if (scene.kind == SceneKind::slab) {
      const double step = (scene.range_max - scene.range_min) / scene.range_count;
#pragma omp parallel for schedule(static)
      for (int n = 0; n < n_cols; ++n) {
        const int d_r = n / pixels;    // range index, slowest
        const int n_pix = n % pixels;  // pixel index within the slice
        const double range_term = scene.range_min + d_r * step;
        for (int im = 0; im < m; ++im) {
          const double phase = -kTwoPi * (lateral(im, n_pix) + range_term) / lambda;
          block(im, n) = Complex(std::cos(phase), std::sin(phase));
        }
      }
    } else {
#pragma omp parallel for schedule(static)
      for (int n = 0; n < n_cols; ++n) {
        const double range_term = scene.depths[n];
        for (int im = 0; im < m; ++im) {
          const double phase = -kTwoPi * (lateral(im, n) + range_term) / lambda;
          block(im, n) = Complex(std::cos(phase), std::sin(phase));
        }
      }
    }
    op.blocks.push_back(std::move(block));
  }
  return op;
}

MeasurementSet simulate(const ForwardOperator& op, const Scene& scene,
                        const NoiseSpec& noise, std::uint64_t seed) {
  if (scene.column_count() != op.cols())
    throw std::invalid_argument("simulate: scene does not match operator columns");

  MeasurementSet ms;
  ms.block_size = op.block_rows();
  ms.block_count = op.block_count();
  ms.y = op.apply(scene.reflectivity);

  if (noise.kind == NoiseSpec::Kind::gaussian) {
    rng::Generator gen(seed);
    CVector e = gen.complex_gaussian_vector(op.rows());
    // i.i.d. complex gaussian, variance set from the requested input SNR
    const double signal_power = ms.y.squaredNorm();
    const double sigma2 =
        signal_power * std::pow(10.0, -noise.input_snr_db / 10.0) / op.rows();
    e *= std::sqrt(sigma2);
    ms.y += e;
    ms.noise = std::move(e);
    ms.input_snr_db = noise.input_snr_db;
  }
  return ms;
}

namespace {

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("operator file truncated");
  return v;
}

}  // namespace

std::uint64_t geometry_hash(const ArrayGeometry& g) {
  std::uint64_t h = kFnvOffset;
  const auto kind = static_cast<std::uint8_t>(g.kind);
  h = fnv1a(&kind, 1, h);
  h = fnv1a(g.counts.data(), sizeof(g.counts), h);
  h = fnv1a(&g.spacing, sizeof(double), h);
  return h;
}

std::uint64_t excitation_hash(const ExcitationSpec& e) {
  std::uint64_t h = kFnvOffset;
  const auto rule = static_cast<std::uint8_t>(e.rule);
  h = fnv1a(&rule, 1, h);
  h = fnv1a(e.wavelengths.data(), e.wavelengths.size() * sizeof(double), h);
  return h;
}

void save_operator(const ForwardOperator& op, const std::string& path,
                   Precision precision) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");

  out.write("RBOP", 4);
  write_pod<std::uint32_t>(out, 1);  // version
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(precision));
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(op.scene_kind));
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(op.geometry.kind));
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(op.excitation.rule));
  write_pod<std::int32_t>(out, op.block_count());
  write_pod<std::int32_t>(out, op.block_rows());
  write_pod<std::int32_t>(out, op.cols());
  write_pod<std::int32_t>(out, op.angular_counts[0]);
  write_pod<std::int32_t>(out, op.angular_counts[1]);
  write_pod<std::int32_t>(out, op.range_count);
  write_pod<double>(out, op.range_min);
  write_pod<double>(out, op.range_max);
  write_pod<std::int32_t>(out, op.geometry.counts[0]);
  write_pod<std::int32_t>(out, op.geometry.counts[1]);
  write_pod<double>(out, op.geometry.spacing);
  write_pod<std::uint64_t>(out, geometry_hash(op.geometry));
  write_pod<std::uint64_t>(out, excitation_hash(op.excitation));
  for (double l : op.excitation.wavelengths) write_pod<double>(out, l);
  write_pod<std::int64_t>(out, op.depths.size());
  out.write(reinterpret_cast<const char*>(op.depths.data()),
            op.depths.size() * sizeof(double));

  // row-major payload, block order
  for (const CMatrix& b : op.blocks) {
    for (int r = 0; r < b.rows(); ++r) {
      for (int c = 0; c < b.cols(); ++c) {
        if (precision == Precision::complex128) {
          write_pod<double>(out, b(r, c).real());
          write_pod<double>(out, b(r, c).imag());
        } else {
          write_pod<float>(out, static_cast<float>(b(r, c).real()));
          write_pod<float>(out, static_cast<float>(b(r, c).imag()));
        }
      }
    }
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

ForwardOperator load_operator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RBOP", 4) != 0)
    throw std::runtime_error("'" + path + "' is not an operator container");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != 1) throw std::runtime_error("unsupported operator container version");

  const auto precision = static_cast<Precision>(read_pod<std::uint8_t>(in));
  ForwardOperator op;
  op.scene_kind = static_cast<SceneKind>(read_pod<std::uint8_t>(in));
  op.geometry.kind = static_cast<ArrayKind>(read_pod<std::uint8_t>(in));
  op.excitation.rule = static_cast<SpacingRule>(read_pod<std::uint8_t>(in));
  const auto k = read_pod<std::int32_t>(in);
  const auto m = read_pod<std::int32_t>(in);
  const auto n_cols = read_pod<std::int32_t>(in);
  op.angular_counts[0] = read_pod<std::int32_t>(in);
  op.angular_counts[1] = read_pod<std::int32_t>(in);
  op.range_count = read_pod<std::int32_t>(in);
  op.range_min = read_pod<double>(in);
  op.range_max = read_pod<double>(in);
  op.geometry.counts[0] = read_pod<std::int32_t>(in);
  op.geometry.counts[1] = read_pod<std::int32_t>(in);
  op.geometry.spacing = read_pod<double>(in);
  const auto stored_geom_hash = read_pod<std::uint64_t>(in);
  const auto stored_excit_hash = read_pod<std::uint64_t>(in);
  op.excitation.wavelengths.resize(k);
  for (int i = 0; i < k; ++i) op.excitation.wavelengths[i] = read_pod<double>(in);
  const auto depth_size = read_pod<std::int64_t>(in);
  op.depths.resize(depth_size);
  in.read(reinterpret_cast<char*>(op.depths.data()), depth_size * sizeof(double));

  op.geometry = make_array(op.geometry.kind, op.geometry.counts, op.geometry.spacing);
  if (geometry_hash(op.geometry) != stored_geom_hash)
    throw std::runtime_error("operator container geometry hash mismatch");
  if (excitation_hash(op.excitation) != stored_excit_hash)
    throw std::runtime_error("operator container excitation hash mismatch");

  op.blocks.resize(k);
  for (int ib = 0; ib < k; ++ib) {
    CMatrix b(m, n_cols);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < n_cols; ++c) {
        double re, im;
        if (precision == Precision::complex128) {
          re = read_pod<double>(in);
          im = read_pod<double>(in);
        } else {
          re = read_pod<float>(in);
          im = read_pod<float>(in);
        }
        b(r, c) = Complex(re, im);
      }
    }
    op.blocks[ib] = std::move(b);
  }
  return op;
}

}  // namespace rbeam
