#include "rbeam/sketch.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rbeam/rng.hpp"

namespace rbeam {

namespace {

void check_block_dims(int l, int m, int k) {
  if (l < 1 || m < 1 || l > m)
    throw std::invalid_argument("sketch: need 1 <= l <= M");
  if (k < 1) throw std::invalid_argument("sketch: need K >= 1");
}

}  // namespace

SketchOperator gaussian_code(int l, int m, int k, std::uint64_t seed) {
  check_block_dims(l, m, k);
  SketchOperator s;
  s.kind = SketchKind::gaussian;
  s.rows_per_block = l;
  s.cols_per_block = m;
  s.repeat_count = k;
  s.seed = seed;
  rng::Generator gen(seed);
  s.block = gen.gaussian_matrix(l, m);
  return s;
}

SketchOperator per_wavelength_gaussian(int l, int m, int k, std::uint64_t seed) {
  check_block_dims(l, m, k);
  SketchOperator s;
  s.kind = SketchKind::per_wavelength;
  s.rows_per_block = l;
  s.cols_per_block = m;
  s.repeat_count = k;
  s.seed = seed;
  s.blocks.reserve(k);
  for (int i = 0; i < k; ++i) {
    rng::Generator gen(rng::derive_seed(seed, i));
    s.blocks.push_back(gen.gaussian_matrix(l, m));
  }
  return s;
}

SketchOperator rademacher_code(int l, int m, int k, std::uint64_t seed) {
  check_block_dims(l, m, k);
  SketchOperator s;
  s.kind = SketchKind::rademacher;
  s.rows_per_block = l;
  s.cols_per_block = m;
  s.repeat_count = k;
  s.seed = seed;
  rng::Generator gen(seed);
  s.block.resize(l, m);
  for (int r = 0; r < l; ++r)
    for (int c = 0; c < m; ++c) s.block(r, c) = gen.uniform01() < 0.5 ? -1.0 : 1.0;
  return s;
}

SketchOperator identity_sketch(int m, int k) {
  SketchOperator s;
  s.kind = SketchKind::identity;
  s.rows_per_block = m;
  s.cols_per_block = m;
  s.repeat_count = k;
  s.block = RMatrix::Identity(m, m);
  s.selected.resize(m);
  for (int i = 0; i < m; ++i) s.selected[i] = i;
  return s;
}

namespace {

SketchOperator selection_sketch(SketchKind kind, std::vector<int> selected, int m,
                                int k, std::uint64_t seed) {
  SketchOperator s;
  s.kind = kind;
  s.rows_per_block = static_cast<int>(selected.size());
  s.cols_per_block = m;
  s.repeat_count = k;
  s.seed = seed;
  s.selected = std::move(selected);
  s.block = RMatrix::Zero(s.rows_per_block, m);
  for (int r = 0; r < s.rows_per_block; ++r) s.block(r, s.selected[r]) = 1.0;
  return s;
}

}  // namespace

SketchOperator subsample_mask(int count, const ArrayGeometry& geometry,
                              MaskPattern pattern, int k, std::uint64_t seed,
                              double edge_fraction) {
  const int m = geometry.element_count();
  if (count < 1 || count > m)
    throw std::invalid_argument("subsample_mask: need 1 <= count <= M");
  if (k < 1) throw std::invalid_argument("subsample_mask: need K >= 1");

  rng::Generator gen(seed);
  if (pattern == MaskPattern::random) {
    return selection_sketch(SketchKind::subsample_random,
                            gen.sample_without_replacement(m, count), m, k, seed);
  }

  // edge_center: outermost ring plus a growing central block
  const int n1 = geometry.counts[0];
  const int n2 = geometry.counts[1];
  auto ring_depth = [&](int idx) {
    const int i = idx / n2, j = idx % n2;
    int depth = std::min(i, n1 - 1 - i);
    if (n2 > 1) depth = std::min(depth, std::min(j, n2 - 1 - j));
    return depth;
  };
  auto center_distance = [&](int idx) {
    const int i = idx / n2, j = idx % n2;
    const double c1 = 0.5 * (n1 - 1), c2 = 0.5 * (n2 - 1);
    return std::max(std::abs(i - c1), n2 > 1 ? std::abs(j - c2) : 0.0);
  };

  std::vector<int> edge_pool, center_order(m);
  for (int idx = 0; idx < m; ++idx) {
    if (ring_depth(idx) == 0) edge_pool.push_back(idx);
    center_order[idx] = idx;
  }
  std::sort(center_order.begin(), center_order.end(), [&](int a, int b) {
    return center_distance(a) < center_distance(b) || (center_distance(a) == center_distance(b) && a < b);
  });

  int want_edge = static_cast<int>(std::lround(count * edge_fraction));
  want_edge = std::min(want_edge, static_cast<int>(edge_pool.size()));
  want_edge = std::max(want_edge, count - (m - static_cast<int>(edge_pool.size())));

  std::set<int> chosen;
  // random subset of the ring
  std::vector<int> ring_pick = gen.sample_without_replacement(
      static_cast<int>(edge_pool.size()), want_edge);
  for (int r : ring_pick) chosen.insert(edge_pool[r]);
  // innermost elements first for the center share
  for (int idx : center_order) {
    if (static_cast<int>(chosen.size()) >= count) break;
    if (ring_depth(idx) == 0) continue;
    chosen.insert(idx);
  }
  // exhausted pools: fall back to random fill
  while (static_cast<int>(chosen.size()) < count)
    chosen.insert(static_cast<int>(gen.uniform_int(m)));

  return selection_sketch(SketchKind::subsample_edge_center,
                          std::vector<int>(chosen.begin(), chosen.end()), m, k, seed);
}

CVector apply_sketch(const SketchOperator& sketch, const CVector& y) {
  if (y.size() != sketch.input_size())
    throw std::invalid_argument("apply_sketch: measurement length mismatch");
  const int l = sketch.rows_per_block, m = sketch.cols_per_block;
  CVector z(sketch.output_size());
  for (int i = 0; i < sketch.repeat_count; ++i)
    z.segment(i * l, l).noalias() = sketch.block_for(i) * y.segment(i * m, m);
  return z;
}

CMatrix apply_sketch_blocks(const SketchOperator& sketch,
                            const std::vector<CMatrix>& blocks) {
  if (static_cast<int>(blocks.size()) != sketch.repeat_count)
    throw std::invalid_argument("apply_sketch: block count mismatch");
  const int l = sketch.rows_per_block;
  const auto n = blocks.front().cols();
  CMatrix out(static_cast<Eigen::Index>(l) * sketch.repeat_count, n);
  for (int i = 0; i < sketch.repeat_count; ++i) {
    if (blocks[i].rows() != sketch.cols_per_block || blocks[i].cols() != n)
      throw std::invalid_argument("apply_sketch: block dims mismatch");
    out.middleRows(static_cast<Eigen::Index>(i) * l, l).noalias() =
        sketch.block_for(i) * blocks[i];
  }
  return out;
}

CMatrix apply_sketch(const SketchOperator& sketch, const ForwardOperator& op) {
  return apply_sketch_blocks(sketch, op.blocks);
}

std::string serialize_sketch(const SketchOperator& s) {
  std::ostringstream out;
  out << "rbsketch v1\n";
  out << "kind " << static_cast<int>(s.kind) << "\n";
  out << "l " << s.rows_per_block << "\nM " << s.cols_per_block << "\nK "
      << s.repeat_count << "\n";
  out << "seed " << s.seed << "\n";
  out << "selected " << s.selected.size();
  for (int idx : s.selected) out << " " << idx;
  out << "\n";
  return out.str();
}

SketchOperator deserialize_sketch(const std::string& text) {
  std::istringstream in(text);
  std::string tag, version;
  in >> tag >> version;
  if (tag != "rbsketch" || version != "v1")
    throw std::invalid_argument("deserialize_sketch: bad header");
  int kind_int = 0, l = 0, m = 0, k = 0;
  std::uint64_t seed = 0;
  std::size_t sel_count = 0;
  std::string key;
  std::vector<int> selected;
  while (in >> key) {
    if (key == "kind") in >> kind_int;
    else if (key == "l") in >> l;
    else if (key == "M") in >> m;
    else if (key == "K") in >> k;
    else if (key == "seed") in >> seed;
    else if (key == "selected") {
      in >> sel_count;
      selected.resize(sel_count);
      for (auto& v : selected) in >> v;
    } else {
      throw std::invalid_argument("deserialize_sketch: unknown key '" + key + "'");
    }
  }
  const auto kind = static_cast<SketchKind>(kind_int);
  switch (kind) {
    case SketchKind::gaussian:
      return gaussian_code(l, m, k, seed);
    case SketchKind::per_wavelength:
      return per_wavelength_gaussian(l, m, k, seed);
    case SketchKind::rademacher:
      return rademacher_code(l, m, k, seed);
    case SketchKind::identity:
      return identity_sketch(m, k);
    case SketchKind::subsample_random:
    case SketchKind::subsample_edge_center: {
      SketchOperator s;
      s.kind = kind;
      s.rows_per_block = l;
      s.cols_per_block = m;
      s.repeat_count = k;
      s.seed = seed;
      s.selected = std::move(selected);
      s.block = RMatrix::Zero(l, m);
      for (int r = 0; r < l; ++r) s.block(r, s.selected[r]) = 1.0;
      return s;
    }
  }
  throw std::invalid_argument("deserialize_sketch: unknown kind");
}

}  // namespace rbeam
