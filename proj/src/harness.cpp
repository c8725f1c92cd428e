#include "rbeam/harness.hpp"

#include <Eigen/SVD>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rbeam/analysis.hpp"
#include "rbeam/io.hpp"
#include "rbeam/rng.hpp"

namespace rbeam {

namespace fs = std::filesystem;
using nlohmann::json;

double relative_error(const CVector& x_ref, const CVector& x_hat) {
  if (x_ref.size() != x_hat.size())
    throw std::invalid_argument("relative_error: length mismatch");
  const double ref = x_ref.squaredNorm();
  if (ref == 0.0) throw std::invalid_argument("relative_error: zero reference");
  return (x_ref - x_hat).squaredNorm() / ref;
}

double relative_error(const RVector& x_ref, const RVector& x_hat) {
  return relative_error(CVector(x_ref.cast<Complex>()), CVector(x_hat.cast<Complex>()));
}

TikhonovPseudoinverse::TikhonovPseudoinverse(const CMatrix& s, double eps_rel) {
  Eigen::BDCSVD<CMatrix> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& sv = svd.singularValues();
  int rank = 0;
  while (rank < sv.size() && sv[rank] > eps_rel * sv[0]) ++rank;
  u_ = svd.matrixU().leftCols(rank);
  v_ = svd.matrixV().leftCols(rank);
  sigma_ = sv.head(rank);
}

CVector TikhonovPseudoinverse::apply(const CVector& v, double delta) const {
  CVector coeffs = u_.adjoint() * v;
  for (int i = 0; i < sigma_.size(); ++i) {
    const double s = sigma_[i];
    coeffs[i] *= delta > 0.0 ? s / (s * s + delta) : 1.0 / s;
  }
  return v_ * coeffs;
}

double output_snr_db(const TikhonovPseudoinverse& pinv, const CVector& sketched_signal,
                     const CVector& sketched_noise, double delta) {
  const double num = pinv.apply(sketched_signal, delta).norm();
  const double den = pinv.apply(sketched_noise, delta).norm();
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(num / den);
}

double output_snr_db(const ForwardOperator& op, const SketchOperator& sketch,
                     const RVector& x, const CVector& e, double delta) {
  const CMatrix sketched = apply_sketch(sketch, op);
  const TikhonovPseudoinverse pinv(sketched);
  const CVector zsig = apply_sketch(sketch, op.apply(x));
  const CVector znoise = apply_sketch(sketch, e);
  return output_snr_db(pinv, zsig, znoise, delta);
}

DeltaTune tune_delta(const TikhonovPseudoinverse& pinv, const CVector& sketched_signal,
                     const CVector& sketched_noise, const CVector& x_ls_ref,
                     double error_target, TuneObjective objective,
                     double target_snr_db) {
  constexpr int kPointsPerDecade = 25;
  constexpr double kLowExponent = -6.0, kHighExponent = 2.0;
  const double smax2 = pinv.sigma_max() * pinv.sigma_max();
  const int points =
      static_cast<int>((kHighExponent - kLowExponent) * kPointsPerDecade) + 1;

  DeltaTune best;
  double best_score = std::numeric_limits<double>::lowest();
  for (int i = 0; i < points; ++i) {
    const double exponent =
        kLowExponent + (kHighExponent - kLowExponent) * i / (points - 1);
    const double delta = smax2 * std::pow(10.0, exponent);
    const CVector xs = pinv.apply(sketched_signal, delta);
    const double err = relative_error(x_ls_ref, xs);
    if (err > error_target) continue;
    const double den = pinv.apply(sketched_noise, delta).norm();
    const double snr = den == 0.0 ? std::numeric_limits<double>::infinity()
                                  : 20.0 * std::log10(xs.norm() / den);
    const double score =
        objective == TuneObjective::maximize_snr ? snr : -std::abs(snr - target_snr_db);
    if (!best.feasible || score > best_score) {
      best = {true, delta, snr, err};
      best_score = score;
    }
  }
  return best;
}

RVector banded_depth_map(std::array<int, 2> angular_counts,
                         const std::vector<double>& band_depths) {
  if (band_depths.empty()) throw std::invalid_argument("banded_depth_map: no depths");
  const int n1 = angular_counts[0], n2 = angular_counts[1];
  RVector depths(n1 * n2);
  const int bands = static_cast<int>(band_depths.size());
  for (int i = 0; i < n1; ++i) {
    const int band = std::min(i * bands / n1, bands - 1);
    for (int j = 0; j < n2; ++j) depths[i * n2 + j] = band_depths[band];
  }
  return depths;
}

ArrayGeometry geometry_from_config(const json& config) {
  const auto& g = config.at("geometry");
  const std::string kind = g.value("kind", "planar");
  const double spacing = g.at("spacing").get<double>();
  if (kind == "linear") {
    int count = g.at("elements").is_array() ? g.at("elements")[0].get<int>()
                                            : g.at("elements").get<int>();
    return make_array(count, spacing);
  }
  if (kind != "planar") throw std::invalid_argument("geometry.kind must be linear|planar");
  const auto elems = g.at("elements");
  return make_array(ArrayKind::planar, {elems[0].get<int>(), elems[1].get<int>()},
                    spacing);
}

ExcitationSpec excitation_from_config(const json& config) {
  const auto& e = config.at("excitation");
  const std::string rule_name = e.value("rule", "uniform_in_frequency");
  const SpacingRule rule = rule_name == "uniform_in_wavelength"
                               ? SpacingRule::uniform_in_wavelength
                               : SpacingRule::uniform_in_frequency;
  return make_excitation(e.at("lambda_min").get<double>(),
                         e.at("lambda_max").get<double>(), e.at("count").get<int>(),
                         rule);
}

namespace {

RVector reflectivity_from_config(const json& scene, std::array<int, 2> angular,
                                 const std::string& base_dir, int slices = 1) {
  const int pixels = angular[0] * angular[1];
  RVector base;
  if (scene.contains("image")) {
    fs::path p = scene.at("image").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    RMatrix img = io::load_pgm(p.string());
    if (img.rows() != angular[0] || img.cols() != angular[1])
      throw std::invalid_argument("scene image dimensions do not match angular grid");
    base.resize(pixels);
    for (int i = 0; i < angular[0]; ++i)
      for (int j = 0; j < angular[1]; ++j) base[i * angular[1] + j] = img(i, j);
  } else if (scene.contains("csv")) {
    fs::path p = scene.at("csv").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    RMatrix grid = io::load_csv(p.string());
    if (grid.size() != pixels * slices)
      throw std::invalid_argument("scene csv size does not match grid");
    base.resize(grid.size());
    int idx = 0;
    for (int r = 0; r < grid.rows(); ++r)
      for (int c = 0; c < grid.cols(); ++c) base[idx++] = grid(r, c);
    return base;
  } else {
    base = synthetic_pattern(scene.value("pattern", "disc"), angular,
                             scene.value("pattern_scale", 0.0));
  }
  if (slices == 1) return base;
  // replicate the pattern across range slices, scaled down with depth
  RVector out(pixels * slices);
  for (int s = 0; s < slices; ++s)
    out.segment(static_cast<Eigen::Index>(s) * pixels, pixels) =
        base / static_cast<double>(1 + s);
  return out;
}

}  // namespace

Scene scene_from_config(const json& config, const std::string& base_dir) {
  const auto& s = config.at("scene");
  const auto ang = s.at("angular");
  std::array<int, 2> angular
      {ang[0].get<int>(), ang.size() > 1 ? ang[1].get<int>() : 1};
  const std::string kind = s.value("kind", "delta_constant_range");
  if (kind == "delta_constant_range") {
    return make_scene_constant_range(angular, s.at("range").get<double>(),
                                     reflectivity_from_config(s, angular, base_dir));
  }
  if (kind == "delta_multi_depth") {
    RVector depths;
    if (s.contains("depth_bands")) {
      depths = banded_depth_map(angular, s.at("depth_bands").get<std::vector<double>>());
    } else {
      fs::path p = s.at("depths_csv").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
      const RMatrix grid = io::load_csv(p.string());
      if (grid.size() != angular[0] * angular[1])
        throw std::invalid_argument("depths_csv size does not match grid");
      depths.resize(grid.size());
      int idx = 0;
      for (int r = 0; r < grid.rows(); ++r)
        for (int c = 0; c < grid.cols(); ++c) depths[idx++] = grid(r, c);
    }
    return make_scene_multi_depth(angular, depths,
                                  reflectivity_from_config(s, angular, base_dir));
  }
  if (kind == "slab") {
    const int slices = s.at("range_count").get<int>();
    return make_scene_slab(angular, slices, s.at("range_min").get<double>(),
                           s.at("range_max").get<double>(),
                           reflectivity_from_config(s, angular, base_dir, slices));
  }
  throw std::invalid_argument("scene.kind must be delta_constant_range|delta_multi_depth|slab");
}

std::uint64_t config_hash(const json& config) {
  const std::string dump = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

SketchOperator sketch_from_config(const json& sk, double sweep_value,
                                  const ArrayGeometry& geometry, int k,
                                  std::uint64_t seed) {
  const std::string kind = sk.value("kind", "gaussian");
  const int m = geometry.element_count();
  const int count = static_cast<int>(sweep_value);
  if (kind == "gaussian") return gaussian_code(count, m, k, seed);
  if (kind == "per_wavelength") return per_wavelength_gaussian(count, m, k, seed);
  if (kind == "rademacher") return rademacher_code(count, m, k, seed);
  if (kind == "identity") return identity_sketch(m, k);
  if (kind == "subsample_random")
    return subsample_mask(count, geometry, MaskPattern::random, k, seed);
  if (kind == "subsample_edge_center")
    return subsample_mask(count, geometry, MaskPattern::edge_center, k, seed,
                          sk.value("edge_fraction", 0.5));
  throw std::invalid_argument("sketch.kind unknown: " + kind);
}

RMatrix reshape_to_image(const RVector& v, std::array<int, 2> angular) {
  RMatrix img(angular[0], std::max(angular[1], 1));
  for (int i = 0; i < angular[0]; ++i)
    for (int j = 0; j < img.cols(); ++j) img(i, j) = v[i * img.cols() + j];
  return img;
}

double resolve_delta_full(const json& solver, double sigma_max) {
  if (!solver.contains("delta_full")) return 1e-3 * sigma_max * sigma_max;
  const auto& df = solver.at("delta_full");
  if (df.is_number()) return df.get<double>();
  const std::string text = df.get<std::string>();
  const std::string prefix = "loading:";
  if (text.rfind(prefix, 0) == 0)
    return std::stod(text.substr(prefix.size())) * sigma_max * sigma_max;
  throw std::invalid_argument("solver.delta_full must be a number or 'loading:<rel>'");
}

}  // namespace

ResultBundle run_experiment(const json& config, const std::string& out_dir) {
  const std::string scenario = config.at("scenario").get<std::string>();
  const std::uint64_t master_seed = config.value("seed", std::uint64_t{1});
  const json solver = config.value("solver", json::object());
  const double rank_eps = solver.value("rank_eps", kDefaultRankEps);
  const json sweep_json = config.at("sketch").at("sweep");
  if (!sweep_json.is_array() || sweep_json.empty())
    throw std::invalid_argument("sketch.sweep must be a non-empty array");

  fs::create_directories(out_dir);
  ResultBundle bundle;
  bundle.manifest["tool"] = kToolVersion;
  bundle.manifest["config"] = config;
  bundle.manifest["config_hash"] = config_hash(config);
  bundle.manifest["seed"] = master_seed;

  const ArrayGeometry geometry = geometry_from_config(config);
  const ExcitationSpec excitation = excitation_from_config(config);
  const Scene scene = scene_from_config(config, config.value("base_dir", ""));
  const ForwardOperator op = build_operator(geometry, excitation, scene);
  const int k = excitation.count();

  const json noise_json = config.value("noise", json{{"kind", "none"}});
  const bool noisy = noise_json.value("kind", "none") == "gaussian";
  const NoiseSpec noise = noisy
      ? NoiseSpec::gaussian(noise_json.at("input_snr_db").get<double>())
      : NoiseSpec::none();

  // noiseless signal path and (optionally) the noise record
  const MeasurementSet clean = simulate(op, scene, NoiseSpec::none(),
                                        rng::derive_seed(master_seed, 0xc1ea));
  MeasurementSet measured = clean;
  if (noisy) measured = simulate(op, scene, noise, rng::derive_seed(master_seed, 0x015e));

  // depth dictionary for the unknown-profile scenario
  std::vector<CMatrix> depth_ops;
  std::vector<double> depth_candidates;
  if (scenario == "multi_depth_unknown") {
    depth_candidates =
        config.at("depth_dictionary").at("candidates").get<std::vector<double>>();
    for (double depth : depth_candidates) {
      Scene candidate = make_scene_constant_range(
          scene.angular_counts, depth, RVector::Ones(scene.pixel_count()));
      depth_ops.push_back(build_operator(geometry, excitation, candidate).stacked());
    }
  }

  // full-data baseline
  const CMatrix stacked = op.stacked();
  const ReconResult full_ls = least_squares(stacked, clean.y, rank_eps);
  const double error_target = solver.value("error_target", 1e-3);

  std::optional<TikhonovPseudoinverse> full_pinv;
  double baseline_snr = std::numeric_limits<double>::quiet_NaN();
  double delta_full = 0.0;
  if (noisy) {
    full_pinv.emplace(stacked, rank_eps);
    delta_full = resolve_delta_full(solver, full_pinv->sigma_max());
    baseline_snr = output_snr_db(*full_pinv, clean.y, measured.noise, delta_full);
    bundle.manifest["baseline_output_snr_db"] = baseline_snr;
    bundle.manifest["delta_full"] = delta_full;
  }

  const bool save_images = config.value("output", json::object()).value("images", true);
  const bool save_vectors = config.value("output", json::object()).value("vectors", false);
  const bool save_spectra = config.value("output", json::object()).value("spectra", true);

  if (save_spectra) {
    // normalized spectra of the stack and of the shortest-wavelength block
    const RVector full_spec = singular_spectrum(stacked);
    const RVector min_spec = singular_spectrum(op.blocks.back());
    RMatrix table(full_spec.size(), 2);
    table.col(0) = full_spec / full_spec[0];
    table.col(1) = RVector::Zero(full_spec.size());
    table.col(1).head(min_spec.size()) = min_spec / min_spec[0];
    io::save_csv(table, out_dir + "/spectra.csv");
    bundle.written_files.push_back(out_dir + "/spectra.csv");
  }

  for (std::size_t point = 0; point < sweep_json.size(); ++point) {
    RunRecord rec;
    rec.sweep_value = sweep_json[point].get<double>();
    rec.seed = rng::derive_seed(master_seed, 0x5eed + point);
    rec.label = (scenario == "subsample" ? "elements=" : "codes=") +
                std::to_string(static_cast<int>(rec.sweep_value));
    const auto start = std::chrono::steady_clock::now();
    try {
      const SketchOperator sketch = sketch_from_config(
          config.at("sketch"), rec.sweep_value, geometry, k, rec.seed);

      RVector recon_image;
      if (scenario == "multi_depth_unknown") {
        CosampOptions opts;
        opts.rank_eps = rank_eps;
        opts.shortlist = config.value("cosamp", json::object()).value("shortlist", 2);
        opts.max_iter = config.value("cosamp", json::object()).value("max_iter", 20);
        const CVector z = apply_sketch(sketch, measured.y);
        const ReconResult recon = cosamp_depth(depth_ops, sketch, z, opts);
        rec.residual_norm = recon.residual_norm;
        rec.relative_error = relative_error(full_ls.x, recon.x);
        int correct = 0;
        for (int p = 0; p < scene.pixel_count(); ++p)
          if (std::abs(depth_candidates[recon.depth_labels[p]] - scene.depths[p]) <
              1e-9)
            ++correct;
        rec.label_accuracy = static_cast<double>(correct) / scene.pixel_count();
        recon_image = recon.x_real();
      } else if (noisy) {
        const CMatrix sketched = apply_sketch(sketch, op);
        const TikhonovPseudoinverse pinv(sketched, rank_eps);
        const CVector zsig = apply_sketch(sketch, clean.y);
        const CVector znoise = apply_sketch(sketch, measured.noise);
        const TuneObjective objective = solver.value("tune", "match") == "max"
                                            ? TuneObjective::maximize_snr
                                            : TuneObjective::match_snr;
        const DeltaTune tuned = tune_delta(pinv, zsig, znoise, full_ls.x, error_target,
                                           objective, baseline_snr);
        if (!tuned.feasible)
          throw std::runtime_error("no feasible regularization weight on the grid");
        rec.delta_used = tuned.delta;
        rec.signal_error = tuned.signal_error;
        rec.output_snr_db = tuned.snr_db;
        rec.baseline_snr_db = baseline_snr;
        const CVector xhat = pinv.apply(apply_sketch(sketch, measured.y), tuned.delta);
        rec.relative_error = relative_error(full_ls.x, xhat);
        recon_image = xhat.real();
      } else {
        const ReconResult recon = sketched_least_squares(
            sketch, op, measured.y, solver.value("delta", 0.0), rank_eps);
        rec.residual_norm = recon.residual_norm;
        rec.relative_error = relative_error(full_ls.x, recon.x);
        recon_image = recon.x_real();
      }

      if (recon_image.size() == scene.pixel_count()) {
        const std::string stem = out_dir + "/recon_" + std::to_string(point);
        if (save_images && scene.angular_counts[1] > 1) {
          io::save_pgm(reshape_to_image(recon_image, scene.angular_counts),
                       stem + ".pgm");
          bundle.written_files.push_back(stem + ".pgm");
        }
        if (save_vectors) {
          io::save_csv(recon_image, stem + ".csv");
          bundle.written_files.push_back(stem + ".csv");
        }
      }
    } catch (const std::exception& ex) {
      rec.failed = true;
      rec.error = ex.what();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                      .count();
    bundle.runs.push_back(std::move(rec));
  }

  // results table, one row per sweep point. timings go to a separate file
  // so the metrics reproduce bit-exactly.
  std::ostringstream csv, timings;
  csv << "label,sweep,relative_error,signal_error,output_snr_db,baseline_snr_db,"
         "label_accuracy,delta,seed,failed\n";
  timings << "label,seconds\n";
  for (const RunRecord& r : bundle.runs) {
    csv << r.label << "," << io::format_double(r.sweep_value) << ","
        << io::format_double(r.relative_error) << ","
        << io::format_double(r.signal_error) << ","
        << io::format_double(r.output_snr_db) << ","
        << io::format_double(r.baseline_snr_db) << ","
        << io::format_double(r.label_accuracy) << "," << io::format_double(r.delta_used)
        << "," << r.seed << "," << (r.failed ? "1" : "0") << "\n";
    timings << r.label << "," << io::format_double(r.seconds) << "\n";
  }
  io::write_text_file(out_dir + "/results.csv", csv.str());
  io::write_text_file(out_dir + "/timings.csv", timings.str());
  bundle.written_files.push_back(out_dir + "/results.csv");

  json runs_json = json::array();
  for (const RunRecord& r : bundle.runs) {
    json rj{{"label", r.label},
            {"sweep", r.sweep_value},
            {"seed", r.seed},
            {"relative_error", r.relative_error},
            {"signal_error", r.signal_error},
            {"output_snr_db", r.output_snr_db},
            {"label_accuracy", r.label_accuracy},
            {"delta", r.delta_used},
            {"failed", r.failed}};
    if (r.failed) rj["error"] = r.error;
    runs_json.push_back(std::move(rj));
  }
  bundle.manifest["runs"] = std::move(runs_json);
  bundle.manifest["scenario"] = scenario;
  io::write_text_file(out_dir + "/manifest.json", bundle.manifest.dump(2) + "\n");
  bundle.written_files.push_back(out_dir + "/manifest.json");
  return bundle;
}

}  // namespace rbeam
