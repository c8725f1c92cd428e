// rbeam command line: build operators, simulate measurements, reconstruct,
// inspect spectra, run the theorem condition checkers and drive the
// config-based experiment scenarios.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

#include "rbeam/analysis.hpp"
#include "rbeam/forward.hpp"
#include "rbeam/harness.hpp"
#include "rbeam/io.hpp"
#include "rbeam/rng.hpp"
#include "rbeam/sketch.hpp"
#include "rbeam/solve.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rbeam;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string scale = "desk";
  std::string format = "csv";
};

json load_config(const GlobalArgs& args) {
  if (args.config_path.empty())
    throw CLI::ValidationError("--config", "a config file is required");
  json config = json::parse(io::read_text_file(args.config_path));
  if (args.seed_set) config["seed"] = args.seed;
  config["base_dir"] = fs::path(args.config_path).parent_path().string();
  return config;
}

// desk-scale guard: full 40x40-class operators are accepted only with
// --scale full, and then with a warning.
void check_scale(const GlobalArgs& args, const ArrayGeometry& g,
                 const ExcitationSpec& e, const Scene& s) {
  const std::size_t entries = static_cast<std::size_t>(g.element_count()) *
                              e.count() * s.column_count();
  constexpr std::size_t desk_cap = 16u * 1024 * 1024;  // ~256 MiB complex128
  if (entries <= desk_cap) return;
  if (args.scale != "full")
    throw CLI::ValidationError(
        "--scale", "operator has " + std::to_string(entries) +
                       " entries; pass --scale full to run beyond desk scale");
  std::cerr << "warning: full-scale operator (" << entries
            << " entries); expect long runtimes\n";
}

json manifest_skeleton(const json& config) {
  json m;
  m["tool"] = kToolVersion;
  m["config_hash"] = config_hash(config);
  m["seed"] = config.value("seed", std::uint64_t{1});
  return m;
}

void write_manifest(const json& manifest, const std::string& out_dir) {
  io::write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

int cmd_build_operator(const GlobalArgs& args) {
  const json config = load_config(args);
  const ArrayGeometry g = geometry_from_config(config);
  const ExcitationSpec e = excitation_from_config(config);
  const Scene s = scene_from_config(config, config.value("base_dir", ""));
  check_scale(args, g, e, s);
  const ForwardOperator op = build_operator(g, e, s);
  fs::create_directories(args.out_dir);
  const std::string path = args.out_dir + "/operator.rbop";
  save_operator(op, path);
  json manifest = manifest_skeleton(config);
  manifest["operator"] = {{"rows", op.rows()},
                          {"cols", op.cols()},
                          {"blocks", op.block_count()},
                          {"geometry_hash", geometry_hash(g)},
                          {"excitation_hash", excitation_hash(e)},
                          {"path", path}};
  write_manifest(manifest, args.out_dir);
  std::cout << "wrote " << path << " (" << op.rows() << " x " << op.cols() << ")\n";
  return 0;
}

int cmd_simulate(const GlobalArgs& args) {
  const json config = load_config(args);
  const ArrayGeometry g = geometry_from_config(config);
  const ExcitationSpec e = excitation_from_config(config);
  const Scene s = scene_from_config(config, config.value("base_dir", ""));
  check_scale(args, g, e, s);
  const ForwardOperator op = build_operator(g, e, s);
  const json noise_json = config.value("noise", json{{"kind", "none"}});
  const NoiseSpec noise =
      noise_json.value("kind", "none") == "gaussian"
          ? NoiseSpec::gaussian(noise_json.at("input_snr_db").get<double>())
          : NoiseSpec::none();
  const std::uint64_t seed = config.value("seed", std::uint64_t{1});
  const MeasurementSet ms = simulate(op, s, noise, seed);
  fs::create_directories(args.out_dir);
  io::save_csv(ms.y, args.out_dir + "/measurements.csv");
  if (ms.noise.size()) io::save_csv(ms.noise, args.out_dir + "/noise.csv");
  json manifest = manifest_skeleton(config);
  manifest["measurements"] = {{"length", ms.y.size()},
                              {"blocks", ms.block_count},
                              {"noisy", ms.noise.size() > 0}};
  write_manifest(manifest, args.out_dir);
  std::cout << "wrote " << args.out_dir << "/measurements.csv (" << ms.y.size()
            << " samples)\n";
  return 0;
}

int cmd_reconstruct(const GlobalArgs& args) {
  const json config = load_config(args);
  const ArrayGeometry g = geometry_from_config(config);
  const ExcitationSpec e = excitation_from_config(config);
  const Scene s = scene_from_config(config, config.value("base_dir", ""));
  check_scale(args, g, e, s);
  const ForwardOperator op = build_operator(g, e, s);
  const std::uint64_t seed = config.value("seed", std::uint64_t{1});

  const json noise_json = config.value("noise", json{{"kind", "none"}});
  const NoiseSpec noise =
      noise_json.value("kind", "none") == "gaussian"
          ? NoiseSpec::gaussian(noise_json.at("input_snr_db").get<double>())
          : NoiseSpec::none();
  const MeasurementSet ms = simulate(op, s, noise, rng::derive_seed(seed, 0x015e));

  const json sk = config.value("sketch", json{{"kind", "identity"}});
  const std::string kind = sk.value("kind", "identity");
  // single-point reconstruction: `count`, falling back to the first sweep entry
  int count = 0;
  if (sk.contains("count"))
    count = sk.at("count").get<int>();
  else if (sk.contains("sweep") && !sk.at("sweep").empty())
    count = sk.at("sweep")[0].get<int>();
  SketchOperator sketch = identity_sketch(g.element_count(), e.count());
  if (kind == "gaussian")
    sketch = gaussian_code(count, g.element_count(), e.count(),
                           rng::derive_seed(seed, 0x5eed));
  else if (kind == "subsample_random")
    sketch = subsample_mask(count, g, MaskPattern::random, e.count(),
                            rng::derive_seed(seed, 0x5eed));
  else if (kind == "subsample_edge_center")
    sketch = subsample_mask(count, g, MaskPattern::edge_center, e.count(),
                            rng::derive_seed(seed, 0x5eed),
                            sk.value("edge_fraction", 0.5));
  else if (kind != "identity")
    throw CLI::ValidationError("sketch.kind", "unknown sketch kind " + kind);

  const double delta = config.value("solver", json::object()).value("delta", 0.0);
  const double rank_eps =
      config.value("solver", json::object()).value("rank_eps", kDefaultRankEps);
  const ReconResult recon = sketched_least_squares(sketch, op, ms.y, delta, rank_eps);

  fs::create_directories(args.out_dir);
  if (args.format == "pgm" || args.format == "both") {
    RMatrix img(s.angular_counts[0], std::max(s.angular_counts[1], 1));
    const RVector xr = recon.x_real();
    for (int i = 0; i < img.rows(); ++i)
      for (int j = 0; j < img.cols(); ++j) img(i, j) = xr[i * img.cols() + j];
    io::save_pgm(img, args.out_dir + "/reconstruction.pgm");
  }
  if (args.format == "csv" || args.format == "both")
    io::save_csv(recon.x, args.out_dir + "/reconstruction.csv");
  io::write_text_file(args.out_dir + "/sketch.txt", serialize_sketch(sketch));

  json manifest = manifest_skeleton(config);
  manifest["reconstruction"] = {{"residual_norm", recon.residual_norm},
                                {"rank_used", recon.rank_used},
                                {"delta", recon.delta},
                                {"imag_norm", recon.imag_norm}};
  write_manifest(manifest, args.out_dir);
  std::cout << "residual " << recon.residual_norm << ", rank " << recon.rank_used
            << "\n";
  return 0;
}

int cmd_spectrum(const GlobalArgs& args, int sketch_size) {
  const json config = load_config(args);
  const ArrayGeometry g = geometry_from_config(config);
  const ExcitationSpec e = excitation_from_config(config);
  const Scene s = scene_from_config(config, config.value("base_dir", ""));
  check_scale(args, g, e, s);
  const ForwardOperator op = build_operator(g, e, s);
  RVector spectrum;
  if (sketch_size > 0) {
    spectrum = randomized_spectrum(op.blocks, sketch_size, 1,
                                   config.value("seed", std::uint64_t{1}));
  } else {
    spectrum = singular_spectrum(op.stacked());
  }
  fs::create_directories(args.out_dir);
  io::save_csv(spectrum, args.out_dir + "/spectrum.csv");
  json manifest = manifest_skeleton(config);
  manifest["spectrum"] = {{"values", spectrum.size()},
                          {"effective_dimension", effective_dimension(spectrum)},
                          {"numerical_rank", numerical_rank(spectrum)},
                          {"randomized", sketch_size > 0}};
  write_manifest(manifest, args.out_dir);
  std::cout << "effective dimension " << effective_dimension(spectrum)
            << ", numerical rank " << numerical_rank(spectrum) << "\n";
  return 0;
}

json report_to_json(const ConditionReport& r) {
  json j;
  j["pass"] = r.pass;
  j["summary"] = r.summary;
  switch (r.theorem) {
    case Theorem::innovation_bound: {
      j["theorem"] = "thm1";
      j["d"] = r.d;
      j["d0"] = r.d0;
      j["l"] = r.sketch_l;
      j["empirical_capture_error"] = r.empirical_capture_error;
      break;
    }
    case Theorem::two_block: {
      j["theorem"] = "thm2";
      j["max_real_multiplicity"] = r.max_real_multiplicity;
      j["containment_error"] = r.containment_error;
      json clusters = json::array();
      for (auto [v, m] : r.real_clusters) clusters.push_back({{"value", v}, {"multiplicity", m}});
      j["real_clusters"] = clusters;
      break;
    }
    case Theorem::many_block: {
      j["theorem"] = "thm3";
      j["passing_trials"] = r.passing_trials;
      j["trial_widths"] = r.trial_widths;
      break;
    }
  }
  j["tolerance"] = r.tolerance;
  return j;
}

int cmd_check(const GlobalArgs& args, const std::string& which, int l, int trials) {
  const json config = load_config(args);
  const ArrayGeometry g = geometry_from_config(config);
  const ExcitationSpec e = excitation_from_config(config);
  const Scene s = scene_from_config(config, config.value("base_dir", ""));
  check_scale(args, g, e, s);
  const ForwardOperator op = build_operator(g, e, s);
  const std::uint64_t seed = config.value("seed", std::uint64_t{1});
  fs::create_directories(args.out_dir);

  json manifest = manifest_skeleton(config);
  if (which == "nested") {
    const std::vector<int> profile = nestedness_profile(op);
    manifest["nestedness_profile"] = profile;
    RVector prof(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) prof[i] = profile[i];
    io::save_csv(prof, args.out_dir + "/nestedness.csv");
    std::cout << "rank increments (longest wavelength first):";
    for (int v : profile) std::cout << " " << v;
    std::cout << "\n";
  } else {
    ConditionReport report;
    if (which == "thm1") {
      report = check_theorem1(op.blocks, l, rng::derive_seed(seed, 0x7e57));
    } else if (which == "thm2") {
      const double tol = config.value("check", json::object())
                             .value("containment_tol", 0.75);
      report = check_theorem2(op.blocks.front(), op.blocks.back(), 1e-6, tol);
      io::save_csv(report.eigenvalues, args.out_dir + "/eigenvalues.csv");
    } else if (which == "thm3") {
      report = check_theorem3(op.blocks, l, trials, rng::derive_seed(seed, 0x7e57));
      io::save_csv(report.sigma_min_samples, args.out_dir + "/sigma_min_samples.csv");
    } else {
      throw CLI::ValidationError("check", "expected thm1|thm2|thm3|nested");
    }
    manifest["report"] = report_to_json(report);
    std::cout << report.summary << "\n";
  }
  write_manifest(manifest, args.out_dir);
  return 0;
}

int cmd_experiment(const GlobalArgs& args) {
  const json config = load_config(args);
  {
    const ArrayGeometry g = geometry_from_config(config);
    const ExcitationSpec e = excitation_from_config(config);
    const Scene s = scene_from_config(config, config.value("base_dir", ""));
    check_scale(args, g, e, s);
  }
  const ResultBundle bundle = run_experiment(config, args.out_dir);
  for (const RunRecord& r : bundle.runs) {
    std::cout << r.label << ": ";
    if (r.failed) {
      std::cout << "FAILED (" << r.error << ")";
    } else {
      std::cout << "relative_error=" << r.relative_error;
      if (r.output_snr_db >= 0) std::cout << " output_snr_db=" << r.output_snr_db;
      if (r.label_accuracy >= 0) std::cout << " label_accuracy=" << r.label_accuracy;
    }
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"broadband array imaging with randomized beamforming"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalArgs args;
  app.add_option("--config", args.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", args.out_dir, "output directory");
  app.add_option("--seed", args.seed, "master seed override")
      ->each([&](const std::string&) { args.seed_set = true; });
  app.add_option("--scale", args.scale, "desk|full")->check(CLI::IsMember({"desk", "full"}));
  app.add_option("--format", args.format, "csv|pgm|both")
      ->check(CLI::IsMember({"csv", "pgm", "both"}));

  auto* build = app.add_subcommand("build-operator", "build and export the stacked operator");
  auto* sim = app.add_subcommand("simulate", "simulate (optionally noisy) measurements");
  auto* rec = app.add_subcommand("reconstruct", "sketch and reconstruct one configuration");
  auto* spec = app.add_subcommand("spectrum", "singular spectrum of the operator");
  int sketch_size = 0;
  spec->add_option("--sketch", sketch_size,
                   "randomized range-finder size (0 = exact SVD)");
  auto* check = app.add_subcommand("check", "theorem condition checkers");
  std::string which;
  int l = 0, trials = 100;
  check->add_option("what", which, "thm1|thm2|thm3|nested")->required();
  check->add_option("--l", l, "codes per wavelength (0 = derive from rank)");
  check->add_option("--trials", trials, "sampling trials (thm3)");
  auto* exp = app.add_subcommand("experiment", "run a config-driven experiment sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) return cmd_build_operator(args);
    if (sim->parsed()) return cmd_simulate(args);
    if (rec->parsed()) return cmd_reconstruct(args);
    if (spec->parsed()) return cmd_spectrum(args, sketch_size);
    if (check->parsed()) return cmd_check(args, which, l, trials);
    if (exp->parsed()) return cmd_experiment(args);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
