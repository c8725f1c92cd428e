#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbeam/forward.hpp"
#include "rbeam/sketch.hpp"
#include "rbeam/solve.hpp"
#include "rbeam/types.hpp"

#include <json.hpp>

namespace rbeam {

inline constexpr const char* kToolVersion = "rbeam 1.0.0";

/// Squared-norm relative error ||x_ref - x_hat||^2 / ||x_ref||^2.
double relative_error(const CVector& x_ref, const CVector& x_hat);
double relative_error(const RVector& x_ref, const RVector& x_hat);

/// SVD of a matrix computed once so the Tikhonov-regularized pseudoinverse
/// can be applied for many delta values cheaply.
class TikhonovPseudoinverse {
 public:
  explicit TikhonovPseudoinverse(const CMatrix& s, double eps_rel = kDefaultRankEps);
  /// (S^H S + delta I)^-1 S^H v via filter factors; delta = 0 truncates.
  CVector apply(const CVector& v, double delta) const;
  double sigma_max() const { return sigma_.size() ? sigma_[0] : 0.0; }
  int rank() const { return static_cast<int>(sigma_.size()); }

 private:
  CMatrix u_, v_;
  RVector sigma_;
};

/// Output SNR through the Tikhonov-regularized pseudoinverse of the
/// (sketched) operator: 20 log10(||S^+ Phi A x|| / ||S^+ Phi e||).
/// Returns +infinity when the noise term vanishes.
double output_snr_db(const TikhonovPseudoinverse& pinv, const CVector& sketched_signal,
                     const CVector& sketched_noise, double delta);
double output_snr_db(const ForwardOperator& op, const SketchOperator& sketch,
                     const RVector& x, const CVector& e, double delta);

enum class TuneObjective { maximize_snr, match_snr };

struct DeltaTune {
  bool feasible = false;
  double delta = 0.0;
  double snr_db = 0.0;
  double signal_error = 0.0;
};

/// Logarithmic grid search for the regularization weight: 25 points per
/// decade over [1e-6, 1e2] * sigma_max^2. Feasible points keep the signal
/// error (vs x_ls_ref) at or below error_target; among those the objective
/// either maximizes the output SNR or matches target_snr_db.
DeltaTune tune_delta(const TikhonovPseudoinverse& pinv, const CVector& sketched_signal,
                     const CVector& sketched_noise, const CVector& x_ls_ref,
                     double error_target, TuneObjective objective,
                     double target_snr_db = 0.0);

/// Per-sweep-point metrics of an experiment run.
struct RunRecord {
  std::string label;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  double relative_error = -1.0;
  double signal_error = -1.0;
  double output_snr_db = -1.0;
  double baseline_snr_db = -1.0;
  double delta_used = 0.0;
  double label_accuracy = -1.0;
  double residual_norm = -1.0;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct ResultBundle {
  std::vector<RunRecord> runs;
  nlohmann::json manifest;
  std::vector<std::string> written_files;
};

/// Config-driven experiment runner; see configs/ for the schema. Writes
/// results.csv, reconstructions and a manifest under out_dir and returns the
/// collected metrics. Failures of one sweep point are recorded and the
/// remaining points continue.
ResultBundle run_experiment(const nlohmann::json& config, const std::string& out_dir);

/// Config helpers shared by the runner and the CLI.
ArrayGeometry geometry_from_config(const nlohmann::json& config);
ExcitationSpec excitation_from_config(const nlohmann::json& config);
Scene scene_from_config(const nlohmann::json& config, const std::string& base_dir = "");

/// Depth map made of equal bands along axis 0 (axis-0-major pixel order).
RVector banded_depth_map(std::array<int, 2> angular_counts,
                         const std::vector<double>& band_depths);

std::uint64_t config_hash(const nlohmann::json& config);

}  // namespace rbeam
