#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pmn/dan.hpp"
#include "pmn/fisher.hpp"
#include "pmn/mm_admm.hpp"
#include "pmn/scenario.hpp"

namespace pmn {

enum class SelectorKind { kDan, kMmAdmm1, kMmAdmm2, kEs, kNearest };
enum class PowerKind { kFpwf, kOracle, kEqual };

/// Names used on the command line: dan, mm-admm-1, mm-admm-2, es, nearest and
/// fpwf, oracle, equal. Parsing throws std::invalid_argument on unknown names.
SelectorKind parse_selector(const std::string& name);
PowerKind parse_power(const std::string& name);
std::string to_string(SelectorKind kind);
std::string to_string(PowerKind kind);

struct AoConfig {
  int max_rounds = 3;
  double tol = 1e-4;  // relative change of the total cost
  SelectorKind selector = SelectorKind::kEs;
  PowerKind power = PowerKind::kFpwf;
  MMConfig mm;
  std::optional<DanParams> dan;  // required when selector == kDan

  void validate() const;
};

/// What the AO step needs to know about one target at the current frame.
struct TargetFrame {
  TargetState s_pred;
  Mat4 Jp = Mat4::Identity();
  MeasInfoSet info;
};

struct AoResult {
  std::vector<Vec> u;  // binary, one per target
  Vec p;
  std::vector<double> objective;  // sum_q cost_logdet after each selection and power pass
  int rounds = 0;
};

/// Total cost sum_q cost_logdet(fim(Jp_q, u_q, p_q)).
double ao_objective(const std::vector<TargetFrame>& frame, const std::vector<Vec>& u, const Vec& p);

/// Alternates per-target selection and joint power allocation. Starts from
/// the nearest nodes and an equal power split. A pass that would raise the
/// total cost is discarded, so the objective never increases.
AoResult ao_optimize(const std::vector<TargetFrame>& frame, const Scenario& sc, const AoConfig& cfg);

/// One target's selection at fixed power.
Vec select_nodes(const TargetFrame& t, const Scenario& sc, double p, const AoConfig& cfg);

struct MeasurementUse {
  Measurement z;          // observed
  Measurement predicted;  // h(x_pred)
  Mat34 H;
  Vec3 cov_diag;
};

struct Posterior {
  TargetState s;
  Mat4 P = Mat4::Identity();
};

/// Stacked EKF update in Joseph form. The angle innovation is wrapped to
/// (-pi, pi]. Throws NotPositiveDefinite when the innovation covariance is
/// singular.
Posterior ekf_update(const TargetState& s_pred, const Mat4& P_pred, const std::vector<MeasurementUse>& meas);

struct TrackRow {
  int trial = 0;
  int frame = 0;
  int target = 0;
  Vec4 truth = Vec4::Zero();
  Vec4 estimate = Vec4::Zero();
  double pcrlb_trace = 0.0;
  double cost = 0.0;
  std::vector<int> selected;
  double power = 0.0;
};

struct TrackRecord {
  int trial = 0;
  int frames = 0;
  int targets = 0;
  std::vector<TrackRow> rows;  // frame-major, then target
  std::vector<std::vector<double>> ao_objective;  // per frame

  /// Position error norm of (frame index 0..K-1, target).
  double position_error(int frame_index, int target) const;
};

struct TrackConfig {
  int frames = 10;
  AoConfig ao;
  std::uint64_t seed = 1;
  double init_sigma_r = 10.0;
  double init_sigma_v = 5.0;
  bool init_estimate_error = true;
};

TrackRecord run_tracking(const Scenario& sc, const MotionModel& model, const std::vector<TargetState>& targets0,
                         const TrackConfig& cfg, int trial = 0);

/// Runs `nmc` independent trials concurrently; trial i uses seeds derived
/// from (cfg.seed, i).
std::vector<TrackRecord> monte_carlo(const Scenario& sc, const MotionModel& model,
                                     const std::vector<TargetState>& targets0, const TrackConfig& cfg, int nmc);

/// (1/Q)(1/K) sum_q sum_k sqrt(mean over trials of the squared position error).
double monte_carlo_rmse(const std::vector<TrackRecord>& runs);

/// CSV header and rows for TrackRecord export.
void write_track_header(std::ostream& os);
void write_track_rows(std::ostream& os, const TrackRecord& rec);

}  // namespace pmn
