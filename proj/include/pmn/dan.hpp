#pragma once

#include <cstdint>
#include <vector>

#include "pmn/selection.hpp"
#include "pmn/types.hpp"

namespace pmn {

/// Unfolded-network parameters. Only alpha_bar and beta1 are trained.
struct DanParams {
  std::vector<double> alpha_bar;  // one per layer
  double beta1 = 0.99;
  double beta2 = 0.999;
  double eta1 = 0.99;
  double eta_a = 0.99;
  double rho_a = 1e2;
  double rho = 1.0;
  double gamma = 1e4;
  double alpha_lo = 0.01;
  double alpha_hi = 1.0;
  int admm_iters = 200;
  double tol = 1e-6;

  int layers() const { return static_cast<int>(alpha_bar.size()); }
  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
  static DanParams defaults(int layers = 10);
};

struct LayerState {
  Vec u;
  Vec m_hat;
  Vec v_hat;
  int layer = 0;  // number of layers applied so far

  static LayerState start(const Vec& u0);
};

/// What a layer saw and produced; enough to rebuild the regret constants.
struct LayerDiagnostics {
  Vec grad;            // d_u at the layer input
  Vec phi_inv;         // per-coordinate learning rate 1 / phi
  Vec v_minus_z;       // v* - z* from the inner solve
  Vec delta_u;         // output - input
  double cost = 0.0;   // cost_logdet at the output
  int admm_iterations = 0;
};

LayerState dan_layer(const LayerState& state, const SelectionContext& ctx, const DanParams& params,
                     LayerDiagnostics* diag = nullptr);

struct DanRun {
  std::vector<Vec> u_layers;  // output of layers 1..L
  SelectTrace trace;          // entry 0 is the input, entry l the output of layer l
  std::vector<LayerDiagnostics> layers;
};

DanRun dan_forward(const SelectionContext& ctx, const Vec& u0, const DanParams& params);

/// Number of (layer, coordinate) pairs with phi_inv(l) > phi_inv(l-1).
int learning_rate_increases(const DanRun& run);

// ---------------------------------------------------------------- training

struct TrainingSample {
  SelectionContext ctx;
  Vec u0;
  Vec label;  // exhaustive-search selection
};

struct TrainConfig {
  double lr = 5e-5;
  int n_train = 500;
  int epochs = 1;
  double fd_step = 1e-4;
  std::uint64_t seed = 1;
  int batch = 1;  // samples averaged per SGD step

  void validate() const;
};

/// (1/L) sum_l ||label - u_l||^2 over the relaxed layer outputs.
double dan_loss(const TrainingSample& sample, const DanParams& params);
double mean_loss(const std::vector<TrainingSample>& data, const DanParams& params);

/// Learnable vector [alpha_bar_1..L, beta1].
Vec learnables(const DanParams& params);
DanParams with_learnables(const DanParams& params, const Vec& theta);

/// Clamps alpha_bar into [alpha_lo, alpha_hi] and beta1 into
/// (0, min(0.999, sqrt(beta2) - 1e-3)).
DanParams project_params(const DanParams& params);

/// theta - lr * grad, then projected.
DanParams sgd_step(const DanParams& params, const Vec& grad, double lr);

/// Central finite-difference gradient of dan_loss w.r.t. the learnables.
Vec loss_gradient(const TrainingSample& sample, const DanParams& params, double fd_step);

struct TrainResult {
  DanParams params;
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;  // mean loss after each epoch
  double final_loss() const { return epoch_loss.empty() ? initial_loss : epoch_loss.back(); }
};

/// Throws std::invalid_argument on an empty dataset.
TrainResult train_dan(const std::vector<TrainingSample>& data, const DanParams& init, const TrainConfig& cfg);

// ------------------------------------------------------------------ regret

struct RegretConstants {
  double D_delta = 0.0;
  double D_u1 = 0.0;
  double D_phi = 0.0;
  double D_b1 = 0.0;
  double D_b2 = 0.0;
  double D_du2 = 0.0;
};

struct RegretReport {
  double R_L = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double bound = 0.0;
  RegretConstants constants;
  int lr_increases = 0;

  bool within_bound() const { return R_L <= bound; }
  bool lr_decay_holds() const { return lr_increases == 0; }
};

/// The better of the two candidates on cost + rho * P_gamma.
Vec regret_reference(const SelectionContext& ctx, const DanParams& params, const Vec& es_label, const Vec& mm_output);

/// Throws std::invalid_argument when the run lacks per-layer diagnostics.
RegretReport regret_bound_check(const DanRun& run, const SelectionContext& ctx, const DanParams& params,
                                const Vec& u_star);

/// C1 and C2 from the constants and fixed hyper-parameters.
double regret_c1(const RegretConstants& k, const DanParams& params);
double regret_c2(const RegretConstants& k, const DanParams& params);

}  // namespace pmn
