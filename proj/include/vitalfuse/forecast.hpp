#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

// One-step-ahead scalar series forecaster: a from-scratch single-layer LSTM
// with a linear head, trained full-sequence by backpropagation through time
// with adaptive-moment updates and global gradient-norm clipping.

namespace vf::forecast {

struct LstmConfig {
  int hidden_units = 100;
  int epochs = 150;
  double learning_rate = 0.005;
  double grad_clip_norm = 1.0;
  double lr_decay_factor = 0.2;
  int lr_decay_epoch = 100;  // decay applies from this epoch on (1-based)
  std::uint64_t rng_seed = 0;
  void validate() const;  // throws std::invalid_argument
};

struct Standardizer {
  double mu = 0;
  double sigma = 1;  // constant series force sigma = 1
  double standardize(double x) const { return (x - mu) / sigma; }
  double destandardize(double z) const { return z * sigma + mu; }
};

Standardizer fit_standardizer(std::span<const double> series);
std::vector<double> standardize(std::span<const double> series,
                                const Standardizer& s);

// Parameter block layout (H = hidden):
//   w*: input weights (H), u*: recurrent weights (H*H row major), b*: biases
//   (H) for the four gates i, f, g, o; wy (H) + by form the linear head.
struct LstmModel {
  int hidden = 0;
  std::vector<double> wi, wf, wg, wo;
  std::vector<double> ui, uf, ug, uo;
  std::vector<double> bi, bf, bg, bo;
  std::vector<double> wy;
  double by = 0;

  // uniform(-1/sqrt(H), 1/sqrt(H)) init, forget bias 1.0
  static LstmModel init(int hidden, std::uint64_t seed);
  std::size_t param_count() const;
  // flat views over all parameters, fixed order; used by the optimizer and
  // the finite-difference tests
  std::vector<double*> param_views();
  std::vector<const double*> param_views() const;
};

struct LstmState {
  std::vector<double> h, c;
};

struct ForwardResult {
  std::vector<double> predictions;  // one per input step
  LstmState state;                  // after the last step
};

// Runs the gate recurrence over z-space inputs from the given state
// (zero state when empty). Deterministic.
ForwardResult lstm_forward(const LstmModel& m, std::span<const double> inputs,
                           LstmState state = {});

// One step; returns the head output and advances the state in place.
double lstm_step(const LstmModel& m, LstmState& state, double input);

// Gradient of mean squared error over the sequence w.r.t. every parameter,
// by backpropagation through time. Layout mirrors LstmModel.
struct LstmGradients {
  std::vector<double> wi, wf, wg, wo, ui, uf, ug, uo, bi, bf, bg, bo, wy;
  double by = 0;
  explicit LstmGradients(int hidden = 0);
  double l2_norm() const;
  void scale(double f);
  std::vector<double*> views();
};

struct SequenceLoss {
  double mse = 0;
  LstmGradients grads;
};

double lstm_loss(const LstmModel& m, std::span<const double> inputs,
                 std::span<const double> targets);
SequenceLoss lstm_gradients(const LstmModel& m, std::span<const double> inputs,
                            std::span<const double> targets);

// Scales gradients so their global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_global_norm(LstmGradients& g, double max_norm);

struct TrainResult {
  LstmModel model;
  Standardizer standardizer;
  // rmse_curve[0] is the untrained model's training rmse; one entry per
  // epoch follows (z-space model applied to the original scale).
  std::vector<double> rmse_curve;
};

// Trains one-step-ahead on the series (inputs x[0..n-2], targets x[1..n-1])
// in standardized space. Needs length >= 3. Deterministic under the seed.
TrainResult train(std::span<const double> series, const LstmConfig& cfg);

enum class ForecastMode { OpenLoop, WithUpdates };

struct ForecastReport {
  std::vector<double> predictions;  // original scale
  double rmse = 0;                  // 0 when no actuals were given
  ForecastMode mode = ForecastMode::OpenLoop;
};

// Resets state, primes on seed_series, then feeds each prediction back as
// the next input. predictions[0] is the model's output at the last priming
// step. When actuals are provided (same length as horizon) rmse is filled.
ForecastReport forecast_open_loop(const LstmModel& m, const Standardizer& s,
                                  std::span<const double> seed_series,
                                  int horizon,
                                  std::span<const double> actuals = {});

// Like open loop, but the state advances with the true observations:
// predictions[k] estimates observed[k] before it is consumed. rmse is
// against `observed`.
ForecastReport forecast_with_updates(const LstmModel& m, const Standardizer& s,
                                     std::span<const double> observed,
                                     std::span<const double> seed_series = {});

double rmse(std::span<const double> pred, std::span<const double> actual);

// Text checkpoint: header, shapes, standardizer, row-major weights.
void save_checkpoint(const LstmModel& m, const Standardizer& s,
                     const std::filesystem::path& file);
std::pair<LstmModel, Standardizer> load_checkpoint(
    const std::filesystem::path& file);
void write_loss_csv(std::span<const double> curve,
                    const std::filesystem::path& file);

}  // namespace vf::forecast
