#include "vitalfuse/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "vitalfuse/kernels.hpp"

namespace vf::forecast {

void LstmConfig::validate() const {
  if (hidden_units < 1) throw std::invalid_argument("hidden_units must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(grad_clip_norm > 0)) throw std::invalid_argument("grad_clip_norm must be > 0");
  if (!(lr_decay_factor > 0)) throw std::invalid_argument("lr_decay_factor must be > 0");
  if (lr_decay_epoch < 1 || lr_decay_epoch > epochs)
    throw std::invalid_argument("lr_decay_epoch must be in [1, epochs]");
}

Standardizer fit_standardizer(std::span<const double> series) {
  if (series.empty()) throw std::invalid_argument("empty series");
  Standardizer s;
  double mu = 0;
  for (double v : series) mu += v;
  mu /= double(series.size());
  double var = 0;
  for (double v : series) var += (v - mu) * (v - mu);
  var /= double(series.size());
  s.mu = mu;
  s.sigma = var > 0 ? std::sqrt(var) : 1.0;
  return s;
}

std::vector<double> standardize(std::span<const double> series,
                                const Standardizer& s) {
  std::vector<double> z;
  z.reserve(series.size());
  for (double v : series) z.push_back(s.standardize(v));
  return z;
}

LstmModel LstmModel::init(int hidden, std::uint64_t seed) {
  if (hidden < 1) throw std::invalid_argument("hidden must be >= 1");
  LstmModel m;
  m.hidden = hidden;
  const std::size_t h = static_cast<std::size_t>(hidden);
  for (auto* v : {&m.wi, &m.wf, &m.wg, &m.wo, &m.bi, &m.bf, &m.bg, &m.bo, &m.wy})
    v->assign(h, 0);
  for (auto* v : {&m.ui, &m.uf, &m.ug, &m.uo}) v->assign(h * h, 0);

  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(double(hidden));
  auto uniform = [&] {
    const double u = double(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    return -bound + u * 2.0 * bound;
  };
  for (double* p : m.param_views()) *p = uniform();
  for (auto& b : m.bf) b = 1.0;  // forget-gate bias trick
  return m;
}

std::size_t LstmModel::param_count() const {
  const std::size_t h = static_cast<std::size_t>(hidden);
  return 4 * h * h + 9 * h + 1;
}

namespace {

template <typename Model, typename Ptr>
std::vector<Ptr> collect_views(Model& m) {
  std::vector<Ptr> out;
  out.reserve(m.param_count());
  auto add = [&](auto& vec) {
    for (auto& v : vec) out.push_back(&v);
  };
  add(m.wi); add(m.wf); add(m.wg); add(m.wo);
  add(m.ui); add(m.uf); add(m.ug); add(m.uo);
  add(m.bi); add(m.bf); add(m.bg); add(m.bo);
  add(m.wy);
  out.push_back(&m.by);
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<double*> LstmModel::param_views() {
  return collect_views<LstmModel, double*>(*this);
}
std::vector<const double*> LstmModel::param_views() const {
  return collect_views<const LstmModel, const double*>(*this);
}

LstmGradients::LstmGradients(int hidden) {
  const std::size_t h = static_cast<std::size_t>(hidden);
  for (auto* v : {&wi, &wf, &wg, &wo, &bi, &bf, &bg, &bo, &wy}) v->assign(h, 0);
  for (auto* v : {&ui, &uf, &ug, &uo}) v->assign(h * h, 0);
}

std::vector<double*> LstmGradients::views() {
  std::vector<double*> out;
  auto add = [&](auto& vec) {
    for (auto& v : vec) out.push_back(&v);
  };
  add(wi); add(wf); add(wg); add(wo);
  add(ui); add(uf); add(ug); add(uo);
  add(bi); add(bf); add(bg); add(bo);
  add(wy);
  out.push_back(&by);
  return out;
}

double LstmGradients::l2_norm() const {
  double s = 0;
  auto acc = [&](const auto& vec) {
    for (double v : vec) s += v * v;
  };
  acc(wi); acc(wf); acc(wg); acc(wo);
  acc(ui); acc(uf); acc(ug); acc(uo);
  acc(bi); acc(bf); acc(bg); acc(bo);
  acc(wy);
  s += by * by;
  return std::sqrt(s);
}

void LstmGradients::scale(double f) {
  auto mul = [&](auto& vec) {
    for (double& v : vec) v *= f;
  };
  mul(wi); mul(wf); mul(wg); mul(wo);
  mul(ui); mul(uf); mul(ug); mul(uo);
  mul(bi); mul(bf); mul(bg); mul(bo);
  mul(wy);
  by *= f;
}

double clip_global_norm(LstmGradients& g, double max_norm) {
  const double norm = g.l2_norm();
  if (norm > max_norm && norm > 0) g.scale(max_norm / norm);
  return norm;
}

namespace {

// One evaluated step with everything the backward pass needs.
struct StepCache {
  double x;
  std::vector<double> h_prev, c_prev, i, f, g, o, c, tanh_c, h;
};

void gate_preacts(const LstmModel& m, const std::vector<double>& h_prev,
                  double x, std::vector<double>& pi, std::vector<double>& pf,
                  std::vector<double>& pg, std::vector<double>& po) {
  const auto& K = kernels::ops();
  const std::size_t H = static_cast<std::size_t>(m.hidden);
  pi = m.bi; pf = m.bf; pg = m.bg; po = m.bo;
  K.axpy(x, m.wi.data(), pi.data(), H);
  K.axpy(x, m.wf.data(), pf.data(), H);
  K.axpy(x, m.wg.data(), pg.data(), H);
  K.axpy(x, m.wo.data(), po.data(), H);
  K.matvec_acc(m.ui.data(), H, H, h_prev.data(), pi.data());
  K.matvec_acc(m.uf.data(), H, H, h_prev.data(), pf.data());
  K.matvec_acc(m.ug.data(), H, H, h_prev.data(), pg.data());
  K.matvec_acc(m.uo.data(), H, H, h_prev.data(), po.data());
}

StepCache eval_step(const LstmModel& m, const std::vector<double>& h_prev,
                    const std::vector<double>& c_prev, double x) {
  const std::size_t H = static_cast<std::size_t>(m.hidden);
  StepCache s;
  s.x = x;
  s.h_prev = h_prev;
  s.c_prev = c_prev;
  std::vector<double> pi, pf, pg, po;
  gate_preacts(m, h_prev, x, pi, pf, pg, po);
  s.i.resize(H); s.f.resize(H); s.g.resize(H); s.o.resize(H);
  s.c.resize(H); s.tanh_c.resize(H); s.h.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    s.i[k] = sigmoid(pi[k]);
    s.f[k] = sigmoid(pf[k]);
    s.g[k] = std::tanh(pg[k]);
    s.o[k] = sigmoid(po[k]);
    s.c[k] = s.f[k] * c_prev[k] + s.i[k] * s.g[k];
    s.tanh_c[k] = std::tanh(s.c[k]);
    s.h[k] = s.o[k] * s.tanh_c[k];
  }
  return s;
}

double head(const LstmModel& m, const std::vector<double>& h) {
  return kernels::ops().dot(m.wy.data(), h.data(),
                            static_cast<std::size_t>(m.hidden)) +
         m.by;
}

LstmState zero_state(int hidden) {
  LstmState st;
  st.h.assign(static_cast<std::size_t>(hidden), 0);
  st.c.assign(static_cast<std::size_t>(hidden), 0);
  return st;
}

}  // namespace

double lstm_step(const LstmModel& m, LstmState& state, double input) {
  if (state.h.empty()) state = zero_state(m.hidden);
  if (state.h.size() != static_cast<std::size_t>(m.hidden))
    throw std::invalid_argument("state size mismatch");
  StepCache s = eval_step(m, state.h, state.c, input);
  state.h = std::move(s.h);
  state.c = std::move(s.c);
  return head(m, state.h);
}

ForwardResult lstm_forward(const LstmModel& m, std::span<const double> inputs,
                           LstmState state) {
  if (state.h.empty()) state = zero_state(m.hidden);
  ForwardResult r;
  r.predictions.reserve(inputs.size());
  r.state = std::move(state);
  for (double x : inputs) r.predictions.push_back(lstm_step(m, r.state, x));
  return r;
}

double lstm_loss(const LstmModel& m, std::span<const double> inputs,
                 std::span<const double> targets) {
  if (inputs.size() != targets.size())
    throw std::invalid_argument("inputs/targets length mismatch");
  if (inputs.empty()) return 0;
  auto r = lstm_forward(m, inputs);
  double mse = 0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const double d = r.predictions[t] - targets[t];
    mse += d * d;
  }
  return mse / double(inputs.size());
}

SequenceLoss lstm_gradients(const LstmModel& m, std::span<const double> inputs,
                            std::span<const double> targets) {
  if (inputs.size() != targets.size())
    throw std::invalid_argument("inputs/targets length mismatch");
  const std::size_t H = static_cast<std::size_t>(m.hidden);
  const std::size_t T = inputs.size();
  SequenceLoss out{0.0, LstmGradients(m.hidden)};
  if (T == 0) return out;

  const auto& K = kernels::ops();
  std::vector<StepCache> cache;
  cache.reserve(T);
  std::vector<double> h(H, 0), c(H, 0);
  std::vector<double> y(T);
  for (std::size_t t = 0; t < T; ++t) {
    cache.push_back(eval_step(m, h, c, inputs[t]));
    h = cache.back().h;
    c = cache.back().c;
    y[t] = head(m, h);
    const double d = y[t] - targets[t];
    out.mse += d * d;
  }
  out.mse /= double(T);

  LstmGradients& g = out.grads;
  std::vector<double> dh_next(H, 0), dc_next(H, 0);
  std::vector<double> dh(H), dc(H), dpi(H), dpf(H), dpg(H), dpo(H);
  for (std::size_t t = T; t-- > 0;) {
    const StepCache& s = cache[t];
    const double dy = 2.0 * (y[t] - targets[t]) / double(T);
    // head
    K.axpy(dy, s.h.data(), g.wy.data(), H);
    g.by += dy;
    for (std::size_t k = 0; k < H; ++k) dh[k] = dy * m.wy[k] + dh_next[k];
    for (std::size_t k = 0; k < H; ++k) {
      const double tc = s.tanh_c[k];
      const double do_ = dh[k] * tc;
      dpo[k] = do_ * s.o[k] * (1.0 - s.o[k]);
      dc[k] = dh[k] * s.o[k] * (1.0 - tc * tc) + dc_next[k];
      const double di = dc[k] * s.g[k];
      dpi[k] = di * s.i[k] * (1.0 - s.i[k]);
      const double df = dc[k] * s.c_prev[k];
      dpf[k] = df * s.f[k] * (1.0 - s.f[k]);
      const double dg = dc[k] * s.i[k];
      dpg[k] = dg * (1.0 - s.g[k] * s.g[k]);
      dc_next[k] = dc[k] * s.f[k];
    }
    K.axpy(s.x, dpi.data(), g.wi.data(), H);
    K.axpy(s.x, dpf.data(), g.wf.data(), H);
    K.axpy(s.x, dpg.data(), g.wg.data(), H);
    K.axpy(s.x, dpo.data(), g.wo.data(), H);
    K.outer_acc(dpi.data(), H, s.h_prev.data(), H, g.ui.data());
    K.outer_acc(dpf.data(), H, s.h_prev.data(), H, g.uf.data());
    K.outer_acc(dpg.data(), H, s.h_prev.data(), H, g.ug.data());
    K.outer_acc(dpo.data(), H, s.h_prev.data(), H, g.uo.data());
    for (std::size_t k = 0; k < H; ++k) {
      g.bi[k] += dpi[k];
      g.bf[k] += dpf[k];
      g.bg[k] += dpg[k];
      g.bo[k] += dpo[k];
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    K.matvec_t_acc(m.ui.data(), H, H, dpi.data(), dh_next.data());
    K.matvec_t_acc(m.uf.data(), H, H, dpf.data(), dh_next.data());
    K.matvec_t_acc(m.ug.data(), H, H, dpg.data(), dh_next.data());
    K.matvec_t_acc(m.uo.data(), H, H, dpo.data(), dh_next.data());
  }
  return out;
}

TrainResult train(std::span<const double> series, const LstmConfig& cfg) {
  cfg.validate();
  if (series.size() < 3) throw std::invalid_argument("series too short to train");

  TrainResult res;
  res.standardizer = fit_standardizer(series);
  const std::vector<double> z = standardize(series, res.standardizer);
  const std::span<const double> inputs(z.data(), z.size() - 1);
  const std::span<const double> targets(z.data() + 1, z.size() - 1);
  res.model = LstmModel::init(cfg.hidden_units, cfg.rng_seed);

  // rmse on the original scale for the curve
  auto train_rmse = [&](const LstmModel& m) {
    auto fwd = lstm_forward(m, inputs);
    double s = 0;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      const double p = res.standardizer.destandardize(fwd.predictions[t]);
      const double a = series[t + 1];
      s += (p - a) * (p - a);
    }
    return std::sqrt(s / double(inputs.size()));
  };
  res.rmse_curve.reserve(static_cast<std::size_t>(cfg.epochs) + 1);
  res.rmse_curve.push_back(train_rmse(res.model));

  // adaptive-moment updates over the clipped full-sequence gradient
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  auto params = res.model.param_views();
  std::vector<double> m1(params.size(), 0), m2(params.size(), 0);
  double lr = cfg.learning_rate;
  double b1t = 1, b2t = 1;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (epoch == cfg.lr_decay_epoch) lr *= cfg.lr_decay_factor;
    auto sl = lstm_gradients(res.model, inputs, targets);
    clip_global_norm(sl.grads, cfg.grad_clip_norm);
    auto gv = sl.grads.views();
    b1t *= kBeta1;
    b2t *= kBeta2;
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double gk = *gv[k];
      m1[k] = kBeta1 * m1[k] + (1 - kBeta1) * gk;
      m2[k] = kBeta2 * m2[k] + (1 - kBeta2) * gk * gk;
      const double mhat = m1[k] / (1 - b1t);
      const double vhat = m2[k] / (1 - b2t);
      *params[k] -= lr * mhat / (std::sqrt(vhat) + kEps);
    }
    res.rmse_curve.push_back(train_rmse(res.model));
  }
  return res;
}

namespace {

// Prime on the seed sequence; the output at its last step is the first
// forecast. An empty seed starts from the zero state and a mean input.
double prime(const LstmModel& m, const Standardizer& s,
             std::span<const double> seed_series, LstmState& state) {
  state = zero_state(m.hidden);
  if (seed_series.empty()) return lstm_step(m, state, 0.0);
  double last = 0;
  for (double v : seed_series) last = lstm_step(m, state, s.standardize(v));
  return last;
}

}  // namespace

ForecastReport forecast_open_loop(const LstmModel& m, const Standardizer& s,
                                  std::span<const double> seed_series,
                                  int horizon,
                                  std::span<const double> actuals) {
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
  if (!actuals.empty() && actuals.size() != static_cast<std::size_t>(horizon))
    throw std::invalid_argument("actuals length must equal horizon");
  ForecastReport rep;
  rep.mode = ForecastMode::OpenLoop;
  if (horizon == 0) return rep;
  LstmState state;
  std::vector<double> z;
  z.reserve(static_cast<std::size_t>(horizon));
  z.push_back(prime(m, s, seed_series, state));
  for (int k = 1; k < horizon; ++k)
    z.push_back(lstm_step(m, state, z.back()));
  rep.predictions.reserve(z.size());
  for (double v : z) rep.predictions.push_back(s.destandardize(v));
  if (!actuals.empty()) rep.rmse = rmse(rep.predictions, actuals);
  return rep;
}

ForecastReport forecast_with_updates(const LstmModel& m, const Standardizer& s,
                                     std::span<const double> observed,
                                     std::span<const double> seed_series) {
  if (observed.empty())
    throw std::invalid_argument("with_updates needs >= 1 observation");
  ForecastReport rep;
  rep.mode = ForecastMode::WithUpdates;
  LstmState state;
  std::vector<double> z;
  z.reserve(observed.size());
  z.push_back(prime(m, s, seed_series, state));
  for (std::size_t k = 1; k < observed.size(); ++k)
    z.push_back(lstm_step(m, state, s.standardize(observed[k - 1])));
  rep.predictions.reserve(z.size());
  for (double v : z) rep.predictions.push_back(s.destandardize(v));
  rep.rmse = rmse(rep.predictions, observed);
  return rep;
}

double rmse(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size() || pred.empty())
    throw std::invalid_argument("rmse needs equal non-empty sequences");
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - actual[i];
    s += d * d;
  }
  return std::sqrt(s / double(pred.size()));
}

void save_checkpoint(const LstmModel& m, const Standardizer& s,
                     const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + file.string());
  out.precision(17);
  out << "lstm 1\n" << m.hidden << '\n' << s.mu << ' ' << s.sigma << '\n';
  for (const double* p : m.param_views()) out << *p << '\n';
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

std::pair<LstmModel, Standardizer> load_checkpoint(
    const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + file.string());
  std::string magic;
  int version = 0, hidden = 0;
  Standardizer s;
  in >> magic >> version >> hidden >> s.mu >> s.sigma;
  if (magic != "lstm" || version != 1 || hidden < 1)
    throw std::runtime_error("bad checkpoint header: " + file.string());
  LstmModel m = LstmModel::init(hidden, 0);
  for (double* p : m.param_views()) in >> *p;
  if (!in) throw std::runtime_error("truncated checkpoint: " + file.string());
  return {std::move(m), s};
}

void write_loss_csv(std::span<const double> curve,
                    const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write loss csv: " + file.string());
  out.precision(17);
  out << "epoch,train_rmse\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << i << ',' << curve[i] << '\n';
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

}  // namespace vf::forecast
