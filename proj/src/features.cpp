#include "vitalfuse/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace vf::features {

SkewThreshold skew_threshold(std::span<const double> history) {
  if (history.size() < 2)
    throw std::invalid_argument("skew_threshold needs >= 2 points");
  double mu = 0;
  for (double v : history) mu += v;
  mu /= double(history.size());
  double var = 0;
  for (double v : history) var += (v - mu) * (v - mu);
  var /= double(history.size());
  SkewThreshold t;
  t.mu_t = mu;
  t.sigma_t = std::sqrt(var);
  t.tau = t.mu_t + 2.0 * t.sigma_t;
  return t;
}

FeatureState update_state(FeatureState state, FeatureChannel ch,
                          std::span<const double> obs, std::int64_t now_ms) {
  auto& vec = ch == FeatureChannel::Respiration ? state.rm : state.hm;
  auto& base = ch == FeatureChannel::Respiration ? state.r0 : state.h0;
  auto& ts = ch == FeatureChannel::Respiration ? state.tr_ms : state.th_ms;
  if (obs.size() != base.size())
    throw std::invalid_argument("feature observation dimension mismatch");
  vec.assign(obs.begin(), obs.end());
  ts = now_ms;

  const auto timeout_ms = static_cast<std::int64_t>(state.timeout_s * 1000.0);
  if (now_ms - state.tr_ms > timeout_ms) state.rm = state.r0;
  if (now_ms - state.th_ms > timeout_ms) state.hm = state.h0;
  return state;
}

namespace {

// Gaussian elimination with partial pivoting; A is n x n, b is n x m
// (solves for m right-hand sides at once). Throws on a vanishing pivot.
std::vector<std::vector<double>> solve(std::vector<std::vector<double>> a,
                                       std::vector<std::vector<double>> b) {
  const std::size_t n = a.size();
  const std::size_t m = b.empty() ? 0 : b[0].size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-300)
      throw std::runtime_error("singular matrix in fit_map");
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    const double d = a[col][col];
    for (std::size_t c = col; c < n; ++c) a[col][c] /= d;
    for (std::size_t c = 0; c < m; ++c) b[col][c] /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      for (std::size_t c = 0; c < m; ++c) b[r][c] -= f * b[col][c];
    }
  }
  return b;
}

}  // namespace

LinearMap fit_map(
    std::span<const std::pair<std::vector<double>, std::vector<double>>>
        pairs) {
  if (pairs.empty()) throw std::invalid_argument("fit_map: no pairs");
  const std::size_t dh = pairs[0].first.size();
  const std::size_t dr = pairs[0].second.size();
  if (pairs.size() < dh + 1)
    throw std::invalid_argument("fit_map needs at least dim(H)+1 pairs");
  for (const auto& [h, r] : pairs)
    if (h.size() != dh || r.size() != dr)
      throw std::invalid_argument("fit_map: inconsistent dimensions");

  LinearMap map;
  map.mh.assign(dh, 0);
  map.mr.assign(dr, 0);
  for (const auto& [h, r] : pairs) {
    for (std::size_t i = 0; i < dh; ++i) map.mh[i] += h[i];
    for (std::size_t i = 0; i < dr; ++i) map.mr[i] += r[i];
  }
  const double n = double(pairs.size());
  for (auto& v : map.mh) v /= n;
  for (auto& v : map.mr) v /= n;

  // chh = cov(H, H), crh = cov(R, H)
  std::vector<std::vector<double>> chh(dh, std::vector<double>(dh, 0));
  std::vector<std::vector<double>> crh(dr, std::vector<double>(dh, 0));
  for (const auto& [h, r] : pairs) {
    for (std::size_t i = 0; i < dh; ++i) {
      const double hi = h[i] - map.mh[i];
      for (std::size_t j = 0; j < dh; ++j)
        chh[i][j] += hi * (h[j] - map.mh[j]);
      for (std::size_t j = 0; j < dr; ++j)
        crh[j][i] += (r[j] - map.mr[j]) * hi;
    }
  }
  for (auto& row : chh)
    for (auto& v : row) v /= n;
  for (auto& row : crh)
    for (auto& v : row) v /= n;

  double trace = 0;
  for (std::size_t i = 0; i < dh; ++i) trace += chh[i][i];
  // crude conditioning probe: retry with ridge if the plain solve fails or
  // the matrix is obviously degenerate
  auto attempt = [&](double ridge) {
    auto reg = chh;
    for (std::size_t i = 0; i < dh; ++i) reg[i][i] += ridge;
    // solve chh^T X = crh^T, i.e. X = crh * chh^-1 (chh symmetric)
    std::vector<std::vector<double>> rhs(dh, std::vector<double>(dr));
    for (std::size_t i = 0; i < dh; ++i)
      for (std::size_t j = 0; j < dr; ++j) rhs[i][j] = crh[j][i];
    auto x = solve(std::move(reg), std::move(rhs));
    std::vector<std::vector<double>> t(dr, std::vector<double>(dh));
    for (std::size_t i = 0; i < dr; ++i)
      for (std::size_t j = 0; j < dh; ++j) t[i][j] = x[j][i];
    for (const auto& row : t)
      for (double v : row)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite map");
    return t;
  };
  try {
    map.t = attempt(0.0);
  } catch (const std::runtime_error&) {
    const double ridge = trace > 0 ? 1e-6 * trace / double(dh) : 1e-6;
    map.t = attempt(ridge);
  }
  return map;
}

std::vector<double> map_heart_to_resp(const LinearMap& map,
                                      std::span<const double> heart) {
  if (heart.size() != map.mh.size())
    throw std::invalid_argument("heart vector dimension mismatch");
  std::vector<double> fr(map.mr);
  for (std::size_t i = 0; i < map.t.size(); ++i)
    for (std::size_t j = 0; j < heart.size(); ++j)
      fr[i] += map.t[i][j] * (heart[j] - map.mh[j]);
  return fr;
}

double skew_score(const LinearMap& map, std::span<const double> fr) {
  if (fr.size() != map.mr.size())
    throw std::invalid_argument("feature vector dimension mismatch");
  double s = 0;
  for (std::size_t i = 0; i < fr.size(); ++i)
    s = std::max(s, std::fabs(fr[i] - map.mr[i]));
  return s;
}

SkewClass classify_feature_vector(const LinearMap& map,
                                  std::span<const double> fr, double tau) {
  return skew_score(map, fr) > tau ? SkewClass::Skewed : SkewClass::Within;
}

void save_map(const LinearMap& map, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write map file: " + file.string());
  out.precision(17);
  out << "linmap 1\n" << map.mr.size() << ' ' << map.mh.size() << '\n';
  for (const auto& row : map.t) {
    for (std::size_t j = 0; j < row.size(); ++j)
      out << (j ? " " : "") << row[j];
    out << '\n';
  }
  for (std::size_t j = 0; j < map.mh.size(); ++j)
    out << (j ? " " : "") << map.mh[j];
  out << '\n';
  for (std::size_t j = 0; j < map.mr.size(); ++j)
    out << (j ? " " : "") << map.mr[j];
  out << '\n';
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

LinearMap load_map(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open map file: " + file.string());
  std::string magic;
  int version = 0;
  std::size_t dr = 0, dh = 0;
  in >> magic >> version >> dr >> dh;
  if (magic != "linmap" || version != 1)
    throw std::runtime_error("bad map file header: " + file.string());
  LinearMap map;
  map.t.assign(dr, std::vector<double>(dh));
  map.mh.assign(dh, 0);
  map.mr.assign(dr, 0);
  for (auto& row : map.t)
    for (auto& v : row) in >> v;
  for (auto& v : map.mh) in >> v;
  for (auto& v : map.mr) in >> v;
  if (!in) throw std::runtime_error("truncated map file: " + file.string());
  return map;
}

}  // namespace vf::features
