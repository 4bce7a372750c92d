#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

// Per-patient feature upkeep: most-recent respiration/heart feature vectors
// with staleness resets, a mean + 2 sigma skew threshold, and a least-squares
// linear map predicting respiration features from heart features.

namespace vf::features {

struct SkewThreshold {
  double mu_t = 0;
  double sigma_t = 0;  // population sigma
  double tau = 0;      // mu_t + 2*sigma_t
};

// Throws std::invalid_argument when history has fewer than 2 points.
SkewThreshold skew_threshold(std::span<const double> history);

enum class FeatureChannel { Respiration, Heart };

struct FeatureState {
  std::vector<double> rm, hm;  // most recent feature vectors
  std::vector<double> r0, h0;  // baselines used on staleness reset
  std::int64_t tr_ms = 0;      // last respiration capture
  std::int64_t th_ms = 0;      // last heart capture
  double timeout_s = 300;
};

// Applies one observation on `ch`, then resets any channel whose last
// capture is older than timeout_s (the updated channel never is). Value
// semantics: returns the new state.
// Throws std::invalid_argument on dimension mismatch.
FeatureState update_state(FeatureState state, FeatureChannel ch,
                          std::span<const double> obs, std::int64_t now_ms);

struct LinearMap {
  std::vector<std::vector<double>> t;  // dim(R) x dim(H)
  std::vector<double> mh, mr;          // channel means
};

// Least squares fit of R from H over (H, R) pairs: T = C_RH * C_HH^-1 with
// sample means subtracted. A near-singular heart covariance gets a small
// ridge (1e-6 * trace/dim). Needs at least dim(H)+1 pairs.
LinearMap fit_map(
    std::span<const std::pair<std::vector<double>, std::vector<double>>> pairs);

// Fr = T*(H - MH) + MR
std::vector<double> map_heart_to_resp(const LinearMap& map,
                                      std::span<const double> heart);

enum class SkewClass { Within, Skewed };

// Skewed iff the max absolute deviation of Fr from MR strictly exceeds tau.
SkewClass classify_feature_vector(const LinearMap& map,
                                  std::span<const double> fr, double tau);
double skew_score(const LinearMap& map, std::span<const double> fr);

void save_map(const LinearMap& map, const std::filesystem::path& file);
LinearMap load_map(const std::filesystem::path& file);

}  // namespace vf::features
