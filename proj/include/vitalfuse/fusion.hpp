#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vitalfuse/model.hpp"

// Evidence fusion over a finite frame of discernment. Subsets of the frame
// are bitmasks (frames are small; at most 16 labels). Mass functions assign
// basic belief to focal subsets; Dempster's rule combines independent
// sources with conflict renormalization.

namespace vf::fusion {

class Frame {
 public:
  explicit Frame(std::vector<std::string> labels);
  std::size_t size() const { return labels_->size(); }
  const std::string& label(std::size_t i) const { return (*labels_)[i]; }
  std::optional<std::size_t> index_of(std::string_view label) const;
  std::uint32_t full_mask() const {
    return static_cast<std::uint32_t>((1u << labels_->size()) - 1);
  }
  // Human-readable subset, e.g. "{Low,Medium}"; full mask prints as "Theta".
  std::string set_name(std::uint32_t mask) const;

  // The three-level risk frame used for triage: Low, Medium, High.
  static const Frame& risk();

  friend bool operator==(const Frame& a, const Frame& b) {
    return a.labels_ == b.labels_ || *a.labels_ == *b.labels_;
  }

 private:
  std::shared_ptr<const std::vector<std::string>> labels_;
};

// Thrown by combine when sources are in total conflict (K ~ 1).
// combine_all sets source_index to the position of the operand whose fold
// step conflicted.
struct ConflictError : std::runtime_error {
  explicit ConflictError(double k_, int source_index_ = -1)
      : std::runtime_error(
            "total conflict between evidence sources (K=" + std::to_string(k_) +
            (source_index_ >= 0
                 ? ", while folding source " + std::to_string(source_index_)
                 : "") +
            ")"),
        k(k_),
        source_index(source_index_) {}
  double k;
  int source_index;
};

class MassFunction {
 public:
  // Validates: masks within the frame, no mass on the empty set, masses
  // non-negative, total within 1e-9 of 1 (then renormalized exactly).
  MassFunction(Frame frame, std::vector<std::pair<std::uint32_t, double>> masses);
  static MassFunction vacuous(Frame frame);

  const Frame& frame() const { return frame_; }
  double mass(std::uint32_t set) const;
  // Focal sets with positive mass, ascending by mask.
  std::span<const std::pair<std::uint32_t, double>> focal() const {
    return focal_;
  }

  // Reliability discounting: masses scale by r, the deficit moves to the
  // full frame. r must lie in [0, 1].
  MassFunction discounted(double r) const;

  std::string to_text() const;

 private:
  Frame frame_;
  std::vector<std::pair<std::uint32_t, double>> focal_;
};

// Total mass of focal sets contained in `set`.
double belief(const MassFunction& m, std::uint32_t set);
// Total mass of focal sets intersecting `set`.
double plausibility(const MassFunction& m, std::uint32_t set);

struct BeliefInterval {
  double spt = 0;  // support (belief)
  double pls = 0;  // plausibility
  double u = 0;    // pls - spt
};
BeliefInterval uncertainty(const MassFunction& m, std::uint32_t set);

// Dempster's rule: unnormalized intersection products, conflict mass K on
// the empty set dropped and the rest scaled by 1/(1-K).
// Throws ConflictError when K >= 1 - 1e-12, std::invalid_argument on
// mismatched frames.
MassFunction combine(const MassFunction& a, const MassFunction& b);
MassFunction combine_all(std::span<const MassFunction> sources);

// Evidence a banded vital contributes on the risk frame, discounted by the
// sensor reliability r in [0, 1]:
//   Normal          -> {Low}: r
//   Medium          -> {Medium}: r
//   High / Low      -> {High}: r/2, {Medium,High}: r/2
//   Highest / Lowest-> {High}: r
// with the remaining 1-r on the whole frame.
MassFunction vital_to_mass(model::VitalGroup group, model::Band band,
                           double reliability);

// Decision on the risk frame: the singleton with maximal belief; within a
// 1e-9 tie window the more severe level wins. Returns the level and its
// belief/plausibility interval.
std::pair<model::RiskLevel, BeliefInterval> decide(const MassFunction& m);

}  // namespace vf::fusion
