#include "vitalfuse/fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

namespace vf::fusion {

Frame::Frame(std::vector<std::string> labels) {
  if (labels.empty() || labels.size() > 16)
    throw std::invalid_argument("frame needs 1..16 labels");
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j)
      if (labels[i] == labels[j])
        throw std::invalid_argument("duplicate frame label: " + labels[i]);
  labels_ = std::make_shared<const std::vector<std::string>>(std::move(labels));
}

std::optional<std::size_t> Frame::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels_->size(); ++i)
    if ((*labels_)[i] == label) return i;
  return std::nullopt;
}

std::string Frame::set_name(std::uint32_t mask) const {
  if (mask == full_mask()) return "Theta";
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(mask >> i & 1u)) continue;
    if (!first) out += ',';
    out += label(i);
    first = false;
  }
  out += '}';
  return out;
}

const Frame& Frame::risk() {
  static const Frame f({"Low", "Medium", "High"});
  return f;
}

MassFunction::MassFunction(Frame frame,
                           std::vector<std::pair<std::uint32_t, double>> masses)
    : frame_(std::move(frame)) {
  const std::uint32_t full = frame_.full_mask();
  std::map<std::uint32_t, double> acc;
  double total = 0;
  for (auto [set, m] : masses) {
    if (set == 0 && m != 0)
      throw std::invalid_argument("mass on the empty set");
    if ((set & ~full) != 0)
      throw std::invalid_argument("focal set outside the frame");
    if (!(m >= 0) || !std::isfinite(m))
      throw std::invalid_argument("mass must be finite and >= 0");
    if (m > 0) {
      acc[set] += m;
      total += m;
    }
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("masses must sum to 1 (got " +
                                std::to_string(total) + ")");
  focal_.assign(acc.begin(), acc.end());
  for (auto& [set, m] : focal_) m /= total;
}

MassFunction MassFunction::vacuous(Frame frame) {
  const std::uint32_t full = frame.full_mask();
  return MassFunction(std::move(frame), {{full, 1.0}});
}

double MassFunction::mass(std::uint32_t set) const {
  auto it = std::lower_bound(
      focal_.begin(), focal_.end(), set,
      [](const auto& p, std::uint32_t s) { return p.first < s; });
  return (it != focal_.end() && it->first == set) ? it->second : 0.0;
}

MassFunction MassFunction::discounted(double r) const {
  if (!(r >= 0.0 && r <= 1.0))
    throw std::invalid_argument("reliability must be in [0,1]");
  std::vector<std::pair<std::uint32_t, double>> out;
  double theta = 1.0 - r;
  for (auto [set, m] : focal_) {
    if (set == frame_.full_mask())
      theta += r * m;
    else
      out.emplace_back(set, r * m);
  }
  out.emplace_back(frame_.full_mask(), theta);
  return MassFunction(frame_, std::move(out));
}

std::string MassFunction::to_text() const {
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (auto [set, m] : focal_) {
    if (!first) os << ", ";
    os << frame_.set_name(set) << ": " << m;
    first = false;
  }
  return os.str();
}

double belief(const MassFunction& m, std::uint32_t set) {
  if ((set & ~m.frame().full_mask()) != 0)
    throw std::invalid_argument("set outside the frame");
  double b = 0;
  for (auto [s, v] : m.focal())
    if ((s & ~set) == 0) b += v;
  return b;
}

double plausibility(const MassFunction& m, std::uint32_t set) {
  if ((set & ~m.frame().full_mask()) != 0)
    throw std::invalid_argument("set outside the frame");
  double p = 0;
  for (auto [s, v] : m.focal())
    if ((s & set) != 0) p += v;
  return p;
}

BeliefInterval uncertainty(const MassFunction& m, std::uint32_t set) {
  BeliefInterval iv;
  iv.spt = belief(m, set);
  iv.pls = plausibility(m, set);
  iv.u = iv.pls - iv.spt;
  return iv;
}

MassFunction combine(const MassFunction& a, const MassFunction& b) {
  if (!(a.frame() == b.frame()))
    throw std::invalid_argument("combine: mismatched frames");
  // the vacuous mass is the neutral element; short-circuiting keeps the
  // identity bit-exact instead of round-tripping through renormalization
  const auto vacuous = [](const MassFunction& m) {
    return m.focal().size() == 1 &&
           m.focal().front().first == m.frame().full_mask();
  };
  if (vacuous(b)) return a;
  if (vacuous(a)) return b;
  std::map<std::uint32_t, double> acc;
  double conflict = 0;
  for (auto [sa, ma] : a.focal()) {
    for (auto [sb, mb] : b.focal()) {
      const std::uint32_t inter = sa & sb;
      const double p = ma * mb;
      if (inter == 0)
        conflict += p;
      else
        acc[inter] += p;
    }
  }
  if (conflict >= 1.0 - 1e-12) throw ConflictError(conflict);
  const double scale = 1.0 / (1.0 - conflict);
  std::vector<std::pair<std::uint32_t, double>> out;
  out.reserve(acc.size());
  for (auto [set, m] : acc) out.emplace_back(set, m * scale);
  return MassFunction(a.frame(), std::move(out));
}

MassFunction combine_all(std::span<const MassFunction> sources) {
  if (sources.empty())
    throw std::invalid_argument("combine_all: need at least one source");
  MassFunction acc = sources[0];
  for (std::size_t i = 1; i < sources.size(); ++i) {
    try {
      acc = combine(acc, sources[i]);
    } catch (const ConflictError& e) {
      throw ConflictError(e.k, static_cast<int>(i));
    }
  }
  return acc;
}

MassFunction vital_to_mass(model::VitalGroup, model::Band band,
                           double reliability) {
  if (!(reliability >= 0.0 && reliability <= 1.0))
    throw std::invalid_argument("reliability must be in [0,1]");
  const Frame& f = Frame::risk();
  const std::uint32_t kLow = 1u << 0, kMed = 1u << 1, kHigh = 1u << 2;
  const double r = reliability;
  std::vector<std::pair<std::uint32_t, double>> m;
  switch (band) {
    case model::Band::Normal:
      m = {{kLow, r}};
      break;
    case model::Band::Medium:
      m = {{kMed, r}};
      break;
    case model::Band::High:
    case model::Band::Low:
      m = {{kHigh, r / 2}, {kMed | kHigh, r / 2}};
      break;
    case model::Band::Highest:
    case model::Band::Lowest:
      m = {{kHigh, r}};
      break;
  }
  m.emplace_back(f.full_mask(), 1.0 - r);
  return MassFunction(f, std::move(m));
}

std::pair<model::RiskLevel, BeliefInterval> decide(const MassFunction& m) {
  if (!(m.frame() == Frame::risk()))
    throw std::invalid_argument("decide expects the risk frame");
  // Singleton with maximal belief; the most severe level within a small
  // tie window of the max wins, so float noise never downgrades.
  constexpr double kTie = 1e-9;
  std::array<double, 3> bel;
  for (int i = 0; i < 3; ++i) bel[i] = belief(m, 1u << i);
  const double top = std::max({bel[0], bel[1], bel[2]});
  int best = 0;
  for (int i = 2; i >= 0; --i) {
    if (bel[i] >= top - kTie) {
      best = i;
      break;
    }
  }
  auto level = static_cast<model::RiskLevel>(best);
  return {level, uncertainty(m, 1u << best)};
}

}  // namespace vf::fusion
