#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "vitalfuse/ingest.hpp"

namespace vf::ingest {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view shape_token(InjectionShape s) {
  switch (s) {
    case InjectionShape::Spike: return "spike";
    case InjectionShape::Ramp: return "ramp";
    case InjectionShape::Plateau: return "plateau";
  }
  return "?";
}

std::optional<InjectionShape> shape_from_token(std::string_view t) {
  if (t == "spike") return InjectionShape::Spike;
  if (t == "ramp") return InjectionShape::Ramp;
  if (t == "plateau") return InjectionShape::Plateau;
  return std::nullopt;
}

std::string ScenarioSpec::patient_id(int index) const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "p-%03d", index + 1);
  return buf;
}

int ScenarioSpec::age_of(int index) const {
  if (ages.empty()) return default_age;
  return ages[static_cast<std::size_t>(index) % ages.size()];
}

double ScenarioSpec::period_s(model::VitalKind k) const {
  auto it = period_overrides_s.find(k);
  return it == period_overrides_s.end() ? default_period_s : it->second;
}

Baseline ScenarioSpec::baseline_for(model::VitalKind k, int age_years,
                                    const model::NormalRanges& ranges) const {
  auto it = baseline_overrides.find(k);
  if (it != baseline_overrides.end()) return it->second;
  model::Interval iv = ranges.range_for_age(k, age_years);
  return {(iv.lo + iv.hi) / 2, 0.05 * iv.width()};
}

void ScenarioSpec::validate() const {
  if (patient_count < 1) throw std::invalid_argument("patient_count must be >= 1");
  if (!(duration_s > 0)) throw std::invalid_argument("duration_s must be > 0");
  if (!(default_period_s > 0))
    throw std::invalid_argument("sample_period_s must be > 0");
  for (auto [k, p] : period_overrides_s)
    if (!(p > 0))
      throw std::invalid_argument(std::string("sample period for ") +
                                  std::string(model::kind_token(k)) +
                                  " must be > 0");
  for (auto [k, b] : baseline_overrides)
    if (!std::isfinite(b.mean) || !(b.sigma >= 0))
      throw std::invalid_argument("baseline mean must be finite, sigma >= 0");
  for (int a : ages) model::bracket(a);  // throws when out of [0,130]
  model::bracket(default_age);
  for (const auto& inj : injections) {
    if (!(inj.start_s >= 0) || !(inj.duration_s > 0) ||
        inj.start_s + inj.duration_s > duration_s)
      throw std::invalid_argument("injection window outside [0, duration_s]");
    if (!std::isfinite(inj.magnitude))
      throw std::invalid_argument("injection magnitude must be finite");
    bool known = false;
    for (int i = 0; i < patient_count && !known; ++i)
      known = inj.patient_id == patient_id(i);
    if (!known)
      throw std::invalid_argument("injection targets unknown patient '" +
                                  inj.patient_id + "'");
  }
}

ScenarioSpec ScenarioSpec::from_json_text(std::string_view text) {
  json j = json::parse(text);
  ScenarioSpec s;
  s.patient_count = j.value("patient_count", s.patient_count);
  s.duration_s = j.value("duration_s", s.duration_s);
  s.rng_seed = j.value("rng_seed", s.rng_seed);
  s.start_ms = j.value("start_ms", s.start_ms);
  s.default_age = j.value("default_age", s.default_age);
  if (j.contains("ages")) s.ages = j["ages"].get<std::vector<int>>();
  if (j.contains("sample_period_s")) {
    const auto& p = j["sample_period_s"];
    if (p.is_number()) {
      s.default_period_s = p.get<double>();
    } else {
      for (auto& [tok, v] : p.items()) {
        auto k = model::kind_from_token(tok);
        if (!k) throw std::invalid_argument("unknown kind in sample_period_s: " + tok);
        s.period_overrides_s[*k] = v.get<double>();
      }
    }
  }
  if (j.contains("baseline")) {
    for (auto& [tok, v] : j["baseline"].items()) {
      auto k = model::kind_from_token(tok);
      if (!k) throw std::invalid_argument("unknown kind in baseline: " + tok);
      s.baseline_overrides[*k] = {v.at("mean").get<double>(),
                                  v.value("sigma", 0.0)};
    }
  }
  if (j.contains("injections")) {
    for (const auto& v : j["injections"]) {
      Injection inj;
      inj.patient_id = v.at("patient").get<std::string>();
      auto k = model::kind_from_token(v.at("kind").get<std::string>());
      if (!k) throw std::invalid_argument("unknown kind in injection");
      inj.kind = *k;
      inj.start_s = v.at("start_s").get<double>();
      inj.duration_s = v.at("duration_s").get<double>();
      auto sh = shape_from_token(v.at("shape").get<std::string>());
      if (!sh) throw std::invalid_argument("unknown injection shape");
      inj.shape = *sh;
      inj.magnitude = v.at("magnitude").get<double>();
      s.injections.push_back(std::move(inj));
    }
  }
  s.validate();
  return s;
}

ScenarioSpec ScenarioSpec::from_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open scenario file: " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string ScenarioSpec::to_json_text() const {
  ordered_json j;
  j["patient_count"] = patient_count;
  j["duration_s"] = duration_s;
  j["sample_period_s"] = default_period_s;
  if (!period_overrides_s.empty()) {
    ordered_json p;
    for (auto [k, v] : period_overrides_s)
      p[std::string(model::kind_token(k))] = v;
    j["sample_period_s"] = p;
  }
  j["rng_seed"] = rng_seed;
  j["start_ms"] = start_ms;
  j["default_age"] = default_age;
  if (!ages.empty()) j["ages"] = ages;
  if (!baseline_overrides.empty()) {
    ordered_json b;
    for (auto [k, v] : baseline_overrides)
      b[std::string(model::kind_token(k))] = {{"mean", v.mean},
                                              {"sigma", v.sigma}};
    j["baseline"] = b;
  }
  if (!injections.empty()) {
    j["injections"] = json::array();
    for (const auto& inj : injections) {
      ordered_json v;
      v["patient"] = inj.patient_id;
      v["kind"] = model::kind_token(inj.kind);
      v["start_s"] = inj.start_s;
      v["duration_s"] = inj.duration_s;
      v["shape"] = shape_token(inj.shape);
      v["magnitude"] = inj.magnitude;
      j["injections"].push_back(v);
    }
  }
  return j.dump(2);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Hand-rolled Box-Muller so streams stay reproducible across standard
// library implementations (std::normal_distribution is not pinned).
class Gauss {
 public:
  explicit Gauss(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    const double u1 = 1.0 - unit();  // (0, 1]
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_ = true;
    return r * std::cos(a);
  }

 private:
  double unit() { return double(rng_() >> 11) * 0x1.0p-53; }  // [0, 1)
  std::mt19937_64 rng_;
  bool have_ = false;
  double spare_ = 0;
};

double injection_offset(const Injection& inj, double t, double range_width) {
  if (t < inj.start_s || t >= inj.start_s + inj.duration_s) return 0;
  const double u = (t - inj.start_s) / inj.duration_s;
  double shape = 1.0;
  switch (inj.shape) {
    case InjectionShape::Spike: shape = 1.0 - std::fabs(2.0 * u - 1.0); break;
    case InjectionShape::Ramp: shape = u; break;
    case InjectionShape::Plateau: shape = 1.0; break;
  }
  return inj.magnitude * range_width * shape;
}

}  // namespace

std::vector<model::VitalSample> simulate(const ScenarioSpec& spec,
                                         const model::NormalRanges& ranges) {
  spec.validate();
  struct Keyed {
    std::int64_t ts_ms;
    int patient;
    int kind;
    model::VitalSample sample;
  };
  std::vector<Keyed> out;
  for (int p = 0; p < spec.patient_count; ++p) {
    const std::string pid = spec.patient_id(p);
    const int age = spec.age_of(p);
    for (auto kind : model::kAllVitalKinds) {
      const int ki = static_cast<int>(kind);
      // independent stream per (patient, kind)
      std::uint64_t s = spec.rng_seed;
      splitmix64(s);
      s ^= std::uint64_t(p + 1) * 0x9E3779B97F4A7C15ull;
      splitmix64(s);
      s ^= std::uint64_t(ki + 1) * 0xC2B2AE3D27D4EB4Full;
      Gauss gauss(splitmix64(s));

      const Baseline base = spec.baseline_for(kind, age, ranges);
      const double width = ranges.range_for_age(kind, age).width();
      const double period = spec.period_s(kind);
      std::uint64_t seq = 0;
      for (std::int64_t step = 0;; ++step) {
        const double t = double(step) * period;  // no accumulation drift
        if (t >= spec.duration_s) break;
        double v = base.mean + base.sigma * gauss();
        for (const auto& inj : spec.injections)
          if (inj.patient_id == pid && inj.kind == kind)
            v += injection_offset(inj, t, width);
        model::VitalSample sample{pid, kind,
                                  spec.start_ms + std::llround(t * 1000.0), v,
                                  seq++};
        out.push_back({sample.ts_ms, p, ki, std::move(sample)});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.ts_ms, a.patient, a.kind) <
           std::tie(b.ts_ms, b.patient, b.kind);
  });
  std::vector<model::VitalSample> samples;
  samples.reserve(out.size());
  for (auto& k : out) samples.push_back(std::move(k.sample));
  return samples;
}

}  // namespace vf::ingest
