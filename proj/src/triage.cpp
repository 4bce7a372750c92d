#include "vitalfuse/triage.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace vf::triage {

using model::Band;
using model::RiskLevel;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr Band L = Band::Low, LL = Band::Lowest, N = Band::Normal,
               M = Band::Medium, H = Band::High, HH = Band::Highest;

RuleRow row(Band resp, Band ph, Band heart, Band bp, Band temp,
            RiskLevel risk) {
  return {{std::array<Band, 5>{resp, ph, heart, bp, temp}}, risk};
}

}  // namespace

const std::array<RuleRow, 15>& rule_table() {
  static const std::array<RuleRow, 15> t = {{
      row(L, N, N, N, H, RiskLevel::High),
      row(LL, N, N, N, HH, RiskLevel::High),
      row(M, N, N, N, M, RiskLevel::Medium),
      row(H, N, N, N, N, RiskLevel::Low),
      row(N, H, H, H, H, RiskLevel::High),
      row(N, H, N, H, M, RiskLevel::High),
      row(H, H, N, H, HH, RiskLevel::Highest),
      row(M, M, M, M, M, RiskLevel::Medium),
      row(M, M, L, H, N, RiskLevel::Medium),
      row(H, N, M, M, N, RiskLevel::Medium),
      row(L, L, N, L, H, RiskLevel::High),
      row(LL, LL, H, L, HH, RiskLevel::Highest),
      row(N, LL, H, N, H, RiskLevel::High),
      row(N, N, N, H, M, RiskLevel::Medium),
      row(N, N, M, LL, N, RiskLevel::Medium),
  }};
  return t;
}

std::string_view path_name(TriagePath p) {
  return p == TriagePath::RuleTable ? "rule_table" : "ds_fallback";
}

namespace {

bool any_extreme(const model::BandedVitals& bv) {
  for (Band b : bv.bands)
    if (model::band_rank(b) == 3) return true;
  return false;
}

// Fused fallback risk before the envelope lift.
RiskLevel fused_risk(const model::BandedVitals& bv,
                     const std::array<double, 5>& rel,
                     std::optional<fusion::BeliefInterval>* interval_out) {
  std::vector<fusion::MassFunction> sources;
  sources.reserve(5);
  for (int g = 0; g < model::kVitalGroupCount; ++g)
    sources.push_back(fusion::vital_to_mass(static_cast<model::VitalGroup>(g),
                                            bv.bands[g], rel[g]));
  try {
    auto fused = fusion::combine_all(sources);
    auto [level, interval] = fusion::decide(fused);
    if (interval_out) *interval_out = interval;
    if (level == RiskLevel::High && any_extreme(bv)) return RiskLevel::Highest;
    return level;
  } catch (const fusion::ConflictError&) {
    // only reachable with fully reliable, flatly contradicting sensors;
    // fall back to the worst band on record
    if (interval_out) *interval_out = std::nullopt;
    int worst = 0;
    for (Band b : bv.bands) worst = std::max(worst, model::band_rank(b));
    switch (worst) {
      case 0: return RiskLevel::Low;
      case 1: return RiskLevel::Medium;
      case 2: return RiskLevel::High;
      default: return RiskLevel::Highest;
    }
  }
}

// Single-step strictly-less-severe neighbors of a band (same side).
std::vector<Band> milder_neighbors(Band b) {
  switch (b) {
    case Band::Medium: return {Band::Normal};
    case Band::High: return {Band::Medium};
    case Band::Low: return {Band::Medium};
    case Band::Highest: return {Band::High};
    case Band::Lowest: return {Band::Low};
    case Band::Normal: return {};
  }
  return {};
}

int rank_sum(const model::BandedVitals& bv) {
  int s = 0;
  for (Band b : bv.bands) s += model::band_rank(b);
  return s;
}

}  // namespace

Classifier::Classifier(std::array<double, model::kVitalGroupCount> reliabilities)
    : reliabilities_(reliabilities) {
  for (double r : reliabilities_)
    if (!(r >= 0.0 && r <= 1.0))
      throw std::invalid_argument("reliability must be in [0,1]");

  rule_row_.fill(-1);
  const auto& rules = rule_table();
  for (int i = 0; i < static_cast<int>(rules.size()); ++i)
    rule_row_[model::encode_bands(rules[i].pattern)] = static_cast<std::int8_t>(i);

  // Fallback patterns in ascending severity-rank order, so every milder
  // single-step neighbor is final before its upgrades are considered. The
  // envelope forces monotonicity: worsening one band (same side) never
  // lowers the fallback risk. Raw fused decisions lack this property
  // because concentrated high evidence can beat split medium/high evidence.
  std::array<std::vector<int>, 16> by_rank;  // rank sums 0..15
  for (int code = 0; code < 7776; ++code)
    by_rank[rank_sum(model::decode_bands(code))].push_back(code);
  for (const auto& bucket : by_rank) {
    for (int code : bucket) {
      const model::BandedVitals bv = model::decode_bands(code);
      if (rule_row_[code] >= 0) {
        risk_[code] =
            static_cast<std::uint8_t>(rule_table()[rule_row_[code]].risk);
        continue;
      }
      RiskLevel r = fused_risk(bv, reliabilities_, nullptr);
      for (int g = 0; g < model::kVitalGroupCount; ++g) {
        for (Band nb : milder_neighbors(bv.bands[g])) {
          model::BandedVitals milder = bv;
          milder.bands[g] = nb;
          const int mcode = model::encode_bands(milder);
          if (rule_row_[mcode] >= 0) continue;  // rule rows are pinned
          r = std::max(r, static_cast<RiskLevel>(risk_[mcode]));
        }
      }
      risk_[code] = static_cast<std::uint8_t>(r);
    }
  }
}

ClassifyResult Classifier::classify(const model::BandedVitals& bands) const {
  const int code = model::encode_bands(bands);
  ClassifyResult res;
  res.risk = static_cast<RiskLevel>(risk_[code]);
  if (rule_row_[code] >= 0) {
    res.path = TriagePath::RuleTable;
    res.matched_row = rule_row_[code];
    return res;
  }
  res.path = TriagePath::DsFallback;
  std::optional<fusion::BeliefInterval> interval;
  fused_risk(bands, reliabilities_, &interval);
  res.interval = interval;
  return res;
}

namespace {

// decision texts, indexed [risk: high/medium/low][group]
const std::array<std::array<std::string, 5>, 3>& texts() {
  static const std::array<std::array<std::string, 5>, 3> t = {{
      // High-risk row
      {{"Must put a patient on ventilator and requires making lung CT",
        "Should to Take medicine and follow the Blood acidity",
        "Taking medicine with Antiviral or Anti-malaria",
        "Taking medicine with Antiviral or Anti-malaria",
        "Taking Antipyretic"}},
      // Medium-risk row
      {{"Must record to avoid reaching the high-risk level", "Follow Acidity",
        "Taking medicine", "Taking medicine",
        "Taking Antipyretic and observing it continuously"}},
      // Low-Risk row
      {{"Reassured case", "Stable case", "Follow the heart pulse rate",
        "Follow the stable case", "Follow the stable case"}},
  }};
  return t;
}

int risk_text_row(RiskLevel r) {
  switch (r) {
    case RiskLevel::Highest:
    case RiskLevel::High: return 0;
    case RiskLevel::Medium: return 1;
    case RiskLevel::Low: return 2;
  }
  throw std::invalid_argument("bad RiskLevel");
}

}  // namespace

const std::string& decision_text(RiskLevel risk, model::VitalGroup g) {
  return texts()[risk_text_row(risk)][static_cast<int>(g)];
}

std::vector<Recommendation> recommend(
    RiskLevel risk, const std::set<model::VitalGroup>& contributing) {
  std::vector<Recommendation> out;
  if (contributing.empty() && risk == RiskLevel::Low) {
    for (auto g : model::kAllVitalGroups)
      out.push_back({g, decision_text(RiskLevel::Low, g)});
    return out;
  }
  for (auto g : contributing) out.push_back({g, decision_text(risk, g)});
  return out;
}

std::string_view color_name(Color c) {
  switch (c) {
    case Color::Red: return "red";
    case Color::Yellow: return "yellow";
    case Color::Green: return "green";
  }
  return "?";
}

Color color(RiskLevel risk) {
  switch (risk) {
    case RiskLevel::Highest:
    case RiskLevel::High: return Color::Red;
    case RiskLevel::Medium: return Color::Yellow;
    case RiskLevel::Low: return Color::Green;
  }
  throw std::invalid_argument("bad RiskLevel");
}

TriageReport make_report(const std::string& patient_id, std::int64_t ts_ms,
                         const model::BandedVitals& bands,
                         const Classifier& classifier,
                         std::optional<model::BandedVitals> predicted_bands) {
  TriageReport rep;
  rep.patient_id = patient_id;
  rep.ts_ms = ts_ms;
  rep.bands = bands;
  ClassifyResult cr = classifier.classify(bands);
  rep.risk = cr.risk;
  rep.path = cr.path;
  rep.matched_row = cr.matched_row;
  rep.interval = cr.interval;
  rep.escalated = cr.risk == RiskLevel::Highest;
  std::set<model::VitalGroup> contributing;
  for (int g = 0; g < model::kVitalGroupCount; ++g)
    if (bands.bands[g] != Band::Normal)
      contributing.insert(static_cast<model::VitalGroup>(g));
  rep.contributing.assign(contributing.begin(), contributing.end());
  rep.recommendations = recommend(rep.risk, contributing);
  rep.display_color = color(rep.risk);
  if (predicted_bands) {
    rep.predicted_bands = predicted_bands;
    rep.predicted_risk = classifier.classify(*predicted_bands).risk;
  }
  return rep;
}

std::string TriageReport::to_json_line() const {
  ordered_json j;
  j["type"] = "triage";
  j["patient"] = patient_id;
  j["ts_ms"] = ts_ms;
  ordered_json jb;
  for (int g = 0; g < model::kVitalGroupCount; ++g)
    jb[std::string(model::group_token(static_cast<model::VitalGroup>(g)))] =
        model::band_name(bands.bands[g]);
  j["bands"] = jb;
  j["risk"] = model::risk_name(risk);
  j["path"] = path_name(path);
  if (matched_row) j["matched_row"] = *matched_row;
  if (interval)
    j["interval"] = {{"spt", interval->spt}, {"pls", interval->pls},
                     {"u", interval->u}};
  j["escalated"] = escalated;
  j["color"] = color_name(display_color);
  j["contributing"] = json::array();
  for (auto g : contributing)
    j["contributing"].push_back(model::group_token(g));
  j["recommendations"] = json::array();
  for (const auto& r : recommendations)
    j["recommendations"].push_back(
        {{"vital", model::group_token(r.vital)}, {"text", r.text}});
  if (predicted_bands) {
    ordered_json pb;
    for (int g = 0; g < model::kVitalGroupCount; ++g)
      pb[std::string(model::group_token(static_cast<model::VitalGroup>(g)))] =
          model::band_name(predicted_bands->bands[g]);
    j["predicted_bands"] = pb;
    j["predicted_risk"] = model::risk_name(*predicted_risk);
  }
  return j.dump();
}

TriageReport TriageReport::from_json_line(std::string_view line) {
  json j = json::parse(line);
  if (j.value("type", "") != "triage")
    throw std::invalid_argument("not a triage record");
  TriageReport rep;
  rep.patient_id = j.at("patient").get<std::string>();
  rep.ts_ms = j.at("ts_ms").get<std::int64_t>();
  auto parse_bands = [](const json& jb) {
    model::BandedVitals bv;
    for (int g = 0; g < model::kVitalGroupCount; ++g) {
      const auto tok =
          std::string(model::group_token(static_cast<model::VitalGroup>(g)));
      auto b = model::band_from_name(jb.at(tok).get<std::string>());
      if (!b) throw std::invalid_argument("bad band name in record");
      bv.bands[g] = *b;
    }
    return bv;
  };
  rep.bands = parse_bands(j.at("bands"));
  auto risk = model::risk_from_name(j.at("risk").get<std::string>());
  if (!risk) throw std::invalid_argument("bad risk name in record");
  rep.risk = *risk;
  rep.path = j.at("path").get<std::string>() == "rule_table"
                 ? TriagePath::RuleTable
                 : TriagePath::DsFallback;
  if (j.contains("matched_row")) rep.matched_row = j["matched_row"].get<int>();
  if (j.contains("interval")) {
    fusion::BeliefInterval iv;
    iv.spt = j["interval"].at("spt").get<double>();
    iv.pls = j["interval"].at("pls").get<double>();
    iv.u = j["interval"].at("u").get<double>();
    rep.interval = iv;
  }
  rep.escalated = j.value("escalated", false);
  for (const auto& g : j.at("contributing")) {
    auto gr = model::group_from_token(g.get<std::string>());
    if (gr) rep.contributing.push_back(*gr);
  }
  for (const auto& r : j.at("recommendations")) {
    auto gr = model::group_from_token(r.at("vital").get<std::string>());
    if (!gr) throw std::invalid_argument("bad vital group in record");
    rep.recommendations.push_back({*gr, r.at("text").get<std::string>()});
  }
  if (j.contains("predicted_bands")) {
    rep.predicted_bands = parse_bands(j["predicted_bands"]);
    auto pr = model::risk_from_name(j.at("predicted_risk").get<std::string>());
    if (!pr) throw std::invalid_argument("bad predicted risk in record");
    rep.predicted_risk = *pr;
  }
  const auto c = j.at("color").get<std::string>();
  rep.display_color =
      c == "red" ? Color::Red : c == "yellow" ? Color::Yellow : Color::Green;
  return rep;
}

}  // namespace vf::triage
