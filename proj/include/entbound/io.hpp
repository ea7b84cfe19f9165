#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "estimate.hpp"
#include "locc.hpp"
#include "measures.hpp"
#include "pauli.hpp"
#include "qstate.hpp"

namespace entbound {

using json = nlohmann::json;

struct OutputFormat {
  bool full_precision = false;
};

// 6 significant digits unless full precision is requested
inline double format_number(double v, const OutputFormat& fmt) {
  if (fmt.full_precision || !std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

inline json number_json(double v, const OutputFormat& fmt) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return format_number(v, fmt);
}

// --- state specifications -------------------------------------------------

struct StateSpec {
  StateFamily family;
  int n = 2;
};

namespace detail {

inline double number_field(const json& params, const std::string& key, const std::string& where) {
  const auto& v = require_field(params, key);
  if (!v.is_number()) throw SchemaError("field '" + where + key + "' must be a number");
  return v.get<double>();
}

inline int int_field(const json& params, const std::string& key, const std::string& where) {
  const auto& v = require_field(params, key);
  if (!v.is_number_integer()) throw SchemaError("field '" + where + key + "' must be an integer");
  return static_cast<int>(v.get<long long>());
}

inline StateFamily parse_family(const json& j, const std::string& where) {
  const auto& f = require_field(j, "family");
  if (!f.is_string()) throw SchemaError("field '" + where + "family' must be a string");
  const std::string name = f.get<std::string>();
  const json params = j.contains("params") ? j["params"] : json::object();
  if (!params.is_object()) throw SchemaError("field '" + where + "params' must be an object");
  const std::string pw = where + "params.";
  if (name == "ghz") return StateFamily::ghz();
  if (name == "w") return StateFamily::w();
  if (name == "dicke") return StateFamily::dicke(int_field(params, "k", pw));
  if (name == "cluster_linear") return StateFamily::cluster_linear();
  if (name == "cluster_rect")
    return StateFamily::cluster_rect(params.contains("rows") ? int_field(params, "rows", pw) : 0,
                                     params.contains("cols") ? int_field(params, "cols", pw) : 0);
  if (name == "wei") return StateFamily::wei(number_field(params, "x", pw));
  if (name == "smolin") return StateFamily::smolin();
  if (name == "singlet4") return StateFamily::singlet4();
  if (name == "m3n") {
    auto c = number_triple(require_field(params, "c"), pw + "c");
    return StateFamily::m3n(CorrelationTriple(c[0], c[1], c[2]));
  }
  if (name == "white_noise_mix") {
    const auto& inner = require_field(params, "inner");
    return StateFamily::white_noise_mix(parse_family(inner, pw + "inner."), number_field(params, "q", pw));
  }
  throw SchemaError("unknown family '" + name + "'");
}

inline json family_json(const StateFamily& f) {
  json j{{"family", f.name()}};
  json p = json::object();
  switch (f.tag) {
    case StateFamily::Tag::Dicke: p["k"] = f.k; break;
    case StateFamily::Tag::ClusterRect:
      if (f.rows) p["rows"] = f.rows;
      if (f.cols) p["cols"] = f.cols;
      break;
    case StateFamily::Tag::Wei: p["x"] = f.x; break;
    case StateFamily::Tag::M3N: p["c"] = {f.triple[0], f.triple[1], f.triple[2]}; break;
    case StateFamily::Tag::WhiteNoiseMix:
      p["inner"] = family_json(*f.inner);
      p["q"] = f.q;
      break;
    default: break;
  }
  if (!p.empty()) j["params"] = p;
  return j;
}

}  // namespace detail

// {"family": "wei", "n": 4, "params": {"x": 0.75}}
inline StateSpec parse_state_spec(const json& j) {
  StateSpec s;
  s.n = detail::qubit_count(j);
  try {
    s.family = detail::parse_family(j, "");
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(std::string("invalid state parameters: ") + e.what());
  }
  return s;
}

inline json state_spec_json(const StateSpec& s) {
  json j = detail::family_json(s.family);
  j["n"] = s.n;
  return j;
}

// row-major complex pairs
inline json dense_json(const DenseState& s, const OutputFormat& fmt) {
  json rho = json::array();
  for (Eigen::Index i = 0; i < s.rho.rows(); ++i)
    for (Eigen::Index k = 0; k < s.rho.cols(); ++k)
      rho.push_back({number_json(s.rho(i, k).real(), fmt), number_json(s.rho(i, k).imag(), fmt)});
  return {{"n", s.n}, {"dim", s.rho.rows()}, {"rho", rho}};
}

inline DenseState parse_dense(const json& j) {
  const int n = detail::qubit_count(j);
  require_dense(n);
  const auto& rho = detail::require_field(j, "rho");
  const auto d = static_cast<Eigen::Index>(dim_of(n));
  if (!rho.is_array() || rho.size() != static_cast<std::size_t>(d * d))
    throw SchemaError("field 'rho' must hold 4^n complex pairs");
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d * d; ++i) {
    const auto& e = rho[static_cast<std::size_t>(i)];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw SchemaError("field 'rho[" + std::to_string(i) + "]' must be [re, im]");
    m(i / d, i % d) = cplx(e[0].get<double>(), e[1].get<double>());
  }
  try {
    return DenseState::make(n, m);
  } catch (const Error& e) {
    throw SchemaError(std::string("field 'rho': ") + e.what());
  }
}

// --- reports --------------------------------------------------------------

inline json report_json(const EntanglementReport& r, const OutputFormat& fmt) {
  json j{{"value", number_json(r.value, fmt)},
         {"distance", to_string(r.distance)},
         {"M", r.level.M},
         {"kind", to_string(r.kind)}};
  if (!r.level.partition.empty()) j["partition"] = r.level.partition;
  if (r.uncertainty) j["uncertainty"] = number_json(*r.uncertainty, fmt);
  if (r.method) j["method"] = *r.method;
  if (r.seed) j["seed"] = *r.seed;
  if (r.clipped_fraction) j["clipped_fraction"] = number_json(*r.clipped_fraction, fmt);
  return j;
}

// --- correlation data -----------------------------------------------------

inline json correlation_json(const TripleEstimate& e, const OutputFormat& fmt) {
  json j{{"n", e.n}, {"c", json::array()}, {"sigma", json::array()}};
  for (int k = 0; k < 3; ++k) {
    j["c"].push_back(number_json(e.c[k], fmt));
    j["sigma"].push_back(number_json(e.sigma[k], fmt));
  }
  return j;
}

// --- GHZ spectra ----------------------------------------------------------

// {"n": 3, "p": {"000+": 0.97375, ...}}; absent labels are 0
inline GHZDiagonalState parse_ghz_spectrum(const json& j) {
  const int n = detail::qubit_count(j);
  if (n > 24) throw SchemaError("field 'n' too large for a GHZ spectrum");
  const auto& p = detail::require_field(j, "p");
  if (!p.is_object()) throw SchemaError("field 'p' must be an object of label -> weight");
  std::vector<double> w(dim_of(n), 0.0);
  for (const auto& [label, v] : p.items()) {
    if (!v.is_number()) throw SchemaError("field 'p." + label + "' must be a number");
    try {
      w[GHZBasisIndex::parse(label, n).flat()] = v.get<double>();
    } catch (const IndexError& e) {
      throw SchemaError("field 'p." + label + "': " + e.what());
    }
  }
  try {
    return GHZDiagonalState::make(n, w);
  } catch (const Error& e) {
    throw SchemaError(std::string("field 'p': ") + e.what());
  }
}

inline json ghz_spectrum_json(const GHZDiagonalState& s, const OutputFormat& fmt, bool sparse = true) {
  json p = json::object();
  for (std::size_t f = 0; f < s.p.size(); ++f)
    if (!sparse || s.p[f] != 0.0) p[GHZBasisIndex::from_flat(f).label(s.n)] = number_json(s.p[f], fmt);
  return {{"n", s.n}, {"p", p}};
}

// --- rotations and measurement records ------------------------------------

inline json angles_json(const Angles& a, const OutputFormat& fmt) {
  return {{"theta", number_json(a.theta, fmt)}, {"psi", number_json(a.psi, fmt)}, {"phi", number_json(a.phi, fmt)}};
}

inline json rotation_json(const LocalRotation& r, int n, const OutputFormat& fmt) {
  if (r.shared) return {{"mode", "shared"}, {"angles", angles_json(r.shared_angles, fmt)}};
  json qs = json::array();
  for (int q = 0; q < n; ++q) qs.push_back(angles_json(r.angles_for(q), fmt));
  return {{"mode", "per_qubit"}, {"angles", qs}};
}

inline json records_json(const std::vector<MeasurementRecord>& recs) {
  json out = json::array();
  for (const auto& r : recs) {
    json counts = json::object();
    for (const auto& [k, v] : r.counts) counts[k] = v;
    out.push_back({{"n", r.n}, {"axis", r.axis}, {"shots", r.shots}, {"counts", counts}});
  }
  return out;
}

inline std::vector<MeasurementRecord> parse_records(const json& j) {
  if (!j.is_array()) throw SchemaError("measurement records must be a JSON array");
  std::vector<MeasurementRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = "records[" + std::to_string(i) + "].";
    MeasurementRecord r;
    r.n = detail::qubit_count(j[i]);
    r.axis = detail::int_field(j[i], "axis", at);
    const auto& shots = detail::require_field(j[i], "shots");
    if (!shots.is_number_unsigned()) throw SchemaError("field '" + at + "shots' must be a positive integer");
    r.shots = shots.get<std::uint64_t>();
    const auto& counts = detail::require_field(j[i], "counts");
    if (!counts.is_object()) throw SchemaError("field '" + at + "counts' must be an object");
    for (const auto& [k, v] : counts.items()) {
      if (!v.is_number_unsigned()) throw SchemaError("field '" + at + "counts." + k + "' must be a count");
      r.counts[k] = v.get<std::uint64_t>();
    }
    try {
      r.validate();
    } catch (const Error& e) {
      throw SchemaError(at.substr(0, at.size() - 1) + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline json read_json_file(const std::string& path) { return detail::parse_json_text(detail::slurp(path), path); }

}  // namespace entbound
