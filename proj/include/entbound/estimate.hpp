#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "linalg.hpp"
#include "measures.hpp"
#include "parallel.hpp"
#include "pauli.hpp"
#include "qstate.hpp"
#include "rng.hpp"

namespace entbound {

// One product-Pauli setting: every qubit measures sigma_axis after `rotation`.
struct MeasurementRecord {
  int n = 1;
  int axis = 3;
  LocalRotation rotation = LocalRotation::identity();
  std::uint64_t shots = 0;
  std::map<std::string, std::uint64_t> counts;  // '+'/'-' per qubit

  void validate() const {
    if (axis < 1 || axis > 3) throw ParameterError("measurement axis must be 1, 2 or 3");
    if (shots == 0) throw ParameterError("measurement record has no shots");
    if (counts.empty()) throw ParameterError("measurement record has empty counts");
    std::uint64_t total = 0;
    for (const auto& [outcome, k] : counts) {
      if (static_cast<int>(outcome.size()) != n ||
          outcome.find_first_not_of("+-") != std::string::npos)
        throw ParameterError("outcome '" + outcome + "' is not a string of n signs");
      total += k;
    }
    if (total != shots) throw ParameterError("counts sum to " + std::to_string(total) + ", not " + std::to_string(shots));
  }
};

struct TripleEstimate {
  int n = 2;
  CorrelationTriple c;
  std::array<double, 3> sigma{0.0, 0.0, 0.0};

  void validate() const {
    for (double s : sigma)
      if (!(s >= 0.0)) throw ParameterError("standard errors must be nonnegative");
  }
};

struct PropagationOptions {
  enum class Mode { Auto, Delta, Bootstrap };

  Mode mode = Mode::Auto;
  int resamples = 10000;
  std::uint64_t seed = 0;
};

namespace detail {

inline constexpr int kBootstrapChunks = 16;

// rotates sigma_axis onto sigma_3: H for x, H S^dagger for y
inline Matrix2 readout_basis_change(int axis) {
  const double a = 1 / std::sqrt(2.0);
  Matrix2 h;
  h << a, a, a, -a;
  if (axis == 1) return h;
  if (axis == 2) {
    Matrix2 sdg;
    sdg << 1, 0, 0, cplx(0, -1);
    return h * sdg;
  }
  return Matrix2::Identity();
}

inline std::string outcome_label(std::uint64_t x, int n) {
  std::string s(static_cast<std::size_t>(n), '+');
  for (int q = 0; q < n; ++q)
    if (qubit_bit(x, n, q)) s[static_cast<std::size_t>(q)] = '-';
  return s;
}

inline double gaussian(CounterRng& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  return std::sqrt(-2 * std::log(u1)) * std::cos(2 * kPi * rng.uniform());
}

struct BootstrapResult {
  double sigma = 0.0;
  double clipped_fraction = 0.0;
};

// `draw` maps an rng to (value, clipped?)
template <class Draw>
BootstrapResult bootstrap(const PropagationOptions& opts, Draw&& draw) {
  if (opts.resamples < 2) throw ParameterError("bootstrap needs at least 2 resamples");
  const int chunks = kBootstrapChunks;
  std::vector<std::vector<double>> values(chunks);
  std::vector<int> clipped(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    CounterRng rng(opts.seed, 0xB007 + c);
    const int begin = opts.resamples * static_cast<int>(c) / chunks;
    const int end = opts.resamples * static_cast<int>(c + 1) / chunks;
    for (int i = begin; i < end; ++i) {
      auto [v, clip] = draw(rng);
      values[c].push_back(v);
      clipped[c] += clip ? 1 : 0;
    }
  });
  double sum = 0.0, sq = 0.0;
  int total_clipped = 0;
  for (int c = 0; c < chunks; ++c) {
    for (double v : values[c]) sum += v;
    total_clipped += clipped[c];
  }
  const double mean = sum / opts.resamples;
  for (const auto& chunk : values)
    for (double v : chunk) sq += (v - mean) * (v - mean);
  return {std::sqrt(sq / (opts.resamples - 1)), static_cast<double>(total_clipped) / opts.resamples};
}

inline double sign_of(double v) { return v < 0 ? -1.0 : 1.0; }

// gradient of the active closed form in c (n even: f_D(h); n odd: trace branches)
inline std::array<double, 3> bound_gradient(const CorrelationTriple& c, int n, DistanceKind d) {
  std::array<double, 3> g{};
  const double h = h_value(c);
  if (n % 2 == 0) {
    const double fp = f_D_derivative(h, d);
    for (int j = 0; j < 3; ++j) g[j] = 0.5 * fp * sign_of(c[j]);
    return g;
  }
  const OddTraceResult r = odd_trace_formula(c);
  if (r.branch == OddBranch::Face) {
    for (int j = 0; j < 3; ++j) g[j] = sign_of(c[j]) / (2 * std::sqrt(3.0));
    return g;
  }
  const int k = r.edge;
  const double a = std::abs(c[k]);
  const double b = c.abs_sum() - a - 1.0;
  const double big_r = std::sqrt(a * a + 0.5 * b * b);
  for (int j = 0; j < 3; ++j) g[j] = sign_of(c[j]) * (j == k ? a / (2 * big_r) : b / (4 * big_r));
  return g;
}

}  // namespace detail

inline std::vector<MeasurementRecord> simulate_measurements(const DenseState& state, const LocalRotation& rot,
                                                         std::uint64_t shots, std::uint64_t seed) {
  require_dense(state.n);
  if (shots < 1) throw ParameterError("simulation needs at least one shot");
  const int n = state.n;
  const DenseState rotated = rotate_state(state, rot);
  std::vector<MeasurementRecord> out(3);
  parallel_for(3, [&](std::size_t s) {
    const int axis = static_cast<int>(s) + 1;
    Matrix rho = rotated.rho;
    const Matrix2 b = detail::readout_basis_change(axis);
    for (int q = 0; q < n; ++q) conjugate_qubit(rho, n, q, b);
    std::vector<double> cdf(static_cast<std::size_t>(rho.rows()));
    double acc = 0.0;
    for (Eigen::Index x = 0; x < rho.rows(); ++x) cdf[static_cast<std::size_t>(x)] = acc += std::max(0.0, rho(x, x).real());
    std::vector<std::uint64_t> hist(cdf.size(), 0);
    CounterRng rng(seed, static_cast<std::uint64_t>(axis));
    for (std::uint64_t i = 0; i < shots; ++i) {
      const double u = rng.uniform() * acc;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end()) --it;
      ++hist[static_cast<std::size_t>(it - cdf.begin())];
    }
    MeasurementRecord& rec = out[s];
    rec.n = n;
    rec.axis = axis;
    rec.rotation = rot;
    rec.shots = shots;
    for (std::size_t x = 0; x < hist.size(); ++x)
      if (hist[x]) rec.counts[detail::outcome_label(x, n)] = hist[x];
  });
  return out;
}

inline TripleEstimate counts_to_triple(const std::vector<MeasurementRecord>& records) {
  if (records.size() != 3) throw ParameterError("need one record per axis");
  TripleEstimate est;
  est.n = records.front().n;
  std::array<double, 3> mean{};
  std::array<bool, 3> seen{};
  for (const auto& rec : records) {
    rec.validate();
    if (rec.n != est.n) throw ParameterError("records disagree on n");
    const int j = rec.axis - 1;
    if (seen[j]) throw ParameterError("duplicate record for axis " + std::to_string(rec.axis));
    seen[j] = true;
    double m = 0.0;
    for (const auto& [outcome, k] : rec.counts) {
      const auto minus = std::count(outcome.begin(), outcome.end(), '-');
      m += (minus % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(k);
    }
    m /= static_cast<double>(rec.shots);
    mean[j] = m;
    est.sigma[j] = std::sqrt(std::max(0.0, 1 - m * m) / static_cast<double>(rec.shots));
  }
  est.c = CorrelationTriple(mean[0], mean[1], mean[2]);
  return est;
}

inline EntanglementReport bound_with_uncertainty(const TripleEstimate& est, int n, const SeparabilityLevel& level,
                                                 DistanceKind d, const PropagationOptions& opts = {}) {
  est.validate();
  EntanglementReport rep = lower_bound_from_triple(est.c, n, level, d);
  const auto& s = est.sigma;
  const double sigma_h = 0.5 * std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
  if (sigma_h == 0.0 || !level.nontrivial(n)) {
    rep.uncertainty = 0.0;
    rep.method = "delta";
    return rep;
  }
  const double h = h_value(est.c);
  bool near_kink = std::abs(h) < 2 * sigma_h || 1 - h < 2 * sigma_h;
  for (int j = 0; j < 3; ++j) {
    near_kink = near_kink || std::abs(est.c[j]) < 2 * s[j];
    if (n % 2 == 1) near_kink = near_kink || std::abs(1.5 * std::abs(est.c[j]) - h) < 2 * sigma_h;
  }
  if (opts.mode == PropagationOptions::Mode::Auto && !near_kink && h <= kSeparableTol) {
    rep.uncertainty = 0.0;
    rep.method = "delta";
    return rep;
  }
  if (opts.mode == PropagationOptions::Mode::Delta ||
      (opts.mode == PropagationOptions::Mode::Auto && !near_kink)) {
    if (h <= kSeparableTol) throw DomainError("delta method needs a nonzero bound");
    const auto g = detail::bound_gradient(est.c, n, d);
    double var = 0.0;
    for (int j = 0; j < 3; ++j) var += g[j] * g[j] * s[j] * s[j];
    rep.uncertainty = std::sqrt(var);
    rep.method = "delta";
    return rep;
  }
  auto res = detail::bootstrap(opts, [&](CounterRng& rng) {
    std::array<double, 3> v{};
    bool clip = false;
    for (int j = 0; j < 3; ++j) {
      v[j] = est.c[j] + s[j] * detail::gaussian(rng);
      if (std::abs(v[j]) > 1) {
        v[j] = std::clamp(v[j], -1.0, 1.0);
        clip = true;
      }
    }
    return std::pair{detail::level_value(CorrelationTriple(v[0], v[1], v[2]), n, level, d), clip};
  });
  rep.uncertainty = res.sigma;
  rep.method = "bootstrap";
  rep.seed = opts.seed;
  rep.clipped_fraction = res.clipped_fraction;
  return rep;
}

inline EntanglementReport genuine_bound_with_uncertainty(double p_max, double sigma, DistanceKind d,
                                                         const PropagationOptions& opts = {}) {
  if (!(p_max >= 0.0 && p_max <= 1.0)) throw ParameterError("p_max must lie in [0, 1]");
  if (!(sigma >= 0.0)) throw ParameterError("sigma must be nonnegative");
  auto value = [&](double p) { return p > 0.5 ? g_D(p, d) : 0.0; };
  EntanglementReport rep{value(p_max), d, SeparabilityLevel::parts(2), ReportKind::LowerBound, {}, {}, {}, {}};
  if (sigma == 0.0) {
    rep.uncertainty = 0.0;
    rep.method = "delta";
    return rep;
  }
  const bool near_kink = std::abs(p_max - 0.5) < 2 * sigma || (d != DistanceKind::Trace && 1 - p_max < 2 * sigma);
  if (opts.mode == PropagationOptions::Mode::Auto && !near_kink && p_max <= 0.5) {
    rep.uncertainty = 0.0;
    rep.method = "delta";
    return rep;
  }
  if (opts.mode == PropagationOptions::Mode::Delta ||
      (opts.mode == PropagationOptions::Mode::Auto && !near_kink)) {
    if (p_max <= 0.5) throw DomainError("delta method needs p_max > 1/2");
    rep.uncertainty = std::abs(g_D_derivative(p_max, d)) * sigma;
    rep.method = "delta";
    return rep;
  }
  auto res = detail::bootstrap(opts, [&](CounterRng& rng) {
    double p = p_max + sigma * detail::gaussian(rng);
    const bool clip = p < 0 || p > 1;
    p = std::clamp(p, 0.0, 1.0);
    return std::pair{value(p), clip};
  });
  rep.uncertainty = res.sigma;
  rep.method = "bootstrap";
  rep.seed = opts.seed;
  rep.clipped_fraction = res.clipped_fraction;
  return rep;
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object()) throw SchemaError("expected a JSON object");
  auto it = j.find(field);
  if (it == j.end()) throw SchemaError("missing field '" + field + "'");
  return *it;
}

inline std::array<double, 3> number_triple(const nlohmann::json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) throw SchemaError("field '" + field + "' must be an array of 3 numbers");
  std::array<double, 3> out{};
  for (std::size_t j = 0; j < 3; ++j) {
    if (!v[j].is_number()) throw SchemaError("field '" + field + "[" + std::to_string(j) + "]' must be a number");
    out[j] = v[j].get<double>();
  }
  return out;
}

inline int qubit_count(const nlohmann::json& j) {
  const auto& v = require_field(j, "n");
  if (!v.is_number_integer() || v.get<long long>() < 1) throw SchemaError("field 'n' must be a positive integer");
  return static_cast<int>(v.get<long long>());
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json parse_json_text(const std::string& text, const std::string& where) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset -> line number
    const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
    const auto line = 1 + std::count(upto.begin(), upto.end(), '\n');
    throw SchemaError(where + ":" + std::to_string(line) + ": invalid JSON");
  }
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

}  // namespace detail

// {"n": 4, "c": [c1, c2, c3], "sigma": [s1, s2, s3]}; sigma defaults to zeros
inline TripleEstimate parse_correlation_json(const nlohmann::json& j) {
  TripleEstimate est;
  est.n = detail::qubit_count(j);
  const auto c = detail::number_triple(detail::require_field(j, "c"), "c");
  try {
    est.c = CorrelationTriple(c[0], c[1], c[2]);
  } catch (const Error& e) {
    throw SchemaError(std::string("field 'c': ") + e.what());
  }
  if (j.contains("sigma")) est.sigma = detail::number_triple(j["sigma"], "sigma");
  for (double s : est.sigma)
    if (!(s >= 0)) throw SchemaError("field 'sigma' must be nonnegative");
  return est;
}

// header n,c1,c2,c3,s1,s2,s3 (sigma columns optional), one estimate per row
inline std::vector<TripleEstimate> parse_correlation_csv(const std::string& text, const std::string& where = "<csv>") {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  std::vector<TripleEstimate> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = detail::split_csv(line);
    if (header.empty()) {
      header = cells;
      const std::vector<std::string> full{"n", "c1", "c2", "c3", "s1", "s2", "s3"};
      const std::vector<std::string> bare(full.begin(), full.begin() + 4);
      if (header != full && header != bare)
        throw SchemaError(where + ":" + std::to_string(lineno) + ": header must be n,c1,c2,c3,s1,s2,s3");
      continue;
    }
    if (cells.size() != header.size())
      throw SchemaError(where + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                        " columns, got " + std::to_string(cells.size()));
    std::vector<double> v;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cells[k], &used));
        if (used != cells[k].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw SchemaError(where + ":" + std::to_string(lineno) + ": column '" + header[k] + "' is not a number");
      }
    }
    nlohmann::json j{{"n", static_cast<long long>(v[0])}, {"c", {v[1], v[2], v[3]}}};
    if (v[0] != std::floor(v[0])) throw SchemaError(where + ":" + std::to_string(lineno) + ": column 'n' must be an integer");
    if (v.size() == 7) j["sigma"] = {v[4], v[5], v[6]};
    try {
      out.push_back(parse_correlation_json(j));
    } catch (const SchemaError& e) {
      throw SchemaError(where + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (header.empty()) throw SchemaError(where + ": empty CSV");
  return out;
}

inline std::vector<TripleEstimate> ingest_correlation_rows(const std::string& path) {
  const std::string text = detail::slurp(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '['))
    try {
      auto j = detail::parse_json_text(text, path);
      std::vector<TripleEstimate> out;
      if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
          try {
            out.push_back(parse_correlation_json(j[i]));
          } catch (const SchemaError& e) {
            throw SchemaError(path + ": entry " + std::to_string(i) + ": " + e.what());
          }
        }
      } else {
        out.push_back(parse_correlation_json(j));
      }
      return out;
    } catch (const SchemaError& e) {
      const std::string msg = e.what();
      if (msg.rfind(path, 0) == 0) throw;
      throw SchemaError(path + ": " + msg);
    }
  return parse_correlation_csv(text, path);
}

inline TripleEstimate ingest_correlation_file(const std::string& path) {
  auto rows = ingest_correlation_rows(path);
  if (rows.size() != 1)
    throw SchemaError(path + ": expected one correlation record, found " + std::to_string(rows.size()));
  return rows.front();
}

}  // namespace entbound
