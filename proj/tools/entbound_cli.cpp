#include <entbound/estimate.hpp>
#include <entbound/io.hpp>
#include <entbound/measures.hpp>
#include <entbound/optimize.hpp>
#include <entbound/oracle.hpp>

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <sstream>

#include "embedded_data.hpp"

using namespace entbound;

namespace {

// user-facing input problems map to exit code 2
struct UsageError : Error {
  using Error::Error;
};

struct Common {
  bool pretty = false;
  bool full_precision = false;
  OutputFormat fmt() const { return {full_precision}; }
};

struct StateArgs {
  std::string spec_file;
  std::string family;
  int n = 0;
  std::optional<int> k, rows, cols;
  std::optional<double> x, q;
  std::vector<double> c;
  std::string inner;

  void add(CLI::App* sub) {
    sub->add_option("--spec", spec_file, "state specification JSON file");
    sub->add_option("--family", family, "ghz, w, dicke, cluster_linear, cluster_rect, wei, smolin, singlet4, m3n, white_noise_mix");
    sub->add_option("--n", n, "number of qubits");
    sub->add_option("--k", k, "Dicke excitations");
    sub->add_option("--rows", rows, "cluster_rect rows");
    sub->add_option("--cols", cols, "cluster_rect columns");
    sub->add_option("--x", x, "Wei weight");
    sub->add_option("--q", q, "white_noise_mix weight of the inner state");
    sub->add_option("--inner", inner, "white_noise_mix inner family");
    sub->add_option("--c", c, "m3n triple c1,c2,c3")->delimiter(',')->expected(3);
  }

  json family_params(const std::string& name) const {
    json p = json::object();
    if (name == "dicke" && k) p["k"] = *k;
    if (name == "cluster_rect") {
      if (rows) p["rows"] = *rows;
      if (cols) p["cols"] = *cols;
    }
    if (name == "wei" && x) p["x"] = *x;
    if (name == "m3n" && !c.empty()) p["c"] = c;
    return p;
  }

  StateSpec spec() const {
    if (!spec_file.empty()) {
      if (!family.empty()) throw UsageError("use either --spec or --family, not both");
      return parse_state_spec(read_json_file(spec_file));
    }
    if (family.empty()) throw UsageError("a state is required: --spec FILE or --family NAME --n N");
    json j{{"family", family}, {"n", n}};
    json p = family_params(family);
    if (family == "white_noise_mix") {
      if (inner.empty()) throw UsageError("white_noise_mix needs --inner FAMILY");
      p["inner"] = {{"family", inner}, {"params", family_params(inner)}};
      if (q) p["q"] = *q;
    }
    j["params"] = p;
    return parse_state_spec(j);
  }

  DenseState build() const {
    auto s = spec();
    return build_state(s.family, s.n);
  }
};

struct LevelArgs {
  std::optional<int> M;
  std::vector<int> partition;

  void add(CLI::App* sub) {
    sub->add_option("--M", M, "number of parts (default: n)");
    sub->add_option("--partition", partition, "part sizes, e.g. 2,1,1")->delimiter(',');
  }

  SeparabilityLevel level(int n) const {
    SeparabilityLevel lvl = partition.empty() ? SeparabilityLevel::parts(M.value_or(n))
                                              : SeparabilityLevel::with_partition(partition);
    if (M && !partition.empty() && lvl.M != *M) throw UsageError("--M disagrees with --partition");
    lvl.validate(n);
    return lvl;
  }
};

struct OptArgs {
  std::string mode = "shared";
  OptimisationOptions opts;

  void add(CLI::App* sub) {
    sub->add_option("--mode", mode, "shared or per-qubit")->check(CLI::IsMember({"shared", "per-qubit", "per_qubit"}));
    sub->add_option("--restarts", opts.restarts, "multi-start count");
    sub->add_option("--seed", opts.seed, "random seed");
    sub->add_option("--grid", opts.grid_density, "grid points per angle");
  }

  OptimisationOptions options() const {
    OptimisationOptions o = opts;
    o.mode = mode == "shared" ? OptimisationOptions::Mode::SharedAngles : OptimisationOptions::Mode::PerQubit;
    o.validate();
    return o;
  }
};

Angles parse_angles(const std::vector<double>& a) {
  if (a.size() != 3) throw UsageError("--angles needs theta,psi,phi");
  return {a[0], a[1], a[2]};
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + scalar_text(v[i]);
    return s;
  }
  if (v.is_number_float()) {
    std::ostringstream ss;
    ss << std::setprecision(6) << v.get<double>();
    return ss.str();
  }
  return v.dump();
}

void print_flat(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) print_flat(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array() && !j.empty() && j[0].is_object()) {
    for (std::size_t i = 0; i < j.size(); ++i) print_flat(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out << prefix << ": " << scalar_text(j) << "\n";
  }
}

void print_table(const json& rows, std::ostream& out) {
  std::vector<std::string> cols;
  for (const auto& [k, v] : rows[0].items())
    if (!v.is_object()) cols.push_back(k);
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> width;
  for (const auto& c : cols) width.push_back(c.size());
  for (const auto& r : rows) {
    std::vector<std::string> line;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      line.push_back(r.contains(cols[i]) ? scalar_text(r[cols[i]]) : "");
      width[i] = std::max(width[i], line.back().size());
    }
    cells.push_back(line);
  }
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t i = 0; i < line.size(); ++i)
      out << std::left << std::setw(static_cast<int>(width[i]) + 2) << line[i];
    out << "\n";
  };
  emit(cols);
  for (const auto& line : cells) emit(line);
}

void emit(const json& j, const Common& common) {
  if (!common.pretty) {
    std::cout << j.dump() << "\n";
    return;
  }
  if (j.is_object() && j.contains("rows") && j["rows"].is_array() && !j["rows"].empty()) {
    for (const auto& [k, v] : j.items())
      if (k != "rows") std::cout << k << ": " << scalar_text(v) << "\n";
    print_table(j["rows"], std::cout);
  } else if (j.is_array() && !j.empty() && j[0].is_object()) {
    print_table(j, std::cout);
  } else {
    print_flat(j, "", std::cout);
  }
}

json triple_json(const CorrelationTriple& c, const OutputFormat& fmt) {
  return {number_json(c[0], fmt), number_json(c[1], fmt), number_json(c[2], fmt)};
}

json load_inputs(const std::string& path) {
  json data = path.empty() ? detail::parse_json_text(embedded::kExperimentalInputs, "<embedded data>")
                           : read_json_file(path);
  const auto& version = detail::require_field(data, "version");
  if (!version.is_number_integer() || version.get<int>() != 1) throw SchemaError("unsupported data version");
  return data;
}

json reproduce_table_iv_a(const json& data, const OutputFormat& fmt) {
  json rows = json::array();
  for (const auto& row : detail::require_field(data, "table_iv_a")) {
    const TripleEstimate est = parse_correlation_json(row);
    const auto rep = bound_with_uncertainty(est, est.n, SeparabilityLevel::parts(est.n), DistanceKind::Trace);
    json r{{"label", row.value("label", "")},
           {"n", est.n},
           {"c", triple_json(est.c, fmt)},
           {"sum_abs_c", number_json(est.c.abs_sum(), fmt)},
           {"E_trace", number_json(rep.value, fmt)},
           {"uncertainty", number_json(*rep.uncertainty, fmt)},
           {"method", *rep.method}};
    rows.push_back(r);
  }
  return {{"table", "table-iv-a"}, {"distance", "trace"}, {"level", "M=n"}, {"rows", rows}};
}

json reproduce_table_iv_b(const json& data, const OutputFormat& fmt, std::uint64_t seed) {
  json rows = json::array();
  const std::array<std::pair<const char*, DistanceKind>, 4> cols{{{"relative_entropy", DistanceKind::RelativeEntropy},
                                                                  {"trace", DistanceKind::Trace},
                                                                  {"infidelity", DistanceKind::Infidelity},
                                                                  {"bures", DistanceKind::SquaredBures}}};
  for (const auto& row : detail::require_field(data, "table_iv_b")) {
    const auto& f = detail::require_field(row, "fidelity");
    if (!f.is_number()) throw SchemaError("field 'fidelity' must be a number");
    const double sigma = row.value("sigma", 0.0);
    json r{{"label", row.value("label", "")}, {"n", row.value("n", 0)}, {"fidelity", number_json(f.get<double>(), fmt)}};
    PropagationOptions po;
    po.seed = seed;
    for (const auto& [name, d] : cols) {
      const auto rep = genuine_bound_with_uncertainty(f.get<double>(), sigma, d, po);
      r[name] = number_json(rep.value, fmt);
      r[std::string(name) + "_sigma"] = number_json(*rep.uncertainty, fmt);
    }
    rows.push_back(r);
  }
  return {{"table", "table-iv-b"}, {"level", "M=2"}, {"rows", rows}};
}

json reproduce_table_ii(const json& data, const OutputFormat& fmt, const OptimisationOptions& base) {
  json rows = json::array();
  for (const auto& row : detail::require_field(data, "table_ii")) {
    const StateSpec spec = parse_state_spec(row);
    OptimisationOptions o = base;
    const std::string mode = row.value("mode", "shared");
    o.mode = mode == "shared" ? OptimisationOptions::Mode::SharedAngles : OptimisationOptions::Mode::PerQubit;
    const auto res = optimise_triple(correlation_tensor(build_state(spec.family, spec.n)), o);
    json r{{"label", row.value("label", "")},
           {"n", spec.n},
           {"mode", mode},
           {"sum_abs_c", number_json(res.objective, fmt)},
           {"c", triple_json(res.triple, fmt)},
           {"rotation", rotation_json(res.rotation, spec.n, fmt)}};
    if (res.rotation.shared) {
      const Angles& a = res.rotation.shared_angles;
      r["angles"] = {number_json(a.theta, fmt), number_json(a.psi, fmt), number_json(a.phi, fmt)};
    }
    rows.push_back(r);
  }
  return {{"table", "table-ii"}, {"rows", rows}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-based multiparticle entanglement measures and bounds"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Common common;
  app.add_flag("--pretty", common.pretty, "human-readable output");
  app.add_flag("--full-precision", common.full_precision, "shortest round-trip numbers");

  // state
  auto* state_cmd = app.add_subcommand("state", "build a reference state and report its invariants");
  StateArgs state_args;
  state_args.add(state_cmd);
  bool dense = false;
  state_cmd->add_flag("--dense", dense, "include the density matrix");

  // triple
  auto* triple_cmd = app.add_subcommand("triple", "correlation triple of a state, optionally rotated");
  StateArgs triple_state;
  triple_state.add(triple_cmd);
  std::vector<double> triple_angles;
  triple_cmd->add_option("--angles", triple_angles, "shared rotation theta,psi,phi")->delimiter(',')->expected(3);

  // bound
  auto* bound_cmd = app.add_subcommand("bound", "lower bound from a correlation triple");
  int bound_n = 0;
  std::vector<double> bound_c, bound_sigma;
  std::string bound_input, bound_records, bound_distance = "trace", bound_method = "auto";
  PropagationOptions bound_prop;
  LevelArgs bound_level;
  bound_cmd->add_option("--n", bound_n, "number of qubits");
  bound_cmd->add_option("--c", bound_c, "triple c1,c2,c3")->delimiter(',')->expected(3);
  bound_cmd->add_option("--sigma", bound_sigma, "standard errors s1,s2,s3")->delimiter(',')->expected(3);
  bound_cmd->add_option("--input", bound_input, "correlation data file (JSON or CSV)");
  bound_cmd->add_option("--records", bound_records, "measurement records JSON (simulate output)");
  bound_cmd->add_option("--distance", bound_distance, "relative_entropy, trace, infidelity, bures, hellinger");
  bound_cmd->add_option("--method", bound_method, "uncertainty propagation")->check(CLI::IsMember({"auto", "delta", "bootstrap"}));
  bound_cmd->add_option("--seed", bound_prop.seed, "bootstrap seed");
  bound_cmd->add_option("--resamples", bound_prop.resamples, "bootstrap resamples");
  bound_level.add(bound_cmd);

  // genuine
  auto* genuine_cmd = app.add_subcommand("genuine", "genuine multiparticle entanglement of GHZ-diagonalised data");
  std::optional<double> genuine_p;
  double genuine_sigma = 0.0;
  std::string genuine_spectrum, genuine_distance = "trace";
  PropagationOptions genuine_prop;
  StateArgs genuine_state;
  genuine_cmd->add_option("--pmax", genuine_p, "largest GHZ overlap");
  genuine_cmd->add_option("--sigma", genuine_sigma, "standard error of p_max");
  genuine_cmd->add_option("--spectrum", genuine_spectrum, "GHZ spectrum JSON file");
  genuine_cmd->add_option("--distance", genuine_distance, "distance or 'all'");
  genuine_cmd->add_option("--seed", genuine_prop.seed, "bootstrap seed");
  genuine_state.add(genuine_cmd);

  // optimise
  auto* opt_cmd = app.add_subcommand("optimise", "maximise the triple objective or the GHZ overlap over local rotations");
  opt_cmd->alias("optimize");
  StateArgs opt_state;
  opt_state.add(opt_cmd);
  OptArgs opt_args;
  opt_args.add(opt_cmd);
  std::string opt_target = "triple";
  opt_cmd->add_option("--target", opt_target, "triple or overlap")->check(CLI::IsMember({"triple", "overlap"}));

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force check of a closed form");
  std::string oracle_kind = "octahedron", oracle_distance = "trace", oracle_spectrum;
  int oracle_n = 0;
  std::vector<double> oracle_c;
  OracleConfig oracle_cfg;
  oracle_cmd->add_option("--kind", oracle_kind, "octahedron or ghz")->check(CLI::IsMember({"octahedron", "ghz"}));
  oracle_cmd->add_option("--n", oracle_n, "number of qubits");
  oracle_cmd->add_option("--c", oracle_c, "triple c1,c2,c3")->delimiter(',')->expected(3);
  oracle_cmd->add_option("--spectrum", oracle_spectrum, "GHZ spectrum JSON file");
  oracle_cmd->add_option("--distance", oracle_distance, "distance");
  oracle_cmd->add_option("--grid", oracle_cfg.grid_resolution, "grid points per face edge");
  oracle_cmd->add_option("--rounds", oracle_cfg.refine_rounds, "refinement rounds");

  // reproduce
  auto* repro_cmd = app.add_subcommand("reproduce", "recompute the experimental and reference tables");
  std::string repro_table, repro_data;
  OptArgs repro_opt;
  repro_cmd->add_option("table", repro_table, "table-iv-a, table-iv-b or table-ii")
      ->required()
      ->check(CLI::IsMember({"table-iv-a", "table-iv-b", "table-ii"}));
  repro_cmd->add_option("--data", repro_data, "input data file (default: embedded copy)");
  repro_cmd->add_option("--restarts", repro_opt.opts.restarts, "multi-start count");
  repro_cmd->add_option("--seed", repro_opt.opts.seed, "random seed");
  repro_cmd->add_option("--grid", repro_opt.opts.grid_density, "grid points per angle");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "sample the three-setting measurement protocol");
  StateArgs sim_state;
  sim_state.add(sim_cmd);
  std::uint64_t sim_shots = 10000, sim_seed = 0;
  std::vector<double> sim_angles;
  sim_cmd->add_option("--shots", sim_shots, "shots per setting");
  sim_cmd->add_option("--seed", sim_seed, "random seed");
  sim_cmd->add_option("--angles", sim_angles, "shared rotation theta,psi,phi")->delimiter(',')->expected(3);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const OutputFormat fmt = common.fmt();
  try {
    if (*state_cmd) {
      const StateSpec spec = state_args.spec();
      const DenseState s = build_state(spec.family, spec.n);
      json out{{"state", state_spec_json(spec)}};
      out["triple"] = triple_json(correlation_triple(s), fmt);
      const auto diag = ghz_diagonalise(s);
      out["p_max"] = number_json(diag.p_max(), fmt);
      out["ghz_index"] = GHZBasisIndex::from_flat(diag.argmax()).label(spec.n);
      out["permutation_invariant"] = spec.family.permutation_invariant();
      if (dense) out["density"] = dense_json(s, fmt);
      emit(out, common);
    } else if (*triple_cmd) {
      const DenseState s = triple_state.build();
      CorrelationTriple c = correlation_triple(s);
      if (!triple_angles.empty())
        c = rotated_triple(correlation_tensor(s), LocalRotation::shared_rotation(parse_angles(triple_angles)));
      emit(correlation_json(TripleEstimate{s.n, c, {0, 0, 0}}, fmt), common);
    } else if (*bound_cmd) {
      const DistanceKind d = parse_distance(bound_distance);
      PropagationOptions po = bound_prop;
      po.mode = bound_method == "delta"       ? PropagationOptions::Mode::Delta
                : bound_method == "bootstrap" ? PropagationOptions::Mode::Bootstrap
                                              : PropagationOptions::Mode::Auto;
      std::vector<TripleEstimate> ests;
      const int sources = (!bound_c.empty()) + (!bound_input.empty()) + (!bound_records.empty());
      if (sources != 1) throw UsageError("give exactly one of --c, --input, --records");
      if (!bound_c.empty()) {
        if (bound_n < 1) throw UsageError("--c needs --n");
        TripleEstimate e{bound_n, CorrelationTriple(bound_c[0], bound_c[1], bound_c[2]), {0, 0, 0}};
        if (!bound_sigma.empty()) e.sigma = {bound_sigma[0], bound_sigma[1], bound_sigma[2]};
        ests.push_back(e);
      } else if (!bound_input.empty()) {
        ests = ingest_correlation_rows(bound_input);
      } else {
        json j = read_json_file(bound_records);
        ests.push_back(counts_to_triple(parse_records(j.is_object() ? detail::require_field(j, "records") : j)));
      }
      json out = json::array();
      for (const auto& e : ests) {
        if (bound_n && e.n != bound_n) throw UsageError("--n disagrees with the input data");
        out.push_back(report_json(bound_with_uncertainty(e, e.n, bound_level.level(e.n), d, po), fmt));
      }
      emit(out.size() == 1 ? out[0] : out, common);
    } else if (*genuine_cmd) {
      const int sources = genuine_p.has_value() + !genuine_spectrum.empty() +
                          (!genuine_state.family.empty() || !genuine_state.spec_file.empty());
      if (sources != 1) throw UsageError("give exactly one of --pmax, --spectrum, or a state");
      double p = 0.0;
      json extra = json::object();
      if (genuine_p) {
        p = *genuine_p;
      } else {
        const auto diag = genuine_spectrum.empty() ? ghz_diagonalise(genuine_state.build())
                                                   : parse_ghz_spectrum(read_json_file(genuine_spectrum));
        p = diag.p_max();
        extra["p_max"] = number_json(p, fmt);
        extra["ghz_index"] = GHZBasisIndex::from_flat(diag.argmax()).label(diag.n);
      }
      std::vector<DistanceKind> ds;
      if (genuine_distance == "all")
        ds.assign(kAllDistances.begin(), kAllDistances.end());
      else
        ds.push_back(parse_distance(genuine_distance));
      json out = json::array();
      for (auto d : ds) {
        json r = report_json(genuine_bound_with_uncertainty(p, genuine_sigma, d, genuine_prop), fmt);
        for (const auto& [k, v] : extra.items()) r[k] = v;
        out.push_back(r);
      }
      emit(out.size() == 1 ? out[0] : out, common);
    } else if (*opt_cmd) {
      const StateSpec spec = opt_state.spec();
      const DenseState s = build_state(spec.family, spec.n);
      const auto o = opt_args.options();
      json out{{"state", state_spec_json(spec)}, {"target", opt_target}};
      if (opt_target == "triple") {
        const auto res = optimise_triple(correlation_tensor(s), o);
        out["objective"] = number_json(res.objective, fmt);
        out["triple"] = triple_json(res.triple, fmt);
        out["rotation"] = rotation_json(res.rotation, spec.n, fmt);
      } else {
        const auto res = optimise_ghz_overlap(s, o);
        out["p_max"] = number_json(res.p_max, fmt);
        out["ghz_index"] = res.index.label(spec.n);
        out["rotation"] = rotation_json(res.rotation, spec.n, fmt);
      }
      emit(out, common);
    } else if (*oracle_cmd) {
      const DistanceKind d = parse_distance(oracle_distance);
      double formula = 0.0, oracle = 0.0;
      if (oracle_kind == "octahedron") {
        if (oracle_c.empty() || oracle_n < 2) throw UsageError("octahedron oracle needs --n and --c");
        const M3NState s{oracle_n, CorrelationTriple(oracle_c[0], oracle_c[1], oracle_c[2])};
        formula = detail::level_value(s.c, s.n, SeparabilityLevel::parts(s.n), d);
        oracle = brute_min_over_octahedron(s, d, oracle_cfg);
      } else {
        if (oracle_spectrum.empty()) throw UsageError("ghz oracle needs --spectrum");
        const auto s = parse_ghz_spectrum(read_json_file(oracle_spectrum));
        formula = genuine_ghz_diag(s, d).value;
        oracle = brute_min_biseparable_ghz(s, d, oracle_cfg);
      }
      json out{{"formula_value", number_json(formula, fmt)},
               {"oracle_value", number_json(oracle, fmt)},
               {"deviation", number_json(std::abs(oracle - formula), fmt)},
               {"config",
                {{"grid_resolution", oracle_cfg.grid_resolution},
                 {"refine_rounds", oracle_cfg.refine_rounds},
                 {"tolerance", oracle_cfg.tolerance}}}};
      emit(out, common);
    } else if (*repro_cmd) {
      const json data = load_inputs(repro_data);
      json out;
      if (repro_table == "table-iv-a") out = reproduce_table_iv_a(data, fmt);
      if (repro_table == "table-iv-b") out = reproduce_table_iv_b(data, fmt, repro_opt.opts.seed);
      if (repro_table == "table-ii") {
        repro_opt.opts.validate();
        out = reproduce_table_ii(data, fmt, repro_opt.opts);
      }
      out["data_version"] = data["version"];
      emit(out, common);
    } else if (*sim_cmd) {
      const DenseState s = sim_state.build();
      const LocalRotation rot =
          sim_angles.empty() ? LocalRotation::identity() : LocalRotation::shared_rotation(parse_angles(sim_angles));
      const auto recs = simulate_measurements(s, rot, sim_shots, sim_seed);
      json out{{"records", records_json(recs)}, {"estimate", correlation_json(counts_to_triple(recs), fmt)},
               {"seed", sim_seed}};
      emit(out, common);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
