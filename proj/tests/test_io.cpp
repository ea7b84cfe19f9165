#include <entbound/io.hpp>

#include <gtest/gtest.h>

using namespace entbound;

TEST(Format, SixSignificantDigits) {
  const OutputFormat six{};
  EXPECT_EQ(format_number(0.040000000001, six), 0.04);
  EXPECT_EQ(format_number(0.3294127789076801, six), 0.329413);
  EXPECT_EQ(format_number(-1234567.0, six), -1234570.0);
  EXPECT_EQ(format_number(0.3294127789076801, {true}), 0.3294127789076801);
  EXPECT_EQ(json(format_number(0.1 + 0.2, six)).dump(), "0.3");
  EXPECT_EQ(number_json(std::numeric_limits<double>::infinity(), six), "inf");
}

TEST(StateSpec, ParsesExample) {
  auto s = parse_state_spec(json::parse(R"({"family": "wei", "n": 4, "params": {"x": 0.75}})"));
  EXPECT_EQ(s.n, 4);
  EXPECT_EQ(s.family.tag, StateFamily::Tag::Wei);
  EXPECT_EQ(s.family.x, 0.75);
}

TEST(StateSpec, RoundTripsEveryFamily) {
  const std::vector<StateSpec> specs = {
      {StateFamily::ghz(), 3},
      {StateFamily::w(), 4},
      {StateFamily::dicke(2), 4},
      {StateFamily::cluster_linear(), 5},
      {StateFamily::cluster_rect(2, 3), 6},
      {StateFamily::wei(0.6), 4},
      {StateFamily::smolin(), 4},
      {StateFamily::singlet4(), 4},
      {StateFamily::m3n({0.5, -0.2, 0.1}), 4},
      {StateFamily::white_noise_mix(StateFamily::dicke(1), 0.4), 3}};
  for (const auto& s : specs) {
    auto back = parse_state_spec(state_spec_json(s));
    EXPECT_EQ(state_spec_json(back), state_spec_json(s));
    EXPECT_LT((build_state(back.family, back.n).rho - build_state(s.family, s.n).rho).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(StateSpec, SchemaErrors) {
  EXPECT_THROW(parse_state_spec(json::parse(R"({"family": "wei", "n": 4})")), SchemaError);
  EXPECT_THROW(parse_state_spec(json::parse(R"({"family": "zebra", "n": 4})")), SchemaError);
  EXPECT_THROW(parse_state_spec(json::parse(R"({"family": "ghz"})")), SchemaError);
  EXPECT_THROW(parse_state_spec(json::parse(R"({"family": "ghz", "n": "four"})")), SchemaError);
  EXPECT_THROW(parse_state_spec(json::parse(R"({"family": "m3n", "n": 4, "params": {"c": [0.1, 0.2]}})")), SchemaError);
}

TEST(Dense, RoundTrip) {
  auto s = build_state(StateFamily::w(), 3);
  auto j = dense_json(s, {true});
  EXPECT_EQ(j["rho"].size(), 64u);
  auto back = parse_dense(j);
  EXPECT_EQ((back.rho - s.rho).cwiseAbs().maxCoeff(), 0.0);
  j["rho"][0] = {2.0, 0.0};
  EXPECT_THROW(parse_dense(j), SchemaError);
}

TEST(Report, Fields) {
  EntanglementReport r{0.0400000001, DistanceKind::Trace, SeparabilityLevel::parts(3), ReportKind::LowerBound,
                       0.00244949, std::string("delta"), {}, {}};
  auto j = report_json(r, {});
  EXPECT_EQ(j["value"], 0.04);
  EXPECT_EQ(j["distance"], "trace");
  EXPECT_EQ(j["M"], 3);
  EXPECT_EQ(j["kind"], "lower_bound");
  EXPECT_EQ(j["uncertainty"], 0.00244949);
  EXPECT_FALSE(j.contains("seed"));
}

TEST(GhzSpectrum, SparseParseAndEmit) {
  auto s = parse_ghz_spectrum(json::parse(R"({"n": 3, "p": {"000+": 0.97375, "000-": 0.02625}})"));
  EXPECT_EQ(s.p.size(), 8u);
  EXPECT_EQ(s.p[GHZBasisIndex::parse("000-", 3).flat()], 0.02625);
  EXPECT_EQ(s.p[GHZBasisIndex::parse("011+", 3).flat()], 0.0);
  auto j = ghz_spectrum_json(s, {true});
  EXPECT_EQ(j["p"].size(), 2u);
  EXPECT_EQ(parse_ghz_spectrum(j).p, s.p);
  EXPECT_EQ(ghz_spectrum_json(s, {true}, false)["p"].size(), 8u);
}

TEST(GhzSpectrum, SchemaErrors) {
  EXPECT_THROW(parse_ghz_spectrum(json::parse(R"({"n": 3, "p": {"100+": 1.0}})")), SchemaError);
  EXPECT_THROW(parse_ghz_spectrum(json::parse(R"({"n": 3, "p": {"000+": 0.5}})")), SchemaError);
  EXPECT_THROW(parse_ghz_spectrum(json::parse(R"({"n": 3, "p": [0.5, 0.5]})")), SchemaError);
}

TEST(Correlation, RoundTrip) {
  TripleEstimate e{4, {0.401, 0.362, 0.397}, {0.004, 0.004, 0.008}};
  auto back = parse_correlation_json(correlation_json(e, {true}));
  EXPECT_EQ(back.n, 4);
  EXPECT_EQ(back.c.c, e.c.c);
  EXPECT_EQ(back.sigma, e.sigma);
}

TEST(Records, RoundTrip) {
  auto recs = simulate_measurements(build_state(StateFamily::ghz(), 3), LocalRotation::identity(), 500, 4);
  auto back = parse_records(records_json(recs));
  ASSERT_EQ(back.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(back[k].counts, recs[k].counts);
    EXPECT_EQ(back[k].axis, recs[k].axis);
  }
  auto j = records_json(recs);
  j[0]["shots"] = 499;
  EXPECT_THROW(parse_records(j), SchemaError);
}

TEST(Rotation, Json) {
  auto j = rotation_json(LocalRotation::shared_rotation({0.5, 0.0, 0.25}), 3, {true});
  EXPECT_EQ(j["mode"], "shared");
  EXPECT_EQ(j["angles"]["theta"], 0.5);
  auto p = rotation_json(LocalRotation::per_qubit_rotation({{0.1, 0, 0}, {0.2, 0, 0}}), 2, {true});
  EXPECT_EQ(p["angles"].size(), 2u);
}
