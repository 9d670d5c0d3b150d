#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "germ_fixtures.hpp"
#include "rgerm/rgerm.hpp"

namespace rgerm {
namespace {

using fixtures::Q;
using fixtures::rat;

std::string fixture(const std::string& name) { return std::string(RGERM_FIXTURE_DIR) + "/" + name + ".json"; }

io::GermDocument load(const std::string& name) { return io::load_germ_document(fixture(name)); }

ErrorCode parse_code(const json& doc) {
  try {
    io::parse_germ_document(doc);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;  // no error is a test failure below
}

const json kSmall = json::parse(R"({
  "dim": 2, "order": 3,
  "eigenvalues": {"generators": [{"kind": "modulus", "value": "1/2"}], "exponents": [[0], [1]]},
  "terms": {"0": [{"index": [2, 0], "re": "1/3", "im": "-2"}], "1": [{"index": [1, 1], "re": "0.25"}]}
})");

TEST(GermDocument, FixturesMatchTheCodeBuiltGerms) {
  EXPECT_EQ(*load("one_qp").exact_germ, fixtures::one_qp().germ);
  EXPECT_EQ(*load("non_attracting").exact_germ, fixtures::non_attracting().germ);
  EXPECT_EQ(*load("conserved_leaf").exact_germ, fixtures::conserved_leaf(29).germ);
  EXPECT_EQ(*load("elliptic_attracting").exact_germ, fixtures::elliptic_mixed(rat(1), rat(1)).germ);
  EXPECT_EQ(*load("semi_attractive_q2").exact_germ, fixtures::semi_attractive(2).germ);
}

TEST(GermDocument, ExactRoundTripIsLossless) {
  for (const char* name : {"one_qp", "conserved_leaf", "non_attracting", "elliptic_attracting", "parabolic_cubic",
                           "semi_attractive_q2", "identity", "linear_contraction"}) {
    const auto doc = load(name);
    ASSERT_TRUE(doc.exact) << name;
    const json out = io::germ_json(*doc.exact_germ, &doc.spectrum);
    const auto again = io::parse_germ_document(out);
    EXPECT_EQ(*again.exact_germ, *doc.exact_germ) << name;
    EXPECT_EQ(io::germ_json(*again.exact_germ, &again.spectrum).dump(), out.dump()) << name;
  }
}

TEST(GermDocument, ExactStringsAndDecimals) {
  const auto doc = io::parse_germ_document(kSmall);
  ASSERT_TRUE(doc.exact);
  EXPECT_EQ(doc.exact_germ->component(0).coefficient(MultiIndex{2, 0}), Q(mpq_class(1, 3), mpq_class(-2)));
  EXPECT_EQ(doc.exact_germ->component(1).coefficient(MultiIndex{1, 1}), rat(1, 4));
  EXPECT_EQ(doc.exact_germ->lambda(1), rat(1, 2));
}

TEST(GermDocument, JsonFloatsSwitchToFloatMode) {
  json d = kSmall;
  d["terms"]["1"][0]["re"] = 0.25;
  const auto doc = io::parse_germ_document(d);
  EXPECT_FALSE(doc.exact);
  EXPECT_FALSE(doc.exact_germ);
  EXPECT_EQ(doc.float_germ.component(1).coefficient(MultiIndex{1, 1}), Complex(0.25));
}

TEST(GermDocument, NonQuarterRootsAreFloat) {
  json d = kSmall;
  d["eigenvalues"] = json::parse(R"({"generators": [{"kind": "rootOfUnity", "order": 3}], "exponents": [[1], [0]]})");
  const auto doc = io::parse_germ_document(d);
  EXPECT_FALSE(doc.exact);
  EXPECT_TRUE(doc.spectrum.is_exact());
  EXPECT_LT(std::abs(doc.float_germ.lambda(0) - std::polar(1.0, 2 * M_PI / 3)), 1e-15);
}

TEST(GermDocument, Rejections) {
  json d = kSmall;
  d["terms"]["0"][0]["re"] = "1/";
  EXPECT_EQ(parse_code(d), ErrorCode::kParse);
  d = kSmall;
  d.erase("order");
  EXPECT_EQ(parse_code(d), ErrorCode::kParse);
  d = kSmall;
  d["terms"]["0"][0]["index"] = {2, 0, 0};
  EXPECT_EQ(parse_code(d), ErrorCode::kParse);
  d = kSmall;
  d["terms"]["0"][0]["index"] = {0, 1};
  EXPECT_EQ(parse_code(d), ErrorCode::kParse);
  d = kSmall;
  d["terms"]["7"] = json::array();
  EXPECT_EQ(parse_code(d), ErrorCode::kParse);
  d = kSmall;
  d["lambda"] = json::array({json::array({"1", "0"}), json::array({"1/3", "0"})});
  EXPECT_EQ(parse_code(d), ErrorCode::kSpectrumMismatch);
  d = kSmall;
  d["eigenvalues"]["generators"][0]["kind"] = "spiral";
  EXPECT_EQ(parse_code(d), ErrorCode::kParse);
  EXPECT_THROW(io::load_germ_document(fixture("malformed")), Error);
  EXPECT_THROW(io::load_germ_document(fixture("does_not_exist")), Error);
}

TEST(GermDocument, TermsAboveTheOrderAreDropped) {
  json d = kSmall;
  d["terms"]["0"].push_back({{"index", {4, 0}}, {"re", "5"}});
  EXPECT_EQ(*io::parse_germ_document(d).exact_germ, *io::parse_germ_document(kSmall).exact_germ);
}

TEST(Analyze, NonAttractingCounterexample) {
  const auto r = cmd_analyze(load("non_attracting"), {});
  ASSERT_EQ(r.exit_code, 0) << r.report.dump();
  EXPECT_EQ(r.report["invariants"]["Lambda"]["text"], "-1");
  EXPECT_TRUE(r.report["classification"]["nonDegenerate"]);
  EXPECT_FALSE(r.report["classification"]["parabolicallyAttracting"]);
  EXPECT_EQ(r.report["classification"]["witnesses"][1]["text"], "-1");
}

TEST(Analyze, ScopeFlagChangesTheVerdict) {
  AnalyzeArgs one;
  one.scope = 1;
  const auto r1 = cmd_analyze(load("one_qp"), one);
  EXPECT_EQ(r1.report["invariants"]["k"], 2);
  EXPECT_EQ(r1.report["invariants"]["Lambda"]["text"], "1");
  AnalyzeArgs two;
  two.scope = 2;
  const auto r2 = cmd_analyze(load("one_qp"), two);
  EXPECT_EQ(r2.report["invariants"]["Lambda"]["text"], "0");
  EXPECT_FALSE(r2.report["classification"]["nonDegenerate"]);
}

TEST(Analyze, IdentityIsLinearizable) {
  const auto r = cmd_analyze(load("identity"), {});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(r.report["invariants"]["k"].is_null());
  EXPECT_EQ(r.report["invariants"]["kStatus"], "INFINITE_UP_TO");
  EXPECT_EQ(r.report["invariants"]["kBound"], 3);
}

TEST(Analyze, NotOneResonantCarriesWitness) {
  const auto r = cmd_analyze(load("not_one_resonant"), {});
  EXPECT_EQ(r.exit_code, kExitNotOneResonant);
  EXPECT_EQ(r.report["certificate"]["status"], "NOT_ONE_RESONANT");
  EXPECT_EQ(r.report["certificate"]["witness"]["j"], 1);
  EXPECT_EQ(r.report["certificate"]["witness"]["l"], json({2, 0}));
}

TEST(Analyze, SemiAttractivePrediction) {
  const auto r = cmd_analyze(load("semi_attractive_q2"), {});
  EXPECT_EQ(r.report["semiAttractive"]["predictedBasins"], 1);
  EXPECT_EQ(r.report["semiAttractive"]["componentsPerBasin"], 2);
  EXPECT_EQ(r.report["semiAttractive"]["Lambda"]["text"], "-2");
}

TEST(Analyze, ReportEmbedsInvocationAndVersion) {
  const std::vector<std::string> argv{"resonant_germs", "analyze", "x.json"};
  const auto r = cmd_analyze(load("one_qp"), {}, argv);
  EXPECT_EQ(r.report["version"], kVersion);
  EXPECT_EQ(r.report["invocation"], json(argv));
  EXPECT_EQ(r.report.dump(), cmd_analyze(load("one_qp"), {}, argv).report.dump());
}

TEST(Normalize, AlreadyNormalInputIsUnchanged) {
  const auto doc = load("parabolic_cubic");
  NormalizeArgs a;
  a.scope = 1;
  const auto r = cmd_normalize(doc, a);
  ASSERT_EQ(r.exit_code, 0) << r.report.dump();
  const auto fhat = io::parse_germ_document(r.report["normalForm"]);
  const auto theta = io::parse_germ_document(r.report["conjugacy"]);
  EXPECT_EQ(*fhat.exact_germ, *doc.exact_germ);
  EXPECT_EQ(*theta.exact_germ, GermMap<Q>::identity(2, 6));
  EXPECT_TRUE(r.report["verification"]["passed"]);
}

TEST(Normalize, ParabolicFixtureVerifies) {
  const auto doc = load("parabolic_attracting");
  const auto r = cmd_normalize(doc, {});
  ASSERT_EQ(r.exit_code, 0) << r.report.dump();
  const auto fhat = *io::parse_germ_document(r.report["normalForm"]).exact_germ;
  const auto theta = *io::parse_germ_document(r.report["conjugacy"]).exact_germ;
  EXPECT_EQ(compose(theta, *doc.exact_germ, 4), compose(fhat, theta, 4));
  EXPECT_EQ(r.report["verification"]["defect"], 0.0);
}

TEST(Normalize, DegenerateIsRefused) {
  const auto r = cmd_normalize(load("conserved_leaf"), {});
  EXPECT_EQ(r.exit_code, kExitRefused);
  EXPECT_EQ(r.report["error"]["code"], "DEGENERATE");
  EXPECT_FALSE(r.report.contains("normalForm"));
  EXPECT_EQ(cmd_normalize(load("identity"), {}).exit_code, kExitRefused);
}

TEST(Simulate, LinearContractionDecaysGeometrically) {
  SimulateArgs a;
  a.z0 = "1;1";
  a.steps = 10;
  a.alpha = std::vector<unsigned>{1, 0};
  const auto r = cmd_simulate(load("linear_contraction"), a);
  ASSERT_EQ(r.exit_code, 0);
  std::istringstream in(r.csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,re_z0,im_z0,re_z1,im_z1,abs_u,arg_u,rate");
  double prev = 2.0;
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<double> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(std::stod(c));
    EXPECT_DOUBLE_EQ(cols[1], prev / 2.0);
    EXPECT_DOUBLE_EQ(cols[3], std::pow(1.0 / 3.0, cols[0]));
    prev = cols[1];
    ++rows;
  }
  EXPECT_EQ(rows, 11);
}

TEST(Simulate, ConservedLeafColumnIsConstant) {
  SimulateArgs a;
  a.z0 = "0.02,0.01;0.03,-0.02";
  a.steps = 3000;
  const auto r = cmd_simulate(load("conserved_leaf"), a);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["alphaSource"], "certificate");
  EXPECT_EQ(r.report["alpha"], json({1, 1}));
  EXPECT_LE(r.report["maxRelativeLeafStep"].get<double>(), 1e-14);
}

TEST(Simulate, FallsBackToFirstCoordinateWithoutCertificate) {
  SimulateArgs a;
  a.z0 = "0.1;0.1";
  a.steps = 5;
  const auto r = cmd_simulate(load("not_one_resonant"), a);
  EXPECT_EQ(r.report["alphaSource"], "fallback");
  EXPECT_EQ(r.report["alpha"], json({1, 0}));
}

TEST(Simulate, BadStartPoint) {
  SimulateArgs a;
  a.z0 = "0.1";
  EXPECT_EQ(cmd_simulate(load("one_qp"), a).exit_code, kExitFailure);
  a.z0 = "0.1;x";
  EXPECT_EQ(cmd_simulate(load("one_qp"), a).report["error"]["code"], "INVALID_ARGUMENT");
}

BasinArgs small_basin(std::size_t samples, std::size_t steps) {
  BasinArgs a;
  a.options.samples_per_branch = samples;
  a.options.steps = steps;
  return a;
}

TEST(BasinCommand, SemiAttractiveCycle) {
  const auto r = cmd_basin(load("semi_attractive_q2"), small_basin(100, 20000));
  ASSERT_EQ(r.exit_code, 0) << r.report.dump();
  EXPECT_EQ(r.report["mode"], "theorem");
  EXPECT_EQ(r.report["predictedBasins"], 1);
  EXPECT_EQ(r.report["componentPermutation"], json({1, 0}));
  EXPECT_TRUE(r.report["componentCycle"]);
  EXPECT_EQ(r.report["convergenceFraction"], 1.0);
}

TEST(BasinCommand, CounterexampleRunsInFalsificationMode) {
  const auto r = cmd_basin(load("non_attracting"), small_basin(100, 20000));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["mode"], "falsification");
  EXPECT_EQ(r.report["convergedCount"], 0);
}

TEST(BasinCommand, EllipticFixtureConverges) {
  const auto r = cmd_basin(load("elliptic_attracting"), small_basin(200, 20000));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["convergenceFraction"], 1.0);
  EXPECT_EQ(r.report["invarianceViolations"], 0);
}

TEST(BasinCommand, ByteIdenticalReports) {
  auto a = small_basin(30, 3000);
  a.options.seed = 17;
  const auto r1 = cmd_basin(load("parabolic_cubic"), a, {"x"});
  const auto r2 = cmd_basin(load("parabolic_cubic"), a, {"x"});
  EXPECT_EQ(r1.report.dump(), r2.report.dump());
  EXPECT_EQ(r1.report["parameters"]["seed"], 17);
}

TEST(BasinCommand, GeometrySearchFailureExitsFive) {
  // a repelling map: no R keeps B invariant
  auto doc = load("parabolic_cubic");
  auto a = small_basin(10, 100);
  const auto setup = prepare_basin(*doc.exact_germ, doc.spectrum, 6);
  ASSERT_TRUE(setup.hypotheses_hold());
  const PolyMapNumeric repelling(GermMap<Complex>::from_terms({1.0, 0.5}, 3, {{{MultiIndex{3, 0}, 0.5}}, {}}));
  std::vector<std::pair<double, std::size_t>> trail;
  try {
    search_geometry(repelling, BasinGeometry::with_defaults(setup.alpha, 2, setup.scope), a.options, trail, 50, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(exit_code_for(e.code()), kExitGeometry);
  }
  EXPECT_EQ(trail.size(), 5u);
}

}  // namespace
}  // namespace rgerm
