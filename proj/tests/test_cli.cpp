#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"

using namespace lueders;
using io::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lueders_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string write(const std::string& name, const std::string& text) {
  const auto path = scratch(name);
  io::write_file_atomic(path, text);
  return path.string();
}

std::string generated(const std::string& flavor, int d, int n, int seed, const std::string& name) {
  const auto path = scratch(name).string();
  const auto r = run({"gen", "--flavor", flavor, "--d", std::to_string(d), "--n", std::to_string(n), "--seed",
                      std::to_string(seed), "--unit-fraction", "0", "--out", path});
  EXPECT_EQ(r.code, 0) << r.err;
  return path;
}

}  // namespace

TEST(CliGen, PassesValidate) {
  const auto path = generated("commuting-resolution", 4, 3, 7, "gen437.json");
  const auto r = run({"validate", path});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto report = json::parse(r.out);
  EXPECT_EQ(report["valid"], true);
  EXPECT_EQ(report["normalization"], "Resolution");
  EXPECT_EQ(report["effects"].size(), 3u);
  EXPECT_EQ(report["commutators"].size(), 3u);
}

TEST(CliGen, OneByOneIsUnit) {
  const auto r = run({"gen", "--d", "1", "--n", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ms = io::parse_effect_matrices(r.out);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_TRUE(ms[0] == ComplexMatrix::identity(1));
}

TEST(CliGen, SameSeedIsByteIdentical) {
  for (const std::string flavor : {"commuting-resolution", "commuting-subnormalized", "noncommuting-resolution"}) {
    const auto a = run({"gen", "--flavor", flavor, "--d", "5", "--n", "3", "--seed", "12", "--unit-fraction", "0.4"});
    const auto b = run({"gen", "--flavor", flavor, "--d", "5", "--n", "3", "--seed", "12", "--unit-fraction", "0.4"});
    const auto c = run({"gen", "--flavor", flavor, "--d", "5", "--n", "3", "--seed", "13", "--unit-fraction", "0.4"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
  }
}

TEST(CliGen, FileMatchesStdout) {
  const auto path = scratch("same.json").string();
  const auto to_file = run({"gen", "--d", "3", "--n", "2", "--seed", "4", "--out", path});
  ASSERT_EQ(to_file.code, 0);
  EXPECT_TRUE(to_file.out.empty());
  EXPECT_EQ(io::read_file(path), run({"gen", "--d", "3", "--n", "2", "--seed", "4"}).out);
}

TEST(CliGen, ArgumentErrors) {
  EXPECT_EQ(run({"gen", "--d", "0", "--n", "1"}).code, 3);
  EXPECT_EQ(run({"gen", "--d", "65", "--n", "1"}).code, 3);
  EXPECT_EQ(run({"gen", "--d", "2", "--n", "65"}).code, 3);
  EXPECT_EQ(run({"gen", "--d", "2"}).code, 3);
  EXPECT_EQ(run({"gen", "--d", "2", "--n", "1", "--flavor", "other"}).code, 3);
  EXPECT_EQ(run({"gen", "--flavor", "noncommuting-resolution", "--d", "2", "--n", "2"}).code, 1);
  EXPECT_EQ(run({}).code, 3);
  EXPECT_EQ(run({"frobnicate"}).code, 3);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliValidate, SpectrumAboveOne) {
  const auto path = write("above.json", io::effect_set_text(std::vector{ComplexMatrix::diagonal({1.1, 0.0})}));
  const auto r = run({"validate", path});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("SpectrumAboveOne"), std::string::npos);
  EXPECT_EQ(json::parse(r.out)["violation"], "SpectrumAboveOne");
}

TEST(CliValidate, NotSubnormalized) {
  std::vector<ComplexMatrix> ms{0.6 * ComplexMatrix::identity(2), 0.8 * ComplexMatrix::identity(2)};
  for (auto& m : ms) m *= 1.02;
  const auto r = run({"validate", write("over.json", io::effect_set_text(ms))});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("NotSubnormalized"), std::string::npos);
  EXPECT_GT(json::parse(r.out)["square_sum"]["max_eigenvalue"].get<double>(), 1.04);
}

TEST(CliValidate, ParseAndIoErrors) {
  EXPECT_EQ(run({"validate", write("broken.json", "{")}).code, 1);
  EXPECT_EQ(run({"validate", scratch("missing.json").string()}).code, 1);
}

TEST(CliValidate, ToleranceOverride) {
  const auto path =
      write("dusty.json", io::effect_set_text(std::vector{ComplexMatrix::diagonal({1.0 + 1e-6, 0.0})}));
  EXPECT_EQ(run({"validate", path}).code, 1);
  EXPECT_EQ(run({"validate", path, "--tol-psd", "1e-5"}).code, 0);
}

TEST(CliVerify, CommutingResolution) {
  const auto r = run({"verify", generated("commuting-resolution", 6, 4, 1, "v64.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["theorem"], "3.1");
  EXPECT_EQ(j["verdict"], true);
  EXPECT_EQ(j["fixed_dim"], j["target_dim"]);
}

TEST(CliVerify, SubnormalizedWithoutUnitTuples) {
  const auto r = run({"verify", generated("commuting-subnormalized", 4, 2, 3, "vsub.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["theorem"], "3.2");
  EXPECT_EQ(j["fixed_dim"], 0);
}

TEST(CliVerify, NonCommutingResolution) {
  const auto r = run({"verify", generated("noncommuting-resolution", 4, 3, 2, "vnc.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["verdict"], true);
}

TEST(CliVerify, VerdictFalseExitsOne) {
  // a subspace tolerance no computation can meet
  const auto path = generated("noncommuting-resolution", 4, 3, 2, "vstrict.json");
  const auto r = run({"verify", path, "--tol-subspace", "-1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.out)["verdict"], false);
}

TEST(CliAnalyze, ReportsStructure) {
  const auto r = run({"analyze", generated("commuting-resolution", 4, 2, 5, "an.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["commuting"], true);
  EXPECT_EQ(j["fixed_dim"], j["commutant_dim"]);
  std::size_t squares = 0;
  for (const auto& b : j["joint_blocks"]) squares += b["dim"].get<std::size_t>() * b["dim"].get<std::size_t>();
  EXPECT_EQ(j["commutant_dim"].get<std::size_t>(), squares);
}

TEST(CliWitness, CertificateAndNoWitness) {
  const auto set = write("pinch.json", io::effect_set_text(std::vector{ComplexMatrix::diagonal({0, 1}),
                                                                       ComplexMatrix::diagonal({1, 0})}));
  const auto flip = write("flip.json", io::operator_text(ComplexMatrix{{0, 1}, {1, 0}}));
  const auto diag = write("diag.json", io::matrix_to_json(ComplexMatrix::diagonal({2, 3})).dump());

  const auto hit = run({"witness", set, "--operator", flip});
  ASSERT_EQ(hit.code, 0) << hit.err;
  const auto cert = json::parse(hit.out);
  EXPECT_EQ(cert["m"], 2);
  EXPECT_EQ(cert["k"], -1);
  EXPECT_EQ(cert["j"], 1);
  EXPECT_FALSE(cert.contains("left_projector"));
  EXPECT_TRUE(json::parse(run({"witness", set, "--operator", flip, "--full"}).out).contains("left_projector"));

  const auto none = run({"witness", set, "--operator", diag});
  EXPECT_EQ(none.code, 2);
  EXPECT_EQ(json::parse(none.out)["result"], "CommutesNoWitness");

  EXPECT_EQ(run({"witness", set, "--operator", flip, "--effect-index", "5"}).code, 1);
  EXPECT_EQ(run({"witness", set, "--operator", write("wrong.json", io::operator_text(ComplexMatrix::identity(3)))}).code,
            1);
}

TEST(CliWitness, ContractionReport) {
  const auto set = generated("commuting-resolution", 6, 2, 9, "c62.json");
  SplitMix64 rng(1);
  const auto x = write("x.json", io::operator_text(random_gaussian_matrix(6, 6, rng)));
  const auto r = run({"witness", set, "--operator", x, "--p", "64", "--full"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_GE(j["achieved_ratio"].get<double>(), j["bound"].get<double>() - 1e-12);
  EXPECT_TRUE(j.contains("Y"));
}

TEST(CliBound, Examples) {
  const auto r = run({"bound", "--n", "1", "--m", "2", "--p", "100"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("bound 0.1149750\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("p_star 9\n"), std::string::npos);
  EXPECT_NE(run({"bound", "--n", "4", "--m", "3"}).out.find("p_star 25\n"), std::string::npos);
  EXPECT_EQ(run({"bound", "--n", "0", "--m", "3"}).code, 3);
}

TEST(CliNagy, HalfIdentity) {
  const auto r = run({"nagy", generated("commuting-resolution", 3, 2, 2, "nagy.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_LE(j["distance_to_half_identity"].get<double>(), 1e-10);
  EXPECT_EQ(j["in_effect_space"], true);
}

TEST(CliSuite, QuickScaleListsEveryCriterionOnce) {
  const auto path = scratch("suite.json").string();
  const auto r = run({"suite", "--quick", "--out", path});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(io::read_file(path));
  EXPECT_EQ(j["scale"], "quick");
  EXPECT_EQ(j["passed"], true);
  std::vector<int> ids;
  for (const auto& c : j["criteria"]) ids.push_back(c["id"]);
  EXPECT_EQ(ids, (std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
}

TEST(CliInputs, NotMutated) {
  const auto path = generated("commuting-resolution", 3, 2, 6, "keep.json");
  const auto before = io::read_file(path);
  run({"validate", path});
  run({"analyze", path});
  run({"verify", path});
  run({"nagy", path});
  EXPECT_EQ(io::read_file(path), before);
}
