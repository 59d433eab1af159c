#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;

  std::vector<json> lines() const {
    std::vector<json> v;
    std::istringstream in(out);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) v.push_back(json::parse(line));
    }
    return v;
  }
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = ddlab::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() /
                    (name + "-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST(Cli, AxiomsOnAffineThree) {
  const Result r = run({"axioms", "--geometry", "affine", "--dim", "3", "--bound", "2"});
  EXPECT_EQ(r.code, ddlab::cli::kExitOk) << r.err;
  const auto lines = r.lines();
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0].at("status"), "PASS");
  EXPECT_EQ(lines[1].at("status"), "PASS");
  EXPECT_EQ(lines[2].at("status"), "BOUNDED-PASS");
  for (const auto& l : lines) EXPECT_EQ(l.at("command"), "axioms");
}

TEST(Cli, AxiomViolationsGiveExitOne) {
  const Result r = run({"axioms", "--geometry", "degenerate", "--partition", "[[0,1],[2]]",
                        "--bound", "3"});
  EXPECT_EQ(r.code, ddlab::cli::kExitViolations);
  EXPECT_EQ(r.lines().back().at("status"), "FAIL");
}

TEST(Cli, ConfigurationErrorsGiveExitTwo) {
  EXPECT_EQ(run({}).code, ddlab::cli::kExitConfig);
  EXPECT_EQ(run({"nonsense"}).code, ddlab::cli::kExitConfig);
  EXPECT_EQ(run({"axioms", "--geometry", "projective"}).code, ddlab::cli::kExitConfig);
  EXPECT_EQ(run({"axioms", "--dim", "0"}).code, ddlab::cli::kExitConfig);
  EXPECT_EQ(run({"orbits", "--format", "xml"}).code, ddlab::cli::kExitConfig);
  EXPECT_EQ(run({"surjection", "explode"}).code, ddlab::cli::kExitConfig);
  EXPECT_EQ(run({"support"}).code, ddlab::cli::kExitConfig);
  EXPECT_EQ(run({"support", "--file", "/nonexistent/relation.json"}).code,
            ddlab::cli::kExitConfig);
  EXPECT_EQ(run({"sigma", "--ground", "3", "--set", "[0"}).code, ddlab::cli::kExitConfig);
}

TEST(Cli, HelpExitsCleanly) {
  const Result r = run({"--help"});
  EXPECT_EQ(r.code, ddlab::cli::kExitOk);
  EXPECT_NE(r.out.find("surjection"), std::string::npos);
}

TEST(Cli, LibraryErrorsAreReportedAsLines) {
  const Result r = run({"surjection", "collisions", "--dim", "1", "--count", "2"});
  EXPECT_EQ(r.code, ddlab::cli::kExitViolations);
  ASSERT_EQ(r.lines().size(), 1u);
  EXPECT_EQ(r.lines()[0].at("error"), "InsufficientWitnesses");
}

TEST(Cli, SurjectionVerifyLinear) {
  const Result r = run({"surjection", "verify", "--dim", "5", "--max-t", "2"});
  EXPECT_EQ(r.code, ddlab::cli::kExitOk) << r.err;
  EXPECT_EQ(r.lines().size(), 1u + 32u + 496u);
}

TEST(Cli, SurjectionPreimageLinear) {
  const Result r = run({"surjection", "preimage", "--dim", "3", "--target", R"(["100"])"});
  EXPECT_EQ(r.code, ddlab::cli::kExitOk) << r.err;
  const json line = r.lines().at(0);
  EXPECT_EQ(line.at("preimage"), json({"000", "100", "010", "001", "011"}));
  EXPECT_EQ(line.at("generators"), json({"010", "001"}));
  EXPECT_EQ(run({"surjection", "preimage", "--dim", "3", "--target", R"(["100","010"])"}).code,
            ddlab::cli::kExitConfig);
}

TEST(Cli, SurjectionGeneral) {
  const Result verify = run({"surjection", "verify", "--construction", "general", "--geometry",
                             "affine", "--dim", "3", "--max-t", "1"});
  EXPECT_EQ(verify.code, ddlab::cli::kExitOk) << verify.err;
  EXPECT_EQ(verify.lines().front().at("instance").at("E").size(), 3u);

  const Result collide = run({"surjection", "collisions", "--construction", "general",
                              "--dim", "3", "--count", "3"});
  EXPECT_EQ(collide.code, ddlab::cli::kExitOk);
  EXPECT_EQ(collide.lines().size(), 3u);
  for (const auto& l : collide.lines()) EXPECT_TRUE(l.at("ok").get<bool>());
}

TEST(Cli, SupportWithComparisonFromFile) {
  const auto path = temp_file("ddlab-support", R"({"n": 6, "k": 2, "tuples": [[0,1],[0,2],[0,3],[0,4],[0,5],[1,1],[2,2],[3,3],[4,4],[5,5]]})");
  const Result r = run({"support", "--file", path.string(), "--compare"});
  std::filesystem::remove(path);
  EXPECT_EQ(r.code, ddlab::cli::kExitOk) << r.err;
  const json line = r.lines().at(0);
  EXPECT_EQ(line.at("minimal").at("support"), json({0}));
  EXPECT_EQ(line.at("recursive").at("support"), json({0}));
  EXPECT_TRUE(line.at("minimal_not_larger").get<bool>());
}

TEST(Cli, SynthFromFile) {
  const auto path = temp_file("ddlab-synth", R"({"n": 7, "k": 1, "tuples": [[3]]})");
  const Result r = run({"synth", "--file", path.string()});
  const Result wrong = run({"synth", "--file", path.string(), "--set", "[]"});
  std::filesystem::remove(path);
  EXPECT_EQ(r.code, ddlab::cli::kExitOk) << r.err;
  EXPECT_EQ(r.lines().at(0).at("formula"), "(or (and (= x1 c3)))");
  EXPECT_TRUE(r.lines().at(0).at("exact").get<bool>());
  EXPECT_EQ(wrong.code, ddlab::cli::kExitViolations);
  EXPECT_EQ(wrong.lines().at(0).at("error"), "NotASupport");
}

TEST(Cli, OrbitsAndDichotomy) {
  const Result orbits = run({"orbits", "--dim", "2", "--set", R"(["10"])"});
  EXPECT_EQ(orbits.code, ddlab::cli::kExitOk);
  EXPECT_EQ(orbits.lines().at(0).at("blocks"), json::parse(R"([["00"],["10"],["01","11"]])"));

  const Result moved = run({"dichotomy", "--dim", "2", "--subset", R"(["10"])"});
  EXPECT_EQ(moved.code, ddlab::cli::kExitOk);
  EXPECT_EQ(moved.lines().at(0).at("result"), "not-invariant");

  const Result sweep = run({"dichotomy", "--dim", "3", "--set", R"(["100"])"});
  EXPECT_EQ(sweep.code, ddlab::cli::kExitOk);
  EXPECT_EQ(sweep.lines().at(0).at("exceptions"), 0);
  // Three orbits: the two points of span(E) and the six others.
  EXPECT_EQ(sweep.lines().at(0).at("invariant"), 8);
}

TEST(Cli, EquivarianceAndSigma) {
  EXPECT_EQ(run({"equivariance", "--dim", "3", "--trials", "200"}).code, ddlab::cli::kExitOk);
  EXPECT_EQ(run({"equivariance", "--dim", "2", "--exhaustive", "--bound", "3"}).code,
            ddlab::cli::kExitOk);
  EXPECT_EQ(run({"equivariance", "--construction", "synthesis", "--ground", "5", "--trials", "20"})
                .code,
            ddlab::cli::kExitOk);
  const Result sigma =
      run({"sigma", "--ground", "4", "--set", "[0]", "--family", "[[1,2]]", "--subset", "[1]"});
  EXPECT_EQ(sigma.code, ddlab::cli::kExitOk);
  EXPECT_EQ(sigma.lines().at(0).at("classes"), json::parse("[[0],[1,2],[3]]"));
  EXPECT_EQ(sigma.lines().at(0).at("witness"), json::parse("[1,2]"));
}

TEST(Cli, SameSeedSameOutput) {
  const std::vector<std::string> args{"equivariance", "--construction", "general", "--geometry",
                                      "affine", "--dim", "3", "--trials", "50", "--seed", "7"};
  const Result a = run(args);
  const Result b = run(args);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.lines().at(0).at("params").at("seed"), 7);
}

TEST(Cli, TableFormatAndOutFile) {
  const Result table = run({"orbits", "--dim", "2", "--format", "table"});
  EXPECT_EQ(table.code, ddlab::cli::kExitOk);
  EXPECT_NE(table.out.find("command=orbits"), std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "ddlab-cli-out.jsonl";
  const Result written = run({"orbits", "--dim", "2", "--out", path.string()});
  EXPECT_EQ(written.code, ddlab::cli::kExitOk);
  EXPECT_TRUE(written.out.empty());
  std::ifstream in(path);
  const json line = json::parse(in);
  EXPECT_EQ(line.at("command"), "orbits");
  std::filesystem::remove(path);
}
