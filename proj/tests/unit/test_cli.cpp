#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

struct RunResult {
  int status = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(CATSIM_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("catsim_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Cli, EvolveRowCountAndHeader) {
  const auto r = run("evolve --beta 2 --tau-max 2 --steps 400");
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "tau,mean_ns,two_mean_np,sum_energy");
  EXPECT_EQ(count_lines(r.out), 401u);
  const auto one = run("evolve --beta 2 --steps 1 --tau-max 0");
  ASSERT_EQ(one.status, 0);
  EXPECT_EQ(count_lines(one.out), 2u);
}

TEST(Cli, DeterministicOutput) {
  const auto a = run("pcurve --beta 3 --tau-max 1 --steps 50 --workers 1");
  const auto b = run("pcurve --beta 3 --tau-max 1 --steps 50 --workers 3");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, ConditionalThenWigner) {
  const auto state = temp_file("state.json");
  const auto r = run("conditional --beta 3 --out " + state.string());
  ASSERT_EQ(r.status, 0);
  std::ifstream in(state);
  const auto doc = nlohmann::json::parse(in);
  EXPECT_EQ(doc.at("beta").get<double>(), 3.0);
  EXPECT_GT(doc.at("p0").get<double>(), 0.3);
  EXPECT_TRUE(doc.at("state").contains("re"));
  const auto w = run("wigner --in " + state.string() + " --range 8 --grid 41");
  ASSERT_EQ(w.status, 0);
  EXPECT_EQ(count_lines(w.out), 1u + 41u * 41u);
  const auto clipped = run("wigner --in " + state.string() + " --range 1 --grid 11");
  EXPECT_EQ(clipped.status, 3);
  std::filesystem::remove(state);
}

TEST(Cli, FeasibilityReport) {
  const auto r = run("feasibility");
  ASSERT_EQ(r.status, 0);
  const auto doc = nlohmann::json::parse(r.out);
  for (const char* key : {"gamma", "t_star", "t_opt", "feasible", "margin"}) EXPECT_TRUE(doc.contains(key)) << key;
  EXPECT_EQ(doc.at("inputs").at("volume_m3").get<double>(), 1e-15);
}

TEST(Cli, FitReadsSweepCsv) {
  const auto csv = temp_file("sweep.csv");
  {
    std::ofstream out(csv);
    out << "beta,tau_opt,p0,xi_star,alpha_star,fidelity,alpha_prep_formula,seconds\n";
    for (int b = 2; b <= 20; b += 2) {
      const double tau = 1.7 / std::pow(1.0 + 1.16 * b, 0.84);
      out << b << ',' << tau << ",0.1,-0.3,1,1,1,0\n";
    }
  }
  const auto r = run("fit --input " + csv.string() + " --law tau");
  ASSERT_EQ(r.status, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_NEAR(doc.at("params").at("b_t").get<double>(), 1.7, 1e-3);
  EXPECT_EQ(doc.at("points").size(), 10u);
  std::filesystem::remove(csv);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("evolve --beta -1").status, 2);
  EXPECT_EQ(run("evolve --steps 0").status, 2);
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("evolve --no-such-flag").status, 2);
  EXPECT_EQ(run("fit --input /nonexistent.csv").status, 2);
  EXPECT_EQ(run("fit --input x.csv --law gamma").status, 2);
  EXPECT_EQ(run("feasibility --volume -1").status, 2);
}

TEST(Cli, ConfigFileOverridesFlags) {
  const auto cfg = temp_file("cfg.json");
  {
    std::ofstream out(cfg);
    out << R"({"steps": 7, "tau_max": 0.5})";
  }
  const auto r = run("evolve --beta 2 --steps 100 --config " + cfg.string());
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(count_lines(r.out), 8u);
  {
    std::ofstream out(cfg);
    out << R"({"stepz": 7})";
  }
  EXPECT_EQ(run("evolve --config " + cfg.string()).status, 2);
  std::filesystem::remove(cfg);
}
