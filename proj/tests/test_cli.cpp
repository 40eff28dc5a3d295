#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;
using twofluid::cli::run_cli;
using json = twofluid::io::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "twofluid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("twofluid_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

size_t count_lines(const std::string& s) { return static_cast<size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, HelpAndVersionExitZero) {
  EXPECT_EQ(run({"--help"}).code, 0);
  auto v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find(twofluid::cli::tool_version), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({"spectrum", "--k1-max", "abc"}).code, 2);
  const auto d = scratch("usage");
  EXPECT_EQ(run({"spectrum", "--L1", "0", "--out-dir", d.string()}).code, 2);
  EXPECT_EQ(run({"spectrum", "--L1", "-1", "--out-dir", d.string()}).code, 2);
  EXPECT_EQ(run({"continue", "--out-dir", d.string()}).code, 2);
  EXPECT_EQ(run({"simulate", "--nu", "0", "--out-dir", d.string()}).code, 2);
  EXPECT_EQ(run({"spectrum", "--dT-range", "0:1", "--out-dir", d.string()}).code, 2);
}

TEST(Cli, SpectrumDefaultRanges) {
  const auto d = scratch("spectrum");
  auto r = run({"spectrum", "--L1", "1", "--L2", "1", "--nu", "1e-3", "--dT-range", "0:0.4:21", "--out-dir",
                d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(d / "spectrum.csv");
  EXPECT_EQ(count_lines(csv), 1u + 21u * 10u * 21u);
  auto m = json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(m["config"]["k1_max"], 10);
  EXPECT_EQ(m["config"]["k2_max"], 10);
  EXPECT_EQ(m["outputs"][0]["sha256"].get<std::string>().size(), 64u);
}

TEST(Cli, SpectrumIsDeterministicAcrossThreads) {
  const auto a = scratch("spec_a"), b = scratch("spec_b");
  ASSERT_EQ(run({"spectrum", "--threads", "1", "--out-dir", a.string()}).code, 0);
  ASSERT_EQ(run({"spectrum", "--threads", "3", "--out-dir", b.string()}).code, 0);
  auto ma = json::parse(slurp(a / "manifest.json")), mb = json::parse(slurp(b / "manifest.json"));
  EXPECT_EQ(ma["outputs"][0]["sha256"], mb["outputs"][0]["sha256"]);
}

TEST(Cli, ContinuousSpectrum) {
  const auto d = scratch("strip");
  ASSERT_EQ(run({"spectrum", "--continuous-k2", "--dT-range", "0.1", "--k2-range", "0:1:11", "--out-dir",
                 d.string()})
                .code,
            0);
  EXPECT_EQ(count_lines(slurp(d / "strip_dispersion.csv")), 12u);
}

TEST(Cli, StabilityReport) {
  const auto d = scratch("stab");
  auto r = run({"stability", "--out-dir", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(slurp(d / "stability.json"));
  EXPECT_EQ(j["classification"], "primary");
  EXPECT_NEAR(j["regions"][0]["dT2"].get<double>(), 0.161805, 1e-5);
  EXPECT_NEAR(j["regions"][0]["dT1"].get<double>(), 3.088e-4, 1e-6);
  EXPECT_TRUE(j["fast_path"].get<bool>());
}

TEST(Cli, StabilityDegenerateOverlapIsNotPrimary) {
  // ell = ell_4 with nu just below nu_crit(1) = nu_crit(4)
  const double l = twofluid::ell_for_degenerate_overlap(4.0);
  twofluid::DomainConfig c;
  c.L1 = 1.0;
  c.L2 = l;
  const double nu = twofluid::nu_crit(c, 1.0) * (1 - 1e-6);
  const auto d = scratch("stab_deg");
  auto r = run({"stability", "--L1", "1", "--L2", twofluid::io::fmt(l), "--nu", twofluid::io::fmt(nu), "--out-dir",
                d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(slurp(d / "stability.json"));
  EXPECT_EQ(j["classification"], "not_primary");
}

TEST(Cli, HopfReport) {
  const auto d = scratch("hopf");
  auto r = run({"hopf", "--mu", "0.0016", "--out-dir", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(slurp(d / "hopf.json"));
  ASSERT_EQ(j["points"].size(), 2u);
  for (const auto& p : j["points"]) {
    EXPECT_LT(p["b"]["re"].get<double>(), 0.0);
    EXPECT_LT(p["residuals"]["eigenvector"].get<double>(), 1e-12);
    EXPECT_LT(p["residuals"]["a_dual_rel"].get<double>(), 1e-12);
    EXPECT_LT(p["residuals"]["b_numeric_rel"].get<double>(), 1e-8);
  }
  EXPECT_NEAR(j["points"][1]["b"]["re"].get<double>(), -1.16582, 1e-5);
  EXPECT_TRUE(j["points"][1].contains("predicted_cycle"));
}

TEST(Cli, HopfDegenerateNeedsCriticalViscosity) {
  const auto d = scratch("hopf_deg");
  EXPECT_EQ(run({"hopf", "--degenerate", "--out-dir", d.string()}).code, 2);
  twofluid::DomainConfig c;
  const double nu = twofluid::nu_crit(c, 1.0);
  auto r = run({"hopf", "--degenerate", "--nu", twofluid::io::fmt(nu), "--out-dir", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(slurp(d / "hopf.json"));
  EXPECT_GT(j["degenerate"]["a1"].get<double>(), 0.0);
}

TEST(Cli, SimulateWritesTracesSnapshotsAndManifest) {
  const auto d = scratch("sim");
  auto r = run({"simulate", "--dT", "0.1", "--N", "8", "--dt", "0.05", "--t-end", "2", "--record-every", "4",
                "--snapshots", "1.0", "--out-dir", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(slurp(d / "traces.csv")), 1u + 11u);
  EXPECT_TRUE(fs::exists(d / "snapshot_t1.000.csv"));
  auto state = twofluid::io::state_from_json(json::parse(slurp(d / "final_state.json")));
  EXPECT_EQ(state.N1(), 8);
  auto m = json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(m["outputs"].size(), 3u);
  EXPECT_EQ(m["config"]["integrator"]["ic"]["seed"], 12345);
  EXPECT_EQ(m["seed"], 12345);
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  std::vector<std::string> args = {"simulate", "--dT", "0.1", "--N", "8", "--dt", "0.05", "--t-end", "3",
                                   "--ic", "random", "--amplitude", "0.05", "--seed", "99"};
  auto aa = args, bb = args;
  aa.insert(aa.end(), {"--out-dir", a.string()});
  bb.insert(bb.end(), {"--out-dir", b.string()});
  ASSERT_EQ(run(aa).code, 0);
  ASSERT_EQ(run(bb).code, 0);
  auto ma = json::parse(slurp(a / "manifest.json")), mb = json::parse(slurp(b / "manifest.json"));
  EXPECT_EQ(ma["outputs"], mb["outputs"]);
  EXPECT_EQ(ma["seed"], 99);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const auto d = scratch("cfg");
  fs::create_directories(d);
  {
    std::ofstream c(d / "run.cfg");
    c << "# test config\n"
      << "domain.L1 = 1.5\n"
      << "domain.nu = 2e-3   # trailing comment\n"
      << "integrator.t_end = 0.5\n"
      << "integrator.dt = 0.05\n"
      << "integrator.N1 = 6\n"
      << "integrator.N2 = 6\n"
      << "ic.kind = random\n"
      << "output.dir = " << (d / "from_cfg").string() << "\n";
  }
  auto r = run({"simulate", "--config", (d / "run.cfg").string(), "--nu", "3e-3"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto m = json::parse(slurp(d / "from_cfg" / "manifest.json"));
  EXPECT_DOUBLE_EQ(m["config"]["domain"]["L1"].get<double>(), 1.5);
  EXPECT_DOUBLE_EQ(m["config"]["domain"]["nu"].get<double>(), 3e-3);
  EXPECT_EQ(m["config"]["integrator"]["N1"], 6);
  EXPECT_EQ(m["config"]["integrator"]["ic"]["kind"], "random");

  std::ofstream(d / "bad.cfg") << "domain.bogus = 1\n";
  EXPECT_EQ(run({"simulate", "--config", (d / "bad.cfg").string()}).code, 2);
  std::ofstream(d / "bad2.cfg") << "domain.L1 = two\n";
  EXPECT_EQ(run({"simulate", "--config", (d / "bad2.cfg").string()}).code, 2);
}

TEST(Cli, BlowUpIsNumericalFailure) {
  const auto d = scratch("blow");
  auto r = run({"simulate", "--dT", "0.1", "--N", "4", "--dt", "5", "--t-end", "5000", "--amplitude", "1",
                "--out-dir", d.string()});
  EXPECT_EQ(r.code, 1) << r.out << r.err;
}

TEST(Cli, EnergyDecayReport) {
  const auto d = scratch("energy");
  auto r = run({"energy", "--dT", "-0.1", "--N", "8", "--dt", "0.05", "--t-end", "5", "--ic", "random",
                "--amplitude", "0.01", "--out-dir", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(slurp(d / "energy_report.json"));
  EXPECT_TRUE(j["decay"]["pass"].get<bool>());
  EXPECT_LE(j["initial_poincare"]["u_over_gradu"].get<double>(), j["initial_poincare"]["u_bound"].get<double>());
  EXPECT_EQ(run({"energy", "--dT", "0", "--out-dir", d.string()}).code, 2);
}

TEST(Cli, ContinueSweepAndResume) {
  const auto d = scratch("cont");
  std::vector<std::string> args = {"continue", "--dT-list", "0.17", "0.1", "--transient", "2", "--window", "4",
                                   "--N", "6", "--dt", "0.05", "--out-dir", d.string()};
  auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(d / "bifurcation.csv");
  EXPECT_EQ(count_lines(csv), 3u);
  EXPECT_TRUE(fs::exists(d / "checkpoint.json"));
  auto ck = json::parse(slurp(d / "checkpoint.json"));
  EXPECT_EQ(ck["points"].size(), 2u);
  // resuming a finished sweep does no work and reproduces the table
  args.push_back("--resume");
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(slurp(d / "bifurcation.csv"), csv);
  EXPECT_EQ(run({"continue", "--dT-start", "0.1", "--dT-end", "0.2", "--dT-step", "-0.01", "--out-dir", d.string()})
                .code,
            2);
}
