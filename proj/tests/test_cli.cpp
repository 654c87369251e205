#include "qci/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace qci;
using cli::JobConfig;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(const JobConfig& cfg) {
  std::ostringstream out, err;
  const int code = cli::run(cfg, out, err);
  return {code, out.str(), err.str()};
}

JobConfig job(std::string command) {
  JobConfig c;
  c.command = std::move(command);
  c.threads = 2;
  return c;
}

io::Json parse(const Outcome& o) { return io::Json::parse(o.out); }

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << contents;
  return path;
}

}  // namespace

TEST(Cli, MeasureCnotClosedForm) {
  JobConfig c = job("measure");
  c.gate = "cnot";
  c.dims = {2, 2, 1};
  c.direction = "AtoB";
  c.format = "csv";
  const Outcome o = invoke(c);
  ASSERT_EQ(o.code, cli::kExitOk) << o.err;
  EXPECT_EQ(o.out, "direction,method,value,stderr,samples,dims\nAtoB,closed,1.333333333,0,0,2x2x1\n");
}

TEST(Cli, MeasureJsonFields) {
  JobConfig c = job("measure");
  c.gate = "cnot";
  c.dims = {2, 2, 1};
  const io::Json j = parse(invoke(c));
  ASSERT_EQ(j["rows"].size(), 2u);
  const auto& row = j["rows"][0];
  for (const char* key : {"direction", "method", "value", "stderr", "samples", "dims"}) EXPECT_TRUE(row.contains(key));
  EXPECT_EQ(row["value"].get<double>(), 1.333333333);
  EXPECT_EQ(j["rows"][1]["value"].get<double>(), 0.6666666667);
}

TEST(Cli, ExpectedPrintsFractionAndDecimal) {
  JobConfig c = job("expected");
  c.dims = {2, 2, 2};
  c.direction = "BtoA";
  c.format = "csv";
  const Outcome o = invoke(c);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out, "direction,fraction,value,dims\nBtoA,16/21,0.7619047619,2x2x2\n");
}

TEST(Cli, CheckPermutationVerdict) {
  JobConfig c = job("check");
  c.gate = "perm123";
  c.dims = {2, 2, 2};
  const io::Json j = parse(invoke(c));
  EXPECT_EQ(j["verdict"], "A→B: yes, B→A: no");
}

TEST(Cli, MonteCarloRerunIsIdentical) {
  JobConfig c = job("measure");
  c.gate = "smb";
  c.method = "monte_carlo";
  c.samples = 2000;
  c.seed = 17;
  const Outcome a = invoke(c);
  c.threads = 1;
  const Outcome b = invoke(c);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, ArgumentErrorsExitTwo) {
  JobConfig c = job("measure");
  c.gate = "nosuchgate";
  Outcome o = invoke(c);
  EXPECT_EQ(o.code, cli::kExitArgument);
  EXPECT_NE(o.err.find("nosuchgate"), std::string::npos);

  c.gate = "cnot";
  c.dims = {3, 2};
  EXPECT_EQ(invoke(c).code, cli::kExitArgument);

  c = job("measure");
  c.unitary_path = "/nonexistent/u.json";
  o = invoke(c);
  EXPECT_EQ(o.code, cli::kExitArgument);
  EXPECT_NE(o.err.find("/nonexistent/u.json"), std::string::npos);

  EXPECT_EQ(invoke(job("bogus")).code, cli::kExitArgument);
}

TEST(Cli, MalformedFileReportsField) {
  const auto path = temp_file("qci_cli_bad.json", R"({"dims":[2,2],"re":[[1,0],[0]]})");
  JobConfig c = job("check");
  c.unitary_path = path.string();
  const Outcome o = invoke(c);
  EXPECT_EQ(o.code, cli::kExitArgument);
  EXPECT_NE(o.err.find("'re'"), std::string::npos);
  EXPECT_NE(o.err.find(path.string()), std::string::npos);
}

TEST(Cli, NonUnitaryInputExitsThree) {
  const auto path = temp_file("qci_cli_nonunitary.json", R"({"dims":[2,2],"re":[[1,1,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]})");
  JobConfig c = job("measure");
  c.unitary_path = path.string();
  const Outcome o = invoke(c);
  EXPECT_EQ(o.code, cli::kExitInvariant);
  EXPECT_NE(o.err.find("invariant violated"), std::string::npos);
}

TEST(Cli, KrausFileRoundTrip) {
  std::mt19937_64 rng(3);
  const Channel dil = Channel::unitary(haar_unitary(8, rng), SystemDims::bipartite(2, 2, 2));
  const Channel k = dil.environment_traced();
  io::Json j = io::Json::object();
  j["dims"] = Dims{2, 2};
  j["kraus"] = io::Json::array();
  for (const auto& op : k.operators()) j["kraus"].push_back(io::matrix_to_json(op));
  const auto path = temp_file("qci_cli_kraus.json", j.dump());
  JobConfig c = job("measure");
  c.kraus_path = path.string();
  c.direction = "BtoA";
  const io::Json out = parse(invoke(c));
  EXPECT_NEAR(out["rows"][0]["value"].get<double>(), ci_closed_form(dil, Direction::kBtoA).value, 1e-9);
}

TEST(Cli, SwitchSweepEndpoints) {
  JobConfig c = job("switch-sweep");
  c.points = 4;
  const io::Json j = parse(invoke(c));
  ASSERT_EQ(j["rows"].size(), 4u);
  EXPECT_NEAR(j["rows"][0]["ci_AtoB"].get<double>(), 4.0, 1e-9);
  EXPECT_NEAR(j["rows"][0]["ci_BtoA"].get<double>(), 0.0, 1e-9);
  EXPECT_NEAR(j["rows"][2]["ci_AtoB"].get<double>(), 0.0, 1e-9);
  EXPECT_NEAR(j["rows"][2]["ci_BtoA"].get<double>(), 4.0, 1e-9);
  EXPECT_GT(j["rows"][1]["ci_AtoB"].get<double>(), 1e-3);
  EXPECT_GT(j["rows"][1]["ci_BtoA"].get<double>(), 1e-3);
}

TEST(Cli, DemoNoTransitivity) {
  const Outcome o = [] {
    JobConfig c = job("demo-no-transitivity");
    c.format = "csv";
    return invoke(c);
  }();
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("A(t0)->B(t1),true"), std::string::npos);
  EXPECT_NE(o.out.find("B(t1)->C(t2),true"), std::string::npos);
  EXPECT_NE(o.out.find("A(t0)->C(t2),false"), std::string::npos);
}

TEST(Cli, MomentAndNParty) {
  JobConfig m = job("moment2");
  m.p = {0, 1};
  m.q = {0, 1};
  m.r = {0, 1};
  m.s = {1, 0};
  m.moment_dim = 3;
  EXPECT_EQ(parse(invoke(m))["rows"][0]["fraction"], "-1/24");

  JobConfig n = job("measure-nparty");
  n.gate = "perm123";
  n.dims = {2, 2, 2, 1};
  n.from = 1;
  n.to = 2;
  const io::Json j = parse(invoke(n));
  EXPECT_EQ(j["rows"][0]["direction"], "1to2");
  EXPECT_GT(j["rows"][0]["value"].get<double>(), 0.1);

  n.to.reset();
  EXPECT_EQ(invoke(n).code, cli::kExitArgument);
}

TEST(Cli, BathGridFromConfig) {
  const auto path = temp_file("qci_cli_bath.json", R"({"d_nm":10,"T_K":2.73,"hbar_omega_max_eV":1,"n":5})");
  JobConfig c = job("bath-grid");
  c.config_path = path.string();
  const io::Json j = parse(invoke(c));
  EXPECT_EQ(j["rows"].size(), 25u);
  EXPECT_TRUE(j.contains("lambda"));
  EXPECT_TRUE(j["rows"][0].contains("delta"));

  const auto bad = temp_file("qci_cli_bath_bad.json", R"({"A":"x","y_m":4250})");
  c.config_path = bad.string();
  const Outcome o = invoke(c);
  EXPECT_EQ(o.code, cli::kExitArgument);
  EXPECT_NE(o.err.find("'A'"), std::string::npos);
}

TEST(Cli, HistogramMeta) {
  JobConfig c = job("histogram");
  c.samples = 200;
  c.seed = 1;
  const io::Json j = parse(invoke(c));
  EXPECT_EQ(j["samples"], 200u);
  EXPECT_TRUE(j.contains("mean"));
  std::uint64_t total = 0;
  for (const auto& row : j["rows"]) total += row["count"].get<std::uint64_t>();
  EXPECT_EQ(total, 200u);
}

TEST(Cli, OutputFileWritten) {
  const auto path = std::filesystem::temp_directory_path() / "qci_cli_out.csv";
  std::filesystem::remove(path);
  JobConfig c = job("expected");
  c.dims = {3, 2, 2};
  c.format = "csv";
  c.out_path = path.string();
  ASSERT_EQ(invoke(c).code, 0);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("BtoA,128/143,"), std::string::npos);
}
