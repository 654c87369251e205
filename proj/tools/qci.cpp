// qci: command-line front end; every subcommand is a reproducible batch job.

#include "qci/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

struct Flags {
  qci::cli::JobConfig cfg;
  std::size_t from = 0;
  std::size_t to = 0;
};

void add_common(CLI::App* sub, Flags& f) {
  auto& c = f.cfg;
  sub->add_option("--dims", c.dims, "Subsystem dimensions, comma separated")->delimiter(',');
  sub->add_option("--seed", c.seed, "Master seed (default 0)");
  sub->add_option("--threads", c.threads, "Worker cap (default: available parallelism)");
  sub->add_option("--out", c.out_path, "Output file (default stdout)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_channel(CLI::App* sub, Flags& f) {
  auto& c = f.cfg;
  sub->add_option("--gate", c.gate, "Catalog gate name");
  sub->add_option("--unitary", c.unitary_path, "Unitary JSON file {dims, re, im}");
  sub->add_option("--kraus", c.kraus_path, "Kraus JSON file {dims, kraus: [...]}");
}

void add_pair(CLI::App* sub, Flags& f) {
  sub->add_option("--from", f.from, "Influencing party (0-based)");
  sub->add_option("--to", f.to, "Influenced party (0-based)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qci: quantum causal influence between subsystems"};
  app.require_subcommand(1);
  Flags f;
  auto& c = f.cfg;

  auto* check = app.add_subcommand("check", "No-influence condition for a bipartite channel");
  add_channel(check, f);
  add_common(check, f);
  check->add_option("--direction", c.direction, "AtoB, BtoA or both");
  check->add_option("--tol", c.tolerance, "Absolute tolerance on F-tensor entries");

  auto* check_n = app.add_subcommand("check-nparty", "No-influence condition between two of n parties");
  add_channel(check_n, f);
  add_common(check_n, f);
  add_pair(check_n, f);
  check_n->add_flag("--sweep", c.sweep, "Sweep bystander probe states instead of maximally mixed");
  check_n->add_option("--tol", c.tolerance, "Absolute tolerance on F-tensor entries");

  auto* measure = app.add_subcommand("measure", "Causal-influence measure of a bipartite channel");
  add_channel(measure, f);
  add_common(measure, f);
  measure->add_option("--direction", c.direction, "AtoB, BtoA or both");
  measure->add_option("--method", c.method, "closed or monte_carlo");
  measure->add_option("--samples", c.samples, "Monte Carlo samples (default 100000)");
  measure->add_option("--convention", c.convention, "Diagonal derivative convention: trace or printed");

  auto* measure_n = app.add_subcommand("measure-nparty", "Causal-influence measure between two of n parties");
  add_channel(measure_n, f);
  add_common(measure_n, f);
  add_pair(measure_n, f);
  measure_n->add_option("--method", c.method, "closed or monte_carlo");
  measure_n->add_option("--samples", c.samples, "Monte Carlo samples (default 100000)");
  measure_n->add_option("--convention", c.convention, "trace or printed");

  auto* expected = app.add_subcommand("expected", "Haar expectation of the measure");
  add_common(expected, f);
  expected->add_option("--direction", c.direction, "AtoB, BtoA or both");

  auto* hist = app.add_subcommand("histogram", "Measure over Haar random unitaries");
  add_common(hist, f);
  hist->add_option("--direction", c.direction, "AtoB or BtoA (default BtoA)");
  hist->add_option("--samples", c.samples, "Number of unitaries (default 10000)");
  hist->add_option("--bin-width", c.bin_width, "Bin width (default 0.02)");
  hist->add_option("--convention", c.convention, "trace or printed");

  auto* moment = app.add_subcommand("moment2", "Order-2 Haar integral <p1p2,q1q2|r1r2,s1s2>");
  add_common(moment, f);
  moment->add_option("-p,--p", c.p, "p1,p2")->delimiter(',')->required();
  moment->add_option("-q,--q", c.q, "q1,q2")->delimiter(',')->required();
  moment->add_option("-r,--r", c.r, "r1,r2")->delimiter(',')->required();
  moment->add_option("-s,--s", c.s, "s1,s2")->delimiter(',')->required();
  moment->add_option("-D,--D", c.moment_dim, "Unitary group dimension");

  auto* sweep = app.add_subcommand("switch-sweep", "Causal switch CI over the control-qubit angle");
  add_common(sweep, f);
  sweep->add_option("--points", c.points, "Number of theta values on [0, 2pi)");
  sweep->add_option("--phase", c.phase, "Control-qubit relative phase");
  sweep->add_option("--first", c.first_gate, "Gate applied for control |0>");
  sweep->add_option("--second", c.second_gate, "Gate applied for control |1>");
  sweep->add_option("--convention", c.convention, "trace or printed");

  auto* grid = app.add_subcommand("bath-grid", "Dephasing CI and entanglement over a space-time grid");
  add_common(grid, f);
  grid->add_option("--config", c.config_path, "JSON parameters (numeric or physical set)");

  auto* demo = app.add_subcommand("demo-no-transitivity", "CNOT chain showing that influence is not transitive");
  add_common(demo, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qci::cli::kExitArgument;
  }

  for (auto* sub : app.get_subcommands()) {
    c.command = sub->get_name();
    if (auto* o = sub->get_option_no_throw("--from"); o && o->count() > 0) c.from = f.from;
    if (auto* o = sub->get_option_no_throw("--to"); o && o->count() > 0) c.to = f.to;
  }
  return qci::cli::run(c);
}
