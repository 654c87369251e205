// cli.hpp: batch jobs behind the qci command-line tool

#pragma once

#include "qci/causality.hpp"
#include "qci/gates.hpp"
#include "qci/io.hpp"
#include "qci/measure.hpp"
#include "qci/spinboson.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qci::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitArgument = 2;
inline constexpr int kExitInvariant = 3;

inline constexpr std::array<std::string_view, 10> kCommands{
    "check",     "check-nparty", "measure",      "measure-nparty", "expected",
    "histogram", "moment2",      "switch-sweep", "bath-grid",      "demo-no-transitivity"};

struct JobConfig {
  std::string command;

  // channel sources (exactly one of gate / unitary / kraus where a channel is needed)
  std::string gate;
  std::string unitary_path;
  std::string kraus_path;
  std::string config_path;  // bath-grid parameters

  Dims dims;
  std::string direction = "both";  // AtoB | BtoA | both
  std::string method = "closed";   // closed | monte_carlo
  std::string convention = "trace";  // trace | printed
  std::size_t samples = 0;           // 0 = command default
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out_path;  // empty = stdout
  std::string format = "json";

  double tolerance = kDefaultConditionTolerance;
  std::optional<std::size_t> from;
  std::optional<std::size_t> to;
  bool sweep = false;

  std::size_t points = 64;
  double phase = 0.0;
  std::string first_gate = "perm123";
  std::string second_gate = "perm132";

  std::vector<std::size_t> p, q, r, s;
  std::size_t moment_dim = 2;

  double bin_width = 0.02;
};

namespace detail {

inline std::vector<Direction> directions(const std::string& d) {
  if (d == "AtoB") return {Direction::kAtoB};
  if (d == "BtoA") return {Direction::kBtoA};
  if (d == "both") return {Direction::kAtoB, Direction::kBtoA};
  throw std::invalid_argument("--direction must be AtoB, BtoA or both, got '" + d + "'");
}

inline Method method(const std::string& m) {
  if (m == "closed") return Method::kClosedForm;
  if (m == "monte_carlo" || m == "mc") return Method::kMonteCarlo;
  throw std::invalid_argument("--method must be closed or monte_carlo, got '" + m + "'");
}

inline DerivativeConvention convention(const std::string& c) {
  if (c == "trace") return DerivativeConvention::kTraceConstrained;
  if (c == "printed") return DerivativeConvention::kAsPrinted;
  throw std::invalid_argument("--convention must be trace or printed, got '" + c + "'");
}

inline GateName gate_name(const std::string& name) {
  if (auto g = parse_gate_name(name)) return *g;
  std::string known;
  for (const auto& [g, n] : kGateNames) known += (known.empty() ? "" : ", ") + std::string(n);
  throw std::invalid_argument("unknown gate '" + name + "' (known: " + known + ")");
}

enum class Layout { kBipartite, kNParty };

inline SystemDims make_dims(const Dims& list, Layout layout) {
  return layout == Layout::kBipartite ? SystemDims::bipartite_from(list) : SystemDims::nparty_from(list);
}

/// Gate dims: the full list, or the parties alone when the environment is trivial.
inline UnitaryMatrix catalog_unitary(GateName g, const SystemDims& sd) {
  try {
    return gate(g, sd.all());
  } catch (const std::invalid_argument&) {
    if (sd.env != 1) throw;
    return gate(g, sd.parties);
  }
}

inline Channel load_channel(const JobConfig& cfg, Layout layout) {
  const int sources = !cfg.gate.empty() + !cfg.unitary_path.empty() + !cfg.kraus_path.empty();
  if (sources != 1) throw std::invalid_argument("exactly one of --gate, --unitary, --kraus is required");

  if (!cfg.gate.empty()) {
    const GateName g = gate_name(cfg.gate);
    Dims list = cfg.dims;
    if (list.empty()) {
      const bool three = g == GateName::kToffoli || g == GateName::kFredkin || g == GateName::kSmb ||
                         g == GateName::kPerm123 || g == GateName::kPerm132;
      list = three ? Dims{2, 2, 2} : Dims{2, 2};
      if (layout == Layout::kNParty) list.push_back(1);
    }
    const SystemDims sd = make_dims(list, layout);
    return Channel::unitary(catalog_unitary(g, sd), sd);
  }

  if (!cfg.unitary_path.empty()) {
    const auto file = io::load_matrix_file(cfg.unitary_path);
    const Dims list = !cfg.dims.empty() ? cfg.dims : file.dims.value_or(Dims{});
    if (list.empty()) throw std::invalid_argument("file '" + cfg.unitary_path + "': field 'dims' is missing (or pass --dims)");
    if (file.matrix.rows() != file.matrix.cols())
      throw std::invalid_argument("file '" + cfg.unitary_path + "': field 're' is not square");
    const SystemDims sd = make_dims(list, layout);
    return Channel::unitary(UnitaryMatrix(file.matrix), sd);
  }

  const auto file = io::load_kraus_file(cfg.kraus_path);
  const Dims list = !cfg.dims.empty() ? cfg.dims : file.dims.value_or(Dims{});
  if (list.empty()) throw std::invalid_argument("file '" + cfg.kraus_path + "': field 'dims' is missing (or pass --dims)");
  return Channel::kraus(file.ops, make_dims(list, layout));
}

inline std::size_t samples_or(const JobConfig& cfg, std::size_t fallback) {
  return cfg.samples == 0 ? fallback : cfg.samples;
}

inline const std::vector<std::string> kResultColumns{"direction", "method", "value", "stderr", "samples", "dims"};

inline std::vector<io::Cell> result_row(const CIResult& r) {
  return {r.direction, std::string(to_string(r.method)), r.value, r.std_error,
          static_cast<std::uint64_t>(r.samples), r.dims};
}

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

inline std::vector<std::pair<std::size_t, std::size_t>> party_pairs(const JobConfig& cfg, const SystemDims& sd) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (cfg.from.has_value() != cfg.to.has_value())
    throw std::invalid_argument("--from and --to must be given together");
  if (cfg.from) {
    if (*cfg.from == *cfg.to) throw std::invalid_argument("--from and --to must differ");
    out.emplace_back(*cfg.from, *cfg.to);
    return out;
  }
  for (std::size_t l = 0; l < sd.n_parties(); ++l)
    for (std::size_t k = 0; k < sd.n_parties(); ++k)
      if (l != k && sd.parties[l] >= 2 && sd.parties[k] >= 2) out.emplace_back(l, k);
  return out;
}

// --- commands ---

inline io::Table cmd_check(const JobConfig& cfg) {
  const Channel ch = load_channel(cfg, Layout::kBipartite);
  io::Table t{"check", {"direction", "influence", "max_violation", "tolerance"}, {}, {}};
  std::string verdict;
  for (Direction d : directions(cfg.direction)) {
    const auto v = check_no_ci(ch, d, cfg.tolerance);
    t.add({std::string(to_string(d)), v.influence, v.max_violation, v.tolerance});
    verdict += std::string(verdict.empty() ? "" : ", ") + (d == Direction::kAtoB ? "A→B: " : "B→A: ") +
               yes_no(v.influence);
  }
  t.meta["dims"] = ch.dims().label();
  t.meta["verdict"] = verdict;
  return t;
}

inline io::Table cmd_check_nparty(const JobConfig& cfg) {
  const Channel ch = load_channel(cfg, Layout::kNParty);
  io::Table t{"check-nparty", {"from", "to", "influence", "max_violation", "tolerance", "bystanders"}, {}, {}};
  for (const auto& [l, k] : party_pairs(cfg, ch.dims())) {
    const auto v = cfg.sweep ? check_no_ci_nparty_sweep(ch, l, k, cfg.tolerance)
                             : check_no_ci_nparty(ch, l, k, {}, cfg.tolerance);
    t.add({static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(k), v.influence, v.max_violation,
           v.tolerance, std::string(cfg.sweep ? "probe_sweep" : "maximally_mixed")});
  }
  t.meta["dims"] = ch.dims().label();
  return t;
}

inline io::Table cmd_measure(const JobConfig& cfg) {
  const Channel ch = load_channel(cfg, Layout::kBipartite);
  const Method m = method(cfg.method);
  const DerivativeConvention conv = convention(cfg.convention);
  io::Table t{"measure", kResultColumns, {}, {}};
  for (Direction d : directions(cfg.direction)) {
    const CIResult r = m == Method::kClosedForm
                           ? ci_closed_form(ch, d, conv)
                           : ci_monte_carlo(ch, d, {samples_or(cfg, 100000), cfg.seed, cfg.threads, conv});
    t.add(result_row(r));
  }
  if (m == Method::kMonteCarlo) t.meta["seed"] = cfg.seed;
  return t;
}

inline io::Table cmd_measure_nparty(const JobConfig& cfg) {
  const Channel ch = load_channel(cfg, Layout::kNParty);
  const Method m = method(cfg.method);
  const DerivativeConvention conv = convention(cfg.convention);
  io::Table t{"measure-nparty", kResultColumns, {}, {}};
  for (const auto& [l, k] : party_pairs(cfg, ch.dims())) {
    const CIResult r = m == Method::kClosedForm
                           ? ci_nparty(ch, l, k, {}, conv)
                           : ci_monte_carlo_nparty(ch, l, k, {}, {samples_or(cfg, 100000), cfg.seed, cfg.threads, conv});
    t.add(result_row(r));
  }
  if (m == Method::kMonteCarlo) t.meta["seed"] = cfg.seed;
  return t;
}

inline io::Table cmd_expected(const JobConfig& cfg) {
  if (cfg.dims.size() != 2 && cfg.dims.size() != 3)
    throw std::invalid_argument("expected: --dims needs d_A,d_B[,d_C]");
  const std::size_t dc = cfg.dims.size() == 3 ? cfg.dims[2] : 1;
  io::Table t{"expected", {"direction", "fraction", "value", "dims"}, {}, {}};
  for (Direction d : directions(cfg.direction)) {
    const Rational e = expected_ci(cfg.dims[0], cfg.dims[1], dc, d);
    std::ostringstream frac;
    frac << e.numerator() << "/" << e.denominator();
    t.add({std::string(to_string(d)), frac.str(), to_double(e), dims_label(Dims{cfg.dims[0], cfg.dims[1], dc})});
  }
  return t;
}

inline io::Table cmd_histogram(const JobConfig& cfg) {
  const SystemDims sd = SystemDims::bipartite_from(cfg.dims.empty() ? Dims{2, 2, 2} : cfg.dims);
  const auto dirs = directions(cfg.direction == "both" ? "BtoA" : cfg.direction);
  HistogramOptions opt;
  opt.samples = samples_or(cfg, 10000);
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  opt.bin_width = cfg.bin_width;
  opt.direction = dirs.front();
  opt.convention = convention(cfg.convention);
  const HistogramSummary h = histogram(sd, opt);
  io::Table t{"histogram", {"bin_lo", "bin_hi", "count"}, {}, {}};
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    t.add({static_cast<double>(b) * h.bin_width, static_cast<double>(b + 1) * h.bin_width,
           static_cast<std::uint64_t>(h.counts[b])});
  t.meta["dims"] = sd.label();
  t.meta["direction"] = std::string(to_string(opt.direction));
  t.meta["samples"] = h.samples;
  t.meta["seed"] = cfg.seed;
  t.meta["mean"] = io::rounded(h.mean);
  t.meta["std"] = io::rounded(h.std_dev);
  t.meta["bin_width"] = io::rounded(h.bin_width);
  return t;
}

inline io::Table cmd_moment2(const JobConfig& cfg) {
  auto pair = [](const std::vector<std::size_t>& v, const char* name) {
    if (v.size() != 2) throw std::invalid_argument(std::string("moment2: --") + name + " needs two indices");
    return std::array<std::size_t, 2>{v[0], v[1]};
  };
  const MomentQuery mq{pair(cfg.p, "p"), pair(cfg.q, "q"), pair(cfg.r, "r"), pair(cfg.s, "s"), cfg.moment_dim};
  const Rational v = haar_moment2(mq);
  std::ostringstream frac;
  frac << v.numerator() << "/" << v.denominator();
  io::Table t{"moment2", {"D", "p", "q", "r", "s", "fraction", "value"}, {}, {}};
  auto label = [](const std::array<std::size_t, 2>& a) { return std::to_string(a[0]) + " " + std::to_string(a[1]); };
  t.add({static_cast<std::uint64_t>(mq.dim), label(mq.p), label(mq.q), label(mq.r), label(mq.s), frac.str(),
         to_double(v)});
  return t;
}

inline io::Table cmd_switch_sweep(const JobConfig& cfg) {
  if (cfg.points < 2) throw std::invalid_argument("switch-sweep: --points must be >= 2");
  const SystemDims component = SystemDims::bipartite_from(cfg.dims.empty() ? Dims{2, 2, 2} : cfg.dims);
  const UnitaryMatrix first = catalog_unitary(gate_name(cfg.first_gate), component);
  const UnitaryMatrix second = catalog_unitary(gate_name(cfg.second_gate), component);
  const DerivativeConvention conv = convention(cfg.convention);
  const SystemDims sd = switch_dims(component);

  struct Row {
    double theta, ab, ba;
  };
  const auto rows = parallel_map<Row>(cfg.points, cfg.threads, [&](std::size_t k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(cfg.points);
    const Channel ch = Channel::unitary(switched_evolution(first, second, component, {theta, cfg.phase}), sd);
    return Row{theta, ci_closed_form(ch, Direction::kAtoB, conv).value, ci_closed_form(ch, Direction::kBtoA, conv).value};
  });
  io::Table t{"switch-sweep", {"theta", "phase", "ci_AtoB", "ci_BtoA"}, {}, {}};
  for (const auto& r : rows) t.add({r.theta, cfg.phase, r.ab, r.ba});
  t.meta["first"] = cfg.first_gate;
  t.meta["second"] = cfg.second_gate;
  t.meta["dims"] = component.label();
  return t;
}

struct BathGridConfig {
  DQDParams params;
  GridSpec grid;
  std::optional<double> tau_s;
};

/// Numeric {"A","y_m","f_exponent"} or physical {"d_nm","T_K","hbar_omega_max_eV"},
/// plus optional "t_range", "t0_range", "n".
inline BathGridConfig parse_bath_config(const io::Json& j, const std::string& where) {
  BathGridConfig out;
  auto number = [&](const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw std::invalid_argument(where + ": field '" + key + "' must be a number");
    return v.get<double>();
  };
  auto range = [&](const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw std::invalid_argument(where + ": field '" + key + "' must be [lo, hi]");
    lo = v[0].get<double>();
    hi = v[1].get<double>();
  };
  if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
  const bool numeric = j.contains("A") || j.contains("y_m") || j.contains("f_exponent");
  if (numeric) {
    for (const char* key : {"A", "y_m"})
      if (!j.contains(key)) throw std::invalid_argument(where + ": field '" + key + "' is missing");
    out.params.amplitude = number("A");
    out.params.y_max = number("y_m");
    out.params.f_exponent = j.contains("f_exponent") ? number("f_exponent") : 0.0;
  } else {
    PhysicalParams phys;
    if (j.contains("d_nm")) phys.dipole_nm = number("d_nm");
    if (j.contains("T_K")) phys.temperature_k = number("T_K");
    if (j.contains("hbar_omega_max_eV")) phys.hbar_omega_max_ev = number("hbar_omega_max_eV");
    const DerivedDQD d = dqd_from_physical(phys);
    out.params = d.params;
    out.tau_s = d.tau_s;
  }
  range("t_range", out.grid.t_lo, out.grid.t_hi);
  range("t0_range", out.grid.t0_lo, out.grid.t0_hi);
  if (j.contains("n")) {
    const auto& v = j.at("n");
    if (!v.is_number_integer() || v.get<long long>() < 2)
      throw std::invalid_argument(where + ": field 'n' must be an integer >= 2");
    out.grid.n = v.get<std::size_t>();
  }
  if (j.contains("linear_t")) out.grid.log_t = !j.at("linear_t").get<bool>();
  if (j.contains("linear_t0")) out.grid.log_t0 = !j.at("linear_t0").get<bool>();
  return out;
}

inline io::Table cmd_bath_grid(const JobConfig& cfg) {
  const BathGridConfig bc = cfg.config_path.empty()
                                ? parse_bath_config(io::Json::object(), "defaults")
                                : parse_bath_config(io::read_json_file(cfg.config_path), "file '" + cfg.config_path + "'");
  SpaceTimeGrid g = spacetime_grid(bc.params, bc.grid, plus_plus_state(), {CouplingAgents{}, cfg.threads});
  const LambdaFit fit = fit_lambda(g);
  io::Table t{"bath-grid", {"t", "t0", "ci", "eof", "delta"}, {}, {}};
  for (std::size_t r = 0; r < g.t.size(); ++r)
    for (std::size_t c = 0; c < g.t0.size(); ++c) {
      const auto i = static_cast<Eigen::Index>(r), k = static_cast<Eigen::Index>(c);
      t.add({g.t[r], g.t0[c], g.ci(i, k), g.eof(i, k), g.delta(i, k)});
    }
  t.meta["A"] = io::rounded(bc.params.amplitude);
  t.meta["y_m"] = io::rounded(bc.params.y_max);
  t.meta["f_exponent"] = io::rounded(bc.params.f_exponent);
  if (bc.tau_s) t.meta["tau_s"] = io::rounded(*bc.tau_s);
  t.meta["lambda"] = io::rounded(fit.lambda);
  t.meta["max_abs_residual"] = io::rounded(fit.max_abs_residual);
  return t;
}

/// CNOT (control B, target A) then CNOT (control B, target C) on three qubits.
inline io::Table cmd_demo_no_transitivity(const JobConfig& cfg) {
  const SystemDims sd{{2, 2, 2}, 1};
  const Dims all = sd.all();
  const UnitaryMatrix first = cnot_between(all, 1, 0);
  const UnitaryMatrix second = cnot_between(all, 1, 2);
  const Channel step1 = Channel::unitary(first, sd);
  const Channel step2 = Channel::unitary(second, sd);
  const Channel both = Channel::unitary(UnitaryMatrix(second.matrix() * first.matrix()), sd);

  io::Table t{"demo-no-transitivity", {"link", "influence", "max_violation"}, {}, {}};
  const auto ab = check_no_ci_nparty_sweep(step1, 0, 1, cfg.tolerance);
  const auto bc = check_no_ci_nparty_sweep(step2, 1, 2, cfg.tolerance);
  const auto ac = check_no_ci_nparty_sweep(both, 0, 2, cfg.tolerance);
  t.add({std::string("A(t0)->B(t1)"), ab.influence, ab.max_violation});
  t.add({std::string("B(t1)->C(t2)"), bc.influence, bc.max_violation});
  t.add({std::string("A(t0)->C(t2)"), ac.influence, ac.max_violation});
  return t;
}

}  // namespace detail

inline io::Table execute(const JobConfig& cfg) {
  const std::string& c = cfg.command;
  if (c == "check") return detail::cmd_check(cfg);
  if (c == "check-nparty") return detail::cmd_check_nparty(cfg);
  if (c == "measure") return detail::cmd_measure(cfg);
  if (c == "measure-nparty") return detail::cmd_measure_nparty(cfg);
  if (c == "expected") return detail::cmd_expected(cfg);
  if (c == "histogram") return detail::cmd_histogram(cfg);
  if (c == "moment2") return detail::cmd_moment2(cfg);
  if (c == "switch-sweep") return detail::cmd_switch_sweep(cfg);
  if (c == "bath-grid") return detail::cmd_bath_grid(cfg);
  if (c == "demo-no-transitivity") return detail::cmd_demo_no_transitivity(cfg);
  throw std::invalid_argument("unknown command '" + c + "'");
}

inline void write_table(const io::Table& t, const std::string& format, std::ostream& os) {
  if (format == "csv") {
    io::write_csv(t, os);
  } else {
    io::write_json(t, os);
  }
}

/// Runs one job; output goes to cfg.out_path or `out`, diagnostics to `err`.
/// Exit status: 0 success, 2 argument error, 3 numerical-invariant failure.
inline int run(const JobConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    if (cfg.format != "csv" && cfg.format != "json")
      throw std::invalid_argument("--format must be csv or json, got '" + cfg.format + "'");
    const io::Table t = execute(cfg);
    if (cfg.out_path.empty()) {
      write_table(t, cfg.format, out);
    } else {
      std::ofstream f(cfg.out_path, std::ios::binary);
      if (!f) throw std::invalid_argument("cannot write output file '" + cfg.out_path + "'");
      write_table(t, cfg.format, f);
    }
    return kExitOk;
  } catch (const InvariantError& e) {
    err << "qci: invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    err << "qci: " << e.what() << '\n';
    return kExitArgument;
  } catch (const std::out_of_range& e) {
    err << "qci: " << e.what() << '\n';
    return kExitArgument;
  } catch (const std::exception& e) {
    err << "qci: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace qci::cli
