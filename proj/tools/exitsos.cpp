#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "exitsos/exitsos.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace exitsos;

namespace {

struct CliError : std::runtime_error {
  CliError(std::string kind, const std::string& what) : std::runtime_error(what), kind(std::move(kind)) {}
  std::string kind;
};

// "2,3,4", "2-6" or a mix such as "2,4-6".
std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-', 1);
      if (dash == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {
        const int a = std::stoi(item.substr(0, dash)), b = std::stoi(item.substr(dash + 1));
        if (b < a) throw CliError("usage", "empty level range '" + item + "'");
        for (int l = a; l <= b; ++l) out.push_back(l);
      }
    } catch (const std::logic_error&) {
      throw CliError("usage", "bad --levels entry '" + item + "'");
    }
  }
  if (out.empty()) throw CliError("usage", "--levels is empty");
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CliError("io", "cannot write '" + path.string() + "'");
  f << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("io", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExitProblem load(const std::string& path) {
  try {
    return parse_problem(read_file(path));
  } catch (const ProblemParseError& e) {
    throw CliError("parse", path + ": " + e.what());
  }
}

void emit(const json& j, const std::string& out_dir, const std::string& name) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!out_dir.empty()) write_file(fs::path(out_dir) / name, text);
}

struct Args {
  RunConfig cfg;
  std::string levels_text;
  std::optional<int> level;
  unsigned jobs = 1;
  std::size_t dim = 0;
};

int run_solve(Args& a) {
  const ExitProblem prob = load(a.cfg.problem_path);
  if (!a.level) throw CliError("usage", "solve needs --level");
  a.cfg.levels = {*a.level};
  HierarchyOptions hopt;
  hopt.vdeg = a.cfg.vdeg;
  hopt.reg = a.cfg.reg;
  const Mode mode = mode_from_string(a.cfg.mode);
  const auto solver = make_solver(a.cfg.solver_name);
  const AssembledHierarchy h = detail::assemble(prob, *a.level, mode, hopt);

  const std::string out = a.cfg.output_dir.empty() ? std::string(".") : a.cfg.output_dir;
  std::ostringstream sdpa;
  write_sdpa(h.program, sdpa);
  const std::string sdpa_name = "problem_L" + std::to_string(*a.level) + ".dat-s";
  write_file(fs::path(out) / sdpa_name, sdpa.str());

  const HierarchySolution s = solve(prob, h, *solver, a.cfg.solver, a.cfg.verify_tol);
  json j = to_json(s);
  j["feasibility"] = to_json(posterior_feasibility_check(s, prob));
  j["sdpa"] = (fs::path(out) / sdpa_name).string();
  j["run_config"] = to_json(a.cfg);
  emit(j, out, "solution_L" + std::to_string(*a.level) + ".json");
  return s.solver.status == SolveStatus::Optimal ? 0 : 3;
}

int run_sweep(Args& a) {
  const ExitProblem prob = load(a.cfg.problem_path);
  a.cfg.levels = parse_levels(a.levels_text.empty() ? "1-4" : a.levels_text);
  HierarchyOptions hopt;
  hopt.vdeg = a.cfg.vdeg;
  hopt.reg = a.cfg.reg;
  const Mode mode = mode_from_string(a.cfg.mode);
  const auto solver = make_solver(a.cfg.solver_name);
  const OracleValue oracle = oracle_value(prob, a.cfg.mc);
  const auto rows = sweep(prob, a.cfg.levels, mode, *solver, oracle, a.cfg.solver, hopt, a.jobs);

  std::ostringstream csv;
  json meta = {{"oracle", to_json(oracle)}};
  csv << "# run_config: " << to_json(a.cfg).dump() << "\n";
  csv << "# " << meta.dump() << "\n";
  csv << kSweepCsvHeader << "\n";
  for (const auto& r : rows) csv << to_csv(r) << "\n";
  std::cout << csv.str();
  if (!a.cfg.output_dir.empty()) write_file(fs::path(a.cfg.output_dir) / "sweep.csv", csv.str());
  for (const auto& r : rows)
    if (!r.error.empty()) std::cerr << "level " << r.level << ": " << r.error << "\n";
  return 0;
}

int run_simulate(Args& a) {
  const ExitProblem prob = load(a.cfg.problem_path);
  a.cfg.mc.jobs = a.jobs;
  const McEstimate est = simulate_exit(prob, a.cfg.mc);
  json j = to_json(est);
  j["run_config"] = to_json(a.cfg);
  emit(j, a.cfg.output_dir, "simulate.json");
  return 0;
}

int run_bounds(Args& a) {
  const ExitProblem prob = load(a.cfg.problem_path);
  const int d = a.cfg.degree.value_or(prob.g.degree());
  a.cfg.degree = d;
  json rows = json::array();
  for (const auto& r : level_bounds(prob, d)) rows.push_back(to_json(r));
  json j = {{"rows", rows}, {"cn_upper", prob.n >= 2 ? json(cn_upper(static_cast<int>(prob.n), d)) : json(nullptr)}};
  j["run_config"] = to_json(a.cfg);
  emit(j, a.cfg.output_dir, "bounds.json");
  return 0;
}

int run_certify(Args& a) {
  json sol;
  try {
    sol = json::parse(read_file(a.cfg.problem_path));
  } catch (const json::parse_error& e) {
    throw CliError("parse", e.what());
  }
  json reports = json::array();
  bool all = true;
  for (const auto& cj : sol.at("certificates")) {
    GramCertificate c = certificate_from_json(cj);
    const VerificationReport r = verify_certificate(c, a.cfg.verify_tol);
    all = all && r.pass;
    json rj = to_json(r);
    rj["name"] = c.name;
    rj["kind"] = to_string(c.kind);
    reports.push_back(rj);
  }
  json j = {{"pass", all}, {"certificates", reports}};
  if (sol.contains("bound")) j["bound"] = sol["bound"];
  j["run_config"] = to_json(a.cfg);
  emit(j, a.cfg.output_dir, "certify.json");
  return all ? 0 : 4;
}

int run_pullback(Args& a) {
  if (a.dim < 2) throw CliError("usage", "pullback needs --dim >= 2");
  Polynomial p(a.dim);
  try {
    p = polynomial_from_text(a.dim, read_file(a.cfg.problem_path));
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError("parse", a.cfg.problem_path + ": " + e.what());
  }
  const SphereMap map(a.dim);
  const TrigPolynomial q = pullback(map, p);
  json j = {{"polynomial", to_json(p)}, {"pullback", to_json(q)}, {"mean", {trig_mean(q).real(), trig_mean(q).imag()}},
            {"fnorm_centered", trig_fnorm(without_mean(q))}};
  j["run_config"] = to_json(a.cfg);
  emit(j, a.cfg.output_dir, "pullback.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exitsos: SOS bounds for exit values of polynomial diffusions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Args a;

  auto common = [&](CLI::App* sub, const char* file_help) {
    sub->add_option("file", a.cfg.problem_path, file_help)->required();
    sub->add_option("--out", a.cfg.output_dir, "Output directory for artifacts");
  };
  auto solver_flags = [&](CLI::App* sub) {
    sub->add_option("--mode", a.cfg.mode, "Hierarchy mode")->check(CLI::IsMember({"trig", "baseline"}));
    sub->add_option("--vdeg", a.cfg.vdeg, "Degree of the polynomial v");
    sub->add_option("--reg", a.cfg.reg, "Trace regularization weight");
    sub->add_option("--tol", a.cfg.solver.feasibility_tol, "Solver feasibility and gap tolerance")
        ->each([&](const std::string&) { a.cfg.solver.gap_tol = a.cfg.solver.feasibility_tol; });
    sub->add_option("--time-limit", a.cfg.solver.time_limit_seconds, "Solver time limit in seconds");
    sub->add_option("--verify-tol", a.cfg.verify_tol, "Certificate residual tolerance");
  };
  auto mc_flags = [&](CLI::App* sub) {
    sub->add_option("--mc-paths", a.cfg.mc.paths, "Monte-Carlo paths");
    sub->add_option("--dt", a.cfg.mc.dt, "Euler-Maruyama step");
    sub->add_option("--seed", a.cfg.mc.seed, "Monte-Carlo seed");
    sub->add_option("--max-steps", a.cfg.mc.max_steps, "Step cap per path");
  };

  auto* solve_cmd = app.add_subcommand("solve", "Solve one hierarchy level");
  common(solve_cmd, "Problem file");
  solver_flags(solve_cmd);
  solve_cmd->add_option("--level", a.level, "Hierarchy level")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Solve a range of levels and compare with the oracle");
  common(sweep_cmd, "Problem file");
  solver_flags(sweep_cmd);
  mc_flags(sweep_cmd);
  sweep_cmd->add_option("--levels", a.levels_text, "Levels, e.g. 2,3,4 or 2-6");
  sweep_cmd->add_option("--jobs", a.jobs, "Levels solved concurrently");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo exit value");
  common(sim_cmd, "Problem file");
  mc_flags(sim_cmd);
  sim_cmd->add_option("--jobs", a.jobs, "Worker threads");

  auto* bounds_cmd = app.add_subcommand("bounds", "Closed-form level bounds");
  common(bounds_cmd, "Problem file");
  bounds_cmd->add_option("--degree", a.cfg.degree, "Degree d (default deg g)");

  auto* cert_cmd = app.add_subcommand("certify", "Re-verify certificates of a stored solution");
  common(cert_cmd, "Solution JSON written by solve");
  cert_cmd->add_option("--tol", a.cfg.verify_tol, "Certificate residual tolerance");

  auto* pb_cmd = app.add_subcommand("pullback", "Spherical pullback of a polynomial");
  common(pb_cmd, "File with polynomial terms");
  pb_cmd->add_option("--dim", a.dim, "Number of variables")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cout << json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    a.cfg.verb = sub->get_name();
    a.cfg.solver_name = [] {
      const char* env = std::getenv("EXITSOS_SOLVER");
      return env ? std::string(env) : std::string("ipm");
    }();
    if (a.cfg.verb == "solve") return run_solve(a);
    if (a.cfg.verb == "sweep") return run_sweep(a);
    if (a.cfg.verb == "simulate") return run_simulate(a);
    if (a.cfg.verb == "bounds") return run_bounds(a);
    if (a.cfg.verb == "certify") return run_certify(a);
    return run_pullback(a);
  } catch (const CliError& e) {
    std::cout << json{{"error", {{"kind", e.kind}, {"message", e.what()}}}}.dump() << "\n";
    return e.kind == "usage" || e.kind == "parse" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cout << json{{"error", {{"kind", "runtime"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
}
