#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polequil/csv.hpp"
#include "polequil/scenario_io.hpp"

namespace polequil::cli {

struct Options {
  std::string file;
  std::string out_dir = "out";
  bool quiet = false;
  std::string param;
  std::optional<double> from, to;
  std::optional<int> steps;
  std::optional<double> epsilon, gamma;
  std::optional<std::uint64_t> seed;
  std::string region;
};

namespace detail {

inline std::optional<std::string> exp_get(const ScenarioFile& f,
                                          const std::string& key) {
  if (const auto* v = f.find("experiment", key)) return *v;
  return std::nullopt;
}

inline double exp_num(const ScenarioFile& f, const std::string& key, double fallback) {
  if (const auto v = exp_get(f, key)) return ioutil::to_number(*v, key);
  return fallback;
}

inline std::vector<double> linspace(double from, double to, int steps) {
  if (steps < 2) throw ValidationError("grids need at least 2 steps");
  std::vector<double> grid(steps);
  for (int i = 0; i < steps; ++i)
    grid[i] = from + (to - from) * double(i) / double(steps - 1);
  return grid;
}

inline std::string out_path(const Options& opt, const std::string& name) {
  std::filesystem::create_directories(opt.out_dir);
  return (std::filesystem::path(opt.out_dir) / name).string();
}

inline Pdf1D named_pdf(const ScenarioFile& f, const std::string& name) {
  iodetail::KeyTracker keys(f);
  iodetail::PdfResolver pdfs(f, keys);
  return pdfs.resolve(name);
}

inline void print_equilibrium(std::ostream& out, const EquilibriumResult& eq) {
  out << "equilibrium: x_left = " << csv_num(eq.pair.left)
      << ", x_right = " << csv_num(eq.pair.right) << "\n"
      << "foc residual: (" << csv_num(eq.foc_residual[0]) << ", "
      << csv_num(eq.foc_residual[1]) << ")\n"
      << "det(H) = " << csv_num(eq.hessian.det())
      << ", iterations = " << eq.iterations << "\n"
      << "uniqueness certified: "
      << (eq.diagnostics.unique_certified() ? "yes" : "NO") << "\n";
}

inline int finish_1d(const Options& opt, std::ostream& out,
                     const EquilibriumResult& eq) {
  if (!eq.diagnostics.unique_certified()) {
    if (!opt.quiet)
      out << "diagnostics failure: utility slices are not unimodal\n";
    return 2;
  }
  return 0;
}

inline int cmd_solve(const Options& opt, const ScenarioFile& f, std::ostream& out) {
  const Scenario1D s = build_scenario_1d(f);
  const auto eq = solve_nash(s);
  if (!opt.quiet) print_equilibrium(out, eq);
  csv_of_equilibrium(eq).write(out_path(opt, "equilibrium.csv"));
  return finish_1d(opt, out, eq);
}

inline int cmd_sweep(const Options& opt, const ScenarioFile& f, std::ostream& out) {
  std::string param = opt.param;
  if (param.empty()) param = exp_get(f, "param").value_or("");
  if (param.empty()) throw ValidationError("sweep needs --param (or experiment.param)");
  const double from = opt.from.value_or(exp_num(f, "from", 0.0));
  const double to = opt.to.value_or(exp_num(f, "to", 1.0));
  const int steps = opt.steps.value_or(int(exp_num(f, "steps", 21)));
  const auto grid = linspace(from, to, steps);
  const auto path = sweep_scenarios(param, grid, [&](double v) {
    ScenarioFile variant = f;
    variant.set(param, csv_num(v));
    return build_scenario_1d(variant);
  });
  csv_of_path(path).write(out_path(opt, "sweep.csv"));
  if (!opt.quiet) {
    out << "sweep over " << param << ": " << steps << " points in [" << from
        << ", " << to << "]\n";
    out << "x_left range: [" << csv_num(path.points.front().pair.left) << " ... "
        << csv_num(path.points.back().pair.left) << "]\n";
    out << "x_right range: [" << csv_num(path.points.front().pair.right) << " ... "
        << csv_num(path.points.back().pair.right) << "]\n";
  }
  return 0;
}

inline int cmd_elasticity(const Options& opt, const ScenarioFile& f,
                          std::ostream& out) {
  const Scenario1D s = build_scenario_1d(f);
  const double eps = opt.epsilon.value_or(exp_num(f, "epsilon", 1e-3));
  const std::string side_name = exp_get(f, "side").value_or("right");
  const Side side = (side_name == "left") ? Side::Left : Side::Right;
  const auto eq = solve_nash(s);
  const auto rep = perturb_deviation(s, eq, eps, side);
  csv_of_sensitivity(rep).write(out_path(opt, "elasticity.csv"));
  if (!opt.quiet) {
    print_equilibrium(out, eq);
    out << "deviation-cost perturbation (side = " << side_name
        << ", epsilon = " << csv_num(eps) << ")\n"
        << "predicted dx = (" << csv_num(rep.dx_pred[0]) << ", "
        << csv_num(rep.dx_pred[1]) << ")\n"
        << "oracle dx    = (" << csv_num(rep.dx_oracle[0]) << ", "
        << csv_num(rep.dx_oracle[1]) << ")\n"
        << "elasticity   = (" << csv_num(rep.elasticity[0]) << ", "
        << csv_num(rep.elasticity[1]) << ")\n";
  }
  return finish_1d(opt, out, eq);
}

inline int cmd_distperturb(const Options& opt, const ScenarioFile& f,
                           std::ostream& out) {
  const Scenario1D s = build_scenario_1d(f);
  const double gamma = opt.gamma.value_or(exp_num(f, "gamma", 0.05));
  std::string from_name = exp_get(f, "direction_from").value_or("");
  std::string to_name = exp_get(f, "direction_to").value_or("");
  if (from_name.empty() || to_name.empty()) {
    // default direction: toward the second component of a mixture voter pdf
    const auto* first = f.find("functions", "g.first");
    const auto* second = f.find("functions", "g.second");
    if (!first || !second)
      throw ValidationError(
          "distperturb needs experiment.direction_from/to or a mixture g");
    from_name = *first;
    to_name = *second;
  }
  const auto eq = solve_nash(s);
  const auto rep = perturb_distribution(s, eq, gamma, named_pdf(f, to_name),
                                        named_pdf(f, from_name));
  csv_of_sensitivity(rep).write(out_path(opt, "distperturb.csv"));
  if (!opt.quiet) {
    print_equilibrium(out, eq);
    out << "distribution perturbation toward '" << to_name << "' (gamma = "
        << csv_num(gamma) << ")\n"
        << "predicted dx = (" << csv_num(rep.dx_pred[0]) << ", "
        << csv_num(rep.dx_pred[1]) << ")\n"
        << "oracle dx    = (" << csv_num(rep.dx_oracle[0]) << ", "
        << csv_num(rep.dx_oracle[1]) << ")\n";
  }
  return finish_1d(opt, out, eq);
}

inline int cmd_mixpath(const Options& opt, const ScenarioFile& f, std::ostream& out) {
  const auto* first = f.find("functions", "g.first");
  const auto* second = f.find("functions", "g.second");
  if (!first || !second)
    throw ValidationError("mixpath needs a mixture voter pdf g");
  const Scenario1D base = build_scenario_1d(f);
  const int steps = opt.steps.value_or(int(exp_num(f, "lambda_steps", 11)));
  const auto lambdas = linspace(0.0, 1.0, steps);
  const auto rep = mixture_containment(base, named_pdf(f, *first),
                                       named_pdf(f, *second), lambdas);
  csv_of_mixture(rep).write(out_path(opt, "mixpath.csv"));
  if (!opt.quiet) {
    out << "mixture path '" << *first << "' -> '" << *second << "' over "
        << steps << " points\n"
        << "endpoints: (" << csv_num(rep.endpoint_g.left) << ", "
        << csv_num(rep.endpoint_g.right) << ") -> ("
        << csv_num(rep.endpoint_s.left) << ", " << csv_num(rep.endpoint_s.right)
        << ")\n"
        << "containment: " << (rep.contained ? "holds" : "VIOLATED")
        << ", margin = " << csv_num(rep.containment_margin) << "\n";
  }
  return rep.contained ? 0 : 2;
}

inline int cmd_solve_nd(const Options& opt, ScenarioFile f, std::ostream& out) {
  if (!opt.region.empty()) f.set("solver.region", opt.region);
  const ScenarioND s = build_scenario_nd(f);
  const auto eq = solve_nash_nd(s);
  csv_of_equilibrium_nd(eq).write(out_path(opt, "equilibrium_nd.csv"));
  if (!opt.quiet) {
    out << "x_left  = (";
    for (std::size_t i = 0; i < s.dim; ++i)
      out << (i ? ", " : "") << csv_num(eq.pair.left[i]);
    out << ")\nx_right = (";
    for (std::size_t i = 0; i < s.dim; ++i)
      out << (i ? ", " : "") << csv_num(eq.pair.right[i]);
    out << ")\ngradient residual = " << csv_num(eq.residual_norm)
        << ", slices unimodal: " << (eq.worst_slice_maxima <= 1 ? "yes" : "NO")
        << "\n";
  }
  return eq.worst_slice_maxima <= 1 ? 0 : 2;
}

inline int cmd_phi_sweep(const Options& opt, ScenarioFile f, std::ostream& out) {
  if (!opt.region.empty()) f.set("solver.region", opt.region);
  const ScenarioND s = build_scenario_nd(f);
  const double from = opt.from.value_or(exp_num(f, "from", 0.5));
  const double to = opt.to.value_or(exp_num(f, "to", 2.0));
  const int steps = opt.steps.value_or(int(exp_num(f, "steps", 16)));
  const auto path = sweep_phi_scale(s, linspace(from, to, steps));
  csv_of_path_nd(path, s.dim).write(out_path(opt, "phi_sweep.csv"));
  if (!opt.quiet) {
    out << "phi-scale sweep: " << steps << " points in [" << from << ", " << to
        << "]\n";
    for (std::size_t i = 0; i < s.dim; ++i) {
      const std::string label =
          s.axis_names.size() == s.dim ? s.axis_names[i] : "axis " + std::to_string(i + 1);
      out << label << ": left " << csv_num(path.points.front().pair.left[i])
          << " -> " << csv_num(path.points.back().pair.left[i]) << ", right "
          << csv_num(path.points.front().pair.right[i]) << " -> "
          << csv_num(path.points.back().pair.right[i]) << "\n";
    }
  }
  return 0;
}

inline int cmd_bne(const Options& opt, const ScenarioFile& f, std::ostream& out) {
  const auto scenario = build_scenario_bne(f, opt.seed);
  const auto policy = solve_bne(scenario.types, scenario.base);
  csv_of_bne(policy).write(out_path(opt, "bne.csv"));
  if (!opt.quiet) {
    out << "Bayesian equilibrium over " << scenario.types.size()
        << " types (rounds = " << policy.rounds << ")\n";
    for (std::size_t j = 0; j < policy.x_left.size(); ++j)
      out << "signal " << j << ": x_left = " << csv_num(policy.x_left[j])
          << ", x_right = " << csv_num(policy.x_right[j]) << "\n";
    out << "worst deviation gain = " << csv_num(policy.deviation_slack) << "\n";
  }
  return policy.deviation_slack <= 1e-6 ? 0 : 2;
}

}  // namespace detail

// Exit codes: 0 on certified success, 2 on diagnostics failures
// (non-uniqueness, path breaks, failed containment), 1 on hard errors.
inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"two-party ideological competition solver"};
  app.require_subcommand(1);

  Options opt;
  std::string command;
  for (const auto& name :
       {"solve", "sweep", "elasticity", "distperturb", "mixpath", "solve-nd",
        "phi-sweep", "bne"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("file", opt.file, "scenario file")->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_flag("--quiet", opt.quiet, "suppress the report");
    sub->add_option("--param", opt.param, "dotted parameter path");
    sub->add_option("--from", opt.from, "grid start");
    sub->add_option("--to", opt.to, "grid end");
    sub->add_option("--steps", opt.steps, "grid size");
    sub->add_option("--epsilon", opt.epsilon, "deviation-cost perturbation");
    sub->add_option("--gamma", opt.gamma, "distribution perturbation");
    sub->add_option("--seed", opt.seed, "candidate-generation seed");
    sub->add_option("--region", opt.region, "nd region mode: box | bisector");
    sub->callback([&command, name] { command = name; });
  }

  try {
    std::vector<const char*> argv{"polequil"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const ScenarioFile f = load_scenario_file(opt.file);
    const ModelKind kind = model_kind(f);
    const bool needs_nd = (command == "solve-nd" || command == "phi-sweep");
    const bool needs_bne = (command == "bne");
    if (needs_nd && kind != ModelKind::MultiD)
      throw ValidationError("command '" + command + "' needs an nd scenario");
    if (needs_bne && kind != ModelKind::Bayesian)
      throw ValidationError("command 'bne' needs a bne scenario");
    if (!needs_nd && !needs_bne && kind == ModelKind::MultiD)
      throw ValidationError("command '" + command + "' needs a 1d scenario");

    if (command == "solve") return detail::cmd_solve(opt, f, out);
    if (command == "sweep") return detail::cmd_sweep(opt, f, out);
    if (command == "elasticity") return detail::cmd_elasticity(opt, f, out);
    if (command == "distperturb") return detail::cmd_distperturb(opt, f, out);
    if (command == "mixpath") return detail::cmd_mixpath(opt, f, out);
    if (command == "solve-nd") return detail::cmd_solve_nd(opt, f, out);
    if (command == "phi-sweep") return detail::cmd_phi_sweep(opt, f, out);
    if (command == "bne") return detail::cmd_bne(opt, f, out);
    err << "error: unknown command\n";
    return 1;
  } catch (const NonUnique& e) {
    err << "diagnostics failure: " << e.what() << "\n";
    return 2;
  } catch (const Multimodal& e) {
    err << "diagnostics failure: " << e.what() << "\n";
    return 2;
  } catch (const PathBreak& e) {
    err << "diagnostics failure at grid index " << e.index << ": " << e.what()
        << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace polequil::cli
