#include "hrcalc/experiments/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>

#include "hrcalc/augmentation.hpp"
#include "hrcalc/errors.hpp"
#include "hrcalc/io.hpp"
#include "hrcalc/experiments/bearings.hpp"
#include "hrcalc/experiments/common.hpp"
#include "hrcalc/experiments/flight.hpp"
#include "hrcalc/experiments/motion.hpp"
#include "hrcalc/experiments/qubit.hpp"
#include "hrcalc/experiments/runners.hpp"
#include "hrcalc/experiments/suites.hpp"
#include "hrcalc/experiments/three_phase.hpp"

namespace hrcalc::experiments {

namespace {

struct RunContext {
  const ParamSet& params;
  std::uint64_t seed;
  std::size_t steps;
  std::ostream& csv;
  std::ostream& err;
  double perturb_augmentation = 0.0;
};

struct Command {
  std::string name, help;
  std::size_t default_steps;
  std::function<void(ParamSet&)> declare;
  std::function<int(RunContext&)> run;
};

// Restores the augmentation hook when a self check leaves scope.
struct PerturbationGuard {
  explicit PerturbationGuard(double eps) { test_hooks::set_augmentation_perturbation(eps); }
  ~PerturbationGuard() { test_hooks::set_augmentation_perturbation(0.0); }
  PerturbationGuard(const PerturbationGuard&) = delete;
  PerturbationGuard& operator=(const PerturbationGuard&) = delete;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_selfcheck(RunContext& ctx) {
  std::vector<const SuiteInfo*> chosen;
  const std::string list = ctx.params.text("suites");
  if (list == "all") {
    for (const auto& s : all_suites()) chosen.push_back(&s);
  } else {
    for (const auto& name : split_list(list)) chosen.push_back(&find_suite(name));
    if (chosen.empty()) throw UsageError("suites: empty suite list");
  }
  PerturbationGuard guard(ctx.perturb_augmentation);
  ctx.csv << "suite,name,residual,limit\n";
  std::size_t failed = 0;
  for (const SuiteInfo* s : chosen) {
    std::size_t suite_failed = 0;
    double worst = 0.0;
    for (const CheckResult& c : run_suite(*s)) {
      write_check_line(ctx.csv, c);
      if (c.limit > 0.0) worst = std::max(worst, c.residual / c.limit);
      if (!c.passed()) {
        ++suite_failed;
        ctx.err << "FAIL " << c.suite << ',' << c.name << ": residual " << format_real(c.residual)
                << (c.strict ? " not below " : " above ") << format_real(c.limit);
        if (!c.error.empty()) ctx.err << " (" << c.error << ')';
        ctx.err << '\n';
      }
    }
    ctx.err << "suite " << s->name << ": " << (suite_failed == 0 ? "pass" : "FAIL") << ", "
            << suite_failed << " failed, worst residual/limit " << format_real(worst) << '\n';
    failed += suite_failed;
  }
  return failed == 0 ? kExitOk : kExitCheckFailed;
}

int run_bearings_command(RunContext& ctx) {
  std::string topology;
  const BearingsParams p = bearings_params(ctx.params, &topology);
  BearingsScenario sc;
  if (topology.empty()) {
    sc = make_bearings_scenario(p);
  } else {
    std::ifstream is(topology);
    if (!is) throw UsageError("cannot open topology file '" + topology + "'");
    sc = make_bearings_scenario(p, read_topology(is));
  }
  const BearingsRun run = run_bearings(p, sc, ctx.seed, ctx.steps, &ctx.csv);
  if (run.left_cube) ctx.err << "warning: the target left the sensor cube\n";
  return kExitOk;
}

int run_qubit_command(RunContext& ctx) {
  const QubitReport rep = run_qubit(qubit_params(ctx.params), ctx.seed, ctx.steps, &ctx.csv);
  const DepthResult& d = rep.depths.at(rep.selected);
  ctx.err << "selected depth " << d.depth << ", projected residual " << format_real(d.residual_projected)
          << '\n';
  return kExitOk;
}

using Runner = int (*)(const ParamSet&, std::uint64_t, std::size_t, std::ostream&, std::ostream&);

std::function<int(RunContext&)> wrap(Runner r) {
  return [r](RunContext& c) { return r(c.params, c.seed, c.steps, c.csv, c.err); };
}

const std::vector<Command>& command_table() {
  static const std::vector<Command> table = {
      {"selfcheck", "run the invariant suites; lines suite,name,residual,limit", 0,
       [](ParamSet& p) {
         p.declare("suites", "all", "comma-separated suite names or all");
       },
       run_selfcheck},
      {"three-phase", "three-phase frequency tracking on a synthetic signal", 1000,
       declare_three_phase,
       [](RunContext& c) {
         run_three_phase(three_phase_params(c.params), c.seed, c.steps, &c.csv);
         return kExitOk;
       }},
      {"bearings", "bearings-only tracking over a sensor network", 100, declare_bearings,
       run_bearings_command},
      {"flight", "receding-horizon LQR attitude control", 500, declare_flight,
       [](RunContext& c) {
         run_flight(flight_params(c.params), c.seed, c.steps, &c.csv);
         return kExitOk;
       }},
      {"motion", "one-step orientation prediction, QLMS against real LMS", 3000, declare_motion,
       [](RunContext& c) {
         run_motion(motion_params(c.params), c.seed, c.steps, &c.csv);
         return kExitOk;
       }},
      {"qubit-compile", "compile a target rotation into admissible gates (steps = iterations)", 200,
       declare_qubit, run_qubit_command},
      {"qlms", "widely linear system identification with QLMS", 2000, declare_qlms, wrap(run_qlms)},
      {"kalman", "widely linear Kalman filter run", 200, declare_kalman, wrap(run_kalman)},
      {"diffusion", "diffusion QLMS over an agent network", 500, declare_diffusion,
       wrap(run_diffusion)},
      {"federated", "federated QLMS rounds (steps = rounds)", 20, declare_federated,
       wrap(run_federated)},
      {"qnn-train", "quaternion network training", 2000, declare_qnn_train, wrap(run_qnn_train)},
      {"lqr", "finite-horizon LQR on a random problem (steps = horizon)", 20, declare_lqr,
       wrap(run_lqr)},
      {"gradcheck", "numeric HR* gradient against its closed form (steps = instances)", 100,
       declare_gradcheck, wrap(run_gradcheck)},
  };
  return table;
}

struct Invocation {
  const Command* command = nullptr;
  std::string config, out;
  std::uint64_t seed = 1;
  std::size_t steps = 0;
  std::vector<std::string> sets;
  double perturb = 0.0;
  bool list_params = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

int execute(Invocation& inv, std::ostream& out, std::ostream& err) {
  const Command& cmd = *inv.command;
  ParamSet all;
  cmd.declare(all);
  if (inv.list_params) {
    for (const auto& [k, e] : all.entries()) out << k << " = " << e.value << "  # " << e.help << '\n';
    return kExitOk;
  }
  all.declare("seed", std::to_string(inv.seed), "master seed");
  all.declare("steps", std::to_string(cmd.default_steps), "number of steps");
  all.declare("out", "", "output CSV path, empty for standard output");
  if (!inv.config.empty()) {
    std::ifstream is(inv.config);
    if (!is) throw UsageError("cannot open config file '" + inv.config + "'");
    load_config(all, is, inv.config);
  }
  for (const auto& kv : inv.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    all.set(key, value);
  }
  if (inv.seed_opt->count() > 0) all.set("seed", std::to_string(inv.seed));
  if (inv.steps_opt->count() > 0) all.set("steps", std::to_string(inv.steps));
  if (inv.out_opt->count() > 0) all.set("out", inv.out);

  ParamSet params;
  for (const auto& [k, e] : all.entries())
    if (k != "seed" && k != "steps" && k != "out") params.declare(k, e.value, e.help);
  const std::uint64_t seed = all.u64("seed");
  const std::size_t steps = all.count("steps");
  const std::string path = all.text("out");

  std::ofstream file;
  if (!path.empty()) {
    file.open(path, std::ios::binary);
    if (!file) throw UsageError("cannot open output file '" + path + "'");
  }
  std::ostream& csv = path.empty() ? out : file;
  write_csv_header(csv, cmd.name, seed, steps, params);
  RunContext ctx{params, seed, steps, csv, err, inv.perturb};
  const int code = cmd.run(ctx);
  csv.flush();
  if (!csv) throw UsageError("error writing output");
  return code;
}

}  // namespace

std::vector<std::string> cli_commands() {
  std::vector<std::string> names;
  for (const auto& c : command_table()) names.push_back(c.name);
  return names;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quaternion estimation, learning and control experiments", "hrcalc"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Invocation>> invocations;
  for (const auto& cmd : command_table()) {
    auto inv = std::make_unique<Invocation>();
    inv->command = &cmd;
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", inv->config, "key = value parameter file");
    inv->seed_opt = sub->add_option("--seed", inv->seed, "master seed (default 1)");
    inv->steps_opt = sub->add_option("--steps", inv->steps,
                                     "number of steps (default " + std::to_string(cmd.default_steps) + ")");
    inv->out_opt = sub->add_option("--out", inv->out, "output CSV path");
    sub->add_option("--set", inv->sets, "parameter override key=value, repeatable");
    sub->add_flag("--list-params", inv->list_params, "print the parameters with defaults and exit");
    if (cmd.name == "selfcheck")
      sub->add_option("--perturb-augmentation", inv->perturb,
                      "negative control: add EPS to the augmentation matrix");
    invocations.push_back(std::move(inv));
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0 with the help text on `out`.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  Invocation* chosen = nullptr;
  for (auto& inv : invocations)
    if (app.got_subcommand(inv->command->name)) chosen = inv.get();
  try {
    return execute(*chosen, out, err);
  } catch (const UsageError& e) {
    err << "hrcalc " << chosen->command->name << ": configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "hrcalc " << chosen->command->name << ": numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace hrcalc::experiments
