#include "rwre/cli.hpp"

#include <cmath>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "rwre/correctors.hpp"
#include "rwre/io.hpp"
#include "rwre/kernels.hpp"
#include "rwre/sim.hpp"

namespace rwre {

namespace {

constexpr int kSchemaVersion = 1;

struct Globals {
  std::optional<double> tol;
  std::uint64_t seed = 0;
  int threads = 0;
};

json base_report(const std::string& command) {
  return json{{"schema_version", kSchemaVersion}, {"command", command}};
}

void emit(const json& report, const std::string& path, std::ostream& out) {
  const auto text = report.dump(2) + "\n";
  if (path.empty())
    out << text;
  else
    write_text_file(path, text);
}

json extended(double value, bool infinite) {
  return infinite ? json(nullptr) : json(value);
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadConfig, "bad number '" + tok + "'", "v");
    }
  }
  return v;
}

Point parse_point(const std::string& text, int d) {
  if (text.empty()) return Point(d, 0);
  Point p;
  for (double x : parse_vector(text)) {
    if (x != std::floor(x)) throw Error(ErrorKind::BadConfig, "start must be integral", "start");
    p.push_back(static_cast<std::int64_t>(x));
  }
  if (static_cast<int>(p.size()) != d)
    throw Error(ErrorKind::DimensionMismatch, "start has wrong dimension", "start");
  return p;
}

// Options shared by commands that act on a word chain.
struct ChainArgs {
  std::string config;
  int ell = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "environment JSON")->required();
    cmd->add_option("--ell", ell, "word length")->check(CLI::PositiveNumber);
  }
  std::shared_ptr<const PeriodicEnvironment> env() const {
    return std::make_shared<const PeriodicEnvironment>(load_environment(config));
  }
  json resolved(const PeriodicEnvironment& e) const {
    return json{{"environment", emit_environment(e)}, {"ell", ell}};
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quenched large-deviation laboratory for walks in periodic environments",
               "rwre_lab"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--tol", g.tol, "acceptance tolerance for checks");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads (0 = runtime default)");

  std::function<int()> action;
  auto tol_or = [&](double d) { return g.tol.value_or(d); };

  // validate
  std::string validate_config;
  int max_len = 16;
  auto* validate = app.add_subcommand("validate", "check an environment config");
  validate->add_option("--config", validate_config)->required();
  validate->add_option("--max-len", max_len, "ellipticity search depth");
  validate->callback([&] {
    action = [&] {
      const auto env = load_environment(validate_config);
      const auto ell = check_ellipticity(env.range(), max_len);
      const auto torus = environment_stationary(env);
      json r = base_report("validate");
      r["config"] = {{"environment", emit_environment(env)}, {"max_len", max_len}};
      r["valid"] = true;
      r["cells"] = env.num_cells();
      json dirs = json::array();
      for (const auto& d : ell.directions) {
        const char* status = d.status == Reachability::Reachable ? "reachable"
                             : d.status == Reachability::ProvenUnreachable
                                 ? "proven_unreachable"
                                 : "unreachable_within_budget";
        dirs.push_back({{"target", d.target}, {"status", status}, {"witness", d.witness}});
      }
      r["ellipticity"] = {{"all_reachable", ell.all_reachable()}, {"directions", dirs}};
      r["torus_stationary"] = {{"weights", torus.weights}, {"period", torus.period}};
      emit(r, "", out);
      return 0;
    };
  });

  // chain build
  auto* chain = app.add_subcommand("chain", "word-chain operations");
  chain->require_subcommand(1);
  ChainArgs build_args;
  std::string build_out;
  auto* build = chain->add_subcommand("build", "emit the word-chain kernel");
  build_args.attach(build);
  build->add_option("--out", build_out, "kernel JSON path");
  build->callback([&] {
    action = [&] {
      const auto env = build_args.env();
      const auto kernel = build_word_chain(*env, build_args.ell);
      json r = kernel_json(kernel);
      r["schema_version"] = kSchemaVersion;
      r["stationary"] = stationary_measure(kernel).weights;
      emit(r, build_out, out);
      return 0;
    };
  });

  // rate
  ChainArgs rate_args;
  std::string measure_path, method = "primal", certificate, rate_report;
  auto* rate = app.add_subcommand("rate", "entropy rate of a word measure");
  rate_args.attach(rate);
  rate->add_option("--measure", measure_path)->required();
  rate->add_option("--method", method)->check(CLI::IsMember({"primal", "dual"}));
  rate->add_option("--certificate", certificate, "write the optimiser here");
  rate->add_option("--report", rate_report);
  rate->callback([&] {
    action = [&] {
      const auto env = rate_args.env();
      const auto kernel = build_word_chain(*env, rate_args.ell);
      const auto mu = load_measure(read_json_file(measure_path, "measure"),
                                   kernel.space_ptr());
      const auto rep = method == "dual" ? rate_dual(mu, kernel) : rate_primal(mu, kernel);
      json r = base_report("rate");
      r["config"] = rate_args.resolved(*env);
      r["config"]["method"] = method;
      r["config"]["measure"] = measure_path;
      r["value"] = extended(rep.value, rep.infinite);
      r["infinite"] = rep.infinite;
      r["gap"] = rep.gap;
      r["iterations"] = rep.iterations;
      r["converged"] = rep.converged;
      r["certificate_path"] = certificate.empty() ? json(nullptr) : json(certificate);
      if (!certificate.empty() && !rep.infinite) {
        json c = space_header(kernel.space());
        c["h"] = rep.potential;
        if (rep.edge) c["alpha"] = edge_json(*rep.edge)["alpha"];
        write_text_file(certificate, c.dump(2) + "\n");
      }
      emit(r, rate_report, out);
      if (!rep.infinite && !rep.converged)
        throw Error(ErrorKind::NoConvergence, "solver did not converge", "measure");
      return 0;
    };
  });

  // conjugate
  ChainArgs conj_args;
  std::string conj_f;
  auto* conjugate = app.add_subcommand("conjugate", "H* and K-bar of a tilt");
  conj_args.attach(conjugate);
  conjugate->add_option("--f", conj_f)->required();
  conjugate->callback([&] {
    action = [&] {
      const auto env = conj_args.env();
      const auto kernel = build_word_chain(*env, conj_args.ell);
      const auto f = load_tilt(read_json_file(conj_f, "f"), kernel.space());
      const auto leg = legendre_rate(f, kernel);
      const auto kb = kbar(f, kernel);
      const auto root = pf_log_eigenvalue(tilt_kernel(kernel, f));
      json r = base_report("conjugate");
      r["config"] = conj_args.resolved(*env);
      r["config"]["f"] = conj_f;
      r["legendre"] = {{"value", leg.value}, {"gap", leg.gap},
                       {"iterations", leg.iterations}, {"converged", leg.converged}};
      r["kbar"] = {{"value", kb.value}, {"closed_form", kb.cross_value},
                   {"gap", kb.gap}, {"iterations", kb.iterations},
                   {"converged", kb.converged}, {"h", kb.potential}};
      r["eigen_oracle"] = root.log_eigenvalue;
      r["max_abs_difference"] = std::max(std::abs(kb.value - leg.value),
                                         std::abs(kb.value - root.log_eigenvalue));
      emit(r, "", out);
      return 0;
    };
  });

  // duality
  std::string dual_config, dual_report;
  int dual_ell = 0, trials = 50, tilts = 5;
  auto* duality = app.add_subcommand("duality", "H* = K-bar on random instances");
  duality->add_option("--config", dual_config, "fixed environment (default: random)");
  duality->add_option("--ell", dual_ell, "word length (default: random in {1,2})");
  duality->add_option("--trials", trials)->check(CLI::PositiveNumber);
  duality->add_option("--tilts", tilts)->check(CLI::PositiveNumber);
  duality->add_option("--report", dual_report);
  duality->callback([&] {
    action = [&] {
      const double tol = tol_or(1e-6);
      std::mt19937_64 rng(g.seed);
      std::optional<PeriodicEnvironment> fixed;
      if (!dual_config.empty()) fixed = load_environment(dual_config);
      double max_leg = 0.0, max_oracle = 0.0;
      json rows = json::array();
      for (int t = 0; t < trials; ++t) {
        std::uniform_int_distribution<int> period(1, 3), letters(2, 3), ells(1, 2);
        const auto env = fixed ? *fixed : random_environment(rng, period(rng), letters(rng));
        const int ell = dual_ell > 0 ? dual_ell : ells(rng);
        const auto kernel = build_word_chain(env, ell);
        std::uniform_real_distribution<double> val(-1.0, 1.0);
        for (int j = 0; j < tilts; ++j) {
          StateFunction f{std::vector<double>(kernel.space().num_states())};
          for (double& v : f.values) v = val(rng);
          const double kb = kbar(f, kernel).value;
          const double leg = legendre_rate(f, kernel).value;
          const double oracle = pf_log_eigenvalue(tilt_kernel(kernel, f)).log_eigenvalue;
          max_leg = std::max(max_leg, std::abs(kb - leg));
          max_oracle = std::max(max_oracle, std::abs(kb - oracle));
          rows.push_back({{"trial", t}, {"ell", ell},
                          {"states", kernel.space().num_states()},
                          {"kbar", kb}, {"legendre", leg}, {"oracle", oracle}});
        }
      }
      json r = base_report("duality");
      r["config"] = {{"trials", trials}, {"tilts", tilts}, {"seed", g.seed}, {"tol", tol},
                     {"ell", dual_ell}, {"config", dual_config}};
      r["max_abs_kbar_minus_legendre"] = max_leg;
      r["max_abs_kbar_minus_oracle"] = max_oracle;
      r["pass"] = max_leg <= tol && max_oracle <= tol;
      r["instances"] = rows;
      emit(r, dual_report, out);
      if (!r["pass"].get<bool>())
        throw Error(ErrorKind::NoConvergence, "duality check exceeded the tolerance", "tol");
      return 0;
    };
  });

  // level1
  ChainArgs l1_args;
  std::string velocity;
  auto* level1 = app.add_subcommand("level1", "contraction to the mean step");
  l1_args.attach(level1);
  level1->add_option("--v", velocity, "comma-separated velocity")->required();
  level1->callback([&] {
    action = [&] {
      const auto env = l1_args.env();
      const auto kernel = build_word_chain(*env, l1_args.ell);
      const auto v = parse_vector(velocity);
      const auto rep = level1_rate(v, kernel);
      json r = base_report("level1");
      r["config"] = l1_args.resolved(*env);
      r["config"]["v"] = v;
      r["value"] = extended(rep.value, rep.infinite);
      r["infinite"] = rep.infinite;
      r["gap"] = rep.gap;
      r["iterations"] = rep.iterations;
      r["converged"] = rep.converged;
      r["theta"] = rep.potential;
      r["zero_set"] = zero_set(kernel);
      emit(r, "", out);
      return 0;
    };
  });

  // simulate
  std::string sim_config, sim_out, sim_start;
  std::size_t sim_n = 1000;
  auto* simulate = app.add_subcommand("simulate", "quenched walk path as CSV");
  simulate->add_option("--config", sim_config)->required();
  simulate->add_option("--n", sim_n)->check(CLI::PositiveNumber);
  simulate->add_option("--start", sim_start, "comma-separated start point");
  simulate->add_option("--out", sim_out);
  simulate->callback([&] {
    action = [&] {
      const auto env = load_environment(sim_config);
      SimConfig cfg;
      cfg.n = sim_n;
      cfg.seed = g.seed;
      cfg.start = parse_point(sim_start, env.dim());
      const auto path = simulate_walk(env, cfg);
      std::ostringstream csv;
      write_path_csv(env, path, csv);
      if (sim_out.empty())
        out << csv.str();
      else
        write_text_file(sim_out, csv.str());
      return 0;
    };
  });

  // ldp-verify
  ChainArgs ldp_args;
  std::string ldp_f, ldp_report, ldp_start;
  double ldp_a = 0.0, ldp_eps = 1e-3;
  std::size_t ldp_n = 128, ldp_samples = 100000;
  auto* ldp = app.add_subcommand("ldp-verify", "importance-sampled decay rate verdict");
  ldp_args.attach(ldp);
  ldp->add_option("--f", ldp_f)->required();
  ldp->add_option("--a", ldp_a)->required();
  ldp->add_option("--n", ldp_n)->check(CLI::PositiveNumber);
  ldp->add_option("--samples", ldp_samples)->check(CLI::PositiveNumber);
  ldp->add_option("--eps", ldp_eps, "mixture weight of the untilted kernel")
      ->check(CLI::Range(0.0, 1.0));
  ldp->add_option("--start", ldp_start);
  ldp->add_option("--report", ldp_report);
  ldp->callback([&] {
    action = [&] {
      const auto env = ldp_args.env();
      const auto space = std::make_shared<const WordSpace>(env, ldp_args.ell);
      const auto f = load_tilt(read_json_file(ldp_f, "f"), *space);
      SimConfig cfg;
      cfg.n = ldp_n;
      cfg.samples = ldp_samples;
      cfg.seed = g.seed;
      cfg.start = parse_point(ldp_start, env->dim());
      const auto v = ldp_verify(*env, f, ldp_args.ell, ldp_a, cfg, ldp_eps);
      json r = base_report("ldp-verify");
      r["config"] = ldp_args.resolved(*env);
      r["config"].update({{"f", ldp_f}, {"a", ldp_a}, {"n", ldp_n},
                          {"samples", ldp_samples}, {"seed", g.seed}, {"eps", ldp_eps},
                          {"start", cfg.start}});
      r["estimate"] = v.estimate;
      r["se"] = v.se;
      r["reference"] = v.reference;
      r["envelope"] = v.envelope;
      r["exact"] = v.has_exact ? json(v.exact) : json(nullptr);
      r["exact_envelope"] = v.has_exact ? json(v.exact_envelope) : json(nullptr);
      r["pass"] = v.pass;
      emit(r, ldp_report, out);
      return 0;
    };
  });

  // corrector
  ChainArgs corr_args;
  std::string corr_f;
  std::size_t nmax = 64;
  auto* corrector = app.add_subcommand("corrector", "class-K checks of an F table");
  corr_args.attach(corrector);
  corrector->add_option("--check", corr_f, "F table JSON")->required();
  corrector->add_option("--nmax", nmax)->check(CLI::PositiveNumber);
  corrector->callback([&] {
    action = [&] {
      const double tol = tol_or(1e-10);
      const auto env = corr_args.env();
      const auto kernel = build_word_chain(*env, corr_args.ell);
      const auto F = load_f_table(read_json_file(corr_f, "F"), kernel.space_ptr());
      const auto loops = verify_class_k(F, kernel, tol);
      const auto growth = max_path_growth(F, kernel, nmax);
      json r = base_report("corrector");
      r["config"] = corr_args.resolved(*env);
      r["config"].update({{"check", corr_f}, {"nmax", nmax}, {"tol", tol}});
      json cycles = json::array();
      for (const auto& c : loops.cycles)
        cycles.push_back({{"state", c.state}, {"letter", c.letter}, {"sum", c.sum}});
      r["loops"] = {{"pass", loops.pass}, {"max_abs", loops.max_abs}, {"cycles", cycles}};
      try {
        r["potential"] = fit_potential(F, kernel, tol);
        r["nongradient_edge"] = nullptr;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonGradient) throw;
        r["potential"] = nullptr;
        r["nongradient_edge"] = e.field();
      }
      r["growth"] = growth.g;
      r["max_mean_cycle"] = growth.max_mean_cycle;
      r["min_mean_cycle"] = growth.min_mean_cycle;
      emit(r, "", out);
      return 0;
    };
  });

  // singular-example
  ChainArgs sing_args;
  auto* singular = app.add_subcommand("singular-example", "rate of the frozen point mass");
  sing_args.attach(singular);
  singular->callback([&] {
    action = [&] {
      const auto env = sing_args.env();
      const double value = singular_example_rate(*env, sing_args.ell);
      const Point zero(env->dim(), 0);
      const double p0 = env->cell(0)[*env->range().index_of(zero)];
      json r = base_report("singular-example");
      r["config"] = sing_args.resolved(*env);
      r["value"] = value;
      r["reference"] = -std::log(p0);
      emit(r, "", out);
      return 0;
    };
  });

  auto emit_error = [&](std::string_view kind, const std::string& field,
                        const std::string& message) {
    json e{{"schema_version", kSchemaVersion}, {"error", kind}, {"message", message}};
    e["field"] = field.empty() ? json(nullptr) : json(field);
    err << e.dump() << "\n";
  };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    const bool unknown = !args.empty() && args.front().rfind("-", 0) != 0 &&
                         !app.get_subcommand_no_throw(args.front());
    err << app.help();
    emit_error(unknown ? "UnknownCommand" : "BadFlag", unknown ? args.front() : "",
               e.what());
    return 1;
  }
  try {
    if (g.threads > 0) kernels::set_num_threads(g.threads);
    return action();
  } catch (const Error& e) {
    emit_error(to_string(e.kind()), e.field(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    emit_error("InternalError", "", e.what());
    return 2;
  }
}

}  // namespace rwre
