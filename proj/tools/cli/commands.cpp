#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "longmat/asymptotics.hpp"
#include "longmat/errors.hpp"
#include "longmat/format.hpp"
#include "longmat/mc_engine.hpp"
#include "longmat/pricing.hpp"
#include "longmat/quadrature.hpp"
#include "longmat/rng.hpp"

namespace longmat::cli {

namespace fs = std::filesystem;

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    cells.push_back(cur);
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + " is empty");
  const auto header = split(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ConfigError(path.string() + ": row width does not match the header");
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

struct Context {
  RunConfig config;
  fs::path out_dir;
  unsigned workers = 1;
  std::optional<std::string> error_constant_path;
  std::ostream& out;
};

QuadratureConfig quadrature_of(const Context& ctx) {
  const auto& n = ctx.config.numerics;
  QuadratureConfig q;
  q.nodes_per_panel = n.quadrature_nodes;
  q.max_evaluations = n.max_evaluations;
  q.truncation_tol = n.truncation_tol;
  q.n_paths = n.n_paths;
  q.window_steps = ctx.config.schedule.window_steps;
  q.allow_experimental = n.allow_experimental;
  q.workers = ctx.workers;
  q.z_lo = n.z_lo;
  q.z_hi = n.z_hi;
  return q;
}

PricingOptions pricing_of(const Context& ctx) {
  PricingOptions p;
  p.mc_paths = ctx.config.numerics.vanilla_paths;
  p.seed = ctx.config.numerics.seed;
  p.window_steps = ctx.config.schedule.window_steps;
  p.workers = ctx.workers;
  return p;
}

void write_resolved(const Context& ctx) {
  std::ofstream f(ctx.out_dir / "resolved_config.yaml");
  if (!f) throw ConfigError("cannot write " + (ctx.out_dir / "resolved_config.yaml").string());
  f << emit_config(ctx.config);
}

// Estimates C_h in place when the configuration leaves it open.
void resolve_c_h(Context& ctx) {
  if (!needs_c_h(ctx.config)) return;
  const auto& c = ctx.config;
  const auto est = estimate_c_h(c.model, c.payoff.payoff, c.schedule.tau, c.numerics.c_h_paths, c.numerics.seed,
                                c.schedule.window_steps, ctx.workers);
  std::get<ScaledVanilla>(ctx.config.payoff.approximation).c_h = est.value;
  ctx.out << "C_h = " << format_g17(est.value) << " +/- " << format_g17(est.stderr) << "\n";
}

void write_error_constant(const Context& ctx, const ErrorConstant& c) {
  CsvWriter ec(ctx.out_dir / "error_constant.csv",
               {"value", "stderr", "stderr_independent", "z_lo", "z_hi", "n_nodes", "rule", "seed", "n_paths",
                "window_steps", "experimental", "fingerprint"});
  ec.row({cell(c.value), cell(c.stderr), cell(c.stderr_independent), cell(c.z_lo), cell(c.z_hi), cell(c.n_nodes),
          c.rule, std::to_string(c.seed), cell(c.n_paths), cell(c.curve.window_steps), cell(c.experimental),
          c.fingerprint});
  CsvWriter curve(ctx.out_dir / "epsilon_curve.csv", {"z", "value", "stderr"});
  for (const auto& node : c.curve.nodes) curve.row({cell(node.z), cell(node.value), cell(node.stderr)});
}

ErrorConstant read_error_constant(const fs::path& path) {
  const auto rows = read_csv(path);
  if (rows.size() != 1) throw ConfigError(path.string() + ": expected exactly one error-constant row");
  const auto& r = rows.front();
  auto get = [&](const char* key) -> const std::string& {
    const auto it = r.find(key);
    if (it == r.end()) throw ConfigError(path.string() + ": missing column " + key);
    return it->second;
  };
  auto number = [&](const char* key) {
    const std::string& s = get(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ConfigError(path.string() + ": column " + key + " is not a number");
    return v;
  };
  ErrorConstant c;
  c.value = number("value");
  c.stderr = number("stderr");
  c.stderr_independent = number("stderr_independent");
  c.z_lo = number("z_lo");
  c.z_hi = number("z_hi");
  c.n_nodes = static_cast<int>(number("n_nodes"));
  c.rule = get("rule");
  c.seed = std::stoull(get("seed"));
  c.n_paths = static_cast<std::size_t>(number("n_paths"));
  c.experimental = get("experimental") == "true";
  c.fingerprint = get("fingerprint");
  return c;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

void cmd_alpha(Context& ctx) {
  write_resolved(ctx);
  const auto& s = ctx.config.schedule;
  std::vector<std::string> header{"t", "alpha"};
  for (double z : s.alpha_z) header.push_back("limit_density_z=" + format_g17(z));
  CsvWriter csv(ctx.out_dir / "alpha.csv", header);
  for (double t : s.alpha_times) {
    std::vector<std::string> row{cell(t), cell(alpha(ctx.config.model, t))};
    for (double z : s.alpha_z) row.push_back(cell(limit_density(ctx.config.model, z)));
    csv.row(row);
  }
  ctx.out << "alpha: " << s.alpha_times.size() << " rows written to " << (ctx.out_dir / "alpha.csv").string()
          << "\n";
}

void cmd_error_constant(Context& ctx) {
  resolve_c_h(ctx);
  write_resolved(ctx);
  const auto pair = make_pair(ctx.config);
  const auto c = error_constant(ctx.config.model, pair, ctx.config.schedule.tau, quadrature_of(ctx),
                                ctx.config.numerics.seed);
  write_error_constant(ctx, c);
  ctx.out << "C_err = " << format_g17(c.value) << " +/- " << format_g17(c.stderr) << " on [" << format_g17(c.z_lo)
          << ", " << format_g17(c.z_hi) << "], " << c.n_nodes << " nodes"
          << (c.experimental ? " (experimental)" : "") << "\n";
}

void cmd_price(Context& ctx) {
  resolve_c_h(ctx);
  write_resolved(ctx);
  const auto& cfg = ctx.config;
  const auto pair = make_pair(cfg);
  ErrorConstant c;
  if (ctx.error_constant_path) {
    c = read_error_constant(*ctx.error_constant_path);
  } else {
    c = error_constant(cfg.model, pair, cfg.schedule.tau, quadrature_of(ctx), cfg.numerics.seed);
    write_error_constant(ctx, c);
  }
  CsvWriter csv(ctx.out_dir / "prices.csv",
                {"maturity", "a_tilde", "a_tilde_stderr", "c_err", "c_err_stderr", "alpha", "correction",
                 "asymptotic_price", "stderr", "discount_factor", "discounted_a_tilde", "discounted_price"});
  const double r = cfg.numerics.discount_rate;
  for (double t : cfg.schedule.maturities) {
    const auto p = asymptotic_price(cfg.model, pair, t, cfg.schedule.tau, c, pricing_of(ctx));
    const auto& k = *p.components;
    const double df = r == 0.0 ? 1.0 : std::exp(-r * t);
    csv.row({cell(t), cell(k.a_tilde), cell(k.a_tilde_stderr), cell(k.c_err), cell(c.stderr),
             cell(k.alpha_value), cell(k.c_err * k.alpha_value), cell(p.value), cell(p.stderr), cell(df),
             cell(df * k.a_tilde), cell(df * p.value)});
    ctx.out << "T = " << format_g17(t) << ": A~ = " << format_g17(k.a_tilde) << ", asymptotic = " << format_g17(p.value)
            << "\n";
  }
}

void cmd_study(Context& ctx) {
  resolve_c_h(ctx);
  write_resolved(ctx);
  const auto& cfg = ctx.config;
  const auto pair = make_pair(cfg);
  StudyOptions opts;
  opts.window_steps = cfg.schedule.window_steps;
  opts.resolutions = cfg.schedule.resolutions;
  opts.workers = ctx.workers;
  opts.target_ratio_stderr = cfg.numerics.target_ratio_stderr;
  opts.pricing = pricing_of(ctx);
  opts.quadrature = quadrature_of(ctx);
  const auto table = ratio_convergence_study(cfg.model, pair, cfg.schedule.tau, cfg.schedule.maturities,
                                             cfg.numerics.n_paths, cfg.numerics.seed, opts);
  const auto& c = table.error_constant;
  write_error_constant(ctx, c);

  CsvWriter csv(ctx.out_dir / "study.csv",
                {"maturity", "window_steps", "a_mc", "a_mc_stderr", "a_mc_plain", "a_mc_plain_stderr", "a_tilde",
                 "a_tilde_stderr", "alpha", "ratio", "ratio_stderr", "c_err", "c_err_stderr", "ratio_minus_c_err",
                 "combined_stderr"});
  for (const auto& r : table.rows) {
    csv.row({cell(r.maturity), cell(r.window_steps), cell(r.a_mc), cell(r.a_mc_stderr), cell(r.a_mc_plain),
             cell(r.a_mc_plain_stderr), cell(r.a_tilde), cell(r.a_tilde_stderr), cell(r.alpha_value), cell(r.ratio),
             cell(r.ratio_stderr), cell(c.value), cell(c.stderr), cell(r.ratio - c.value),
             cell(std::hypot(r.ratio_stderr, c.stderr))});
  }

  CsvWriter verdict(ctx.out_dir / "study_summary.csv", {"check", "statistic", "bound", "verdict"});
  bool pass = true;
  auto record = [&](const std::string& name, double stat, double bound, const std::string& v) {
    if (v != "PASS") pass = false;
    verdict.row({name, cell(stat), cell(bound), v});
    ctx.out << name << ": " << v << " (" << format_g17(stat) << " vs " << format_g17(bound) << ")\n";
  };
  std::vector<StudyRow> base;
  for (const auto& r : table.rows) {
    if (r.window_steps == cfg.schedule.window_steps * cfg.schedule.resolutions.front()) base.push_back(r);
  }
  const auto& last = base.back();
  if (base.size() >= 2) {
    const auto& prev = base[base.size() - 2];
    record("ratio_stabilization", std::abs(last.ratio - prev.ratio),
           3.0 * std::hypot(last.ratio_stderr, prev.ratio_stderr),
           std::abs(last.ratio - prev.ratio) <= 3.0 * std::hypot(last.ratio_stderr, prev.ratio_stderr) ? "PASS"
                                                                                                       : "FAIL");
  }
  const double limit_bound = 3.0 * std::hypot(last.ratio_stderr, c.stderr);
  record("ratio_limit", std::abs(last.ratio - c.value), limit_bound,
         std::abs(last.ratio - c.value) <= limit_bound ? "PASS" : "FAIL");
  for (const auto& r : base) {
    const double corrected = std::abs(r.a_mc - (r.a_tilde + c.value * r.alpha_value));
    const double plain = std::abs(r.a_mc - r.a_tilde);
    std::string v = corrected < plain ? "PASS" : "FAIL";
    if (!c.significant(3.0)) v = "INCONCLUSIVE";
    record("correction_improves_T=" + format_g17(r.maturity), corrected, plain, v);
  }

  if (cfg.model.kind() != ModelKind::vg) {
    const auto rep = reflection_check(cfg.model, cfg.schedule.tau, cfg.numerics.reflection_a,
                                      cfg.numerics.reflection_paths, cfg.numerics.seed, cfg.numerics.reflection_steps,
                                      ctx.workers);
    CsvWriter refl(ctx.out_dir / "reflection.csv",
                   {"a", "p_terminal_upper", "p_sup", "p_terminal_lower", "p_inf", "d_hat", "gap_upper",
                    "gap_upper_stderr", "upper_holds", "gap_lower", "gap_lower_stderr", "lower_holds"});
    for (const auto& r : rep.rows) {
      refl.row({cell(r.a), cell(r.p_terminal_upper), cell(r.p_sup), cell(r.p_terminal_lower), cell(r.p_inf),
                cell(rep.d_hat), cell(r.gap_upper), cell(r.gap_upper_stderr), cell(r.upper_holds), cell(r.gap_lower),
                cell(r.gap_lower_stderr), cell(r.lower_holds)});
    }
    std::size_t held = 0;
    for (const auto& r : rep.rows) held += (r.upper_holds ? 1 : 0) + (r.lower_holds ? 1 : 0);
    record("reflection_inequalities", static_cast<double>(held), static_cast<double>(2 * rep.rows.size()),
           rep.all_hold() ? "PASS" : "FAIL");
  }
  verdict.row({"overall", "", "", pass ? "PASS" : "FAIL"});
  ctx.out << "study verdict: " << (pass ? "PASS" : "FAIL") << "\n";
}

void cmd_validate(Context& ctx) {
  resolve_c_h(ctx);
  write_resolved(ctx);
  const auto& cfg = ctx.config;
  const auto pair = make_pair(cfg);
  CsvWriter csv(ctx.out_dir / "validation.csv", {"check", "status", "detail"});
  bool ok = true;
  auto record = [&](const std::string& name, bool pass, const std::string& detail) {
    ok = ok && pass;
    csv.row({name, pass ? "PASS" : "FAIL", detail});
    ctx.out << name << ": " << (pass ? "PASS" : "FAIL") << " " << detail << "\n";
  };

  // Pair conditions on windows started across the localization thresholds.
  {
    const double k = payoff_strike(pair.payoff());
    double lo = k;
    double hi = k;
    if (const auto& m = pair.condition_meta()) {
      if (std::isfinite(m->m_upper)) lo = std::min(lo, m->m_upper);
      hi = std::max(hi, m->m_lower);
    }
    const double log_lo = std::log(0.5 * lo);
    const double log_hi = std::log(2.0 * hi);
    std::vector<PathWindow> windows;
    windows.reserve(cfg.numerics.validation_samples);
    for (std::size_t i = 0; i < cfg.numerics.validation_samples; ++i) {
      RandomStream rng(cfg.numerics.seed, i, StreamDomain::validation);
      const double start = log_lo + (log_hi - log_lo) * rng.uniform();
      windows.push_back(sample_window_path(cfg.model, start, cfg.schedule.tau, cfg.schedule.window_steps, rng));
    }
    try {
      const auto rep = check_pair_conditions(pair, windows);
      std::ostringstream d;
      d << rep.samples << " windows; lower applicable " << rep.lower_applicable << ", upper applicable "
        << rep.upper_applicable << ", discrepancies " << rep.discrepancies << ", homogeneity checks "
        << rep.homogeneity_checks << ", max gap ratio " << format_g17(rep.max_gap_ratio);
      record("pair_conditions", true, d.str());
    } catch (const ValidationFailure& e) {
      record("pair_conditions", false, e.what());
    }
  }

  if (cfg.model.kind() == ModelKind::vg) {
    csv.row({"envelope_domination", "SKIPPED", "no envelope for VG"});
    csv.row({"density_normalization", "SKIPPED", "no VG density"});
  } else {
    const auto& m = cfg.model;
    const double disp = marginal_stddev(m, 1.0);
    const double t_floor = 0.1;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double t = t_floor * std::pow(1e4, i / 19.0);
      for (int j = -20; j <= 20; ++j) {
        const double z = m.z0() + 8.0 * disp * j / 20.0;
        worst = std::max(worst, normalized_density(m, t, z) / envelope_density(m, z, t_floor));
      }
    }
    record("envelope_domination", worst <= 1.0 + 1e-9, "max density/alpha over envelope = " + format_g17(worst));
    double worst_gap = 0.0;
    for (double t : {1.0, 10.0, 100.0}) {
      const auto [lo, hi] = effective_support(m, t);
      const auto pts = density_breakpoints(m, t, lo, hi);
      const double mass = integrate_adaptive([&](double z) { return marginal_density(m, t, z); }, pts, 1e-10).value;
      worst_gap = std::max(worst_gap, std::abs(mass - 1.0));
    }
    record("density_normalization", worst_gap <= 1e-6, "max |mass - 1| = " + format_g17(worst_gap));
  }
  if (!ok) throw ValidationFailure("validation failed; see validation.csv");
}

}  // namespace

int exit_code(const std::exception& e) {
  if (dynamic_cast<const EligibilityError*>(&e)) return 3;
  if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const ValidationFailure*>(&e)) return 4;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ConsistencyError*>(&e) ||
      dynamic_cast<const UnsupportedError*>(&e) || dynamic_cast<const DomainError*>(&e)) {
    return 2;
  }
  return 1;
}

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg = load_config(inv.config_path);
    if (inv.seed) cfg.numerics.seed = *inv.seed;
    if (inv.allow_experimental) cfg.numerics.allow_experimental = true;
    if (inv.out_dir) cfg.output.directory = *inv.out_dir;
    Context ctx{cfg, fs::path(cfg.output.directory), inv.workers ? inv.workers : default_workers(),
                inv.error_constant_path, out};
    fs::create_directories(ctx.out_dir);
    if (inv.command == "alpha") {
      cmd_alpha(ctx);
    } else if (inv.command == "error-constant") {
      cmd_error_constant(ctx);
    } else if (inv.command == "price") {
      cmd_price(ctx);
    } else if (inv.command == "study") {
      cmd_study(ctx);
    } else if (inv.command == "validate") {
      cmd_validate(ctx);
    } else {
      throw ConfigError("unknown command '" + inv.command + "'");
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Long-maturity path-dependent option pricing"};
  Invocation inv;
  std::string seed_text;
  app.add_option("command", inv.command, "alpha | error-constant | price | study | validate")
      ->required()
      ->check(CLI::IsMember({"alpha", "error-constant", "price", "study", "validate"}));
  app.add_option("--config", inv.config_path, "YAML run configuration")->required();
  app.add_option("--out", inv.out_dir, "output directory (overrides output.directory)");
  app.add_option("--seed", seed_text, "64-bit seed (overrides numerics.seed)");
  app.add_flag("--allow-experimental", inv.allow_experimental, "allow VG and ineligible NIG parameter sets");
  app.add_option("--workers", inv.workers, "worker threads (default: all cores)");
  app.add_option("--error-constant", inv.error_constant_path, "error_constant.csv to reuse (price)");
  try {
    app.parse(argc, argv);
    if (!seed_text.empty()) {
      std::size_t used = 0;
      const auto v = std::stoull(seed_text, &used);
      if (used != seed_text.size() || seed_text.front() == '-') throw std::invalid_argument("seed");
      inv.seed = v;
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception&) {
    err << "error: --seed must be an unsigned 64-bit integer\n";
    return 2;
  }
  return run(inv, out, err);
}

}  // namespace longmat::cli
