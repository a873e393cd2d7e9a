#include "kspacings/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kspacings/empirical_modulus.hpp"
#include "kspacings/errors.hpp"
#include "kspacings/gamma_kernel.hpp"
#include "kspacings/harness.hpp"
#include "kspacings/regimes.hpp"
#include "kspacings/spacings_lab.hpp"
#include "kspacings/transform_maps.hpp"

namespace kspacings {

namespace {

using nlohmann::json;

std::string num(double x) {
  if (!std::isfinite(x)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

struct GammaArgs {
  std::int64_t k = 1;
  double x = 0.0;
  double p = 0.5;
  double delta = 2.5;
};

void run_gamma(CLI::App& sub, const GammaArgs& g, std::ostream& out) {
  const std::string name = sub.get_name();
  if (name == "tk") {
    const auto t = gamma::tail_threshold(g.k, g.delta);
    json j{{"k", t.k},
           {"delta", t.delta},
           {"log_value", t.log_value},
           {"value", optional_json(t.value())},
           {"sub_underflow", t.sub_underflow()}};
    out << j.dump() << "\n";
    return;
  }
  const gamma::Order order(g.k);
  if (name == "cdf") {
    out << num(gamma::cdf(order, g.x)) << "\n";
  } else if (name == "survival") {
    out << num(gamma::survival(order, g.x)) << "\n";
  } else if (name == "pdf") {
    out << num(gamma::pdf(order, g.x)) << "\n";
  } else if (name == "quantile") {
    out << num(gamma::quantile(order, g.p)) << "\n";
  } else if (name == "tail-bounds") {
    const auto b = gamma::tail_bounds(order, g.x);
    json j{{"lower", b.lower},
           {"upper", b.upper},
           {"log_lower", b.log_lower},
           {"log_upper", b.log_upper},
           {"survival", gamma::survival(order, g.x)}};
    out << j.dump() << "\n";
  }
}

// One value per line, or sample-spacings output (W column).
std::vector<double> read_path_points(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<double> points;
  std::string line;
  int w_column = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.empty()) continue;
    if (w_column < 0 && cells.size() > 1) {
      const auto it = std::find(cells.begin(), cells.end(), "W");
      if (it == cells.end()) throw IoError("'" + path + "': multi-column input needs a W column");
      w_column = static_cast<int>(it - cells.begin());
      continue;
    }
    const std::string& text = cells.size() > 1 ? cells.at(w_column) : cells.front();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0) {
      if (points.empty() && w_column < 0) continue;  // single-column header
      throw IoError("'" + path + "': cannot parse value '" + text + "'");
    }
    points.push_back(v);
  }
  return points;
}

std::vector<std::uint64_t> to_u64(const std::vector<std::int64_t>& in, const char* what) {
  std::vector<std::uint64_t> out;
  for (auto v : in) {
    if (v < 1) throw PreconditionError(std::string(what) + " entries must be positive");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

KMode parse_k_mode(const std::string& text) {
  if (text == "grow") return KMode::grow();
  if (text.rfind("fixed:", 0) == 0) {
    const std::int64_t k = std::stoll(text.substr(6));
    if (k < 1 || k > gamma::kMaxOrder) throw PreconditionError("fixed k out of range");
    return KMode::fixed(static_cast<std::uint32_t>(k));
  }
  throw PreconditionError("--k must be fixed:<k> or grow");
}

MuSource parse_mu(const std::string& text) {
  if (text.rfind("fixed:", 0) == 0) return FixedMu{std::stod(text.substr(6))};
  if (text.rfind("sim:", 0) == 0) {
    const std::string rest = text.substr(4);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw PreconditionError("--mu sim:<seed>:<N>");
    return SimulatedMu{std::stoull(rest.substr(0, colon)), std::stoll(rest.substr(colon + 1))};
  }
  throw PreconditionError("--mu must be fixed:<v> or sim:<seed>:<N>");
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"k-spacings empirical process toolkit", "kspacings"};
  app.require_subcommand(1);

  // gamma
  GammaArgs g;
  auto* gamma_cmd = app.add_subcommand("gamma", "Gamma(k, 1) kernel evaluations");
  gamma_cmd->require_subcommand(1);
  auto add_k = [&](CLI::App* c) { c->add_option("--k", g.k, "Integer shape")->required(); };
  for (const char* name : {"cdf", "survival", "pdf", "tail-bounds"}) {
    auto* c = gamma_cmd->add_subcommand(name, std::string(name) + " at x");
    add_k(c);
    c->add_option("--x", g.x, "Argument")->required();
  }
  auto* quantile_cmd = gamma_cmd->add_subcommand("quantile", "Inverse cdf at p");
  add_k(quantile_cmd);
  quantile_cmd->add_option("--p", g.p, "Probability in (0,1)")->required();
  auto* tk_cmd = gamma_cmd->add_subcommand("tk", "Tail threshold t_k(delta)");
  add_k(tk_cmd);
  tk_cmd->add_option("--delta", g.delta, "delta > 2")->required();

  // beta-plus
  double beta_c = 1.0;
  auto* beta_cmd = app.add_subcommand("beta-plus", "Root beta > 1 of beta(log beta - 1) = 1/c - 1");
  beta_cmd->add_option("--c", beta_c, "c > 0")->required();

  // sample-spacings
  std::int64_t sample_k = 1;
  std::int64_t sample_n = 0;
  std::uint64_t sample_seed = 0;
  std::uint64_t sample_rep = 0;
  auto* sample_cmd = app.add_subcommand("sample-spacings", "Simulate one k-spacings sample");
  sample_cmd->add_option("--k", sample_k, "Block size")->required();
  sample_cmd->add_option("--N", sample_n, "Number of spacings")->required();
  sample_cmd->add_option("--seed", sample_seed, "Base seed")->required();
  sample_cmd->add_option("--replicate", sample_rep, "Replicate index");

  // modulus
  std::string modulus_input;
  double modulus_a = 0.0;
  bool modulus_normalized = false;
  bool modulus_theta = false;
  auto* modulus_cmd = app.add_subcommand("modulus", "Oscillation modulus of an empirical path");
  modulus_cmd->add_option("--input", modulus_input, "Points file, one per line, or sample-spacings output")
      ->required();
  modulus_cmd->add_option("--a", modulus_a, "Bandwidth in (0,1)")->required();
  modulus_cmd->add_flag("--normalized", modulus_normalized, "Include b(a) and k_N");
  modulus_cmd->add_flag("--theta", modulus_theta, "Include the one-sided increment");

  // verify
  std::string verify_lemma;
  std::vector<std::int64_t> verify_k;
  std::optional<double> verify_delta;
  std::vector<std::string> verify_grid;
  std::string verify_mu = "sim:1:100000";
  auto* verify_cmd = app.add_subcommand("verify", "Increment suprema of the psi / phi maps");
  verify_cmd->add_option("--lemma", verify_lemma, "a1|a2|a3|a4|p1")->required();
  verify_cmd->add_option("--k", verify_k, "Comma-separated k values")->required()->delimiter(',');
  verify_cmd->add_option("--delta", verify_delta, "delta > 2");
  verify_cmd->add_option("--a-grid", verify_grid, "Decreasing bandwidths: 1e-4, t*0.5 or kd")
      ->required()
      ->delimiter(',');
  verify_cmd->add_option("--mu", verify_mu, "fixed:<v> or sim:<seed>:<N>")->capture_default_str();

  // conditions
  std::string cond_regime;
  double cond_c = 1.0;
  std::string cond_schedule;
  std::string cond_k = "fixed:1";
  std::optional<double> cond_delta;
  std::vector<std::int64_t> cond_grid;
  auto* cond_cmd = app.add_subcommand("conditions", "Side conditions along an N grid");
  cond_cmd->add_option("--regime", cond_regime, "I|II|III|IV")->required();
  cond_cmd->add_option("--c", cond_c, "Regime constant")->required();
  cond_cmd->add_option("--c-schedule", cond_schedule, "power | inv_loglog | loglog_pow:<p>");
  cond_cmd->add_option("--k", cond_k, "fixed:<k> or grow")->capture_default_str();
  cond_cmd->add_option("--delta", cond_delta, "delta > 2 (required with grow)");
  cond_cmd->add_option("--n-grid", cond_grid, "Comma-separated increasing N >= 16")
      ->required()
      ->delimiter(',');

  // experiment
  std::string exp_config;
  unsigned exp_threads = 1;
  std::string exp_out_dir;
  auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo experiment from a JSON config");
  exp_cmd->add_option("--config", exp_config, "Config file")->required();
  exp_cmd->add_option("--threads", exp_threads, "Worker threads, 0 = auto")->capture_default_str();
  exp_cmd->add_option("--out-dir", exp_out_dir, "Override out_dir");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    while (!target->get_subcommands().empty()) target = target->get_subcommands().front();
    out << target->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    CLI::App* target = &app;
    while (!target->get_subcommands().empty()) target = target->get_subcommands().front();
    err << target->help();
    return kExitUsage;
  }

  try {
    if (gamma_cmd->parsed()) {
      run_gamma(*gamma_cmd->get_subcommands().front(), g, out);
    } else if (beta_cmd->parsed()) {
      const double beta = erdos_renyi_beta(beta_c);
      const double residual = beta * (std::log(beta) - 1.0) - (1.0 / beta_c - 1.0);
      out << json{{"c", beta_c}, {"beta", beta}, {"residual", residual}}.dump() << "\n";
    } else if (sample_cmd->parsed()) {
      const SpacingsSample s = sample_spacings(sample_k, sample_n, sample_seed, sample_rep);
      const json header{{"k", s.k}, {"N", s.n_spacings}, {"n", s.n},
                        {"mu", s.mu}, {"seed", s.seed}, {"replicate", sample_rep}};
      out << "# " << header.dump() << "\n" << "i,Y,D,W\n";
      const gamma::Order order(s.k);
      const double scale = static_cast<double>(s.n_spacings) * s.k;
      for (std::size_t i = 0; i < s.d.size(); ++i) {
        out << i + 1 << "," << num(s.y[i]) << "," << num(s.d[i]) << ","
            << num(gamma::cdf(order, scale * s.d[i])) << "\n";
      }
    } else if (modulus_cmd->parsed()) {
      const auto path = EmpiricalPath::from_unsorted(read_path_points(modulus_input));
      const ModulusReport r = oscillation_modulus(path, modulus_a);
      json j{{"a", r.a},
             {"N", r.n_points},
             {"lambda", r.lambda},
             {"positive_part", r.positive_part},
             {"negative_part", r.negative_part}};
      if (r.pos_window) {
        j["positive_window"] = {{"first", r.pos_window->first}, {"last", r.pos_window->last}};
      }
      j["negative_window"] = {{"family", to_string(r.neg_window.family)},
                              {"left", r.neg_window.left},
                              {"right", r.neg_window.right},
                              {"count", r.neg_window.count}};
      if (modulus_normalized) {
        j["b_n"] = optional_json(r.b_n);
        j["k_n"] = optional_json(r.k_n);
        j["normalizer_defined"] = r.b_n.has_value();
      }
      if (modulus_theta) j["theta"] = r.theta;
      out << j.dump() << "\n";
    } else if (verify_cmd->parsed()) {
      const Lemma lemma = parse_lemma(verify_lemma);
      std::vector<std::uint32_t> ks;
      for (auto k : to_u64(verify_k, "--k")) ks.push_back(static_cast<std::uint32_t>(k));
      std::vector<GridPoint> grid;
      for (const auto& p : verify_grid) grid.push_back(GridPoint::parse(p));
      const auto reports = lemma_diagnostics(lemma, ks, grid, parse_mu(verify_mu), verify_delta);
      out << "lemma,k,mu,a,log_a,sup,log_sup,ratio,argmax_h,argmax_end,competing_scale,"
             "secondary_ratio\n";
      for (const auto& r : reports) {
        out << to_string(lemma) << "," << r.k << "," << num(r.mu) << "," << num(r.a) << ","
            << num(r.log_a) << "," << num(r.sup_value) << "," << num(r.log_sup) << ","
            << num(r.ratio) << "," << num(r.argmax_h) << "," << to_string(r.argmax_end) << ","
            << (r.competing_scale ? num(*r.competing_scale) : "NA") << ","
            << (r.secondary_ratio ? num(*r.secondary_ratio) : "NA") << "\n";
      }
    } else if (cond_cmd->parsed()) {
      RegimeSpec spec;
      spec.variant = parse_variant(cond_regime);
      spec.c = cond_c;
      spec.c_schedule = cond_schedule;
      spec.k_mode = parse_k_mode(cond_k);
      spec.delta = cond_delta;
      out << conditions_csv(check_conditions(spec, to_u64(cond_grid, "--n-grid")));
    } else if (exp_cmd->parsed()) {
      ExperimentConfig config = load_config(exp_config);
      if (!exp_out_dir.empty()) config.out_dir = exp_out_dir;
      const ExperimentResult result = run_experiment(config, RunOptions{exp_threads});
      for (const auto& path : persist(config, result)) err << "wrote " << path.string() << "\n";
      out << summary_csv(summarize(result.records));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace kspacings
