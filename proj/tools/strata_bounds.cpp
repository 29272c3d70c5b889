#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "strata/io.hpp"
#include "strata/parallel.hpp"
#include "strata/polyhedra.hpp"
#include "strata/replication.hpp"

using namespace strata;
using strata::io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void emit(const json& report, const std::string& out_path) {
  std::string text = report.dump(2) + "\n";
  if (out_path.empty()) std::cout << text;
  else io::write_file(out_path, text);
}

ParameterSpec parse_param_flag(const std::string& flag, const Support& s) {
  auto colon = flag.find(':');
  std::string name = flag.substr(0, colon);
  Index d1 = 0, d2 = 0;
  if (colon != std::string::npos) {
    std::string args = flag.substr(colon + 1);
    auto comma = args.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("--param expects name:d1,d2");
    auto code = [&](const std::string& lbl) {
      for (std::size_t i = 0; i < s.d_labels.size(); ++i)
        if (s.d_labels[i] == lbl) return static_cast<Index>(i);
      throw std::invalid_argument("treatment label '" + lbl + "' is not in the support");
    };
    d1 = code(args.substr(0, comma));
    d2 = code(args.substr(comma + 1));
  }
  StratumSpec cond;
  cond.all = true;
  return standard_parameters(name, d1, d2, cond);
}

StratumSpec parse_stratum_flags(const std::vector<std::string>& flags, const Support& s) {
  StratumSpec spec;
  auto code = [&](const std::string& lbl) {
    for (std::size_t i = 0; i < s.d_labels.size(); ++i)
      if (s.d_labels[i] == lbl) return static_cast<int>(i);
    throw std::invalid_argument("treatment label '" + lbl + "' is not in the support");
  };
  for (const auto& f : flags) {
    std::vector<int> map;
    if (f.find(',') != std::string::npos) {
      std::string cur;
      for (char c : f + ",") {
        if (c == ',') { map.push_back(code(cur)); cur.clear(); }
        else cur += c;
      }
    } else {
      for (char c : f) map.push_back(code(std::string(1, c)));
    }
    if (static_cast<Index>(map.size()) != s.nz())
      throw std::invalid_argument("stratum '" + f + "' must give one treatment per instrument value");
    spec.treatment_maps.push_back(std::move(map));
  }
  return spec;
}

json config_echo(const TestConfig& cfg) {
  return {{"alpha", cfg.alpha},       {"bootstrap_B", cfg.bootstrap_B},
          {"lambda_n", cfg.lambda_n}, {"seed", cfg.seed},
          {"threads", cfg.threads},   {"grid", {cfg.grid_lo, cfg.grid_hi, cfg.grid_n}}};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"sharp bounds and bootstrap inference for treatment-effect parameters "
               "conditional on response-type strata"};
  app.require_subcommand(1);

  std::string model_path, data_path, out_path, param_flag, grid_flag;
  std::vector<std::string> stratum_flags;
  int grid_n = 1001;
  double pi_floor = 1e-6;
  bool closed_form = false, allow_infeasible = false;
  int threads = 0;
  TestConfig cfg;
  double theta0 = 0.0;

  auto add_common = [&](CLI::App* cmd, bool needs_data) {
    cmd->add_option("--model", model_path, "model file (JSON)")->required();
    if (needs_data) cmd->add_option("--data", data_path, "observations (CSV)")->required();
    cmd->add_option("--out", out_path, "write the JSON report here instead of stdout");
    cmd->add_option("--threads", threads, "worker cap (default: STRATA_BOUNDS_THREADS or cores)");
  };

  CLI::App* bounds_cmd = app.add_subcommand("bounds", "identified-set bounds for the parameter");
  add_common(bounds_cmd, true);
  bounds_cmd->add_option("--param", param_flag, "parameter, e.g. ate_contrast:1,0");
  bounds_cmd->add_option("--stratum", stratum_flags, "conditioning stratum as a treatment map, e.g. 012");
  bounds_cmd->add_option("--grid", grid_n, "grid points over the mass interval");
  bounds_cmd->add_option("--pi-floor", pi_floor, "guard for the 1/pi blow-up near zero mass");
  bounds_cmd->add_flag("--closed-form", closed_form, "emit dual-vertex expressions (point-identified mass only)");
  bounds_cmd->add_flag("--allow-infeasible", allow_infeasible, "report instead of failing when the model cannot rationalize the data");

  CLI::App* test_cmd = app.add_subcommand("test", "test H0: theta0 is in the identified set");
  add_common(test_cmd, true);
  test_cmd->add_option("--param", param_flag, "parameter, e.g. ate_contrast:1,0");
  test_cmd->add_option("--stratum", stratum_flags, "conditioning stratum");
  test_cmd->add_option("--theta0", theta0, "hypothesized value")->required();
  test_cmd->add_option("--alpha", cfg.alpha, "level");
  test_cmd->add_option("--bootstrap", cfg.bootstrap_B, "bootstrap replicates");
  test_cmd->add_option("--seed", cfg.seed, "rng seed");
  test_cmd->add_option("--lambda", cfg.lambda_n, "slackness scale (default min(1, 1/sqrt(log n)))");

  CLI::App* ci_cmd = app.add_subcommand("ci", "test-inversion confidence region");
  add_common(ci_cmd, true);
  ci_cmd->add_option("--param", param_flag, "parameter");
  ci_cmd->add_option("--stratum", stratum_flags, "conditioning stratum");
  ci_cmd->add_option("--alpha", cfg.alpha, "level");
  ci_cmd->add_option("--bootstrap", cfg.bootstrap_B, "bootstrap replicates");
  ci_cmd->add_option("--seed", cfg.seed, "rng seed");
  ci_cmd->add_option("--lambda", cfg.lambda_n, "slackness scale");
  ci_cmd->add_option("--grid", grid_flag, "theta grid LO:HI:N (default: derived)");

  CLI::App* spec_cmd = app.add_subcommand("spec-test", "test that the model can rationalize the data");
  add_common(spec_cmd, true);
  spec_cmd->add_option("--alpha", cfg.alpha, "level");
  spec_cmd->add_option("--bootstrap", cfg.bootstrap_B, "bootstrap replicates");
  spec_cmd->add_option("--seed", cfg.seed, "rng seed");
  spec_cmd->add_option("--lambda", cfg.lambda_n, "slackness scale");

  CLI::App* impl_cmd = app.add_subcommand("implications", "sharp testable implications (H-representation)");
  add_common(impl_cmd, false);
  std::string hrep_path;
  impl_cmd->add_option("--hrep-out", hrep_path, "also write the inequality text file here");

  CLI::App* rep_cmd = app.add_subcommand("replicate-appendix-c",
                                         "run the bundled three-arm worked example and diff "
                                         "against its published intervals");
  rep_cmd->add_option("--grid", grid_n, "grid points for the outer search");
  rep_cmd->add_option("--out", out_path, "write the JSON report here instead of stdout");
  std::string figure_path;
  rep_cmd->add_option("--figure-out", figure_path, "write the plot-ready CSV here");

  CLI11_PARSE(app, argc, argv);
  Timer timer;

  try {
    std::vector<std::pair<std::string, std::string>> digests;
    io::ModelFile mf;
    ObservedDistribution data;
    auto load_inputs = [&](bool needs_data) {
      mf = io::load_model(model_path);
      digests.emplace_back(model_path, io::digest_file(model_path));
      if (needs_data) {
        data = io::load_csv(data_path, mf.model.support);
        digests.emplace_back(data_path, io::digest_file(data_path));
      }
    };
    auto resolve_parameter = [&]() -> ParameterSpec {
      ParameterSpec param;
      if (!param_flag.empty()) param = parse_param_flag(param_flag, mf.model.support);
      else if (mf.parameter) param = *mf.parameter;
      else throw std::invalid_argument("no parameter: give --param or add one to the model file");
      if (!stratum_flags.empty())
        param.conditioning = parse_stratum_flags(stratum_flags, mf.model.support);
      return param;
    };

    if (*bounds_cmd) {
      load_inputs(true);
      ParameterSpec param = resolve_parameter();
      SystemMatrix sys = build_A(mf.model, param, 0.0, true);
      ConsistencyResult consistent = check_consistency(sys, data);
      if (!consistent.feasible && !allow_infeasible) {
        json report;
        report["error"] = "model cannot rationalize the data";
        report["violated_inequality"] = consistent.violated_inequality;
        emit(report, out_path);
        return kExitInfeasible;
      }
      PartialMassOptions opts;
      opts.grid_n = grid_n;
      opts.pi_floor = pi_floor;
      opts.threads = threads;
      BoundResult r = compute_bounds(mf.model, param, data, opts);
      json config = {{"param", param.name}, {"grid_n", grid_n},
                     {"pi_floor", pi_floor}, {"threads", resolve_threads(threads)},
                     {"closed_form", closed_form}};
      json report;
      report["result"] = io::bound_result_to_json(r, sys);
      if (!consistent.feasible) report["infeasibility"] = consistent.violated_inequality;
      if (closed_form && r.status == BoundStatus::nonempty &&
          r.pi_upper - r.pi_lower <= 1e-7) {
        MaterializedParameter mat = materialize(param, mf.model);
        Vector c = Vector::Zero(sys.cols());
        for (Index j = 0; j < sys.n_types; ++j)
          if (mat.in_stratum[j]) c[j] = mat.g_values[j] / std::max(r.pi_upper, 1e-12);
        ClosedFormEnvelope env = closed_form_envelope(sys, c, data);
        json lower = json::array(), upper = json::array();
        for (const auto& e : env.lower)
          lower.push_back({{"expression", e.text}, {"value", e.value_at_data}});
        for (const auto& e : env.upper)
          upper.push_back({{"expression", e.text}, {"value", e.value_at_data}});
        report["closed_form"] = {{"lower_max_of", lower}, {"upper_min_of", upper}};
      }
      report["manifest"] = io::manifest(config, digests, 0, timer.ms());
      emit(report, out_path);
      return kExitOk;
    }

    if (*test_cmd || *ci_cmd || *spec_cmd) {
      load_inputs(true);
      cfg.threads = threads;
      json report;
      if (*spec_cmd) {
        TestOutcome t = specification_test(mf.model, data, cfg);
        report["spec_test"] = io::test_outcome_to_json(t);
      } else {
        ParameterSpec param = resolve_parameter();
        if (*test_cmd) {
          TestOutcome t = test(theta0, mf.model, param, data, cfg);
          report["test"] = io::test_outcome_to_json(t);
        } else {
          if (!grid_flag.empty()) {
            auto c1 = grid_flag.find(':');
            auto c2 = grid_flag.find(':', c1 == std::string::npos ? c1 : c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
              throw std::invalid_argument("--grid expects LO:HI:N");
            cfg.grid_lo = std::stod(grid_flag.substr(0, c1));
            cfg.grid_hi = std::stod(grid_flag.substr(c1 + 1, c2 - c1 - 1));
            cfg.grid_n = std::stoll(grid_flag.substr(c2 + 1));
          }
          ConfidenceRegion r = confidence_region(mf.model, param, data, cfg);
          report["confidence_region"] = io::confidence_region_to_json(r);
        }
      }
      report["manifest"] = io::manifest(config_echo(cfg), digests, cfg.seed, timer.ms());
      emit(report, out_path);
      return kExitOk;
    }

    if (*impl_cmd) {
      load_inputs(false);
      ParameterSpec mass;
      mass.kind = ParameterSpec::Kind::stratum_mass;
      mass.name = "stratum_mass";
      mass.conditioning.all = true;
      SystemMatrix sys = build_A(mf.model, mass, 0.0, true);
      PolyhedronH poly = image_polytope_hrep(sys.A1());
      std::vector<std::string> names;
      for (Index i = 0; i < sys.n_cells; ++i) names.push_back(sys.support.cell_name(i));
      std::string text = hrep_to_text(poly, names);
      if (!hrep_path.empty()) io::write_file(hrep_path, text);
      json report;
      report["n_inequalities"] = poly.G.rows();
      report["inequalities"] = text;
      report["manifest"] = io::manifest({{"hrep_out", hrep_path}}, digests, 0, timer.ms());
      emit(report, out_path);
      return kExitOk;
    }

    if (*rep_cmd) {
      using namespace strata::cs;
      CSDistributionP p = table1();
      Interval tilde = cs_pi_tilde(p);
      Interval sharp = cs_pi_sharp_closed_form(p);
      CSBounds cs_bound = cs_final_bounds(p, tilde, grid_n);
      CSBounds sharp_bound = cs_final_bounds(p, sharp, grid_n);
      struct Expected {
        const char* name;
        double got_lo, got_hi, want_lo, want_hi, tol;
      };
      const Expected checks[] = {
          {"pi_step1", tilde.lo, tilde.hi, 0.195, 0.481, 1e-9},
          {"pi_sharp", sharp.lo, sharp.hi, 0.235, 0.419, 1e-9},
          {"bound_step1", cs_bound.bound.lo, cs_bound.bound.hi, -0.219, 0.923, 2e-3},
          {"bound_sharp", sharp_bound.bound.lo, sharp_bound.bound.hi, -0.219, 0.766, 2e-3},
      };
      json results = json::array();
      bool all_ok = true;
      for (const auto& c : checks) {
        bool ok = std::abs(c.got_lo - c.want_lo) <= c.tol && std::abs(c.got_hi - c.want_hi) <= c.tol;
        all_ok = all_ok && ok;
        results.push_back({{"name", c.name},
                           {"interval", {c.got_lo, c.got_hi}},
                           {"expected", {c.want_lo, c.want_hi}},
                           {"tolerance", c.tol},
                           {"match", ok}});
      }
      if (!figure_path.empty()) io::write_file(figure_path, emit_figure_data(p));
      json report;
      report["checks"] = results;
      report["all_match"] = all_ok;
      report["envelope_crossing_on_step1_interval"] = cs_bound.envelope_crossing;
      report["manifest"] = io::manifest({{"grid_n", grid_n}}, {}, 0, timer.ms());
      emit(report, out_path);
      return all_ok ? kExitOk : kExitNumerical;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
