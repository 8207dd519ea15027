#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gapfilter/csv.hpp"
#include "gapfilter/minimax.hpp"
#include "gapfilter/oracle.hpp"
#include "gapfilter/scenario.hpp"
#include "gapfilter/solver.hpp"

namespace gapfilter {

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  bool dump_paths = false;
};

namespace detail {

class SummaryLog {
 public:
  void put(const std::string& key, const std::string& value) {
    lines_.push_back(key + " = " + value);
  }
  void put(const std::string& key, double value) { put(key, format_number(value)); }
  void put(const std::string& key, std::int64_t value) { put(key, std::to_string(value)); }
  void put(const std::string& key, int value) { put(key, std::to_string(value)); }
  void put(const std::string& key, bool value) { put(key, std::string(value ? "yes" : "no")); }
  void blank() { lines_.push_back(""); }

  void write(const std::string& path) const {
    std::ofstream out(path);
    for (const auto& l : lines_) out << l << '\n';
    out.close();
    if (!out) throw io_error("cannot write " + path);
  }

 private:
  std::vector<std::string> lines_;
};

inline void write_filter_artifacts(const std::string& dir, const Grids& g,
                                   const FilterSolution& sol) {
  {
    CsvWriter w(dir + "/h.csv", {"lambda", "h_re", "h_im"});
    for (std::size_t p = 0; p < sol.h.size(); ++p)
      w.row({g.freq.nodes[p], sol.h[p].real(), sol.h[p].imag()});
    w.close();
  }
  {
    CsvWriter w(dir + "/c.csv", {"t", "c"});
    for (std::size_t j = 0; j < sol.t_nodes.size(); ++j)
      w.row({static_cast<double>(sol.t_nodes[j]) * g.time.step, sol.c(static_cast<Eigen::Index>(j))});
    w.close();
  }
  {
    CsvWriter w(dir + "/v.csv", {"t", "v"});
    for (std::size_t j = 0; j < sol.v_nodes.size(); ++j)
      w.row({static_cast<double>(sol.v_nodes[j]) * g.time.step, sol.v(static_cast<Eigen::Index>(j))});
    w.close();
  }
}

inline void summarize_solution(SummaryLog& log, const FilterSolution& sol) {
  log.put("delta", sol.delta);
  log.put("var_functional", sol.var_functional);
  log.put("freq_form_gap", sol.diag.freq_form_gap);
  log.put("support_leakage", sol.diag.support_leakage);
  log.put("tail_mass", sol.diag.tail_mass);
  log.put("cond_B", sol.diag.cond_B);
  log.put("regularized", sol.diag.regularized);
  log.put("minimality_advisory", sol.diag.minimality_advisory);
}

inline const char* class_label(const DensityClass& c) {
  if (std::holds_alternative<L1Ball>(c)) return "l1ball";
  if (std::holds_alternative<L2Ball>(c)) return "l2ball";
  return "contamination";
}

inline void summarize_side(SummaryLog& log, const std::string& prefix,
                           const StationaritySide& s) {
  log.put(prefix + ".alpha", s.alpha);
  log.put(prefix + ".kkt_residual", s.kkt_residual);
  log.put(prefix + ".printed_form_residual", s.alt_residual);
  log.put(prefix + ".sign_excess", s.sign_excess);
  log.put(prefix + ".constraint_gap", s.constraint_gap);
  log.put(prefix + ".degenerate", s.degenerate);
}

}  // namespace detail

/// Runs one command of the tool against a scenario file, writing every
/// artifact into out_dir. Returns the process exit code: 0 success,
/// 1 validation failure, 2 numerical failure, 3 I/O failure. summary.txt is
/// written even when the run fails, with the failure recorded inside.
inline int run_command(const std::string& command, const std::string& scenario_path,
                       const std::string& out_dir, const RunOverrides& ov = {}) {
  namespace fs = std::filesystem;
  detail::SummaryLog log;
  int code = 0;
  std::string status = "ok";

  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create output directory " + out_dir + ": " + ec.message());

    Scenario sc = load_scenario(scenario_path);
    if (ov.seed) sc.run.seed = *ov.seed;
    if (ov.paths) sc.run.paths = *ov.paths;

    log.put("scenario", sc.name.empty() ? scenario_path : sc.name);
    log.put("command", command);

    const ProcessModel model = scenario_model(sc);
    const Grids& g = model.grids;
    log.put("step", g.time.step);
    log.put("horizon", g.time.horizon);
    log.put("freq_nodes", g.freq.size);
    log.put("time_nodes", static_cast<std::int64_t>(g.time.index.size()));
    log.put("observed_nodes", static_cast<std::int64_t>(observed_nodes(g).size()));
    log.put("minimality_mass", model.minimality.mass);
    log.put("minimality_refined_mass", model.minimality.refined_mass);

    if (command == "filter") {
      const FilterSolution sol = solve_filter(model);
      detail::write_filter_artifacts(out_dir, g, sol);
      detail::summarize_solution(log, sol);
    } else if (command == "truncated") {
      const FilterSolution full = solve_filter(model);
      detail::write_filter_artifacts(out_dir, g, full);
      detail::summarize_solution(log, full);
      std::vector<double> horizons = sc.run.truncation;
      if (horizons.empty()) {
        for (int q = 1; q <= 4; ++q) {
          const std::int64_t n = g.n_pos * q / 4;
          horizons.push_back(static_cast<double>(n) * g.time.step);
        }
      }
      CsvWriter w(out_dir + "/truncation.csv", {"N", "delta_N", "delta_gap_rel"});
      for (double N : horizons) {
        const FilterSolution cut = solve_filter_truncated(model, N);
        const double gap = std::abs(cut.delta - full.delta) / (1.0 + std::abs(full.delta));
        w.row({N, cut.delta, gap});
      }
      w.close();
    } else if (command == "minimax") {
      if (!sc.class_f && !sc.class_g)
        throw validation_error("minimax command needs a [class.f] or [class.g] section");
      MinimaxOptions opt;
      opt.theta = sc.run.theta;
      opt.max_iterations = sc.run.max_iterations;
      const LeastFavorableResult lf = solve_least_favorable(model, sc.class_f, sc.class_g, opt);

      detail::write_filter_artifacts(out_dir, g, lf.filter);
      {
        CsvWriter w(out_dir + "/lf_densities.csv", {"lambda", "f0", "g0", "f_nominal", "g_nominal"});
        for (std::size_t p = 0; p < lf.f0.size(); ++p)
          w.row({g.freq.nodes[p], lf.f0[p], lf.g0[p], model.f_vals[p], model.g_vals[p]});
        w.close();
      }
      const FilterSolution nominal = solve_filter(model);
      log.put("iterations", lf.iterations);
      log.put("converged", lf.converged);
      log.put("delta0", lf.delta0);
      log.put("delta_nominal", nominal.delta);
      if (sc.class_f) {
        log.put("class_f", std::string(detail::class_label(*sc.class_f)));
        detail::summarize_side(log, "side_f", lf.side_f);
      }
      if (sc.class_g) {
        log.put("class_g", std::string(detail::class_label(*sc.class_g)));
        detail::summarize_side(log, "side_g", lf.side_g);
      }
      detail::summarize_solution(log, lf.filter);

      const SaddleReport saddle = verify_saddle_point(lf, model, sc.class_f, sc.class_g,
                                                      sc.run.saddle_samples, sc.run.seed);
      log.put("saddle.members", saddle.members);
      log.put("saddle.characteristics", saddle.characteristics);
      log.put("saddle.member_excess", saddle.member_excess);
      log.put("saddle.characteristic_gap", saddle.characteristic_gap);
      log.put("saddle.tolerance", saddle.tolerance);
      log.put("saddle.passed", saddle.passed);
      if (!lf.converged) {
        code = 2;
        status = "least-favorable iteration did not converge within max_iterations";
      } else if (!saddle.passed) {
        code = 2;
        status = "saddle-point audit failed";
      }
    } else if (command == "montecarlo") {
      const FilterSolution sol = solve_filter(model);
      detail::write_filter_artifacts(out_dir, g, sol);
      detail::summarize_solution(log, sol);
      const PathBatch batch = simulate_paths(model, sc.run.paths, sc.run.seed);
      const EmpiricalMse emp = empirical_mse(batch, sol, g.time.step);
      const double z = emp.stderror > 0.0 ? std::abs(emp.mse - sol.delta) / emp.stderror : 0.0;
      log.put("paths", emp.paths);
      log.put("seed", static_cast<std::int64_t>(sc.run.seed));
      log.put("empirical_mse", emp.mse);
      log.put("empirical_se", emp.stderror);
      log.put("z_score", z);
      if (ov.dump_paths) {
        CsvWriter w(out_dir + "/paths.csv", {"path", "functional", "estimate", "residual"});
        for (int p = 0; p < emp.paths; ++p) {
          const double est = estimate_on_path(sol, batch, p, g.time.step);
          w.row({static_cast<double>(p), batch.functional(p), est, batch.functional(p) - est});
        }
        w.close();
      }
    } else if (command == "oracle-check") {
      const FilterSolution sol = solve_filter(model);
      detail::write_filter_artifacts(out_dir, g, sol);
      detail::summarize_solution(log, sol);
      const OracleSolution oracle = brute_force_projection(model);
      const double gap = std::abs(sol.delta - oracle.mse) / std::max(oracle.mse, 1e-12);
      double num = 0.0, den = 0.0;
      {
        CsvWriter w(out_dir + "/oracle.csv", {"t", "v_solver", "v_oracle"});
        for (std::size_t j = 0; j < oracle.nodes.size(); ++j) {
          const double vs = sol.v(static_cast<Eigen::Index>(j));
          const double vo = oracle.weights(static_cast<Eigen::Index>(j)) / g.time.step;
          num += (vs - vo) * (vs - vo);
          den += vo * vo;
          w.row({static_cast<double>(oracle.nodes[j]) * g.time.step, vs, vo});
        }
        w.close();
      }
      const double vgap = std::sqrt(num / std::max(den, 1e-300));
      log.put("oracle_mse", oracle.mse);
      log.put("oracle_var", oracle.var_functional);
      log.put("delta_gap_rel", gap);
      log.put("weights_gap_rel_l2", vgap);
      // stability probe: same model on a twice finer conjugate grid
      const Grids refined = refine_freq(g);
      const ProcessModel model_r = make_process_model(refined, model.weight, model.f, model.g);
      const FilterSolution sol_r = solve_filter(model_r);
      log.put("refined_delta", sol_r.delta);
      log.put("refined_delta_drift", std::abs(sol_r.delta - sol.delta) / (1.0 + sol.delta));
      if (gap > 1e-6) {
        code = 2;
        status = "solver and brute-force oracle disagree";
      }
    } else {
      throw validation_error("unknown command '" + command +
                             "' (expected filter, truncated, minimax, montecarlo, oracle-check)");
    }
  } catch (const validation_error& e) {
    code = 1;
    status = e.what();
  } catch (const io_error& e) {
    code = 3;
    status = e.what();
  } catch (const numeric_error& e) {
    code = 2;
    status = e.what();
  } catch (const std::exception& e) {
    code = 2;
    status = e.what();
  }

  const auto t1 = std::chrono::steady_clock::now();
  log.put("elapsed_ms",
          static_cast<std::int64_t>(
              std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()));
  log.put("status", status);
  log.put("exit_code", code);
  try {
    log.write(out_dir + "/summary.txt");
  } catch (const std::exception&) {
    if (code == 0) code = 3;
  }
  return code;
}

}  // namespace gapfilter
