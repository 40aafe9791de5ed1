#include "lobpcg/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "lobpcg/error.hpp"
#include "lobpcg/io.hpp"
#include "lobpcg/lobpcg2.hpp"
#include "lobpcg/partition.hpp"
#include "lobpcg/solver.hpp"

namespace lobpcg::cli {

namespace {

using json = nlohmann::ordered_json;

struct RunSettings {
  std::string matrix;
  std::string metric;
  std::string x0;
  std::size_t nev = 0;
  std::size_t block_size = 0;
  double tol = 1e-8;
  std::size_t max_iter = 500;
  std::string precond = "none";
  std::string variant = "lobpcg";
  std::size_t sub_block = 1;
  std::size_t rr_period = 1;
  std::uint64_t seed = 0;
  std::string locking = "soft";
  double restart_cond_limit = 1e12;
  bool history = false;
};

struct Problem {
  SparseSymMatrix a;
  std::optional<SparseSymMatrix> b;
  std::optional<Preconditioner> t;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int parse_app(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  return -1;
}

void add_solver_options(CLI::App& app, RunSettings& s) {
  app.add_option("--matrix", s.matrix, "Matrix Market file holding A")->required();
  app.add_option("--metric", s.metric, "Matrix Market file holding the SPD metric B");
  app.add_option("--nev", s.nev, "Number of smallest eigenpairs to compute")->required();
  app.add_option("--tol", s.tol, "Relative residual tolerance");
  app.add_option("--max-iter", s.max_iter, "Iteration cap");
  app.add_option("--seed", s.seed, "Seed for the random initial block");
  app.add_option("--locking", s.locking, "soft | none")->check(CLI::IsMember({"soft", "none"}));
  app.add_option("--restart-cond-limit", s.restart_cond_limit,
                 "Condition bound above which P is dropped for one iteration");
}

Locking parse_locking(const std::string& s) { return s == "none" ? Locking::None : Locking::Soft; }

Problem load_problem(const RunSettings& s, const std::string& precond) {
  Problem p;
  p.a = io::parse_matrix_market(s.matrix);
  if (!s.metric.empty()) p.b = io::parse_matrix_market(s.metric);
  if (precond == "jacobi") {
    p.t = jacobi_precond(p.a);
    if (p.t->negative_diagonal_warning()) {
      std::cerr << "warning: nonpositive diagonal entries replaced by 1 in the Jacobi preconditioner\n";
    }
  } else if (precond != "none") {
    throw Error(ErrorCode::InvalidConfig, "unknown preconditioner '" + precond + "'");
  }
  return p;
}

EigenProblem view(const Problem& p) {
  EigenProblem e;
  e.a = &p.a;
  e.b = p.b ? &*p.b : nullptr;
  e.t = p.t ? &*p.t : nullptr;
  return e;
}

SolveResult run_variant(const Problem& problem, const RunSettings& s,
                        const std::optional<BlockVector>& x0) {
  const EigenProblem e = view(problem);
  if (s.variant == "lobpcg2") {
    if (x0) throw Error(ErrorCode::InvalidConfig, "--x0 is not supported with --variant lobpcg2");
    Lobpcg2Config c;
    c.nev = s.nev;
    c.sub_block = s.sub_block;
    c.rr_period = s.rr_period;
    c.tol = s.tol;
    c.max_iter = s.max_iter;
    c.seed = s.seed;
    c.locking = parse_locking(s.locking);
    c.restart_cond_limit = s.restart_cond_limit;
    c.record_history = s.history;
    return lobpcg2_solve(e, c);
  }
  SolverConfig c;
  c.nev = s.nev;
  c.block_size = s.block_size;
  c.tol = s.tol;
  c.max_iter = s.max_iter;
  c.seed = s.seed;
  c.locking = parse_locking(s.locking);
  c.restart_cond_limit = s.restart_cond_limit;
  c.record_history = s.history;
  if (s.variant == "psd") return psd_solve(e, c, x0);
  if (s.variant == "lobpcg") return lobpcg_solve(e, c, x0);
  throw Error(ErrorCode::InvalidConfig, "unknown variant '" + s.variant + "'");
}

int exit_code(Status status) {
  switch (status) {
    case Status::Converged: return kExitConverged;
    case Status::MaxIterReached: return kExitMaxIter;
    case Status::Breakdown: return kExitBreakdown;
  }
  return kExitUsage;
}

json config_json(const RunSettings& s) {
  return json{{"nev", s.nev},
              {"block_size", s.block_size == 0 ? s.nev : s.block_size},
              {"tol", s.tol},
              {"max_iter", s.max_iter},
              {"seed", s.seed},
              {"locking", s.locking},
              {"restart_cond_limit", s.restart_cond_limit},
              {"record_history", s.history},
              {"precond", s.precond},
              {"sub_block", s.sub_block},
              {"rr_period", s.rr_period}};
}

json manifest_json(const std::string& command, const std::vector<std::string>& args,
                   json problem_paths, json config, const std::string& variant,
                   std::uint64_t seed, const std::string& started) {
  return json{{"tool", kToolName},
              {"tool_version", kToolVersion},
              {"command", command},
              {"argv", args},
              {"problem", std::move(problem_paths)},
              {"variant", variant},
              {"seed", seed},
              {"config", std::move(config)},
              {"started_at", started},
              {"finished_at", utc_timestamp()}};
}

json history_json(const std::vector<IterationRecord>& history) {
  json out = json::array();
  for (const auto& r : history) {
    out.push_back({{"iter", r.iter},
                   {"ritz_values", r.ritz_values},
                   {"residual_norms", r.residual_norms},
                   {"locked_count", r.locked_count},
                   {"basis_cols", r.basis_cols},
                   {"shared_rr", r.shared_rr}});
  }
  return out;
}

void write_json(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

// "key=v1,v2" -> (key, [v1, v2])
std::pair<std::string, std::vector<std::string>> parse_axis(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw Error(ErrorCode::InvalidConfig, "grid axis must look like key=v1,v2: '" + arg + "'");
  }
  std::pair<std::string, std::vector<std::string>> axis{arg.substr(0, eq), {}};
  std::stringstream values(arg.substr(eq + 1));
  std::string v;
  while (std::getline(values, v, ',')) {
    if (v.empty()) throw Error(ErrorCode::InvalidConfig, "empty value in grid axis '" + arg + "'");
    axis.second.push_back(v);
  }
  return axis;
}

std::size_t thread_budget() {
  if (const char* env = std::getenv("LOBPCG_KIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

}  // namespace

int cmd_solve(const std::vector<std::string>& args) {
  CLI::App app{"Compute the smallest eigenpairs of A x = lambda B x", "solve"};
  RunSettings s;
  std::string out_path;
  std::string vectors_out;
  add_solver_options(app, s);
  app.add_option("--block-size", s.block_size, "Block width (defaults to nev)");
  app.add_option("--precond", s.precond, "none | jacobi")->check(CLI::IsMember({"none", "jacobi"}));
  app.add_option("--variant", s.variant, "lobpcg | lobpcg2 | psd")
      ->check(CLI::IsMember({"lobpcg", "lobpcg2", "psd"}));
  app.add_option("--sub-block", s.sub_block, "LOBPCG II sub-solver width");
  app.add_option("--rr-period", s.rr_period, "LOBPCG II shared Rayleigh-Ritz period");
  app.add_option("--x0", s.x0, "Initial block as a Matrix Market array file");
  app.add_option("--out", out_path, "Result JSON path")->required();
  app.add_option("--vectors-out", vectors_out, "Write eigenvectors as a Matrix Market array");
  app.add_flag("--history", s.history, "Record per-iteration history in the JSON");
  if (const int rc = parse_app(app, args); rc >= 0) return rc;

  if (s.nev == 0) {
    std::cerr << "error: --nev must be at least 1\n" << app.help();
    return kExitUsage;
  }

  try {
    const std::string started = utc_timestamp();
    const Problem problem = load_problem(s, s.precond);
    std::optional<BlockVector> x0;
    if (!s.x0.empty()) x0 = io::parse_matrix_market_array(s.x0);

    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult result = run_variant(problem, s, x0);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json doc;
    doc["format_version"] = kFormatVersion;
    doc["manifest"] = manifest_json("solve", args,
                                    {{"matrix", s.matrix}, {"metric", s.metric}, {"x0", s.x0}},
                                    config_json(s), s.variant, s.seed, started);
    doc["status"] = to_string(result.status);
    doc["eigenvalues"] = result.values;
    doc["iterations"] = result.iterations;
    doc["residual_norms_final"] = result.residual_norms;
    if (s.history) doc["history"] = history_json(result.history);
    doc["wall_time_seconds"] = wall;
    write_json(doc, out_path);
    if (!vectors_out.empty()) io::write_matrix_market_array(result.vectors, vectors_out);

    std::cerr << to_string(result.status) << " after " << result.iterations << " iterations\n";
    return exit_code(result.status);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_bench(const std::vector<std::string>& args) {
  CLI::App app{"Run a grid of solver configurations and write one CSV row per cell", "bench"};
  RunSettings base;
  std::vector<std::string> grid_args;
  std::string out_path;
  add_solver_options(app, base);
  app.add_option("--grid", grid_args,
                 "Axis as key=v1,v2 (keys: variant, block-size, sub-block, rr-period, precond); "
                 "repeatable");
  app.add_option("--out", out_path, "CSV output path")->required();
  if (const int rc = parse_app(app, args); rc >= 0) return rc;

  if (base.nev == 0) {
    std::cerr << "error: --nev must be at least 1\n";
    return kExitUsage;
  }

  try {
    // Fixed axis order gives a deterministic row order.
    const std::vector<std::string> axis_order = {"variant", "block-size", "sub-block", "rr-period",
                                                 "precond"};
    std::map<std::string, std::vector<std::string>> axes;
    for (const auto& arg : grid_args) {
      auto [key, values] = parse_axis(arg);
      if (std::ranges::find(axis_order, key) == axis_order.end()) {
        throw Error(ErrorCode::InvalidConfig, "unknown grid axis '" + key + "'");
      }
      auto& slot = axes[key];
      slot.insert(slot.end(), values.begin(), values.end());
    }
    if (axes.empty()) throw Error(ErrorCode::InvalidConfig, "empty grid: pass at least one --grid");

    std::vector<RunSettings> cells{base};
    for (const auto& key : axis_order) {
      const auto it = axes.find(key);
      if (it == axes.end()) continue;
      std::vector<RunSettings> next;
      for (const auto& cell : cells) {
        for (const auto& value : it->second) {
          RunSettings c = cell;
          if (key == "variant") {
            if (value != "lobpcg" && value != "lobpcg2" && value != "psd") {
              throw Error(ErrorCode::InvalidConfig, "unknown variant '" + value + "'");
            }
            c.variant = value;
          } else if (key == "precond") {
            c.precond = value;
          } else {
            std::size_t v = 0;
            try {
              v = static_cast<std::size_t>(std::stoull(value));
            } catch (const std::exception&) {
              throw Error(ErrorCode::InvalidConfig, "grid value '" + value + "' is not a count");
            }
            if (key == "block-size") c.block_size = v;
            if (key == "sub-block") c.sub_block = v;
            if (key == "rr-period") c.rr_period = v;
          }
          next.push_back(c);
        }
      }
      cells = std::move(next);
    }

    const Problem plain = load_problem(base, "none");
    std::optional<Preconditioner> jacobi;
    if (std::ranges::any_of(cells, [](const RunSettings& c) { return c.precond == "jacobi"; })) {
      jacobi = jacobi_precond(plain.a);
    }
    for (const auto& c : cells) {
      if (c.precond != "none" && c.precond != "jacobi") {
        throw Error(ErrorCode::InvalidConfig, "unknown preconditioner '" + c.precond + "'");
      }
    }

    struct Row {
      SolveResult result;
      double wall = 0.0;
      std::string error;
    };
    std::vector<Row> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) {
        Problem local{plain.a, plain.b, cells[i].precond == "jacobi" ? jacobi : std::nullopt};
        try {
          const auto t0 = std::chrono::steady_clock::now();
          rows[i].result = run_variant(local, cells[i], std::nullopt);
          rows[i].wall =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } catch (const Error& e) {
          rows[i].error = e.what();
        }
      }
    };
    const std::size_t threads = std::min(thread_budget(), cells.size());
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].error.empty()) throw Error(ErrorCode::InvalidConfig, "grid cell " +
                                                  std::to_string(i) + ": " + rows[i].error);
    }

    std::ofstream out(out_path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_path);
    out << "format_version,variant,nev,block_size,sub_block,rr_period,precond,seed,status,"
           "iterations,matvec_count,precond_count,rr_count,orthonormalize_count,"
           "wall_time_seconds,converged\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const RunSettings& c = cells[i];
      const SolveResult& r = rows[i].result;
      out << kFormatVersion << ',' << c.variant << ',' << c.nev << ','
          << (c.block_size == 0 ? c.nev : c.block_size) << ',' << c.sub_block << ','
          << c.rr_period << ',' << c.precond << ',' << c.seed << ',' << to_string(r.status) << ','
          << r.iterations << ',' << r.counts.matvec << ',' << r.counts.precond << ','
          << r.counts.rayleigh_ritz << ',' << r.counts.orthonormalize << ','
          << format17(rows[i].wall) << ',' << (r.status == Status::Converged ? 1 : 0) << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + out_path);
    return kExitConverged;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_partition(const std::vector<std::string>& args) {
  CLI::App app{"Spectral bisection of a weighted graph by its Fiedler vector", "partition"};
  std::string edges_path;
  std::string out_path;
  PartitionConfig pc;
  app.add_option("--edges", edges_path, "Edge CSV with rows u,v,weight")->required();
  app.add_option("--out", out_path, "Result JSON path")->required();
  app.add_option("--seed", pc.seed, "Seed for the random initial block");
  app.add_option("--tol", pc.tol, "Relative residual tolerance");
  app.add_option("--max-iter", pc.max_iter, "Iteration cap");
  if (const int rc = parse_app(app, args); rc >= 0) return rc;

  const std::string started = utc_timestamp();
  json doc;
  doc["format_version"] = kFormatVersion;
  const json config = {{"tol", pc.tol}, {"max_iter", pc.max_iter}, {"seed", pc.seed}};
  try {
    const io::EdgeList graph = io::parse_edge_csv(edges_path);
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const PartitionResult part = fiedler_bisection(graph.vertex_count, graph.edges, pc);
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      doc["manifest"] = manifest_json("partition", args, {{"edges", edges_path}}, config,
                                      "lobpcg", pc.seed, started);
      doc["status"] = to_string(part.solve.status);
      doc["labels"] = part.labels;
      doc["fiedler_value"] = part.fiedler_value;
      doc["cut_weight"] = part.cut_weight;
      doc["iterations"] = part.solve.iterations;
      doc["wall_time_seconds"] = wall;
      write_json(doc, out_path);
      return exit_code(part.solve.status);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DisconnectedGraph) throw;
      doc["manifest"] = manifest_json("partition", args, {{"edges", edges_path}}, config,
                                      "lobpcg", pc.seed, started);
      doc["status"] = "DisconnectedGraph";
      doc["message"] = e.what();
      write_json(doc, out_path);
      std::cerr << "error: " << e.what() << '\n';
      return kExitDisconnected;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int run(const std::vector<std::string>& args) {
  const std::string usage =
      "usage: lobpcg_kit <solve|bench|partition> [options]\n"
      "       lobpcg_kit <command> --help\n";
  if (args.empty()) {
    std::cerr << usage;
    return kExitUsage;
  }
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  if (args[0] == "solve") return cmd_solve(rest);
  if (args[0] == "bench") return cmd_bench(rest);
  if (args[0] == "partition") return cmd_partition(rest);
  if (args[0] == "--version") {
    std::cout << kToolName << ' ' << kToolVersion << '\n';
    return 0;
  }
  if (args[0] == "--help" || args[0] == "-h") {
    std::cout << usage;
    return 0;
  }
  std::cerr << "unknown command '" << args[0] << "'\n" << usage;
  return kExitUsage;
}

}  // namespace lobpcg::cli
