// abspec: spectra of Aharonov-Bohm operators with half-integer circulation
// via the double-covering reduction. Subcommands: spectrum, sweep, analyze,
// mesh. Exit codes: 0 ok, 1 usage/config, 2 numerical, 3 precondition.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "abspec/analysis.hpp"
#include "abspec/config.hpp"
#include "abspec/csv.hpp"
#include "abspec/manifest.hpp"
#include "abspec/mesh.hpp"
#include "abspec/spectral.hpp"
#include "abspec/svg.hpp"
#include "abspec/version.hpp"

namespace fs = std::filesystem;
using namespace abspec;

namespace {

struct CliState {
  std::string config_path;
  std::string out_dir = ".";
  bool svg = false;
  int jobs = 1;
  int budget = 0;
  bool dump_matrices = false;
  std::vector<std::string> overrides;
};

Config load_config(const CliState& st, const std::string& command) {
  Config cfg;
  if (!st.config_path.empty()) {
    if (looks_like_manifest(st.config_path)) {
      ManifestRecord rec = load_last_manifest(st.config_path);
      if (rec.command != command)
        throw ConfigError("manifest records a '" + rec.command +
                          "' run, not '" + command + "'");
      cfg = Config::parse_string(rec.config_snapshot, st.config_path);
    } else {
      cfg = Config::parse_file(st.config_path);
    }
  }
  for (const auto& kv : st.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (st.budget > 0) cfg.set("mesh.budget", std::to_string(st.budget));
  return cfg;
}

struct OutputTracker {
  fs::path dir;
  std::vector<std::pair<std::string, std::uint64_t>> outputs;

  explicit OutputTracker(const std::string& out_dir) : dir(out_dir) {
    fs::create_directories(dir);
  }
  void write(const std::string& name, const std::string& content) {
    fs::path p = dir / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write output file " + p.string());
    os << content;
    os.close();
    outputs.emplace_back(name, fnv1a64(content));
  }
};

void finish_manifest(const CliState& st, const std::string& command,
                     const Config& cfg, OutputTracker& out, double wall_ms) {
  ManifestRecord rec;
  rec.command = command;
  rec.config_snapshot = cfg.snapshot();
  rec.version = kVersion;
  rec.wall_ms = wall_ms;
  rec.outputs = out.outputs;
  rec.inputs_hash = fnv1a64(rec.config_snapshot);
  append_manifest((out.dir / "manifest.jsonl").string(), rec);
}

std::string spectrum_csv(const std::string& name, const Vec2& pole,
                         const std::vector<double>& values,
                         const std::vector<double>& residuals,
                         const std::vector<std::string>& tags) {
  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < values.size(); i++) {
    rows.push_back({csv_double(pole.x), csv_double(pole.y),
                    std::to_string(i + 1), csv_double(values[i]),
                    csv_double(residuals[i]), tags[i]});
  }
  std::ostringstream os;
  write_csv_table(os, name, "a1,a2,j,lambda,residual,tag", rows);
  return os.str();
}

int cmd_spectrum(const CliState& st) {
  auto t0 = std::chrono::steady_clock::now();
  Config cfg = load_config(st, "spectrum");
  Domain domain = domain_from_config(cfg);
  auto pole = pole_from_config(cfg);
  SolveOptions opt = solve_options_from_config(cfg);
  int m = cfg.get_int("solve.m", 6);
  OutputTracker out(st.out_dir);

  {
    auto dir = dirichlet_spectrum(domain, opt, m);
    std::vector<double> v, r;
    std::vector<std::string> tags;
    for (const auto& p : dir) {
      v.push_back(p.value);
      r.push_back(p.residual);
      tags.push_back("s");
    }
    out.write("dirichlet.csv",
              spectrum_csv("dirichlet", Vec2{0, 0}, v, r, tags));
  }
  if (pole) {
    MagneticSolution sol = magnetic_spectrum(domain, *pole, opt, m);
    std::vector<double> v, r;
    std::vector<std::string> tags;
    for (const auto& p : sol.pairs) {
      v.push_back(p.value);
      r.push_back(p.residual);
      tags.push_back("a");
    }
    out.write("magnetic.csv",
              spectrum_csv("magnetic", pole->position, v, r, tags));

    auto cov = cover_spectrum(domain, *pole, opt, m);
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < cov.size(); i++) {
      rows.push_back({csv_double(pole->position.x),
                      csv_double(pole->position.y), std::to_string(i + 1),
                      csv_double(cov[i].value), csv_double(cov[i].residual),
                      std::string(1, (char)cov[i].tag)});
    }
    std::ostringstream os;
    write_csv_table(os, "cover", "a1,a2,j,lambda,residual,tag", rows);
    out.write("cover.csv", os.str());

    if (st.dump_matrices) {
      Cut cut = branch_cut(domain, *pole);
      Mesh mesh = triangulate(domain, opt.mesh_options(), &*pole, {cut});
      CutMesh cm = insert_cut(mesh);
      FemSystem sys = assemble(cm, opt.order);
      std::ostringstream ks, ms;
      dump_matrix(ks, sys.K);
      dump_matrix(ms, sys.M);
      out.write("K.txt", ks.str());
      out.write("M.txt", ms.str());
    }
  }
  double wall =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  finish_manifest(st, "spectrum", cfg, out, wall);
  return 0;
}

std::vector<Pole> sweep_poles(const Config& cfg, const Domain& domain) {
  if (cfg.has("sweep.path")) {
    auto nums = cfg.get_doubles("sweep.path");
    if (nums.size() != 4)
      throw ConfigError("config: 'sweep.path' must hold x0 y0 x1 y1");
    int steps = cfg.get_int("sweep.steps");
    if (steps < 2) throw ConfigError("config: 'sweep.steps' must be >= 2");
    Vec2 a{nums[0], nums[1]}, b{nums[2], nums[3]};
    std::vector<Pole> poles;
    for (int i = 1; i < steps; i++) {
      Vec2 p = a + (double(i) / steps) * (b - a);
      if (domain.contains(p)) poles.push_back(Pole(p));
    }
    if (poles.empty())
      throw PreconditionError("sweep path has no interior poles");
    return poles;
  }
  int n = cfg.get_int("sweep.n");
  return pole_grid(domain, n);
}

int cmd_sweep(const CliState& st) {
  auto t0 = std::chrono::steady_clock::now();
  Config cfg = load_config(st, "sweep");
  Domain domain = domain_from_config(cfg);
  SolveOptions opt = solve_options_from_config(cfg);
  int m = cfg.get_int("solve.m", 4);
  OutputTracker out(st.out_dir);

  std::vector<Pole> poles = sweep_poles(cfg, domain);
  SweepTable table = sweep(domain, poles, opt, m, st.jobs);

  std::vector<std::vector<std::string>> rows;
  for (const auto& row : table.rows) {
    if (!row.ok) {
      std::fprintf(stderr, "sweep: pole (%g, %g) failed: %s\n", row.pole.x,
                   row.pole.y, row.error.c_str());
      continue;
    }
    for (size_t j = 0; j < row.values.size(); j++) {
      rows.push_back({csv_double(row.pole.x), csv_double(row.pole.y),
                      std::to_string(j + 1), csv_double(row.values[j]),
                      csv_double(row.max_residual), "a"});
    }
  }
  std::ostringstream os;
  write_csv_table(os, "sweep", "a1,a2,j,lambda,residual,tag", rows);
  out.write("sweep.csv", os.str());

  if (st.svg && cfg.has("sweep.n")) {
    int n = cfg.get_int("sweep.n");
    for (int j = 1; j <= m; j++) {
      std::vector<HeatCell> cells;
      for (const auto& row : table.rows) {
        if (!row.ok || (int)row.values.size() < j) continue;
        cells.push_back({row.pole.x, row.pole.y, 1.0 / n, row.values[j - 1]});
      }
      std::ostringstream svg;
      write_heatmap_svg(svg, domain, cells, "lambda_" + std::to_string(j));
      out.write("sweep_j" + std::to_string(j) + ".svg", svg.str());
    }
  }
  double wall =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  finish_manifest(st, "sweep", cfg, out, wall);
  return 0;
}

SweepTable read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("analyze: cannot open sweep csv " + path);
  std::string line;
  SweepTable table;
  struct Key {
    double x, y;
  };
  std::vector<Key> order;
  std::vector<std::vector<double>> values;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'a') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a1, a2, lambda, residual;
    int j;
    std::string tag;
    if (!(ls >> a1 >> a2 >> j >> lambda >> residual >> tag))
      throw ConfigError("analyze: malformed sweep csv line: " + line);
    if (order.empty() || order.back().x != a1 || order.back().y != a2) {
      order.push_back({a1, a2});
      values.emplace_back();
    }
    values.back().push_back(lambda);
  }
  if (order.empty()) throw ConfigError("analyze: sweep csv holds no rows");
  table.m = (int)values.front().size();
  for (size_t i = 0; i < order.size(); i++) {
    SweepRow row;
    row.pole = {order[i].x, order[i].y};
    row.values = values[i];
    row.clusters = cluster(values[i], 1e-6);
    row.ok = true;
    table.rows.push_back(row);
  }
  return table;
}

int cmd_analyze(const CliState& st) {
  auto t0 = std::chrono::steady_clock::now();
  Config cfg = load_config(st, "analyze");
  std::string mode = cfg.get_string("analyze.mode");
  OutputTracker out(st.out_dir);
  std::ostringstream summary;
  summary << "# abspec analyze mode=" << mode << "\n";

  if (mode == "boundary") {
    Domain domain = domain_from_config(cfg);
    SolveOptions opt = solve_options_from_config(cfg);
    int j = cfg.get_int("analyze.j");
    auto pt = cfg.get_doubles("analyze.point");
    if (pt.size() != 2)
      throw ConfigError("config: 'analyze.point' must hold two coordinates");
    auto bc = boundary_convergence(domain, j, {pt[0], pt[1]},
                                   cfg.get_doubles("analyze.distances"), opt);
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < bc.distances.size(); i++) {
      rows.push_back({csv_double(pt[0]), csv_double(pt[1]),
                      std::to_string(j), csv_double(bc.distances[i]),
                      csv_double(bc.magnetic[i]), csv_double(bc.lambda_ref),
                      csv_double(bc.gaps[i])});
    }
    std::ostringstream os;
    write_csv_table(os, "boundary", "b1,b2,j,d,lambda_a,lambda_ref,gap", rows);
    out.write("boundary.csv", os.str());
    summary << "monotone " << (bc.pass ? "PASS" : "FAIL") << "\n";
  } else if (mode == "nodal") {
    Domain domain = domain_from_config(cfg);
    SolveOptions opt = solve_options_from_config(cfg);
    int j = cfg.get_int("analyze.j");
    auto pole = pole_from_config(cfg);
    if (!pole) throw ConfigError("config: 'pole' required for nodal mode");
    MagneticSolution sol = magnetic_spectrum(domain, *pole, opt, j + 2);
    double r = cfg.get_double("analyze.probe_radius", 0.05);
    NodalOptions nopt;
    nopt.require_simple = cfg.get_int("analyze.require_simple", 1) != 0;
    NodalReport rep = nodal_order(sol, j, r, nopt);
    std::vector<std::vector<std::string>> rows{
        {csv_double(rep.pole.x), csv_double(rep.pole.y), std::to_string(j),
         std::to_string(rep.k), csv_double(rep.c_k), csv_double(rep.d_k),
         csv_double(rep.fit_residual)}};
    std::ostringstream os;
    write_csv_table(os, "nodal", "a1,a2,j,k,ck,dk,res", rows);
    out.write("nodal.csv", os.str());
    bool pass = rep.k % 2 == 1 && (rep.k < 3 || ray_geometry(rep) <= 0.15);
    summary << "k=" << rep.k << " " << (pass ? "PASS" : "FAIL") << "\n";
  } else if (mode == "rate") {
    Domain domain = domain_from_config(cfg);
    SolveOptions opt = solve_options_from_config(cfg);
    int j = cfg.get_int("analyze.j");
    auto pt = cfg.get_doubles("analyze.point");
    auto dir = cfg.get_doubles("analyze.direction");
    if (pt.size() != 2 || dir.size() != 2)
      throw ConfigError(
          "config: 'analyze.point' and 'analyze.direction' need 2 entries");
    RateFitOptions fo;
    fo.require_simple = cfg.get_int("analyze.require_simple", 1) != 0;
    RateFit fit = rate_fit(domain, {pt[0], pt[1]}, j, {dir[0], dir[1]},
                           cfg.get_doubles("analyze.radii"), opt, fo);
    std::vector<std::vector<std::string>> rows{
        {csv_double(fit.base.x), csv_double(fit.base.y), std::to_string(j),
         std::to_string(fit.k), csv_double(fit.p), csv_double(fit.p_lo),
         csv_double(fit.p_hi)}};
    std::ostringstream os;
    write_csv_table(os, "rate", "b1,b2,j,k,p,p_lo,p_hi", rows);
    out.write("rate.csv", os.str());
    if (fit.k >= 3) {
      bool pass = fit.p >= fit.bound - 0.3;
      summary << "p=" << csv_double(fit.p) << " bound=" << csv_double(fit.bound)
              << " " << (pass ? "PASS" : "FAIL") << "\n";
    } else {
      summary << "p=" << csv_double(fit.p)
              << " no bound asserted (k=" << fit.k << ")\n";
    }
  } else if (mode == "smoothness") {
    std::string sweep_csv = cfg.get_string("analyze.sweep_csv");
    int j = cfg.get_int("analyze.j");
    SweepTable table = read_sweep_csv(sweep_csv);
    SmoothnessScan scan = smoothness_scan(table, j);
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < scan.lambda.size(); i++) {
      bool kink = std::find(scan.kinks.begin(), scan.kinks.end(), (int)i) !=
                  scan.kinks.end();
      bool cross = std::find(scan.crossings.begin(), scan.crossings.end(),
                             (int)i) != scan.crossings.end();
      rows.push_back({csv_double(table.rows[i].pole.x),
                      csv_double(table.rows[i].pole.y), std::to_string(j),
                      csv_double(scan.lambda[i]),
                      csv_double(scan.second_diff[i]),
                      kink ? "1" : "0", cross ? "1" : "0"});
    }
    std::ostringstream os;
    write_csv_table(os, "smoothness", "a1,a2,j,lambda,d2,kink,crossing", rows);
    out.write("smoothness.csv", os.str());
    summary << "kinks=" << scan.kinks.size()
            << " crossings=" << scan.crossings.size()
            << " flagged=" << scan.flagged.size() << " "
            << (scan.flagged.empty() ? "PASS" : "FAIL") << "\n";
  } else {
    throw ConfigError("analyze.mode must be boundary|nodal|rate|smoothness");
  }

  out.write("summary.txt", summary.str());
  std::cout << summary.str();
  double wall =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  finish_manifest(st, "analyze", cfg, out, wall);
  return 0;
}

int cmd_mesh(const CliState& st) {
  auto t0 = std::chrono::steady_clock::now();
  Config cfg = load_config(st, "mesh");
  Domain domain = domain_from_config(cfg);
  auto pole = pole_from_config(cfg);
  SolveOptions opt = solve_options_from_config(cfg);
  OutputTracker out(st.out_dir);

  Mesh mesh;
  if (pole) {
    Cut cut = branch_cut(domain, *pole);
    mesh = triangulate(domain, opt.mesh_options(), &*pole, {cut});
  } else {
    mesh = triangulate(domain, opt.mesh_options());
  }
  std::ostringstream os;
  write_mesh(os, mesh);
  out.write("mesh.txt", os.str());

  if (st.dump_matrices) {
    FemSystem sys = assemble(mesh, opt.order);
    std::ostringstream ks, ms;
    dump_matrix(ks, sys.K);
    dump_matrix(ms, sys.M);
    out.write("K.txt", ks.str());
    out.write("M.txt", ms.str());
  }
  double wall =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  finish_manifest(st, "mesh", cfg, out, wall);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aharonov-Bohm spectra via the double-covering reduction"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CliState st;
  for (auto* sub :
       {app.add_subcommand("spectrum",
                           "Dirichlet, magnetic and cover spectra"),
        app.add_subcommand("sweep", "pole sweeps over grids or paths"),
        app.add_subcommand("analyze",
                           "boundary | nodal | rate | smoothness analyses"),
        app.add_subcommand("mesh", "mesh generation and export")}) {
    sub->add_option("--config", st.config_path,
                    "config file (or manifest.jsonl to re-run)");
    sub->add_option("--out", st.out_dir, "output directory");
    sub->add_flag("--svg", st.svg, "emit SVG heatmaps (sweep)");
    sub->add_option("--jobs", st.jobs, "worker pool size");
    sub->add_option("--budget", st.budget, "mesh vertex budget");
    sub->add_flag("--dump-matrices", st.dump_matrices,
                  "dump K/M in coordinate text format");
    sub->add_option("--set", st.overrides, "override config key=value");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("spectrum")) return cmd_spectrum(st);
    if (app.got_subcommand("sweep")) return cmd_sweep(st);
    if (app.got_subcommand("analyze")) return cmd_analyze(st);
    if (app.got_subcommand("mesh")) return cmd_mesh(st);
    std::fprintf(stderr, "abspec: no subcommand\n");
    return 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "abspec: config error: %s\n", e.what());
    return 1;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "abspec: precondition failure: %s\n", e.what());
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "abspec: numerical failure: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "abspec: error: %s\n", e.what());
    return 2;
  }
}
