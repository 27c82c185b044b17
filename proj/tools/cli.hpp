#pragma once

// Command-line front end: generate | estimate | bench | runtime.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include "sas/bench.hpp"
#include "sas/graphon.hpp"
#include "sas/io.hpp"
#include "sas/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Raised for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TvFlags {
  std::vector<double> mu{AdmmParams{}.mu};
  std::optional<double> rho;
  double tol = AdmmParams{}.tol;
  int max_iters = AdmmParams{}.max_iters;
  std::string boundary = to_string(default_sas_tv().boundary);
  std::size_t h = 0;  // 0 = round(ln n)

  void add_to(CLI::App& app) {
    app.add_option("--h", h, "Fixed binwidth (default: round(ln n))")->check(CLI::NonNegativeNumber);
    app.add_option("--mu", mu, "TV fidelity weight (several values run a sweep in bench)")
        ->check(CLI::PositiveNumber)
        ->delimiter(',');
    app.add_option("--rho", rho, "ADMM penalty (default: 2 * mu)")->check(CLI::PositiveNumber);
    app.add_option("--tol", tol, "Relative-change stopping tolerance")->check(CLI::PositiveNumber);
    app.add_option("--max-iters", max_iters, "ADMM iteration cap")->check(CLI::PositiveNumber);
    app.add_option("--boundary", boundary, "TV boundary: neumann or periodic")
        ->check(CLI::IsMember({"neumann", "periodic"}));
  }

  SasConfig config(double mu_value) const {
    SasConfig cfg;
    cfg.binwidth = h == 0 ? BinwidthRule::log_n() : BinwidthRule::fixed(h);
    cfg.tv.mu = mu_value;
    cfg.tv.rho = rho.value_or(2.0 * mu_value);
    cfg.tv.tol = tol;
    cfg.tv.max_iters = max_iters;
    cfg.tv.boundary = parse_boundary(boundary);
    return cfg;
  }
};

inline void write_output(const std::string& path, const std::string& bytes, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << bytes;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << bytes;
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

inline std::string extension_of(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

inline std::vector<Estimator> parse_estimators(const std::vector<std::string>& names) {
  std::vector<Estimator> out;
  for (const auto& n : names) {
    try {
      out.push_back(parse_estimator(n));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

inline std::vector<int> parse_graphon_ids(const std::vector<std::string>& tokens) {
  std::vector<int> ids;
  for (const auto& t : tokens) {
    if (t == "all") {
      for (int i = 1; i <= kCatalogSize; ++i) ids.push_back(i);
      continue;
    }
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw UsageError("--graphon expects 'all' or ids in 1..10, got '" + t + "'");
    }
    if (id < 1 || id > kCatalogSize) throw UsageError("--graphon id out of range: " + t);
    ids.push_back(id);
  }
  return ids;
}

// Human-readable table: one row per graphon, "mean +- std" per estimator,
// then the per-estimator average over graphons.
inline std::string render_table(const BenchmarkSummary& s, std::size_t n, const std::vector<Estimator>& ests) {
  std::ostringstream os;
  os << "n = " << n << "\n" << std::left << std::setw(8) << "ID";
  for (const Estimator e : ests) os << std::setw(26) << to_string(e);
  os << '\n';
  std::vector<int> ids;
  for (const SummaryRow& r : s)
    if (r.n == n && std::find(ids.begin(), ids.end(), r.graphon_id) == ids.end()) ids.push_back(r.graphon_id);
  auto cell = [](double m, double sd) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e +- %.2e", m, sd);
    return std::string(buf);
  };
  for (const int id : ids) {
    os << std::setw(8) << id;
    for (const Estimator e : ests) {
      const SummaryRow* r = find_row(s, id, n, e);
      os << std::setw(26) << (r ? cell(r->mean_mse, r->std_mse) : std::string("-"));
    }
    os << '\n';
  }
  os << std::setw(8) << "Average";
  for (const Estimator e : ests) {
    double mean = 0.0, sd = 0.0;
    int count = 0;
    for (const int id : ids)
      if (const SummaryRow* r = find_row(s, id, n, e)) {
        mean += r->mean_mse;
        sd += r->std_mse;
        ++count;
      }
    os << std::setw(26) << (count ? cell(mean / count, sd / count) : std::string("-"));
  }
  os << '\n';
  return os.str();
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graphon estimation by degree sorting and total-variation smoothing", "sas"};
  app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Sample a graph from a catalog graphon and write an edge list");
  int gen_graphon = 0;
  std::size_t gen_n = 0;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--graphon", gen_graphon, "Catalog graphon id (1..10)")->required()->check(CLI::Range(1, 10));
  gen->add_option("--n", gen_n, "Number of nodes")->required()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "Output edge list (default stdout)");

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate a graphon from an edge list or a sampled graph");
  std::string est_input, est_out, est_format, est_estimator = "sas";
  std::optional<int> est_graphon;
  std::size_t est_n = 0;
  std::uint64_t est_seed = 1;
  std::size_t est_cap_mb = kDefaultMemoryCap >> 20;
  bool est_symmetrize = false, est_shuffle = false, est_full = false;
  TvFlags est_tv;
  est->add_option("--input", est_input, "SNAP-style edge list")->check(CLI::ExistingFile);
  est->add_option("--graphon", est_graphon, "Sample from this catalog graphon instead of reading --input")
      ->check(CLI::Range(1, 10));
  est->add_option("--n", est_n, "Nodes to sample with --graphon")->check(CLI::Range(std::size_t{4}, std::size_t{1} << 20));
  est->add_option("--seed", est_seed, "Seed for sampling and --shuffle");
  est->add_option("--out", est_out, "Output file for the estimate")->required();
  est->add_option("--format", est_format, "csv or pgm (default: from --out extension)")
      ->check(CLI::IsMember({"csv", "pgm"}));
  est->add_option("--estimators", est_estimator, "sas, usvt or hist")->check(CLI::IsMember({"sas", "usvt", "hist"}));
  est->add_flag("--symmetrize", est_symmetrize, "Treat edges as undirected (G_ij = G_ji)");
  est->add_flag("--shuffle", est_shuffle, "Randomly relabel nodes before estimating");
  est->add_flag("--full", est_full, "Export the n x n estimate instead of the k x k block grid (sas, hist)");
  est->add_option("--memory-cap-mb", est_cap_mb, "Adjacency memory cap in MiB");
  est_tv.add_to(*est);

  // bench
  auto* bench = app.add_subcommand("bench", "Monte-Carlo MSE table over catalog graphons");
  std::vector<std::string> bench_graphons{"all"};
  std::vector<std::size_t> bench_n{200};
  std::size_t bench_trials = 50;
  std::uint64_t bench_seed = 0;
  std::string bench_out, bench_format, bench_truth = "canonical";
  std::vector<std::string> bench_est{"sas", "usvt"};
  unsigned bench_threads = 0;
  TvFlags bench_tv;
  bench->add_option("--graphon", bench_graphons, "'all' or comma-separated ids")->delimiter(',');
  bench->add_option("--n", bench_n, "Graph sizes")->delimiter(',')->check(CLI::Range(std::size_t{4}, std::size_t{1} << 16));
  bench->add_option("--trials", bench_trials, "Trials per (graphon, n)")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_seed, "Base seed; trial t uses seed + t");
  bench->add_option("--out", bench_out, "Summary file (.csv or .json)");
  bench->add_option("--format", bench_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  bench->add_option("--estimators", bench_est, "Comma-separated: sas,usvt,hist")->delimiter(',');
  bench->add_option("--truth", bench_truth, "canonical or grid")->check(CLI::IsMember({"canonical", "grid"}));
  bench->add_option("--threads", bench_threads, "Worker threads (0 = all cores)");
  bench_tv.add_to(*bench);

  // runtime
  auto* rt = app.add_subcommand("runtime", "Mean wall time per estimator versus graph size");
  int rt_graphon = 1;
  std::vector<std::size_t> rt_sizes{200, 500, 1000};
  std::size_t rt_trials = 3;
  std::uint64_t rt_seed = 0;
  std::string rt_out;
  std::vector<std::string> rt_est{"sas", "usvt"};
  TvFlags rt_tv;
  rt->add_option("--graphon", rt_graphon, "Catalog graphon id")->check(CLI::Range(1, 10));
  rt->add_option("--n", rt_sizes, "Graph sizes")->delimiter(',')->check(CLI::Range(std::size_t{4}, std::size_t{1} << 16));
  rt->add_option("--trials", rt_trials, "Trials per size")->check(CLI::PositiveNumber);
  rt->add_option("--seed", rt_seed, "Base seed");
  rt->add_option("--out", rt_out, "CSV output (default stdout)");
  rt->add_option("--estimators", rt_est, "Comma-separated: sas,usvt,hist")->delimiter(',');
  rt_tv.add_to(*rt);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      const SampledGraph s = sample_graph(catalog_graphon(gen_graphon), gen_n, gen_seed);
      std::ostringstream os;
      write_edge_list(s.graph, os,
                      "graphon " + std::to_string(gen_graphon) + " n " + std::to_string(gen_n) + " seed " +
                          std::to_string(gen_seed));
      write_output(gen_out, os.str(), out);
      return kExitOk;
    }

    if (*est) {
      if (est_input.empty() == !est_graphon.has_value())
        throw UsageError("estimate needs exactly one of --input or --graphon");
      if (est_graphon && est_n == 0) throw UsageError("--graphon needs --n");
      if (est_tv.mu.size() != 1) throw UsageError("estimate takes a single --mu");
      std::string format = est_format.empty() ? extension_of(est_out) : est_format;
      if (format != "pgm") format = "csv";

      AdjacencyMatrix g;
      if (est_graphon) {
        g = sample_graph(catalog_graphon(*est_graphon), est_n, est_seed).graph;
      } else {
        std::ifstream in(est_input);
        if (!in) throw std::runtime_error("cannot open '" + est_input + "'");
        // Directed inputs keep out-degree rows unless --symmetrize is given.
        const EdgeList edges = parse_edge_list(in, !est_symmetrize);
        g = to_adjacency(edges, est_symmetrize, est_cap_mb << 20);
      }
      if (g.size() < 4) throw std::invalid_argument("graph has fewer than 4 nodes");
      if (est_shuffle) g = shuffle_nodes(g, est_seed);

      SasConfig cfg = est_tv.config(est_tv.mu.front());
      cfg.upsample = est_full;
      Grid w;
      const Estimator which = parse_estimator(est_estimator);
      if (which == Estimator::Sas) {
        SasResult fit = sas_estimate(g, cfg);
        w = est_full ? std::move(fit.estimate) : std::move(fit.smoothed);
      } else if (which == Estimator::Usvt) {
        w = usvt_estimate(g);
      } else {
        const std::size_t h = cfg.binwidth.resolve(g.size());
        w = est_full ? hist_only_estimate(g, h)
                     : block_histogram(apply_permutation(g, sort_permutation(empirical_degrees(g))), h);
      }
      write_output(est_out, export_grid(w, parse_grid_format(format)), out);
      err << "estimated " << g.size() << "-node graph, wrote " << w.rows() << " x " << w.cols() << " grid to " << est_out
          << '\n';
      return kExitOk;
    }

    if (*bench) {
      const std::vector<int> ids = parse_graphon_ids(bench_graphons);
      const std::vector<Estimator> ests = parse_estimators(bench_est);
      const bool sweep = bench_tv.mu.size() > 1;
      std::string format = bench_format.empty() ? extension_of(bench_out) : bench_format;
      if (format != "json") format = "csv";

      std::string csv;
      nlohmann::json json = nlohmann::json::array();
      for (const double mu : bench_tv.mu) {
        std::vector<TrialReport> all;
        for (const std::size_t n : bench_n) {
          for (const int id : ids) {
            TrialConfig tc;
            tc.graphon_id = id;
            tc.n = n;
            tc.trials = bench_trials;
            tc.estimators = ests;
            tc.base_seed = bench_seed;
            tc.sas = bench_tv.config(mu);
            tc.truth = bench_truth == "grid" ? TruthMode::MidpointGrid : TruthMode::Canonical;
            tc.threads = bench_threads;
            auto reps = run_trials(tc);
            for (const auto& r : reps)
              if (!r.ok) err << "trial failed (graphon " << r.graphon_id << ", seed " << r.seed << "): " << r.error << '\n';
            all.insert(all.end(), reps.begin(), reps.end());
          }
        }
        const BenchmarkSummary summary = summarize(all);
        if (sweep) out << "mu = " << mu << '\n';
        for (const std::size_t n : bench_n) out << render_table(summary, n, ests) << '\n';

        if (sweep) {
          // Sweep output carries a trailing mu column.
          std::istringstream lines(summary_to_csv(summary));
          std::string line;
          bool header = true;
          while (std::getline(lines, line)) {
            if (header && !csv.empty()) {
              header = false;
              continue;
            }
            csv += line + (header ? ",mu\n" : "," + format_double(mu) + "\n");
            header = false;
          }
          for (auto obj : summary_to_json(summary)) {
            obj["mu"] = mu;
            json.push_back(obj);
          }
        } else {
          csv = summary_to_csv(summary);
          json = summary_to_json(summary);
        }
      }
      if (!bench_out.empty()) write_output(bench_out, format == "json" ? json.dump(2) + "\n" : csv, out);
      return kExitOk;
    }

    if (*rt) {
      const std::vector<Estimator> ests = parse_estimators(rt_est);
      if (rt_tv.mu.size() != 1) throw UsageError("runtime takes a single --mu");
      const auto curve = runtime_curve(rt_graphon, rt_sizes, rt_trials, ests, rt_tv.config(rt_tv.mu.front()), rt_seed);
      std::string csv = "n,estimator,mean_wall_ms\n";
      for (const auto& pt : curve)
        for (const auto& [e, ms] : pt.mean_wall_ms)
          csv += std::to_string(pt.n) + ',' + std::string(to_string(e)) + ',' + format_double(ms) + '\n';
      write_output(rt_out, csv, out);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args), out, err);
}

}  // namespace sas::cli
