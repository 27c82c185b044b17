#pragma once

// Monte-Carlo trial runner and MSE summaries for the catalog graphons.

#include "sas/baselines.hpp"
#include "sas/graphon.hpp"
#include "sas/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

namespace sas {

enum class Estimator { Sas, Usvt, HistOnly };

inline std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::Sas: return "SAS";
    case Estimator::Usvt: return "USVT";
    case Estimator::HistOnly: return "HistOnly";
  }
  return "?";
}

inline Estimator parse_estimator(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "sas") return Estimator::Sas;
  if (lower == "usvt") return Estimator::Usvt;
  if (lower == "hist" || lower == "histonly" || lower == "hist_only") return Estimator::HistOnly;
  throw std::invalid_argument("unknown estimator '" + std::string(s) + "'");
}

// What each trial's estimate is compared against.
enum class TruthMode {
  Canonical,     // w at the latent positions sorted by their true degree
  MidpointGrid,  // w on the fixed midpoint grid
};

struct TrialReport {
  int graphon_id = 0;
  std::size_t n = 0;
  std::size_t h = 0;
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::Sas;
  double mse = 0.0;
  double wall_ms = 0.0;
  bool ok = true;
  std::string error;
};

struct TrialConfig {
  int graphon_id = 1;
  std::size_t n = 200;
  std::size_t trials = 1;
  std::vector<Estimator> estimators{Estimator::Sas};
  std::uint64_t base_seed = 0;
  SasConfig sas{};
  UsvtParams usvt{};
  TruthMode truth = TruthMode::Canonical;
  unsigned threads = 0;  // 0 = hardware concurrency
};

namespace detail {

inline unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(jobs, 1)));
}

// Runs job(i) for i in [0, count) on a small pool; job must be thread-safe
// and write only to slot i.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
  const unsigned workers = worker_count(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
}

template <typename F>
double time_ms(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

// Runs one sampled graph through one estimator and scores it.
inline TrialReport run_single(const Graphon& w, const SampledGraph& sample, const Grid& truth, Estimator est,
                              const TrialConfig& cfg) {
  TrialReport rep;
  rep.graphon_id = w.id.value_or(0);
  rep.n = sample.graph.size();
  rep.seed = sample.latent.seed;
  rep.estimator = est;
  try {
    Grid estimate;
    switch (est) {
      case Estimator::Sas:
        rep.h = cfg.sas.binwidth.resolve(rep.n);
        rep.wall_ms = detail::time_ms([&] { estimate = sas_estimate(sample.graph, cfg.sas).estimate; });
        break;
      case Estimator::Usvt:
        rep.wall_ms = detail::time_ms([&] { estimate = usvt_estimate(sample.graph, cfg.usvt); });
        break;
      case Estimator::HistOnly:
        rep.h = cfg.sas.binwidth.resolve(rep.n);
        rep.wall_ms = detail::time_ms([&] { estimate = hist_only_estimate(sample.graph, rep.h); });
        break;
    }
    rep.mse = mse(estimate, truth);
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.error = e.what();
  }
  return rep;
}

inline Grid trial_truth(const Graphon& w, const LatentSample& latent, TruthMode mode) {
  return mode == TruthMode::Canonical ? canonical_truth(w, latent) : discretize(w, latent.u.size());
}

// Trial t uses seed base_seed + t. Reports are ordered by (trial, estimator
// in cfg order) regardless of which worker finished first. A failing
// estimator marks its report failed; the batch continues.
inline std::vector<TrialReport> run_trials(const TrialConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("run_trials needs trials >= 1");
  if (cfg.estimators.empty()) throw std::invalid_argument("run_trials needs at least one estimator");
  const Graphon w = catalog_graphon(cfg.graphon_id);
  const std::size_t per_trial = cfg.estimators.size();
  std::vector<TrialReport> reports(cfg.trials * per_trial);

  detail::parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    const std::uint64_t seed = cfg.base_seed + t;
    try {
      const SampledGraph sample = sample_graph(w, cfg.n, seed);
      const Grid truth = trial_truth(w, sample.latent, cfg.truth);
      for (std::size_t e = 0; e < per_trial; ++e)
        reports[t * per_trial + e] = run_single(w, sample, truth, cfg.estimators[e], cfg);
    } catch (const std::exception& ex) {
      for (std::size_t e = 0; e < per_trial; ++e) {
        TrialReport& rep = reports[t * per_trial + e];
        rep = TrialReport{cfg.graphon_id, cfg.n, 0, seed, cfg.estimators[e], 0.0, 0.0, false, ex.what()};
      }
    }
  });
  return reports;
}

struct SummaryRow {
  int graphon_id = 0;
  std::size_t n = 0;
  Estimator estimator = Estimator::Sas;
  std::size_t trials = 0;
  double mean_mse = 0.0;
  double std_mse = 0.0;  // sample standard deviation (n - 1 denominator)
  double mean_wall_ms = 0.0;
};

using BenchmarkSummary = std::vector<SummaryRow>;

// Groups successful reports by (graphon, n, estimator), in that sort order.
// Sums run in report order so results do not depend on thread count.
inline BenchmarkSummary summarize(const std::vector<TrialReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("summarize: no reports");
  using Key = std::tuple<int, std::size_t, int>;
  std::map<Key, std::vector<const TrialReport*>> groups;
  for (const TrialReport& r : reports)
    if (r.ok) groups[{r.graphon_id, r.n, static_cast<int>(r.estimator)}].push_back(&r);
  if (groups.empty()) throw std::invalid_argument("summarize: every trial failed");

  BenchmarkSummary out;
  for (const auto& [key, group] : groups) {
    SummaryRow row;
    row.graphon_id = std::get<0>(key);
    row.n = std::get<1>(key);
    row.estimator = static_cast<Estimator>(std::get<2>(key));
    row.trials = group.size();
    double sum = 0.0, wall = 0.0;
    for (const TrialReport* r : group) {
      sum += r->mse;
      wall += r->wall_ms;
    }
    const auto count = static_cast<double>(group.size());
    row.mean_mse = sum / count;
    row.mean_wall_ms = wall / count;
    if (group.size() > 1) {
      double ss = 0.0;
      for (const TrialReport* r : group) ss += (r->mse - row.mean_mse) * (r->mse - row.mean_mse);
      row.std_mse = std::sqrt(ss / (count - 1.0));
    }
    out.push_back(row);
  }
  return out;
}

inline const SummaryRow* find_row(const BenchmarkSummary& s, int graphon_id, std::size_t n, Estimator e) {
  for (const SummaryRow& r : s)
    if (r.graphon_id == graphon_id && r.n == n && r.estimator == e) return &r;
  return nullptr;
}

struct RuntimePoint {
  std::size_t n = 0;
  std::map<Estimator, double> mean_wall_ms;
};

// Mean wall time per estimator and graph size. Trials run sequentially so
// timings are not perturbed by sibling workers.
inline std::vector<RuntimePoint> runtime_curve(int graphon_id, const std::vector<std::size_t>& sizes,
                                               std::size_t trials,
                                               const std::vector<Estimator>& estimators = {Estimator::Sas,
                                                                                           Estimator::Usvt},
                                               const SasConfig& sas = {}, std::uint64_t base_seed = 0) {
  if (sizes.empty()) throw std::invalid_argument("runtime_curve needs at least one size");
  if (trials < 1) throw std::invalid_argument("runtime_curve needs trials >= 1");
  const Graphon w = catalog_graphon(graphon_id);
  std::vector<RuntimePoint> out;
  for (const std::size_t n : sizes) {
    RuntimePoint pt;
    pt.n = n;
    for (std::size_t t = 0; t < trials; ++t) {
      const SampledGraph sample = sample_graph(w, n, base_seed + t);
      for (const Estimator e : estimators) {
        double ms = 0.0;
        switch (e) {
          case Estimator::Sas: ms = detail::time_ms([&] { (void)sas_estimate(sample.graph, sas); }); break;
          case Estimator::Usvt: ms = detail::time_ms([&] { (void)usvt_estimate(sample.graph); }); break;
          case Estimator::HistOnly:
            ms = detail::time_ms([&] { (void)hist_only_estimate(sample.graph, sas.binwidth.resolve(n)); });
            break;
        }
        pt.mean_wall_ms[e] += ms / static_cast<double>(trials);
      }
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace sas
