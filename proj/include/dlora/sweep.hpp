#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dlora/config.hpp"
#include "dlora/csv.hpp"
#include "dlora/engine.hpp"

namespace dlora {

struct SweepCell {
  std::string policy;
  double radius_m = 0.0;
  std::uint64_t seed = 0;
};

struct CellResult {
  SweepCell cell;
  ExperimentResult experiment;
};

inline std::vector<SweepCell> enumerate_cells(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  for (const std::string& p : spec.policies)
    for (double r : spec.radii_m)
      for (std::uint64_t s : spec.seeds) cells.push_back({p, r, s});
  return cells;
}

inline SimConfig cell_config(const SimConfig& base, const SweepCell& cell) {
  SimConfig cfg = base;
  cfg.policy = parse_policy(cell.policy);
  cfg.radius_m = cell.radius_m;
  cfg.seed = cell.seed;
  return cfg;
}

// Runs every cell on a bounded worker pool. Cells share nothing mutable and
// each derives its randomness from (seed, cell) alone, so results are
// independent of the pool size and of completion order.
inline std::vector<CellResult> run_cells(const SweepSpec& spec, unsigned jobs = 0) {
  const std::vector<SweepCell> cells = enumerate_cells(spec);
  std::vector<CellResult> results(cells.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cells.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size() || failed.load()) break;
      try {
        results[i].cell = cells[i];
        results[i].experiment = run_experiment(cell_config(spec.base, cells[i]));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        error_message = "cell (" + cells[i].policy + ", " + format_double(cells[i].radius_m) +
                        " m, seed " + std::to_string(cells[i].seed) + "): " + e.what();
        failed.store(true);
        break;
      }
    }
  };

  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failed.load()) throw std::runtime_error(error_message);
  return results;
}

// Flattens cell results into CSV rows in deterministic cell order and fills
// the utility column, min-max normalizing EE/TH over every row produced by
// this invocation (the run set being compared).
inline std::vector<ResultRow> collect_rows(const std::vector<CellResult>& results,
                                           const UtilityWeights& weights) {
  std::vector<ResultRow> rows;
  std::vector<EpisodeMetrics> metrics;
  for (const CellResult& c : results) {
    for (const EpisodeRow& e : c.experiment.rows) {
      ResultRow r;
      r.policy = c.cell.policy;
      r.radius_m = c.cell.radius_m;
      r.seed = c.cell.seed;
      r.episode = e.episode;
      r.phase = e.phase == Phase::Training ? "train" : "test";
      r.pdr = e.metrics.pdr;
      r.ee = e.metrics.ee;
      r.th = e.metrics.th;
      rows.push_back(std::move(r));
      metrics.push_back(e.metrics);
    }
  }
  fill_utilities(metrics, weights);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].utility = metrics[i].utility;
  return rows;
}

inline void write_rows_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical across reruns
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << kResultHeader << '\n';
  for (const ResultRow& r : rows) out << to_csv_line(r) << '\n';
}

// Mean +- sample std of the test-phase metrics per (policy, radius), rows
// pooled over seeds and test episodes.
inline std::string summary_table(const std::vector<ResultRow>& rows) {
  struct Key {
    std::string policy;
    double radius;
  };
  std::vector<Key> keys;
  auto key_index = [&](const ResultRow& r) -> std::size_t {
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i].policy == r.policy && keys[i].radius == r.radius_m) return i;
    keys.push_back({r.policy, r.radius_m});
    return keys.size() - 1;
  };
  std::vector<std::vector<double>> pdr, ee, th, util;
  for (const ResultRow& r : rows) {
    if (r.phase != "test") continue;
    const std::size_t i = key_index(r);
    if (i >= pdr.size()) {
      pdr.emplace_back();
      ee.emplace_back();
      th.emplace_back();
      util.emplace_back();
    }
    pdr[i].push_back(r.pdr);
    ee[i].push_back(r.ee);
    th[i].push_back(r.th);
    util[i].push_back(r.utility);
  }

  char line[256];
  std::string out;
  std::snprintf(line, sizeof(line), "%-14s %9s %5s %8s %8s %10s %10s %10s %10s %8s %8s\n", "policy",
                "radius_m", "rows", "pdr", "pdr_sd", "ee", "ee_sd", "th", "th_sd", "util",
                "util_sd");
  out += line;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const MeanStd p = mean_std(pdr[i]), e = mean_std(ee[i]), t = mean_std(th[i]),
                  u = mean_std(util[i]);
    std::snprintf(line, sizeof(line),
                  "%-14s %9.0f %5zu %8.4f %8.4f %10.2f %10.2f %10.2f %10.2f %8.4f %8.4f\n",
                  keys[i].policy.c_str(), keys[i].radius, p.n, p.mean, p.std, e.mean, e.std, t.mean,
                  t.std, u.mean, u.std);
    out += line;
  }
  return out;
}

struct SweepOutput {
  std::string csv_path;
  std::string summary_path;
  std::size_t row_count = 0;
  std::string summary_text;
};

inline SweepOutput run_sweep(const SweepSpec& spec, const std::string& out_dir, unsigned jobs = 0) {
  std::filesystem::create_directories(out_dir);
  const std::vector<CellResult> results = run_cells(spec, jobs);
  const std::vector<ResultRow> rows = collect_rows(results, spec.base.utility);

  SweepOutput out;
  out.csv_path = (std::filesystem::path(out_dir) / "results.csv").string();
  out.summary_path = (std::filesystem::path(out_dir) / "summary.txt").string();
  out.row_count = rows.size();
  out.summary_text = summary_table(rows);

  write_rows_csv(rows, out.csv_path);
  std::ofstream summary(out.summary_path, std::ios::binary);
  if (!summary) throw std::runtime_error(out.summary_path + ": cannot open for writing");
  summary << out.summary_text;
  return out;
}

}  // namespace dlora
