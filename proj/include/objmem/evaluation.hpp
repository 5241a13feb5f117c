#pragma once

// Batch execution and reporting: a share-nothing worker pool over episodes,
// CSV reports recomputed from logs, and matched-seed policy comparisons.

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "objmem/config.hpp"
#include "objmem/episode.hpp"
#include "objmem/logio.hpp"
#include "objmem/metrics.hpp"

namespace objmem {

// Runs task(i) for i in [0, n) on `jobs` threads. The first exception (by
// index) is rethrown after all workers finish.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  if (threads == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline GridWorld world_for(const RunConfig& cfg, std::uint64_t world_seed) {
  if (!cfg.world_file.empty()) {
    std::ifstream in(cfg.world_file);
    if (!in) throw GenerationError("cannot read world file " + cfg.world_file);
    return read_world(in);
  }
  return generate_world(cfg.world, Vocabulary::household(), world_seed);
}

inline std::string log_filename(const EpisodeHeader& h) {
  return h.policy + "_w" + std::to_string(h.world_seed) + "_p" + std::to_string(h.policy_seed) + ".jsonl";
}

// One episode per configured seed; logs written to cfg.output_dir. Returns
// the written paths in seed order.
inline std::vector<std::string> run_all(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  std::vector<std::string> paths(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
    const auto s = seeds_for(cfg, cfg.seeds[i]);
    const GridWorld world = world_for(cfg, s.world_seed);
    const std::uint64_t world_seed = cfg.world_file.empty() ? s.world_seed : world.seed();
    auto res = run_episode(world, cfg, world_seed, s.policy_seed);
    const auto path = (std::filesystem::path(cfg.output_dir) / log_filename(res.data.header)).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_log(out, res.data, res.metrics);
    paths[i] = path;
  });
  return paths;
}

// ---------------------------------------------------------------------------
// Reports

struct ReportRow {
  std::string source;
  std::string policy;
  std::string association;
  std::uint64_t world_seed = 0;
  std::uint64_t policy_seed = 0;
  EpisodeMetrics metrics;
};

inline std::string csv_number(const std::optional<double>& v) {
  if (!v) return "NA";
  return format_double(*v);
}

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{
      "source", "policy", "association", "world_seed", "policy_seed", "steps", "decisions", "acc",
      "f1_match", "f1_new", "idsw", "frag", "entries", "objects_discovered", "cs_mean", "cs_median",
      "cs_iqr", "disagreement_mean", "consensus_f1", "baseline_f1", "corr_tokens_objects",
      "corr_tokens_suffix", "saturation_step", "scalability_pass"};
  return cols;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << join(report_columns(), ",") << '\n';
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    std::vector<std::string> f{csv_escape(r.source),
                               r.policy,
                               r.association,
                               std::to_string(r.world_seed),
                               std::to_string(r.policy_seed),
                               std::to_string(m.steps),
                               std::to_string(m.decisions),
                               csv_number(m.acc),
                               csv_number(m.f1_match),
                               csv_number(m.f1_new),
                               std::to_string(m.idsw),
                               std::to_string(m.frag),
                               std::to_string(m.entries),
                               std::to_string(m.objects_discovered),
                               csv_number(m.cs_mean),
                               csv_number(m.cs_median),
                               csv_number(m.cs_iqr),
                               csv_number(m.disagreement_mean),
                               csv_number(m.consensus_f1),
                               csv_number(m.baseline_f1),
                               csv_number(m.corr_tokens_objects),
                               csv_number(m.corr_tokens_suffix),
                               m.saturation_step ? std::to_string(*m.saturation_step) : "NA",
                               m.scalability_pass ? (*m.scalability_pass ? "1" : "0") : "NA"};
    out << join(f, ",") << '\n';
  }
}

inline void write_series_csv(std::ostream& out, const std::vector<std::pair<std::string, EpisodeData>>& logs) {
  out << "source,step,memory_tokens,entries,distinct_captions\n";
  for (const auto& [name, data] : logs) {
    for (const auto& s : data.steps) {
      out << csv_escape(name) << ',' << s.step << ',' << s.memory_tokens << ',' << s.entries << ','
          << s.distinct_captions << '\n';
    }
  }
}

// Named metric accessors used by summaries and comparisons.
inline std::optional<double> metric_value(const EpisodeMetrics& m, const std::string& name) {
  if (name == "steps") return m.steps;
  if (name == "acc") return m.acc;
  if (name == "f1_match") return m.f1_match;
  if (name == "f1_new") return m.f1_new;
  if (name == "idsw") return static_cast<double>(m.idsw);
  if (name == "frag") return static_cast<double>(m.frag);
  if (name == "entries") return static_cast<double>(m.entries);
  if (name == "objects_discovered") return static_cast<double>(m.objects_discovered);
  if (name == "cs_mean") return m.cs_mean;
  if (name == "cs_median") return m.cs_median;
  if (name == "cs_iqr") return m.cs_iqr;
  if (name == "disagreement_mean") return m.disagreement_mean;
  if (name == "consensus_f1") return m.consensus_f1;
  if (name == "baseline_f1") return m.baseline_f1;
  throw Error("unknown metric " + name);
}

inline const std::vector<std::string>& summary_metrics() {
  static const std::vector<std::string> names{"steps", "acc", "f1_match", "f1_new", "idsw", "frag", "entries",
                                              "objects_discovered", "cs_mean", "cs_median", "cs_iqr",
                                              "disagreement_mean", "consensus_f1", "baseline_f1"};
  return names;
}

// Median of every summary metric per policy, over the rows that define it.
inline void write_summary_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  std::vector<std::string> policies;
  for (const auto& r : rows) {
    if (std::find(policies.begin(), policies.end(), r.policy) == policies.end()) policies.push_back(r.policy);
  }
  out << "policy,episodes";
  for (const auto& n : summary_metrics()) out << ",median_" << n;
  out << '\n';
  for (const auto& p : policies) {
    std::size_t episodes = 0;
    for (const auto& r : rows) episodes += r.policy == p;
    out << p << ',' << episodes;
    for (const auto& n : summary_metrics()) {
      std::vector<double> v;
      for (const auto& r : rows) {
        if (r.policy != p) continue;
        if (auto x = metric_value(r.metrics, n)) v.push_back(*x);
      }
      out << ',' << (v.empty() ? std::string("NA") : format_double(median(v)));
    }
    out << '\n';
  }
}

inline ReportRow evaluate_log(const std::string& source, const EpisodeData& data) {
  ReportRow row;
  row.source = source;
  row.policy = data.header.policy;
  row.association = data.header.association;
  row.world_seed = data.header.world_seed;
  row.policy_seed = data.header.policy_seed;
  row.metrics = compute_metrics(data);
  return row;
}

inline ReportRow evaluate_log_file(const std::string& path, EpisodeData* data_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read log " + path);
  auto loaded = read_log(in);
  auto row = evaluate_log(std::filesystem::path(path).filename().string(), loaded.data);
  if (data_out) *data_out = std::move(loaded.data);
  return row;
}

// ---------------------------------------------------------------------------
// Policy comparison

struct ComparisonResult {
  std::vector<PolicyKind> policies;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<EpisodeMetrics>> metrics;  // [policy][seed]
};

inline ComparisonResult compare_policies(const RunConfig& base, const std::vector<PolicyKind>& policies,
                                         const std::string& log_dir = "") {
  ComparisonResult res;
  res.policies = policies;
  res.seeds = base.seeds;
  res.metrics.assign(policies.size(), std::vector<EpisodeMetrics>(base.seeds.size()));
  if (!log_dir.empty()) std::filesystem::create_directories(log_dir);
  const std::size_t n = policies.size() * base.seeds.size();
  parallel_for(n, base.jobs, [&](std::size_t i) {
    const std::size_t p = i / base.seeds.size();
    const std::size_t s = i % base.seeds.size();
    RunConfig cfg = base;
    cfg.policy = policies[p];
    const auto sd = seeds_for(cfg, base.seeds[s]);
    const GridWorld world = world_for(cfg, sd.world_seed);
    const std::uint64_t world_seed = cfg.world_file.empty() ? sd.world_seed : world.seed();
    auto r = run_episode(world, cfg, world_seed, sd.policy_seed, EpisodeOptions{nullptr, {}, !log_dir.empty()});
    if (!log_dir.empty()) {
      // Distinct names even when a policy is listed twice.
      const auto name = "p" + std::to_string(p) + "_" + log_filename(r.data.header);
      std::ofstream out(std::filesystem::path(log_dir) / name, std::ios::binary);
      write_log(out, r.data, r.metrics);
    }
    res.metrics[p][s] = std::move(r.metrics);
  });
  return res;
}

// Seeds on which policy a beats policy b on `metric` (strictly; higher is
// better unless `lower_is_better`).
inline std::size_t win_count(const ComparisonResult& r, std::size_t a, std::size_t b, const std::string& metric,
                             bool lower_is_better) {
  std::size_t wins = 0;
  for (std::size_t s = 0; s < r.seeds.size(); ++s) {
    const auto x = metric_value(r.metrics[a][s], metric);
    const auto y = metric_value(r.metrics[b][s], metric);
    if (!x || !y) continue;
    wins += lower_is_better ? (*x < *y) : (*x > *y);
  }
  return wins;
}

inline void write_comparison_csv(std::ostream& out, const ComparisonResult& r) {
  out << "section,seed,policy";
  for (const auto& n : summary_metrics()) out << ',' << n;
  out << '\n';
  for (std::size_t s = 0; s < r.seeds.size(); ++s) {
    for (std::size_t p = 0; p < r.policies.size(); ++p) {
      out << "seed," << r.seeds[s] << ',' << to_string(r.policies[p]);
      for (const auto& n : summary_metrics()) out << ',' << csv_number(metric_value(r.metrics[p][s], n));
      out << '\n';
    }
  }
  for (std::size_t p = 0; p < r.policies.size(); ++p) {
    out << "median,all," << to_string(r.policies[p]);
    for (const auto& n : summary_metrics()) {
      std::vector<double> v;
      for (const auto& m : r.metrics[p]) {
        if (auto x = metric_value(m, n)) v.push_back(*x);
      }
      out << ',' << (v.empty() ? std::string("NA") : format_double(median(v)));
    }
    out << '\n';
  }
  out << "\nwins,policy,versus,cs_mean_higher,disagreement_mean_lower,consensus_f1_higher\n";
  for (std::size_t a = 0; a < r.policies.size(); ++a) {
    for (std::size_t b = 0; b < r.policies.size(); ++b) {
      if (a == b) continue;
      out << "wins," << to_string(r.policies[a]) << ',' << to_string(r.policies[b]) << ','
          << win_count(r, a, b, "cs_mean", false) << ',' << win_count(r, a, b, "disagreement_mean", true) << ','
          << win_count(r, a, b, "consensus_f1", false) << '\n';
    }
  }
}

}  // namespace objmem
