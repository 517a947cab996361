#pragma once

// Monte Carlo experiment grids with a fixed CSV output contract.
//
// Each (cell, trial) job draws its instance from
// derive_seed(base_seed, {cell, trial}); rows are emitted sorted by
// (cell, trial) so the CSV bytes do not depend on the number of workers.
// Wall-clock timings are written to a separate sidecar file for the same
// reason.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hyperpart/certify.hpp"
#include "hyperpart/io.hpp"
#include "hyperpart/planted_model.hpp"
#include "hyperpart/solver.hpp"

namespace hyperpart {

enum class Task { certify, solve, lemma1, bernstein };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::certify: return "certify";
    case Task::solve: return "solve";
    case Task::lemma1: return "lemma1";
    case Task::bernstein: return "bernstein";
  }
  return "?";
}

inline Task parse_task(std::string_view s) {
  if (s == "certify") return Task::certify;
  if (s == "solve") return Task::solve;
  if (s == "lemma1") return Task::lemma1;
  if (s == "bernstein") return Task::bernstein;
  throw ParameterError("unknown task '" + std::string(s) + "'");
}

struct ExperimentGrid {
  std::vector<int> n, m{3}, r{1}, k{1};
  /// With n_auto the n list is ignored and n = r k.
  bool n_auto = false;
  std::vector<double> p{1.0}, q{0.0};
  /// When non-empty, replaces the p x q product by p = center + g/2,
  /// q = center - g/2 for each gap g.
  std::vector<double> gaps;
  double gap_center = 0.5;
  DiagonalPolicy diagonal = DiagonalPolicy::bernoulli;
  int trials = 10;
  std::uint64_t base_seed = 0;
  std::set<Task> tasks{Task::certify, Task::solve};
  std::vector<SolverMethod> methods{SolverMethod::exhaustive};
  SolverConfig solver;
  CertificateOptions certificate;
  double lemma1_c = 3.0;
  double trial_time_cap = 30.0;  ///< seconds; exceeded trials are marked failed
};

struct Cell {
  int id = 0;
  ModelParams params;
  std::optional<std::string> skip_reason;
};

inline std::vector<Cell> expand_cells(const ExperimentGrid& g) {
  std::vector<std::pair<double, double>> pq;
  if (!g.gaps.empty()) {
    for (double gap : g.gaps) pq.emplace_back(g.gap_center + gap / 2.0, g.gap_center - gap / 2.0);
  } else {
    for (double p : g.p)
      for (double q : g.q) pq.emplace_back(p, q);
  }
  std::vector<int> ns = g.n_auto ? std::vector<int>{0} : g.n;
  std::vector<Cell> cells;
  for (int n : ns)
    for (int m : g.m)
      for (int r : g.r)
        for (int k : g.k)
          for (auto [p, q] : pq) {
            Cell c;
            c.id = static_cast<int>(cells.size());
            c.params = {g.n_auto ? r * k : n, m, r, k, p, q, g.diagonal};
            if (auto v = c.params.violation()) c.skip_reason = "constraint: " + *v;
            cells.push_back(std::move(c));
          }
  return cells;
}

struct TrialRecord {
  int cell = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  ModelParams params;
  bool ok = true;
  std::string reason;
  std::optional<bool> cert_pass;
  std::optional<double> cert_margin, lambda, linf_projected;
  std::map<SolverMethod, bool> exact;
  std::optional<double> noise_spectral, lemma1_ratio;
  std::optional<double> bernstein_max_sum;
  std::optional<bool> bernstein_tail;
  // Wall times in seconds; kept out of the main CSV.
  double t_generate = 0, t_certify = 0, t_solve = 0, t_lemma1 = 0, t_bernstein = 0;
};

inline std::uint64_t trial_seed(std::uint64_t base, int cell, int trial) {
  return derive_seed(base, {static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(trial)});
}

inline TrialRecord run_trial(const ExperimentGrid& g, const Cell& cell, int trial) {
  using clock = std::chrono::steady_clock;
  TrialRecord rec;
  rec.cell = cell.id;
  rec.trial = trial;
  rec.params = cell.params;
  rec.seed = trial_seed(g.base_seed, cell.id, trial);
  const auto start = clock::now();
  auto lap = [last = start]() mutable {
    const auto now = clock::now();
    const double s = std::chrono::duration<double>(now - last).count();
    last = now;
    return s;
  };
  auto over_cap = [&] {
    return std::chrono::duration<double>(clock::now() - start).count() > g.trial_time_cap;
  };
  auto fail = [&](std::string why) {
    rec.ok = false;
    rec.reason = std::move(why);
  };
  std::vector<std::string> notes;

  try {
    const ModelInstance inst = make_instance(cell.params, rec.seed);
    rec.t_generate = lap();

    if (g.tasks.count(Task::certify)) {
      CertificateOptions co = g.certificate;
      co.spectral.seed = derive_seed(rec.seed, {static_cast<std::uint64_t>(Stream::restart)});
      const auto rep = certificate(inst, co);
      rec.cert_pass = rep.passes;
      rec.cert_margin = rep.margin;
      rec.lambda = rep.lambda;
      rec.linf_projected = rep.linf_projected;
      rec.t_certify = lap();
      if (over_cap()) fail("time_cap");
    }
    if (rec.ok && g.tasks.count(Task::solve)) {
      for (SolverMethod method : g.methods) {
        SolverConfig sc = g.solver;
        sc.method = method;
        sc.seed = derive_seed(rec.seed, {static_cast<std::uint64_t>(Stream::solver)});
        if (method == SolverMethod::exhaustive &&
            count_partitions(cell.params.n, cell.params.r, cell.params.k) > sc.exhaustive_budget) {
          notes.push_back("exhaustive_budget_exceeded");
          continue;
        }
        const auto res = solve(inst.adjacency, cell.params.r, cell.params.k, sc);
        rec.exact[method] = exactness(res.partition, inst.truth);
      }
      rec.t_solve = lap();
      if (over_cap()) fail("time_cap");
    }
    if (rec.ok && g.tasks.count(Task::lemma1)) {
      PowerIterationOptions po = g.certificate.spectral;
      po.seed = derive_seed(rec.seed, {static_cast<std::uint64_t>(Stream::restart), 1});
      const double norm = power_iteration(noise_tensor(inst), po).value;
      const double scale = concentration_scale(cell.params);
      rec.noise_spectral = norm;
      rec.lemma1_ratio = scale > 0 ? norm / scale : 0.0;
      rec.t_lemma1 = lap();
      if (over_cap()) fail("time_cap");
    }
    if (rec.ok && g.tasks.count(Task::bernstein)) {
      const auto sums = neighborhood_noise_sums(inst);
      const double thr = bernstein_threshold(cell.params);
      double mx = -INFINITY;
      for (double s : sums) mx = std::max(mx, s);
      rec.bernstein_max_sum = sums.empty() ? 0.0 : mx;
      rec.bernstein_tail = !sums.empty() && mx >= thr;
      rec.t_bernstein = lap();
      if (over_cap()) fail("time_cap");
    }
  } catch (const std::exception& e) {
    std::string what = e.what();
    std::replace(what.begin(), what.end(), ',', ';');
    std::replace(what.begin(), what.end(), '\n', ' ');
    fail("error: " + what);
  }
  if (rec.ok && !notes.empty()) {
    std::string joined;
    for (const auto& s : notes) joined += (joined.empty() ? "" : ";") + s;
    rec.reason = joined;
  }
  return rec;
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "row_type", "cell", "trial", "seed", "n", "m", "r", "k", "p", "q", "diagonal", "status",
      "reason", "cert_pass", "cert_margin", "lambda", "linf_projected", "exact_exhaustive",
      "exact_local_search", "exact_conditional_gradient", "noise_spectral", "lemma1_ratio",
      "bernstein_max_sum", "bernstein_tail", "trials_ok", "cert_rate", "cert_se", "mean_margin",
      "exact_rate_exhaustive", "exact_se_exhaustive", "exact_rate_local_search",
      "exact_se_local_search", "exact_rate_conditional_gradient",
      "exact_se_conditional_gradient", "max_lemma1_ratio", "bernstein_tail_rate"};
  return cols;
}

inline std::string method_column_suffix(SolverMethod m) {
  switch (m) {
    case SolverMethod::exhaustive: return "exhaustive";
    case SolverMethod::local_search: return "local_search";
    case SolverMethod::conditional_gradient: return "conditional_gradient";
  }
  return "";
}

namespace detail {

class CsvRow {
 public:
  CsvRow() : fields_(csv_columns().size()) {}
  void set(const std::string& col, std::string value) {
    const auto& cols = csv_columns();
    const auto it = std::find(cols.begin(), cols.end(), col);
    fields_[it - cols.begin()] = std::move(value);
  }
  void set(const std::string& col, double v) { set(col, format_double(v)); }
  void set_bool(const std::string& col, bool v) { set(col, std::string(v ? "1" : "0")); }
  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < fields_.size(); ++i) out += (i ? "," : "") + fields_[i];
    return out;
  }

 private:
  std::vector<std::string> fields_;
};

inline void set_params(CsvRow& row, const ModelParams& mp) {
  row.set("n", std::to_string(mp.n));
  row.set("m", std::to_string(mp.m));
  row.set("r", std::to_string(mp.r));
  row.set("k", std::to_string(mp.k));
  row.set("p", mp.p);
  row.set("q", mp.q);
  row.set("diagonal", std::string(to_string(mp.diagonal)));
}

}  // namespace detail

/// Success rate and its standard error sqrt(rate (1 - rate) / count).
struct Rate {
  int count = 0;
  int hits = 0;
  double rate() const { return count ? static_cast<double>(hits) / count : 0.0; }
  double se() const { return count ? std::sqrt(rate() * (1.0 - rate()) / count) : 0.0; }
};

struct ExperimentOutput {
  std::string csv;
  std::string timings_csv;
};

/// Runs every (cell, trial) job on `threads` workers and renders the CSV.
inline ExperimentOutput run_grid(const ExperimentGrid& g, int threads = 1) {
  if (g.trials < 1) throw ParameterError("trials must be >= 1");
  const auto cells = expand_cells(g);
  struct Job {
    std::size_t cell;
    int trial;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (!cells[c].skip_reason)
      for (int t = 0; t < g.trials; ++t) jobs.push_back({c, t});
  std::vector<TrialRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++)
      records[j] = run_trial(g, cells[jobs[j].cell], jobs[j].trial);
  };
  const int nworkers = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < nworkers; ++w) pool.emplace_back(worker);
    worker();
  }

  std::ostringstream csv, timings;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
  csv << '\n';
  timings << "cell,trial,generate_s,certify_s,solve_s,lemma1_s,bernstein_s\n";

  const SolverMethod all_methods[] = {SolverMethod::exhaustive, SolverMethod::local_search,
                                      SolverMethod::conditional_gradient};
  std::size_t j = 0;
  for (const Cell& cell : cells) {
    if (cell.skip_reason) {
      detail::CsvRow row;
      row.set("row_type", std::string("skip"));
      row.set("cell", std::to_string(cell.id));
      detail::set_params(row, cell.params);
      row.set("status", std::string("skipped"));
      std::string why = *cell.skip_reason;
      std::replace(why.begin(), why.end(), ',', ';');
      row.set("reason", why);
      csv << row.str() << '\n';
      continue;
    }
    Rate cert, tail;
    std::map<SolverMethod, Rate> exact;
    double margin_sum = 0.0, max_ratio = -INFINITY;
    int margin_cnt = 0, ok = 0;
    for (; j < jobs.size() && jobs[j].cell == static_cast<std::size_t>(cell.id); ++j) {
      const TrialRecord& rec = records[j];
      detail::CsvRow row;
      row.set("row_type", std::string("trial"));
      row.set("cell", std::to_string(rec.cell));
      row.set("trial", std::to_string(rec.trial));
      row.set("seed", std::to_string(rec.seed));
      detail::set_params(row, rec.params);
      row.set("status", std::string(rec.ok ? "ok" : "failed"));
      row.set("reason", rec.reason);
      if (rec.cert_pass) row.set_bool("cert_pass", *rec.cert_pass);
      if (rec.cert_margin) row.set("cert_margin", *rec.cert_margin);
      if (rec.lambda) row.set("lambda", *rec.lambda);
      if (rec.linf_projected) row.set("linf_projected", *rec.linf_projected);
      for (auto [method, hit] : rec.exact)
        row.set_bool("exact_" + method_column_suffix(method), hit);
      if (rec.noise_spectral) row.set("noise_spectral", *rec.noise_spectral);
      if (rec.lemma1_ratio) row.set("lemma1_ratio", *rec.lemma1_ratio);
      if (rec.bernstein_max_sum) row.set("bernstein_max_sum", *rec.bernstein_max_sum);
      if (rec.bernstein_tail) row.set_bool("bernstein_tail", *rec.bernstein_tail);
      csv << row.str() << '\n';
      timings << rec.cell << ',' << rec.trial << ',' << rec.t_generate << ',' << rec.t_certify
              << ',' << rec.t_solve << ',' << rec.t_lemma1 << ',' << rec.t_bernstein << '\n';

      if (!rec.ok) continue;
      ++ok;
      if (rec.cert_pass) {
        ++cert.count;
        cert.hits += *rec.cert_pass;
        margin_sum += *rec.cert_margin;
        ++margin_cnt;
      }
      for (auto [method, hit] : rec.exact) {
        ++exact[method].count;
        exact[method].hits += hit;
      }
      if (rec.lemma1_ratio) max_ratio = std::max(max_ratio, *rec.lemma1_ratio);
      if (rec.bernstein_tail) {
        ++tail.count;
        tail.hits += *rec.bernstein_tail;
      }
    }
    detail::CsvRow agg;
    agg.set("row_type", std::string("aggregate"));
    agg.set("cell", std::to_string(cell.id));
    detail::set_params(agg, cell.params);
    agg.set("status", std::string("ok"));
    agg.set("trials_ok", std::to_string(ok));
    if (cert.count) {
      agg.set("cert_rate", cert.rate());
      agg.set("cert_se", cert.se());
      agg.set("mean_margin", margin_sum / margin_cnt);
    }
    for (SolverMethod method : all_methods)
      if (exact.count(method) && exact[method].count) {
        agg.set("exact_rate_" + method_column_suffix(method), exact[method].rate());
        agg.set("exact_se_" + method_column_suffix(method), exact[method].se());
      }
    if (std::isfinite(max_ratio)) agg.set("max_lemma1_ratio", max_ratio);
    if (tail.count) agg.set("bernstein_tail_rate", tail.rate());
    csv << agg.str() << '\n';
  }
  return {csv.str(), timings.str()};
}

/// Writes the CSV to `path` and the timings to `path` + ".timings.csv".
inline void write_grid_output(const ExperimentOutput& out, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << out.csv;
  std::ofstream t(path + ".timings.csv", std::ios::binary);
  if (!t) throw std::runtime_error("cannot write " + path + ".timings.csv");
  t << out.timings_csv;
}

/// Parsed CSV: header plus one field map per data row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  std::vector<std::size_t> lines;  ///< 1-based source line of each row
};

inline CsvTable parse_csv(std::istream& is) {
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    out.push_back(cur);
    return out;
  };
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ParseError("empty CSV", 1);
  ++lineno;
  t.header = split(line);
  for (const auto& required : {"row_type", "cell", "n", "m", "r", "k", "p", "q"})
    if (std::find(t.header.begin(), t.header.end(), required) == t.header.end())
      throw ParseError(std::string("missing column '") + required + "'", 1);
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != t.header.size())
      throw ParseError("expected " + std::to_string(t.header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       lineno);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < fields.size(); ++i) row[t.header[i]] = fields[i];
    t.rows.push_back(std::move(row));
    t.lines.push_back(lineno);
  }
  return t;
}

enum class SuccessMetric { automatic, certificate, exhaustive, local_search, conditional_gradient };

inline SuccessMetric parse_success_metric(std::string_view s) {
  if (s == "auto") return SuccessMetric::automatic;
  if (s == "certificate") return SuccessMetric::certificate;
  if (s == "exhaustive") return SuccessMetric::exhaustive;
  if (s == "local-search") return SuccessMetric::local_search;
  if (s == "conditional-gradient") return SuccessMetric::conditional_gradient;
  throw ParameterError("unknown success metric '" + std::string(s) + "'");
}

struct PhaseCell {
  int cell = 0;
  ModelParams params;
  std::string metric;  ///< column the success rate came from
  double success = 0.0;
  int trials = 0;
  double critical_c = 0.0;  ///< largest C with lhs >= rhs
  bool side_condition = false;
  bool predicate = false;
  bool flagged = false;
};

struct PhaseReport {
  std::vector<PhaseCell> cells;
  /// Smallest C under which no cell with success < 0.9 satisfies the
  /// predicate; empty when no cell falls below 0.9.
  std::optional<double> calibrated_c;
  double c_used = 0.0;  ///< C the predicates were evaluated at (0: limit C -> 0+)
  static constexpr double kSuccessLevel = 0.9;
};

/// Aligns per-cell success with the recovery threshold. With `c` unset, C is
/// calibrated from the data; a user-supplied C may produce flags.
inline PhaseReport phase_report(const CsvTable& table, SuccessMetric metric = SuccessMetric::automatic,
                                std::optional<double> c = std::nullopt) {
  auto num = [&](const std::map<std::string, std::string>& row, const std::string& col,
                 std::size_t line) -> double {
    const auto it = row.find(col);
    if (it == row.end() || it->second.empty())
      throw ParseError("missing value for '" + col + "'", line);
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ParseError("invalid number in '" + col + "'", line);
    }
  };
  auto has = [](const std::map<std::string, std::string>& row, const std::string& col) {
    const auto it = row.find(col);
    return it != row.end() && !it->second.empty();
  };
  const std::vector<std::pair<SuccessMetric, std::string>> metric_cols = {
      {SuccessMetric::exhaustive, "exact_rate_exhaustive"},
      {SuccessMetric::local_search, "exact_rate_local_search"},
      {SuccessMetric::conditional_gradient, "exact_rate_conditional_gradient"},
      {SuccessMetric::certificate, "cert_rate"}};

  PhaseReport rep;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::size_t line = table.lines[i];
    if (row.at("row_type") != "aggregate") continue;
    PhaseCell pc;
    pc.cell = static_cast<int>(num(row, "cell", line));
    pc.params.n = static_cast<int>(num(row, "n", line));
    pc.params.m = static_cast<int>(num(row, "m", line));
    pc.params.r = static_cast<int>(num(row, "r", line));
    pc.params.k = static_cast<int>(num(row, "k", line));
    pc.params.p = num(row, "p", line);
    pc.params.q = num(row, "q", line);
    if (has(row, "trials_ok")) pc.trials = static_cast<int>(num(row, "trials_ok", line));
    std::string col;
    for (const auto& [mm, name] : metric_cols)
      if ((metric == SuccessMetric::automatic || metric == mm) && has(row, name)) {
        col = name;
        break;
      }
    if (col.empty()) throw ParseError("no success-rate column for requested metric", line);
    pc.metric = col;
    pc.success = num(row, col, line);
    pc.critical_c = threshold_critical_c(pc.params);
    rep.cells.push_back(pc);
  }

  if (c) {
    rep.c_used = *c;
  } else {
    for (const auto& pc : rep.cells)
      if (pc.success < PhaseReport::kSuccessLevel && pc.critical_c > 0.0)
        rep.calibrated_c = std::max(rep.calibrated_c.value_or(0.0), pc.critical_c);
    // Strictly above every failing cell's critical C.
    if (rep.calibrated_c) rep.calibrated_c = std::nextafter(*rep.calibrated_c, INFINITY);
    rep.c_used = rep.calibrated_c.value_or(0.0);
  }
  for (auto& pc : rep.cells) {
    const ThresholdResult t = theorem_threshold(pc.params, rep.c_used > 0.0 ? rep.c_used : 1.0);
    pc.side_condition = t.side_condition;
    const bool ineq = rep.c_used > 0.0 ? t.lhs >= t.rhs : pc.params.p > pc.params.q;
    pc.predicate = pc.params.p > pc.params.q && ineq && t.side_condition;
    pc.flagged = pc.predicate && pc.success < PhaseReport::kSuccessLevel;
  }
  return rep;
}

inline std::string format_phase_report(const PhaseReport& rep) {
  std::ostringstream os;
  if (rep.calibrated_c)
    os << "calibrated C: " << format_double(*rep.calibrated_c) << '\n';
  else if (rep.c_used > 0.0)
    os << "C: " << format_double(rep.c_used) << '\n';
  else
    os << "calibrated C: unconstrained (no cell below " << PhaseReport::kSuccessLevel << ")\n";
  os << "cell      n  m  r  k         p         q  critical_C  side  predicate  success  metric\n";
  char buf[256];
  for (const auto& pc : rep.cells) {
    std::snprintf(buf, sizeof buf, "%4d %6d %2d %2d %2d %9.4f %9.4f %11.4g %5s %10s %8.3f  %s%s\n",
                  pc.cell, pc.params.n, pc.params.m, pc.params.r, pc.params.k, pc.params.p,
                  pc.params.q, pc.critical_c, pc.side_condition ? "yes" : "no",
                  pc.predicate ? "true" : "false", pc.success, pc.metric.c_str(),
                  pc.flagged ? "  FLAG" : "");
    os << buf;
  }
  return os.str();
}

/// Worker count from HYPERPART_THREADS, defaulting to 1.
inline int default_thread_count() {
  if (const char* env = std::getenv("HYPERPART_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 1;
}

}  // namespace hyperpart
