#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "harvest/capr.hpp"
#include "harvest/expgen.hpp"

namespace harvest {

inline constexpr const char* kCsvHeader =
    "seed,n,k_tilde,N_z,N_eq,N_ineq_nosec,N_ineq_final,iter_sec,cpu_s,tsp_iter,tsp_cpu_s,converged,J_eur";

struct BenchConfig {
  std::vector<std::uint64_t> seeds;
  std::vector<int> variants;
  std::vector<int> k_tildes;
  int cap = 200;
  GenParams gen;  // seed is overwritten per run
};

struct BenchRow {
  std::uint64_t seed = 0;
  int n = 0;
  int k_tilde = 0;
  RunMetrics metrics;
  std::string error;  // set when the run threw; not part of the CSV
};

/// Generate, plan and record metrics for every (seed, n, k_tilde), in that nesting order.
///
/// A run that throws is recorded as a non-converged row and the sweep goes on.
/// `on_row` sees each row as soon as it is finished.
inline std::vector<BenchRow> run_benchmark(const BenchConfig& cfg,
                                           const std::function<void(const BenchRow&, const HarvestPlan*, const Instance&)>& on_row = {}) {
  std::vector<BenchRow> rows;
  if (cfg.variants.empty() || cfg.k_tildes.empty()) return rows;
  for (std::uint64_t seed : cfg.seeds) {
    GenParams gp = cfg.gen;
    gp.seed = seed;
    const Instance inst = generate_instance(gp);
    for (int n : cfg.variants)
      for (int kt : cfg.k_tildes) {
        BenchRow row;
        row.seed = seed;
        row.n = n;
        row.k_tilde = kt;
        PlanOptions o;
        o.max_sec_iterations = cfg.cap;
        try {
          const HarvestPlan p = plan(inst, n, kt, seed, o);
          row.metrics = p.metrics;
          if (on_row) on_row(row, &p, inst);
        } catch (const HarvestError& e) {
          row.metrics.converged = false;
          row.error = e.what();
          if (on_row) on_row(row, nullptr, inst);
        }
        rows.push_back(std::move(row));
      }
  }
  return rows;
}

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_num(const std::string& s, const char* col) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ValidationError(std::string("CSV column ") + col + ": cannot parse '" + s + "'");
  return v;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    os << r.seed << ',' << r.n << ',' << r.k_tilde << ',' << m.n_z << ',' << m.n_eq << ',' << m.n_ineq_nosec << ','
       << m.n_ineq_final << ',' << m.iter_sec << ',' << detail::fmt_double(m.cpu_s) << ',' << m.tsp_iter << ','
       << detail::fmt_double(m.tsp_cpu_s) << ',' << (m.converged ? 1 : 0) << ',' << detail::fmt_double(m.j_eur) << '\n';
  }
}

inline std::vector<BenchRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw ValidationError("CSV header does not match the metrics table");
  std::vector<BenchRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    if (c.size() != 13) throw ValidationError("CSV row needs 13 columns: " + line);
    BenchRow r;
    r.seed = detail::parse_num<std::uint64_t>(c[0], "seed");
    r.n = detail::parse_num<int>(c[1], "n");
    r.k_tilde = detail::parse_num<int>(c[2], "k_tilde");
    auto& m = r.metrics;
    m.n_z = detail::parse_num<long>(c[3], "N_z");
    m.n_eq = detail::parse_num<int>(c[4], "N_eq");
    m.n_ineq_nosec = detail::parse_num<int>(c[5], "N_ineq_nosec");
    m.n_ineq_final = detail::parse_num<int>(c[6], "N_ineq_final");
    m.iter_sec = detail::parse_num<int>(c[7], "iter_sec");
    m.cpu_s = detail::parse_num<double>(c[8], "cpu_s");
    m.tsp_iter = detail::parse_num<int>(c[9], "tsp_iter");
    m.tsp_cpu_s = detail::parse_num<double>(c[10], "tsp_cpu_s");
    m.converged = detail::parse_num<int>(c[11], "converged") != 0;
    m.j_eur = detail::parse_num<double>(c[12], "J_eur");
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Column means of one (n, k_tilde) block.
struct BenchSummary {
  int n = 0;
  int k_tilde = 0;
  int runs = 0;
  double n_z = 0, n_eq = 0, n_ineq_nosec = 0, n_ineq_final = 0, iter_sec = 0, cpu_s = 0, tsp_iter = 0, tsp_cpu_s = 0;
  double j_eur = std::numeric_limits<double>::quiet_NaN();  // mean over runs with a plan
  double p_conv = 0.0;                                      // percent of converged runs
};

inline double convergence_percent(const std::vector<BenchRow>& rows) {
  if (rows.empty()) return 0.0;
  int c = 0;
  for (const auto& r : rows) c += r.metrics.converged ? 1 : 0;
  return 100.0 * c / static_cast<double>(rows.size());
}

inline std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows) {
  std::map<std::pair<int, int>, std::vector<const BenchRow*>> groups;
  for (const auto& r : rows) groups[{r.n, r.k_tilde}].push_back(&r);
  std::vector<BenchSummary> out;
  for (const auto& [key, g] : groups) {
    BenchSummary s;
    s.n = key.first;
    s.k_tilde = key.second;
    s.runs = static_cast<int>(g.size());
    double jsum = 0.0;
    int jn = 0, conv = 0;
    for (const auto* r : g) {
      const auto& m = r->metrics;
      s.n_z += m.n_z;
      s.n_eq += m.n_eq;
      s.n_ineq_nosec += m.n_ineq_nosec;
      s.n_ineq_final += m.n_ineq_final;
      s.iter_sec += m.iter_sec;
      s.cpu_s += m.cpu_s;
      s.tsp_iter += m.tsp_iter;
      s.tsp_cpu_s += m.tsp_cpu_s;
      conv += m.converged ? 1 : 0;
      if (std::isfinite(m.j_eur)) {
        jsum += m.j_eur;
        ++jn;
      }
    }
    const double k = s.runs;
    for (double* v : {&s.n_z, &s.n_eq, &s.n_ineq_nosec, &s.n_ineq_final, &s.iter_sec, &s.cpu_s, &s.tsp_iter, &s.tsp_cpu_s}) *v /= k;
    if (jn > 0) s.j_eur = jsum / jn;
    s.p_conv = 100.0 * conv / k;
    out.push_back(s);
  }
  return out;
}

inline void write_summary(std::ostream& os, const std::vector<BenchSummary>& sums) {
  os << "n,k_tilde,runs,N_z,N_eq,N_ineq_nosec,N_ineq_final,iter_sec,cpu_s,tsp_iter,tsp_cpu_s,J_eur,P_conv\n";
  for (const auto& s : sums)
    os << s.n << ',' << s.k_tilde << ',' << s.runs << ',' << s.n_z << ',' << s.n_eq << ',' << s.n_ineq_nosec << ','
       << s.n_ineq_final << ',' << s.iter_sec << ',' << s.cpu_s << ',' << s.tsp_iter << ',' << s.tsp_cpu_s << ','
       << detail::fmt_double(s.j_eur) << ',' << s.p_conv << '\n';
}

}  // namespace harvest
