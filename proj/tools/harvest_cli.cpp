// Command-line front end: generate, plan, lease, bench, render.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harvest/harvest.hpp"

using namespace harvest;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;

/// "1..10" or "1-8" as an inclusive range, otherwise a comma list.
std::vector<long> parse_list(const std::string& text) {
  std::vector<long> out;
  if (text.empty()) return out;
  for (const std::string sep : {"..", "-"}) {
    const auto pos = text.find(sep);
    if (pos != std::string::npos && pos > 0 && text.find(',') == std::string::npos) {
      const long a = std::stol(text.substr(0, pos));
      const long b = std::stol(text.substr(pos + sep.size()));
      if (b < a) throw ValidationError("empty range " + text);
      for (long v = a; v <= b; ++v) out.push_back(v);
      return out;
    }
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string tok = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size()) throw ValidationError("not an integer: " + tok);
      out.push_back(v);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<int> parse_ids(const std::string& text) {
  std::vector<int> out;
  for (long v : parse_list(text)) out.push_back(static_cast<int>(v));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harvest planning: crop assignment with routing"};
  app.require_subcommand(1);

  GenParams gp;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Random instance");
  gen->add_option("--seed", gp.seed, "RNG seed");
  gen->add_option("--fields", gp.fields, "Number of fields L");
  gen->add_option("--depots", gp.depots, "Number of depots D");
  gen->add_option("--crops", gp.crops, "Number of crops K");
  gen->add_option("--setting", gp.revenue_setting, "Revenue setting 1 or 2");
  std::vector<double> gen_revenues;
  gen->add_option("--revenues", gen_revenues, "Base revenue per crop (EUR/ha), one per crop")->delimiter(',');
  gen->add_option("-o,--output", gen_out, "Instance JSON")->required();

  int ip = 3, clusters = 10, max_sec = 200, depot = 0;
  std::uint64_t seed = 0;
  std::string in_path, out_path, rotation, diversify, time_file, priority, leasable, cluster_file, lp_path;
  auto* pl = app.add_subcommand("plan", "Run CApR-n on an instance");
  pl->add_option("--ip", ip, "IP variant 1..8")->check(CLI::Range(1, 8));
  pl->add_option("--clusters", clusters, "Cluster count k_tilde")->check(CLI::PositiveNumber);
  pl->add_option("--seed", seed, "Clustering seed");
  pl->add_option("--max-sec-iter", max_sec, "SEC iteration cap")->check(CLI::NonNegativeNumber);
  pl->add_option("--depot", depot, "Designated depot for IP-1 and IP-5");
  pl->add_option("--rotation", rotation, "Rotation JSON {\"forbidden\": [[field, crop], ...]}");
  pl->add_option("--diversify", diversify, "Diversification JSON {\"weights\": [[...]], \"bounds\": [...]}");
  pl->add_option("--time", time_file, "Time JSON {\"speed_kmh\", \"window_h\", \"harvest_h\"}");
  pl->add_option("--priority", priority, "Priority JSON {\"triples\": [{\"crop\",\"c\",\"a\",\"b\"}]}");
  pl->add_option("--leasable", leasable, "Fields that may stay unserved, e.g. 3,7,9");
  pl->add_option("--cluster-file", cluster_file, "Clustering JSON {\"k\", \"assignment\"}");
  pl->add_option("--lp", lp_path, "Dump the final clustered model (with SEC cuts) in CPLEX LP format");
  pl->add_option("-i,--input", in_path, "Instance JSON")->required();
  pl->add_option("-o,--output", out_path, "Plan JSON")->required();

  std::string own, pro, ptl;
  auto* ls = app.add_subcommand("lease", "Renting-out and lease-taking decision");
  ls->add_option("--own", own, "Owned fields");
  ls->add_option("--pro", pro, "Owned fields that may be rented out");
  ls->add_option("--ptl", ptl, "Fields that may be taken on lease");
  ls->add_option("--ip", ip, "IP variant 1..8")->check(CLI::Range(1, 8));
  ls->add_option("--clusters", clusters, "Cluster count k_tilde")->check(CLI::PositiveNumber);
  ls->add_option("--seed", seed, "Clustering seed");
  ls->add_option("-i,--input", in_path, "Instance JSON")->required();
  ls->add_option("-o,--output", out_path, "Decision JSON")->required();

  std::string seeds = "1..10", ips = "1-8", cluster_list = "10,20", summary_path;
  GenParams bp;
  auto* bench = app.add_subcommand("bench", "Benchmark sweep, one CSV row per run");
  bench->add_option("--seeds", seeds, "Seeds, e.g. 1..10 or 1,2,3");
  bench->add_option("--ips", ips, "Variants, e.g. 1-8 or 3,7");
  bench->add_option("--clusters", cluster_list, "Cluster counts, e.g. 10,20");
  bench->add_option("--fields", bp.fields, "Fields per instance");
  bench->add_option("--depots", bp.depots, "Depots per instance");
  bench->add_option("--setting", bp.revenue_setting, "Revenue setting 1 or 2");
  bench->add_option("--max-sec-iter", max_sec, "SEC iteration cap");
  bench->add_option("--summary", summary_path, "Per-(n, k_tilde) means and P_conv");
  bench->add_option("-o,--output", out_path, "CSV table")->required();

  std::string plan_path;
  auto* rd = app.add_subcommand("render", "SVG of a plan");
  rd->add_option("-i,--input", in_path, "Instance JSON")->required();
  rd->add_option("-p,--plan", plan_path, "Plan JSON")->required();
  rd->add_option("-o,--output", out_path, "SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*gen) {
      // Without --revenues the default list is cut or repeated to K entries.
      if (!gen_revenues.empty()) gp.base_revenue_eur_per_ha = gen_revenues;
      else if (gp.crops > 0) {
        const std::vector<double> base = gp.base_revenue_eur_per_ha;
        gp.base_revenue_eur_per_ha.resize(static_cast<std::size_t>(gp.crops));
        for (std::size_t k = 0; k < gp.base_revenue_eur_per_ha.size(); ++k) gp.base_revenue_eur_per_ha[k] = base[k % base.size()];
      }
      write_json_file(gen_out, generated_instance_json(gp));
      return 0;
    }
    if (*pl) {
      const Instance inst = instance_from_json(read_json_file(in_path));
      PlanOptions o;
      o.max_sec_iterations = max_sec;
      o.designated_depot = depot;
      if (!rotation.empty()) rotation_from_json(read_json_file(rotation), o.agronomic);
      if (!diversify.empty()) diversification_from_json(read_json_file(diversify), o.agronomic);
      if (!time_file.empty()) time_from_json(read_json_file(time_file), o.agronomic);
      if (!priority.empty()) priority_from_json(read_json_file(priority), o.agronomic);
      o.leasable = parse_ids(leasable);
      if (!cluster_file.empty()) o.clusters = clustering_assignment_from_json(read_json_file(cluster_file));
      if (!lp_path.empty())
        o.on_final_model = [&](const milp::IntegerProgram& m) {
          std::ofstream f(lp_path);
          if (!f) throw ValidationError("cannot write " + lp_path);
          milp::write_lp_format(m, f);
        };
      if (clusters > static_cast<int>(inst.num_fields()))
        std::cerr << "warning: " << clusters << " clusters requested for " << inst.num_fields() << " fields; using "
                  << inst.num_fields() << '\n';
      const HarvestPlan p = plan(inst, ip, clusters, seed, o);
      write_json_file(out_path, plan_to_json(p));
      std::cout << "CApR-" << ip << " k_tilde=" << p.k_tilde << " J=" << p.profit << " EUR iter_sec=" << p.metrics.iter_sec
                << (p.converged ? "" : " (not converged)") << '\n';
      return p.converged ? 0 : kExitNotConverged;
    }
    if (*ls) {
      const Instance inst = instance_from_json(read_json_file(in_path));
      const LeasingDecision d = decide_leasing(parse_ids(own), parse_ids(pro), parse_ids(ptl), inst, ip, clusters, seed);
      write_json_file(out_path, decision_to_json(d));
      std::cout << "delta_J=" << d.delta_j << " EUR" << (d.advisory ? " (advisory only)" : "")
                << (d.negative_bound ? " (negative: select other lease candidates)" : "") << '\n';
      return 0;
    }
    if (*bench) {
      BenchConfig cfg;
      for (long s : parse_list(seeds)) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
      for (long n : parse_list(ips)) cfg.variants.push_back(static_cast<int>(n));
      for (long k : parse_list(cluster_list)) cfg.k_tildes.push_back(static_cast<int>(k));
      for (int n : cfg.variants) check_variant(n);
      cfg.cap = max_sec;
      cfg.gen = bp;
      const auto rows = run_benchmark(cfg, [](const BenchRow& r, const HarvestPlan*, const Instance&) {
        std::cerr << "seed " << r.seed << " CApR-" << r.n << " k_tilde=" << r.k_tilde << " iter_sec=" << r.metrics.iter_sec
                  << " J=" << r.metrics.j_eur << (r.error.empty() ? "" : " error: " + r.error) << '\n';
      });
      std::ofstream out(out_path);
      if (!out) throw ValidationError("cannot write " + out_path);
      write_csv(out, rows);
      if (!summary_path.empty()) {
        std::ofstream so(summary_path);
        if (!so) throw ValidationError("cannot write " + summary_path);
        write_summary(so, summarize(rows));
      }
      return 0;
    }
    if (*rd) {
      const Instance inst = instance_from_json(read_json_file(in_path));
      const HarvestPlan p = plan_from_json(read_json_file(plan_path));
      write_text(out_path, render_plan_svg(p, inst));
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: malformed number (" << e.what() << ")\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
