// cmcq: bounds, evaluation, fixture generation and the desk-scale benchmark.

#include <CLI11.hpp>
#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cmcq/bound.hpp"
#include "cmcq/engine.hpp"
#include "cmcq/error.hpp"
#include "cmcq/ingest.hpp"
#include "cmcq/report.hpp"
#include "cmcq/testkit.hpp"

namespace fs = std::filesystem;
using namespace cmcq;

namespace {

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

Evaluation evaluate(const std::string& algo, const ValidatedQuery& q, const Database& db, const BoundOptions& bo) {
  if (algo == "cmjoin") {
    CmJoinOptions o;
    o.bound = bo;
    return cmjoin(q, db, o);
  }
  if (algo == "sj") return baseline(Baseline::SJ, q, db);
  if (algo == "vj") return baseline(Baseline::VJ, q, db);
  return baseline(Baseline::Naive, q, db);
}

struct BenchRow {
  std::string query, algo;
  std::size_t n = 0;
  std::size_t rows = 0;
  std::uint64_t total_intermediate = 0;
  double ms = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-model conjunctive queries over relations and trees"};
  app.require_subcommand(1);

  BoundOptions bo;
  bool no_opt1 = false, no_opt2 = false;

  auto* bound_cmd = app.add_subcommand("bound", "Worst-case size bound exponents");
  std::string query_path, mode = "all", out_path;
  bound_cmd->add_option("query", query_path, "query file")->required();
  bound_cmd->add_option("--mode", mode, "all|r1|r2|r3")->check(CLI::IsMember({"all", "r1", "r2", "r3"}));
  bound_cmd->add_flag("--no-opt1", no_opt1, "disable conversion-after-split pruning");
  bound_cmd->add_flag("--no-opt2", no_opt2, "disable leaf-split pruning");
  bound_cmd->add_option("--out", out_path, "write JSON here instead of stdout");

  auto* run_cmd = app.add_subcommand("run", "Evaluate a query");
  std::string algo = "cmjoin", report_path, format = "csv";
  run_cmd->add_option("query", query_path, "query file; data paths resolve against its directory")->required();
  run_cmd->add_option("--algo", algo, "cmjoin|sj|vj|naive")->check(CLI::IsMember({"cmjoin", "sj", "vj", "naive"}));
  run_cmd->add_option("--out", out_path, "result file (default stdout)");
  run_cmd->add_option("--report", report_path, "metrics JSON file");
  run_cmd->add_option("--format", format, "csv|jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  run_cmd->add_flag("--no-opt1", no_opt1);
  run_cmd->add_flag("--no-opt2", no_opt2);

  auto* gen_cmd = app.add_subcommand("gen", "Write a generated instance (CSV/XML + query.cmcq)");
  std::string family;
  std::size_t n = 4;
  std::uint64_t seed = 0;
  std::string dir;
  gen_cmd->add_option("family", family, "DescendantFan|ChildFan|MixedFan|MixedChain|TriangleLike|TwoByTwo")->required();
  gen_cmd->add_option("--n", n, "scale")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--dir", dir, "target directory")->required();
  gen_cmd->add_option("--seed", seed, "sibling-order seed");

  auto* bench_cmd = app.add_subcommand("bench", "Run {cmjoin, sj, vj} over every family and scale");
  std::vector<std::size_t> scales{2, 4, 8, 16};
  bench_cmd->add_option("--dir", dir, "fixture directory")->required();
  bench_cmd->add_option("--out", out_path, "consolidated CSV")->required();
  bench_cmd->add_option("--n", scales, "scales")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  bo.opt1 = !no_opt1;
  bo.opt2 = !no_opt2;

  try {
    if (*bound_cmd) {
      const ValidatedQuery q = load_query(query_path);
      std::vector<std::pair<std::string, Bound>> bounds;
      if (mode == "all" || mode == "r1") bounds.emplace_back("rho1", compute_bound(q, BoundMode::all_positions(), bo));
      if (mode == "all" || mode == "r2")
        bounds.emplace_back("rho2", compute_bound(q, BoundMode::branch_positions(), bo));
      if (mode == "all" || mode == "r3") bounds.emplace_back("rho3", compute_bound(q, BoundMode::labels_only(), bo));
      emit(out_path, bound_json(bounds));
    } else if (*run_cmd) {
      const ValidatedQuery q = load_query(query_path);
      const Database db = load_database(q, fs::path(query_path).parent_path());
      const Evaluation ev = evaluate(algo, q, db, bo);
      emit(out_path, format == "csv" ? result_csv(ev.result) : result_jsonl(ev.result));
      if (!report_path.empty()) emit(report_path, metrics_json(ev.metrics));
    } else if (*gen_cmd) {
      const Instance inst = family == "TwoByTwo" ? two_by_two_instance() : gen_family(parse_family(family), n, seed);
      write_instance(inst, dir);
      std::cout << inst.name << ": expected " << inst.expected_rows << " rows\n";
    } else if (*bench_cmd) {
      struct Cell {
        Family family;
        std::size_t n;
        std::string algo;
      };
      std::vector<Cell> cells;
      for (Family f : all_families())
        for (std::size_t k : scales)
          for (const char* a : {"cmjoin", "sj", "vj"}) cells.push_back({f, k, a});
      for (Family f : all_families())
        for (std::size_t k : scales) write_instance(gen_family(f, k), fs::path(dir) / gen_family(f, k).name);

      std::vector<BenchRow> rows(cells.size());
      std::vector<std::string> errors(cells.size());
      BoundOptions serial = bo;
      serial.parallel = false;
#pragma omp parallel for schedule(dynamic)
      for (std::size_t i = 0; i < cells.size(); ++i) {
        try {
          const Instance inst = gen_family(cells[i].family, cells[i].n);
          const ValidatedQuery q = validate(parse_query(inst.query_text));
          const Database db = to_database(inst);
          const Evaluation ev = evaluate(cells[i].algo, q, db, serial);
          rows[i] = {std::string(to_string(cells[i].family)), cells[i].algo, cells[i].n, ev.result.rows.size(),
                     ev.metrics.total_intermediate, ev.metrics.total_ms};
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
      for (const auto& e : errors)
        if (!e.empty()) throw Error("bench cell failed: " + e);
      std::ostringstream csv;
      csv << "query,algo,n,rows,total_intermediate,ms\n";
      for (const auto& r : rows)
        csv << r.query << ',' << r.algo << ',' << r.n << ',' << r.rows << ',' << r.total_intermediate << ','
            << r.ms << '\n';
      emit(out_path, csv.str());
    }
  } catch (const InvariantViolation& e) {
    std::cerr << "cmcq: internal invariant violated: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "cmcq: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "cmcq: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
