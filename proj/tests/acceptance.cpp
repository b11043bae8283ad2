// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmcq/bound.hpp"
#include "cmcq/engine.hpp"
#include "cmcq/error.hpp"
#include "cmcq/ingest.hpp"
#include "cmcq/testkit.hpp"

namespace fs = std::filesystem;
using namespace cmcq;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
};

ValidatedQuery vq(const std::string& text) { return validate(parse_query(text)); }

Rational rho3(const std::string& text, Bound* out = nullptr) {
  Bound b = compute_bound(vq(text), BoundMode::labels_only());
  if (out) *out = b;
  return b.exponent;
}

Rational witness(const Bound& b, const std::string& var) {
  auto it = b.witness.find(LPVar::label(var));
  return it == b.witness.end() ? Rational(0) : it->second;
}

// 1. Exact bound regressions, each under a second.
Outcome bound_regressions() {
  Outcome o;
  auto timed = [&](const std::string& label, const std::function<void()>& fn) {
    const auto t = Clock::now();
    fn();
    const double s = seconds_since(t);
    o.expect(s < 1.0, label + " took " + std::to_string(s) + " s");
  };
  auto check = [&](const std::string& label, const Rational& got, const Rational& want) {
    o.expect(got == want, label + ": got " + to_string(got) + ", want " + to_string(want));
  };

  timed("triangle", [&] {
    check("triangle",
          rho3("REL R1(a,b) FROM \"r1\"; REL R2(b,c) FROM \"r2\"; REL R3(a,c) FROM \"r3\"; RETURN a,b,c"),
          Rational(3, 2));
  });
  timed("descendant-only", [&] {
    check("descendant-only", rho3("TREE T FROM \"t\" MATCH :a[//:b]//:c; RETURN a,b,c"), 3);
  });
  timed("child-only", [&] { check("child-only", rho3("TREE T FROM \"t\" MATCH :a[:b/:c]/:d; RETURN a,b,c,d"), 2); });

  const std::string mixed = "TREE T FROM \"t\" MATCH :a[:b]/:c//:d;";
  timed("mixed alone", [&] { check("mixed alone", rho3(mixed + " RETURN a,b,c,d"), 2); });
  timed("mixed with R1(b,c,d)", [&] {
    Bound b;
    check("mixed with R1(b,c,d)", rho3("REL R1(b,c,d) FROM \"r1\"; " + mixed + " RETURN a,b,c,d", &b), 2);
    // Winning suite is the split one, (ii): x_a + x_b + x_c <= 1, x_d <= 1.
    bool split = b.suite.trees.size() == 2;
    Inequality abc{{LPVar::label("a"), LPVar::label("b"), LPVar::label("c")}};
    split = split && std::find(b.suite.compensations.begin(), b.suite.compensations.end(), abc) !=
                         b.suite.compensations.end();
    o.expect(split, "mixed with R1(b,c,d): winning suite is not the split suite: " + b.suite.to_string());
  });
  timed("mixed with R3(b,d), R4(a,c,d)", [&] {
    Bound b;
    check("mixed with R3,R4",
          rho3("REL R3(b,d) FROM \"r3\"; REL R4(a,c,d) FROM \"r4\"; " + mixed + " RETURN a,b,c,d", &b), 2);
    // Winning suite is the converted one, (i): x_a + x_b <= 1, x_a + x_c + x_d <= 1.
    const bool converted = b.suite.trees.size() == 1 && b.suite.compensations.empty();
    o.expect(converted, "mixed with R3,R4: winning suite is not the converted suite: " + b.suite.to_string());
  });
  timed("rho triple", [&] {
    const auto q = vq("REL R1(b,c) FROM \"r1\"; TREE T FROM \"t\" MATCH :a[:b]/:c; RETURN a,b,c");
    check("rho1", compute_bound(q, BoundMode::all_positions()).exponent, 2);
    check("rho2", compute_bound(q, BoundMode::branch_positions()).exponent, Rational(3, 2));
    check("rho3", compute_bound(q, BoundMode::labels_only()).exponent, Rational(3, 2));
  });
  timed("K1", [&] {
    const Bound b = compute_bound(validate(gadget(GadgetKind::K1, {"A", "B", "C", "D"})), BoundMode::labels_only());
    check("K1", b.exponent, 2);
    const Rational a = witness(b, "A"), bb = witness(b, "B");
    o.expect(a == bb && (a == 0 || a == 1), "K1 witness A=" + to_string(a) + " B=" + to_string(bb));
  });
  timed("K2", [&] {
    const Bound b =
        compute_bound(validate(gadget(GadgetKind::K2, {"A", "B", "C", "D", "E", "F"})), BoundMode::labels_only());
    check("K2", b.exponent, 2);
    const Rational a = witness(b, "A"), bb = witness(b, "B");
    o.expect(a == bb && (a == 0 || a == 1), "K2 witness A=" + to_string(a) + " B=" + to_string(bb));
  });
  timed("reduction m=3", [&] {
    const std::vector<Clause3> phi{{Literal{1, true}, Literal{2, false}, Literal{3, true}},
                                   {Literal{1, false}, Literal{2, true}, Literal{3, true}},
                                   {Literal{1, false}, Literal{4, true}, Literal{5, true}}};
    check("reduction m=3", compute_bound(validate(reduce_1in3sat(phi)), BoundMode::labels_only()).exponent, 6);
  });
  return o;
}

// 2. Optimizations never change the bound; they do fire.
Outcome optimization_soundness() {
  Outcome o;
  const auto t = Clock::now();
  BoundOptions on;
  BoundOptions off;
  off.opt1 = off.opt2 = false;
  off.search = BoundOptions::Search::Exhaustive;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const ValidatedQuery q = validate(random_bound_query(seed));
    for (const auto& mode : {BoundMode::labels_only(), BoundMode::all_positions()}) {
      const Rational a = compute_bound(q, mode, on).exponent;
      const Rational b = compute_bound(q, mode, off).exponent;
      o.expect(a == b, "seed " + std::to_string(seed) + " " + mode.name() + ": optimized " + to_string(a) +
                           " vs reference " + to_string(b) + " for " + print_query(q.query()));
    }
  }
  std::size_t opt1 = 0, opt2 = 0;
  for (const char* text : {"TREE T FROM \"t\" MATCH :a[:b]/:c//:d; RETURN a,b,c,d",
                           "REL R1(b,c,d) FROM \"r\"; TREE T FROM \"t\" MATCH :a[:b]/:c//:d; RETURN a,b,c,d",
                           "TREE T FROM \"t\" MATCH :a[:b]//:c//:d; RETURN a,b,c,d"}) {
    const auto s = compute_bound(vq(text), BoundMode::labels_only(), on).stats;
    opt1 += s.suites_pruned_opt1;
    opt2 += s.suites_pruned_opt2;
  }
  o.expect(opt1 > 0, "optimization 1 never pruned");
  o.expect(opt2 > 0, "optimization 2 never pruned");
  const double s = seconds_since(t);
  o.expect(s < 60, "took " + std::to_string(s) + " s");
  return o;
}

// 3. All four evaluators agree on random instances.
Outcome oracle_equivalence() {
  Outcome o;
  const auto t = Clock::now();
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    const Instance inst = random_instance(seed);
    const ValidatedQuery q = vq(inst.query_text);
    const Database db = to_database(inst);
    const ResultSet expect = baseline(Baseline::Naive, q, db).result;
    const ResultSet cm = cmjoin(q, db).result;
    const ResultSet sj = baseline(Baseline::SJ, q, db).result;
    const ResultSet vj = baseline(Baseline::VJ, q, db).result;
    if (!(cm == expect && sj == expect && vj == expect))
      o.expect(false, "seed " + std::to_string(seed) + " disagrees: naive " + std::to_string(expect.rows.size()) +
                          ", cmjoin " + std::to_string(cm.rows.size()) + ", sj " + std::to_string(sj.rows.size()) +
                          ", vj " + std::to_string(vj.rows.size()));
  }
  const double s = seconds_since(t);
  o.expect(s < 120, "took " + std::to_string(s) + " s");
  return o;
}

// 4. Structure-first materializes n^2, CMJoin stays within 4n.
Outcome growth_law() {
  Outcome o;
  const auto t = Clock::now();
  for (std::size_t n : {100, 400, 1600}) {
    const Instance inst = gen_family(Family::TriangleLike, n);
    const ValidatedQuery q = vq(inst.query_text);
    const Database db = to_database(inst);
    const Evaluation sj = baseline(Baseline::SJ, q, db);
    const Evaluation cm = cmjoin(q, db);
    const std::uint64_t nn = n;
    o.expect(sj.metrics.total_intermediate >= nn * nn,
             "n=" + std::to_string(n) + ": SJ total " + std::to_string(sj.metrics.total_intermediate) + " < n^2");
    o.expect(cm.metrics.total_intermediate <= 4 * nn,
             "n=" + std::to_string(n) + ": CMJoin total " + std::to_string(cm.metrics.total_intermediate) + " > 4n");
    o.expect(cm.result == sj.result, "n=" + std::to_string(n) + ": results differ");
  }
  const double s = seconds_since(t);
  o.expect(s < 60, "took " + std::to_string(s) + " s");
  return o;
}

// 5. Every family's result fits under ceil(n^rho3).
Outcome bounds_hold_on_data() {
  Outcome o;
  for (Family f : all_families())
    for (std::size_t n : {2, 4, 8}) {
      const Instance inst = gen_family(f, n);
      const std::string tag = inst.name;
      o.expect(instance_scale(inst) <= n, tag + ": instance exceeds scale");
      const ValidatedQuery q = vq(inst.query_text);
      const Rational rho = compute_bound(q, BoundMode::labels_only()).exponent;
      const std::size_t rows = cmjoin(q, to_database(inst)).result.rows.size();
      const mpz_class cap = size_bound(n, rho);
      o.expect(mpz_class(static_cast<unsigned long>(rows)) <= cap,
               tag + ": " + std::to_string(rows) + " rows > " + cap.get_str() + " = ceil(n^" + to_string(rho) + ")");
    }
  return o;
}

// 6. bound = 2m exactly for the 1-in-3 satisfiable instances.
Outcome reduction_correctness() {
  Outcome o;
  const auto t = Clock::now();
  std::size_t total = 0, wrong = 0;
  for (int m : {2, 3}) {
    for (const auto& phi : enumerate_1in3sat(m, 5)) {
      ++total;
      const bool sat = one_in_three_satisfiable(phi);
      const Rational rho = compute_bound(validate(reduce_1in3sat(phi)), BoundMode::labels_only()).exponent;
      if ((rho == 2 * m) != sat) {
        if (++wrong <= 5) {
          std::string s;
          for (const auto& c : phi) {
            s += "(";
            for (const auto& l : c) s += (l.positive ? " x" : " !x") + std::to_string(l.variable);
            s += " )";
          }
          o.notes.push_back(s + (sat ? " satisfiable" : " unsatisfiable") + ", bound " + to_string(rho));
        }
      }
    }
  }
  o.expect(wrong == 0, std::to_string(wrong) + " of " + std::to_string(total) + " instances disagree");
  const double s = seconds_since(t);
  o.expect(s < 120, "took " + std::to_string(s) + " s");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 7. Repeated CLI runs give identical bytes and step structure.
Outcome determinism() {
  Outcome o;
  const fs::path root = fs::path(CMCQ_ACCEPTANCE_DIR) / "determinism";
  fs::remove_all(root);
  write_instance(two_by_two_instance(), root / "two-by-two");
  // VJ crosses every node table before filtering (about n^4 rows on
  // TriangleLike), so the fixture stays small enough for all four algorithms.
  write_instance(gen_family(Family::TriangleLike, 12, 7), root / "triangle");
  write_instance(gen_family(Family::MixedChain, 8, 3), root / "chain");
  for (const char* fixture : {"two-by-two", "triangle", "chain"}) {
    for (const char* algo : {"cmjoin", "sj", "vj", "naive"}) {
      std::string out[2];
      nlohmann::json steps[2];
      for (int run = 0; run < 2; ++run) {
        const fs::path dir = root / fixture;
        const fs::path res = dir / (std::string(algo) + std::to_string(run) + ".csv");
        const fs::path rep = dir / (std::string(algo) + std::to_string(run) + ".json");
        const std::string cmd = std::string("\"") + CMCQ_CLI + "\" run \"" + (dir / "query.cmcq").string() +
                                "\" --algo " + algo + " --out \"" + res.string() + "\" --report \"" + rep.string() +
                                "\"";
        const int rc = std::system(cmd.c_str());
        o.expect(rc == 0, std::string(fixture) + "/" + algo + ": exit status " + std::to_string(rc));
        out[run] = slurp(res);
        const auto report = nlohmann::json::parse(slurp(rep), nullptr, false);
        if (report.is_discarded()) {
          o.expect(false, std::string(fixture) + "/" + algo + ": unreadable report");
          continue;
        }
        for (const auto& s : report["steps"]) steps[run].push_back({s["name"], s["rows"]});
        steps[run].push_back(report["total_intermediate"]);
      }
      o.expect(!out[0].empty() && out[0] == out[1], std::string(fixture) + "/" + algo + ": result bytes differ");
      o.expect(steps[0] == steps[1], std::string(fixture) + "/" + algo + ": step structure differs");
    }
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 bound regressions", bound_regressions},
      {"2 optimization soundness", optimization_soundness},
      {"3 oracle equivalence", oracle_equivalence},
      {"4 intermediate growth law", growth_law},
      {"5 bounds hold on generated data", bounds_hold_on_data},
      {"6 reduction correctness", reduction_correctness},
      {"7 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << seconds_since(t) << " s)" << std::endl;
    for (const auto& n : o.notes) std::cout << "    " << n << '\n';
    failed += !o.pass;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed\n" : "all criteria passed\n");
  return failed ? 1 : 0;
}
