#include "cmcq/report.hpp"

#include <json.hpp>

namespace cmcq {

std::string result_csv(const ResultSet& rs) {
  std::string out;
  for (std::size_t i = 0; i < rs.schema.size(); ++i) out += (i ? "," : "") + csv_escape(rs.schema[i]);
  out += '\n';
  for (const auto& row : rs.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_escape(row[i]);
    out += '\n';
  }
  return out;
}

std::string result_jsonl(const ResultSet& rs) {
  std::string out;
  for (const auto& row : rs.rows) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) j[rs.schema[i]] = row[i];
    out += j.dump() + '\n';
  }
  return out;
}

std::string metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["mode"] = m.mode;
  j["optimality_certificate"] = m.optimality_certificate;
  j["total_intermediate"] = m.total_intermediate;
  j["total_ms"] = m.total_ms;
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : m.steps) j["steps"].push_back({{"name", s.name}, {"rows", s.rows}, {"ms", s.ms}});
  return j.dump(2) + '\n';
}

std::string bound_json(const std::vector<std::pair<std::string, Bound>>& bounds) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, b] : bounds) {
    nlohmann::ordered_json e;
    e["exponent"] = to_string(b.exponent);
    nlohmann::ordered_json w = nlohmann::ordered_json::object();
    for (const auto& [var, value] : b.witness) w[var.to_string()] = to_string(value);
    e["witness"] = std::move(w);
    e["suite"] = b.suite.to_string();
    e["suites_enumerated"] = b.stats.suites_enumerated;
    e["suites_pruned_opt1"] = b.stats.suites_pruned_opt1;
    e["suites_pruned_opt2"] = b.stats.suites_pruned_opt2;
    e["suites_pruned_bound"] = b.stats.suites_pruned_bound;
    j[name] = std::move(e);
  }
  return j.dump(2) + '\n';
}

}  // namespace cmcq
