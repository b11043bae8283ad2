#include <algorithm>

#include "cmcq/error.hpp"
#include "cmcq/ingest.hpp"
#include "detail.hpp"

namespace cmcq {
namespace {

// RFC 4180 records. Accepts LF or CRLF; blank lines are skipped.
std::vector<std::vector<std::string>> parse_csv(std::string_view s) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted_field = false;
  std::size_t i = 0;

  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    if (!(record.size() == 1 && record[0].empty() && !quoted_field)) records.push_back(std::move(record));
    record.clear();
    quoted_field = false;
  };

  while (i < s.size()) {
    const char c = s[i];
    if (c == '"' && field.empty() && !quoted_field) {
      quoted_field = true;
      ++i;
      for (;;) {
        if (i >= s.size()) throw MalformedDocument("csv: unterminated quoted field");
        if (s[i] == '"') {
          if (i + 1 < s.size() && s[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += s[i++];
      }
      if (i < s.size() && s[i] != ',' && s[i] != '\n' && s[i] != '\r')
        throw MalformedDocument("csv: text after closing quote");
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      quoted_field = false;
      ++i;
    } else if (c == '\r' || c == '\n') {
      end_record();
      if (c == '\r' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
      ++i;
    } else {
      field += c;
      ++i;
    }
  }
  if (!field.empty() || !record.empty() || quoted_field) end_record();
  return records;
}

}  // namespace

Relation make_relation(std::string name, std::vector<std::string> attributes,
                       std::vector<std::vector<Value>> rows) {
  for (const auto& r : rows)
    if (r.size() != attributes.size())
      throw RaggedRow("relation " + name + ": row of " + std::to_string(r.size()) + " fields under " +
                      std::to_string(attributes.size()) + " attributes");
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return {std::move(name), std::move(attributes), std::move(rows)};
}

Relation parse_relation_csv(std::string_view text, std::string name) {
  auto records = parse_csv(text);
  if (records.empty() || records.front().empty() ||
      (records.front().size() == 1 && records.front()[0].empty()))
    throw EmptyHeader("relation " + name + ": missing header row");
  auto header = std::move(records.front());
  records.erase(records.begin());
  return make_relation(std::move(name), std::move(header), std::move(records));
}

Relation load_relation_csv(const std::filesystem::path& path) {
  return parse_relation_csv(detail::read_file(path), path.stem().string());
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos && !field.empty()) return std::string(field);
  // Empty fields are quoted so a one-column row never reads as a blank line.
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string relation_to_csv(const Relation& relation) {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(fields[i]);
    }
    out += '\n';
  };
  line(relation.attributes);
  for (const auto& r : relation.rows) line(r);
  return out;
}

ValidatedQuery load_query(const std::filesystem::path& path) { return validate(parse_query(detail::read_file(path))); }

Database load_database(const ValidatedQuery& query, const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& source) {
    std::filesystem::path p(source);
    return p.is_absolute() ? p : base_dir / p;
  };
  Database db;
  for (const auto& atom : query.query().relations) {
    if (db.relations.count(atom.source)) continue;
    Relation r = load_relation_csv(resolve(atom.source));
    if (r.attributes.size() != atom.attributes.size())
      throw ArityMismatch("relation " + atom.name + " has " + std::to_string(atom.attributes.size()) +
                          " attributes but " + atom.source + " has " + std::to_string(r.attributes.size()) +
                          " columns");
    db.relations.emplace(atom.source, std::move(r));
  }
  for (const auto& atom : query.query().trees) {
    if (db.trees.count(atom.source)) continue;
    db.trees.emplace(atom.source, dewey_encode(load_tree(resolve(atom.source))));
  }
  return db;
}

Dictionary Dictionary::build(std::vector<Value> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  Dictionary d;
  d.values_ = std::move(values);
  return d;
}

std::optional<std::uint32_t> Dictionary::find(std::string_view value) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), value,
                             [](const Value& a, std::string_view b) { return std::string_view(a) < b; });
  if (it == values_.end() || *it != value) return std::nullopt;
  return static_cast<std::uint32_t>(it - values_.begin());
}

std::uint32_t Dictionary::id(std::string_view value) const {
  if (auto id = find(value)) return *id;
  throw UnknownAttribute("value '" + std::string(value) + "' is not in the dictionary");
}

}  // namespace cmcq
