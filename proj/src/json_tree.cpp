// JSON documents as labeled trees, built through the SAX interface so number
// lexemes survive unchanged.

#include <json.hpp>

#include "cmcq/error.hpp"
#include "cmcq/ingest.hpp"
#include "detail.hpp"

namespace cmcq {
namespace {

// Label of the node that stands for an object or array nested in an array.
constexpr const char* kArrayItem = "#";

class TreeBuilder : public nlohmann::json_sax<nlohmann::json> {
 public:
  LabeledTree take() { return std::move(tree_); }

  bool null() override { return scalar("null"); }
  bool boolean(bool v) override { return scalar(v ? "true" : "false"); }
  bool number_integer(number_integer_t v) override { return scalar(std::to_string(v)); }
  bool number_unsigned(number_unsigned_t v) override { return scalar(std::to_string(v)); }
  bool number_float(number_float_t, const string_t& lexeme) override { return scalar(lexeme); }
  bool string(string_t& v) override { return scalar(v); }
  bool binary(binary_t&) override { return false; }

  bool start_object(std::size_t) override { return open(Frame::Object); }
  bool start_array(std::size_t) override { return open(Frame::Array); }
  bool end_object() override { return close(); }
  bool end_array() override { return close(); }

  bool key(string_t& k) override {
    stack_.back().member = tree_.add_child(stack_.back().node, k);
    return true;
  }

  bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& e) override {
    throw MalformedDocument("json offset " + std::to_string(position) + ": " + e.what());
  }

 private:
  struct Frame {
    enum Kind { Object, Array } kind;
    std::size_t node;    // receives members / elements
    std::size_t member;  // last key node of an object
  };

  // Node under which the next value hangs.
  std::size_t target() {
    if (stack_.empty()) return tree_.add_root("$");
    const Frame& f = stack_.back();
    return f.kind == Frame::Object ? f.member : f.node;
  }

  bool scalar(std::string text) {
    tree_.add_child(target(), std::move(text));
    return true;
  }

  bool open(Frame::Kind kind) {
    const bool in_array = !stack_.empty() && stack_.back().kind == Frame::Array;
    std::size_t node = target();
    if (in_array) node = tree_.add_child(node, kArrayItem);
    stack_.push_back({kind, node, 0});
    return true;
  }

  bool close() {
    stack_.pop_back();
    return true;
  }

  LabeledTree tree_;
  std::vector<Frame> stack_;
};

}  // namespace

LabeledTree parse_tree_json(std::string_view text) {
  TreeBuilder builder;
  const bool ok = nlohmann::json::sax_parse(text.begin(), text.end(), &builder);
  if (!ok) throw MalformedDocument("json: unsupported content");
  return builder.take();
}

LabeledTree load_tree_json(const std::filesystem::path& path) { return parse_tree_json(detail::read_file(path)); }

}  // namespace cmcq
