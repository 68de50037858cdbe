#include "cspmv/tree_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cspmv {

using nlohmann::json;

SchemaError::SchemaError(std::string field_path, const std::string& what)
    : std::runtime_error(field_path.empty() ? what : field_path + ": " + what),
      path_(std::move(field_path)) {}

double Tree::evaluate(std::span<const double, kFeatureCount> x) const {
  std::int32_t at = 0;
  while (true) {
    const TreeNode& node = nodes[at];
    if (node.feature == TreeNode::kLeaf) return node.value;
    at = x[node.feature] <= node.value ? node.left : node.right;
  }
}

std::vector<double> Prediction::probabilities() const {
  std::vector<double> p(scores.size());
  if (scores.empty()) return p;
  const double top = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    p[k] = std::exp(scores[k] - top);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

namespace {

std::string tree_path(std::size_t k, std::size_t t) {
  return "trees[" + std::to_string(k) + "][" + std::to_string(t) + "]";
}

void validate_tree(const Tree& tree, const std::string& path) {
  const auto count = static_cast<std::int32_t>(tree.nodes.size());
  if (count == 0) throw SchemaError(path + ".nodes", "tree has no nodes");
  for (std::int32_t i = 0; i < count; ++i) {
    const TreeNode& node = tree.nodes[i];
    const std::string at = path + ".nodes[" + std::to_string(i) + "]";
    if (!std::isfinite(node.value)) {
      throw SchemaError(at + (node.feature == TreeNode::kLeaf ? ".leaf" : ".threshold"),
                        "value is not finite");
    }
    if (node.feature == TreeNode::kLeaf) continue;
    if (node.feature < 0 || node.feature >= static_cast<std::int32_t>(kFeatureCount)) {
      throw SchemaError(at + ".feature", "feature index out of range");
    }
    if (node.left <= i || node.left >= count) {
      throw SchemaError(at + ".left", "child index must follow its parent");
    }
    if (node.right <= i || node.right >= count) {
      throw SchemaError(at + ".right", "child index must follow its parent");
    }
  }
}

// Records which top-level fields of an object were read completely, so a
// truncated file can be reported by the first field it lost.
class TopLevelFields : public nlohmann::json_sax<json> {
 public:
  std::set<std::string> complete;

  bool null() override { return scalar(); }
  bool boolean(bool) override { return scalar(); }
  bool number_integer(number_integer_t) override { return scalar(); }
  bool number_unsigned(number_unsigned_t) override { return scalar(); }
  bool number_float(number_float_t, const string_t&) override { return scalar(); }
  bool string(string_t&) override { return scalar(); }
  bool binary(binary_t&) override { return scalar(); }
  bool start_object(std::size_t) override { return open(); }
  bool end_object() override { return close(); }
  bool start_array(std::size_t) override { return open(); }
  bool end_array() override { return close(); }
  bool key(string_t& k) override {
    if (depth_ == 1) key_ = k;
    return true;
  }
  bool parse_error(std::size_t, const std::string&,
                   const nlohmann::detail::exception&) override {
    return false;
  }

 private:
  bool scalar() {
    if (depth_ == 1) complete.insert(key_);
    return true;
  }
  bool open() {
    ++depth_;
    return true;
  }
  bool close() {
    --depth_;
    if (depth_ == 1) complete.insert(key_);
    return true;
  }

  int depth_ = 0;
  std::string key_;
};

constexpr const char* kRequiredFields[] = {"schema_version", "feature_names",
                                           "classes", "trees"};

[[noreturn]] void report_unparseable(std::string_view text,
                                     const json::parse_error& err) {
  TopLevelFields fields;
  json::sax_parse(text, &fields);
  for (const char* name : kRequiredFields) {
    if (!fields.complete.contains(name)) {
      throw SchemaError(name, "missing or truncated field (parse stopped at byte " +
                                  std::to_string(err.byte) + ")");
    }
  }
  throw SchemaError("", std::string("malformed model file: ") + err.what());
}

const json& field(const json& obj, const std::string& name, const std::string& path) {
  const auto it = obj.find(name);
  if (it == obj.end()) {
    throw SchemaError(path.empty() ? name : path + "." + name, "missing field");
  }
  return *it;
}

std::int32_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
  return v.get<std::int32_t>();
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  return v.get<double>();
}

Tree parse_tree(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  const json& nodes = field(j, "nodes", path);
  if (!nodes.is_array()) throw SchemaError(path + ".nodes", "expected an array");
  Tree tree;
  tree.nodes.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string at = path + ".nodes[" + std::to_string(i) + "]";
    const json& n = nodes[i];
    if (!n.is_object()) throw SchemaError(at, "expected an object");
    TreeNode node;
    if (n.contains("leaf")) {
      node.value = as_number(n["leaf"], at + ".leaf");
    } else {
      node.feature = as_int(field(n, "feature", at), at + ".feature");
      node.value = as_number(field(n, "threshold", at), at + ".threshold");
      node.left = as_int(field(n, "left", at), at + ".left");
      node.right = as_int(field(n, "right", at), at + ".right");
    }
    tree.nodes.push_back(node);
  }
  return tree;
}

}  // namespace

TreeEnsembleModel::TreeEnsembleModel(std::vector<std::string> classes,
                                     std::vector<std::vector<Tree>> trees)
    : classes_(std::move(classes)), trees_(std::move(trees)) {
  if (classes_.empty()) throw SchemaError("classes", "at least one class required");
  std::set<std::string> unique(classes_.begin(), classes_.end());
  if (unique.size() != classes_.size()) {
    throw SchemaError("classes", "class labels must be unique");
  }
  if (trees_.size() != classes_.size()) {
    throw SchemaError("trees", "expected one tree list per class");
  }
  for (std::size_t k = 0; k < trees_.size(); ++k) {
    if (trees_[k].empty()) {
      throw SchemaError("trees[" + std::to_string(k) + "]",
                        "every class needs at least one tree");
    }
    for (std::size_t t = 0; t < trees_[k].size(); ++t) {
      validate_tree(trees_[k][t], tree_path(k, t));
    }
  }
}

TreeEnsembleModel::TreeEnsembleModel(const TreeEnsembleModel& other)
    : classes_(other.classes_), trees_(other.trees_) {}

TreeEnsembleModel& TreeEnsembleModel::operator=(const TreeEnsembleModel& other) {
  classes_ = other.classes_;
  trees_ = other.trees_;
  evaluations_.store(0, std::memory_order_relaxed);
  return *this;
}

TreeEnsembleModel TreeEnsembleModel::parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& err) {
    report_unparseable(json_text, err);
  }
  if (!doc.is_object()) throw SchemaError("", "model file must hold a JSON object");

  const json& version = field(doc, "schema_version", "");
  if (as_int(version, "schema_version") != kModelSchemaVersion) {
    throw SchemaError("schema_version", "unsupported schema version " + version.dump());
  }

  const json& names = field(doc, "feature_names", "");
  if (!names.is_array()) throw SchemaError("feature_names", "expected an array");
  if (names.size() != kFeatureCount) {
    throw SchemaError("feature_names", "expected " + std::to_string(kFeatureCount) +
                                           " features, got " +
                                           std::to_string(names.size()));
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!names[i].is_string() || names[i].get<std::string>() != kFeatureNames[i]) {
      throw SchemaError("feature_names[" + std::to_string(i) + "]",
                        "expected '" + std::string(kFeatureNames[i]) + "'");
    }
  }

  const json& cls = field(doc, "classes", "");
  if (!cls.is_array()) throw SchemaError("classes", "expected an array");
  std::vector<std::string> classes;
  for (std::size_t k = 0; k < cls.size(); ++k) {
    if (!cls[k].is_string()) {
      throw SchemaError("classes[" + std::to_string(k) + "]", "expected a string");
    }
    classes.push_back(cls[k].get<std::string>());
  }

  const json& tr = field(doc, "trees", "");
  if (!tr.is_array()) throw SchemaError("trees", "expected an array");
  std::vector<std::vector<Tree>> trees(tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const std::string path = "trees[" + std::to_string(k) + "]";
    if (!tr[k].is_array()) throw SchemaError(path, "expected an array");
    for (std::size_t t = 0; t < tr[k].size(); ++t) {
      trees[k].push_back(parse_tree(tr[k][t], tree_path(k, t)));
    }
  }
  return TreeEnsembleModel(std::move(classes), std::move(trees));
}

TreeEnsembleModel TreeEnsembleModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("", "cannot open model file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse(text.str());
  } catch (const SchemaError& e) {
    throw SchemaError(e.field_path(), path.filename().string() + ": " +
                                          std::string(e.what()));
  }
}

std::string TreeEnsembleModel::to_json() const {
  json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["feature_names"] = json::array();
  for (auto name : kFeatureNames) doc["feature_names"].push_back(std::string(name));
  doc["classes"] = classes_;
  doc["trees"] = json::array();
  for (const auto& per_class : trees_) {
    json list = json::array();
    for (const Tree& tree : per_class) {
      json nodes = json::array();
      for (const TreeNode& n : tree.nodes) {
        if (n.feature == TreeNode::kLeaf) {
          nodes.push_back({{"leaf", n.value}});
        } else {
          nodes.push_back({{"feature", n.feature},
                           {"threshold", n.value},
                           {"left", n.left},
                           {"right", n.right}});
        }
      }
      list.push_back({{"nodes", std::move(nodes)}});
    }
    doc["trees"].push_back(std::move(list));
  }
  return doc.dump(1);
}

TreeEnsembleModel TreeEnsembleModel::constant(std::string label) {
  Tree leaf;
  leaf.nodes.push_back(TreeNode{});
  return TreeEnsembleModel({std::move(label)}, {{leaf}});
}

Prediction TreeEnsembleModel::predict(const FeatureVector& f) const {
  const auto x = f.as_array();
  return predict(std::span<const double, kFeatureCount>(x));
}

Prediction TreeEnsembleModel::predict(std::span<const double, kFeatureCount> x) const {
  evaluations_.fetch_add(1, std::memory_order_relaxed);
  Prediction p;
  p.scores.assign(classes_.size(), 0.0);
  for (std::size_t k = 0; k < trees_.size(); ++k) {
    double sum = 0.0;
    for (const Tree& tree : trees_[k]) sum += tree.evaluate(x);
    p.scores[k] = sum;
  }
  // First maximum wins ties.
  p.class_index = static_cast<std::size_t>(
      std::max_element(p.scores.begin(), p.scores.end()) - p.scores.begin());
  p.label = classes_[p.class_index];
  return p;
}

}  // namespace cspmv
