#include "luce/weight_spec.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "luce/error.hpp"

namespace luce::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw InvalidArgument("weight spec: field '" + field + "' " + why);
}

std::size_t require_n(const json& obj) {
  if (!obj.contains("n")) bad_field("n", "is required for this family");
  const auto& n = obj.at("n");
  if (!n.is_number_integer() || n.get<long long>() < 1) bad_field("n", "must be a positive integer");
  return static_cast<std::size_t>(n.get<long long>());
}

std::vector<double> read_list(const json& list, const std::string& field) {
  if (!list.is_array()) bad_field(field, "must be an array of numbers");
  if (list.empty()) bad_field(field, "must be nonempty");
  std::vector<double> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!list[i].is_number())
      bad_field(field + "[" + std::to_string(i) + "]", "must be a number");
    const double v = list[i].get<double>();
    if (!(v > 0.0) || !std::isfinite(v))
      bad_field(field + "[" + std::to_string(i) + "]", "must be positive and finite");
    out.push_back(v);
  }
  return out;
}

WeightVector from_json(const json& doc) {
  if (doc.is_array()) return WeightVector(read_list(doc, "weights"));
  if (!doc.is_object()) throw InvalidArgument("weight spec must be a JSON array or object");
  bool normalize_flag = false;
  if (doc.contains("normalize")) {
    if (!doc.at("normalize").is_boolean()) bad_field("normalize", "must be true or false");
    normalize_flag = doc.at("normalize").get<bool>();
  }
  auto finish = [&](WeightVector w) { return normalize_flag ? normalize(w) : w; };
  if (doc.contains("weights")) return finish(WeightVector(read_list(doc.at("weights"), "weights")));
  if (!doc.contains("family")) throw InvalidArgument("weight spec needs 'weights' or 'family'");
  if (!doc.at("family").is_string()) bad_field("family", "must be a string");
  const auto family = doc.at("family").get<std::string>();
  if (family == "uniform") return finish(uniform_weights(require_n(doc)));
  if (family == "sukhatme") {
    Orientation o = Orientation::descending;
    if (doc.contains("orientation")) {
      const auto& v = doc.at("orientation");
      if (v == "ascending")
        o = Orientation::ascending;
      else if (v != "descending")
        bad_field("orientation", "must be \"ascending\" or \"descending\"");
    }
    return finish(sukhatme_weights(require_n(doc), o));
  }
  if (family == "sukhatme-asc" || family == "linear")
    return finish(sukhatme_weights(require_n(doc), Orientation::ascending));
  if (family == "sukhatme-desc")
    return finish(sukhatme_weights(require_n(doc), Orientation::descending));
  if (family == "zipf") {
    double exponent = 1.0;
    if (doc.contains("exponent")) {
      if (!doc.at("exponent").is_number()) bad_field("exponent", "must be a number");
      exponent = doc.at("exponent").get<double>();
    }
    return finish(zipf_weights(require_n(doc), exponent));
  }
  bad_field("family", "'" + family + "' is not a finite weight family");
}

} // namespace

WeightVector parse_weight_spec(std::string_view spec) {
  std::string text(spec);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw InvalidArgument("weight spec is empty");
  if (text[first] != '[' && text[first] != '{') {
    std::ifstream in{std::filesystem::path(text)};
    if (!in) throw InvalidArgument("weight spec '" + text + "' is neither JSON nor a readable file");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("weight spec is not valid JSON: ") + e.what());
  }
  return from_json(doc);
}

bottomk::WeightSequence sequence_from_family(const std::string& family, double parameter) {
  if (family == "linear") return bottomk::linear_sequence(parameter);
  if (family == "constant") return bottomk::constant_sequence(parameter);
  if (family == "log") return bottomk::log_sequence(parameter);
  if (family == "log-loglog") return bottomk::log_loglog_sequence();
  throw InvalidArgument("family '" + family +
                        "' is not an infinite sequence family (linear, constant, log, log-loglog)");
}

const std::vector<std::string>& family_registry() {
  static const std::vector<std::string> names{"uniform", "sukhatme-asc", "sukhatme-desc", "linear",
                                              "constant", "log", "log-loglog", "zipf"};
  return names;
}

} // namespace luce::cli
