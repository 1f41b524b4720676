#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mfg/model.hpp"

namespace mfg {

namespace {

using nlohmann::json;

const json& member(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) {
    throw InvalidInput(std::string("model: missing key \"") + key + "\"");
  }
  return *it;
}

double parse_scalar(const json& doc, const char* key) {
  const json& v = member(doc, key);
  if (!v.is_number()) {
    throw InvalidInput(std::string("model: \"") + key + "\" must be a number");
  }
  return v.get<double>();
}

Vector parse_vector(const json& doc, const char* key) {
  const json& v = member(doc, key);
  if (!v.is_array() || v.empty()) {
    throw BadLength(std::string("model: \"") + key +
                    "\" must be a non-empty array of numbers");
  }
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const json& e = v[static_cast<std::size_t>(i)];
    if (!e.is_number()) {
      throw InvalidInput(std::string("model: \"") + key +
                         "\" must contain only numbers");
    }
    out[i] = e.get<double>();
  }
  return out;
}

Matrix parse_matrix(const json& doc, const char* key) {
  const json& v = member(doc, key);
  if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty()) {
    throw BadLength(std::string("model: \"") + key +
                    "\" must be a non-empty array of row arrays");
  }
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw BadLength(std::string("model: ragged rows in \"") + key + "\"");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& e = row[static_cast<std::size_t>(c)];
      if (!e.is_number()) {
        throw InvalidInput(std::string("model: \"") + key +
                           "\" must contain only numbers");
      }
      M(r, c) = e.get<double>();
    }
  }
  return M;
}

}  // namespace

MfgModel parse_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("model: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw InvalidInput("model: document root must be an object");
  }
  static const char* const kKeys[] = {"A",     "B", "A_bar", "d",    "Q",
                                      "R",     "Q_bar",     "Psi_omega",
                                      "sigma"};
  for (const auto& item : doc.items()) {
    bool known = false;
    for (const char* key : kKeys) known = known || item.key() == key;
    if (!known) {
      throw InvalidInput("model: unknown key \"" + item.key() + "\"");
    }
  }
  MfgModel mdl;
  mdl.A = parse_matrix(doc, "A");
  mdl.B = parse_matrix(doc, "B");
  mdl.A_bar = parse_matrix(doc, "A_bar");
  mdl.d = parse_vector(doc, "d");
  mdl.Q = parse_matrix(doc, "Q");
  mdl.R = parse_matrix(doc, "R");
  mdl.Q_bar = parse_matrix(doc, "Q_bar");
  mdl.Psi_omega = parse_matrix(doc, "Psi_omega");
  mdl.sigma = parse_scalar(doc, "sigma");
  mdl.validate();
  return mdl;
}

MfgModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput("model: cannot open file " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace mfg
