#include "dominion/config.hpp"

#include "dominion/error.hpp"

#include <fstream>

namespace dominion {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) config_error(std::string("missing key '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) config_error(what + " must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) config_error(what + " must be an integer");
  return j.get<int>();
}

Matrix matrix(const json& j, const std::string& what) {
  if (j.is_number()) {
    Matrix m(1, 1);
    m(0, 0) = j.get<double>();
    return m;
  }
  if (!j.is_array() || j.empty() || !j.front().is_array())
    config_error(what + " must be a nested array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      config_error(what + " has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = number(row[static_cast<std::size_t>(c)], what + " entry");
  }
  return m;
}

std::vector<Matrix> matrices(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) config_error(what + " must be a nonempty list of matrices");
  std::vector<Matrix> out;
  for (const json& m : j) out.push_back(matrix(m, what));
  return out;
}

Vector vector(const json& j, const std::string& what) {
  if (!j.is_array()) config_error(what + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what + " entry");
  return v;
}

std::vector<Interval> intervals(const json& j) {
  if (!j.is_array()) config_error("omega must be a list of [lo, hi] pairs");
  std::vector<Interval> out;
  for (const json& p : j) {
    if (!p.is_array() || p.size() != 2) config_error("omega entries must be [lo, hi] pairs");
    out.push_back({number(p[0], "omega bound"), number(p[1], "omega bound")});
  }
  return out;
}

std::vector<std::string> strings(const json& j, const std::string& what) {
  if (!j.is_array()) config_error(what + " must be a list of expression strings");
  std::vector<std::string> out;
  for (const json& s : j) {
    if (!s.is_string()) config_error(what + " entries must be strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

SPDominanceCertificate certificate(const json& j) {
  try {
    return SPDominanceCertificate(SymMatrix(matrix(require(j, "P_r"), "P_r")),
                                  SymMatrix(matrix(require(j, "P_f"), "P_f")),
                                  number(require(j, "lambda_r"), "lambda_r"),
                                  number(require(j, "lambda_f"), "lambda_f"),
                                  number(require(j, "sigma_r"), "sigma_r"),
                                  number(require(j, "sigma_f"), "sigma_f"), integer(require(j, "p"), "p"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(std::string("invalid certificate: ") + e.what());
  }
}

HullSpec hull(const json& j) {
  HullSpec h;
  if (j.contains("entry")) {
    const json& e = j.at("entry");
    JacobianEntry entry;
    const std::string block = require(e, "block").get<std::string>();
    if (block.size() != 1 || std::string("ABCD").find(block[0]) == std::string::npos)
      config_error("hull entry block must be one of A, B, C, D");
    entry.block = block[0];
    // Config indices are 1-based like the variable names.
    entry.row = integer(require(e, "row"), "hull entry row") - 1;
    entry.col = integer(require(e, "col"), "hull entry col") - 1;
    if (entry.row < 0 || entry.col < 0) config_error("hull entry indices are 1-based");
    h.entry = entry;
  }
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    if (!b.is_array() || b.size() != 2) config_error("hull bounds must be [lo, hi]");
    h.bounds = Interval{number(b[0], "hull bound"), number(b[1], "hull bound")};
    if (h.bounds->lo > h.bounds->hi) config_error("hull bounds need lo <= hi");
  }
  if (j.contains("grid_n")) h.grid_n = integer(j.at("grid_n"), "hull grid_n");
  return h;
}

}  // namespace

int SystemConfig::n_r() const { return linear ? linear->n_r() : nonlinear->n_r(); }
int SystemConfig::n_f() const { return linear ? linear->n_f() : nonlinear->n_f(); }
double SystemConfig::eps() const { return linear ? linear->eps : nonlinear->eps(); }
std::vector<Interval> SystemConfig::omega() const { return linear ? linear->state_box() : nonlinear->omega(); }

SystemConfig SystemConfig::with_eps(double eps) const {
  SystemConfig c = *this;
  if (c.linear)
    c.linear->eps = eps;
  else
    c.nonlinear = nonlinear->with_eps(eps);
  return c;
}

SystemConfig parse_config(const json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  const int version = integer(require(j, "spec_version"), "spec_version");
  if (version != kConfigVersion) config_error("unsupported spec_version " + std::to_string(version));

  SystemConfig cfg;
  cfg.name = j.value("name", std::string("system"));
  const std::string kind = require(j, "kind").get<std::string>();
  const double eps = number(require(j, "eps"), "eps");
  if (!(eps > 0.0)) config_error("eps must be positive");

  try {
    if (kind == "linear") {
      LinearSPSystem sys;
      sys.A = matrix(require(j, "A"), "A");
      sys.B = matrix(require(j, "B"), "B");
      sys.C = matrix(require(j, "C"), "C");
      sys.D = matrix(require(j, "D"), "D");
      sys.eps = eps;
      if (j.contains("A_vertices")) sys.A_vertices = matrices(j.at("A_vertices"), "A_vertices");
      if (j.contains("D_vertices")) sys.D_vertices = matrices(j.at("D_vertices"), "D_vertices");
      if (j.contains("omega")) sys.omega = intervals(j.at("omega"));
      sys.validate();
      cfg.linear = std::move(sys);
    } else if (kind == "nonlinear") {
      const int n_r = integer(require(j, "n_r"), "n_r");
      const int n_f = integer(require(j, "n_f"), "n_f");
      std::map<std::string, double> params;
      if (j.contains("parameters")) {
        for (const auto& [k, v] : j.at("parameters").items()) params[k] = number(v, "parameter " + k);
      }
      cfg.nonlinear.emplace(n_r, n_f, strings(require(j, "f"), "f"), strings(require(j, "g"), "g"), eps,
                            intervals(require(j, "omega")), params);
    } else {
      config_error("kind must be \"linear\" or \"nonlinear\"");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(std::string("invalid system: ") + e.what());
  }

  if (j.contains("certificate")) {
    cfg.certificate = certificate(j.at("certificate"));
    if (cfg.certificate->n_r() != cfg.n_r() || cfg.certificate->n_f() != cfg.n_f())
      config_error("certificate dimensions do not match the system");
  }
  if (j.contains("hull")) cfg.hull = hull(j.at("hull"));
  if (j.contains("initial_conditions")) {
    for (const json& ic : j.at("initial_conditions")) {
      Vector v = vector(ic, "initial condition");
      if (v.size() != cfg.n_r() + cfg.n_f()) config_error("initial condition has the wrong dimension");
      cfg.initial_conditions.push_back(std::move(v));
    }
  }
  if (j.contains("epsilon_search")) {
    const json& s = j.at("epsilon_search");
    if (s.contains("eps_max")) cfg.epsilon_search.eps_max = number(s.at("eps_max"), "eps_max");
    if (s.contains("steps")) cfg.epsilon_search.steps = integer(s.at("steps"), "steps");
    if (s.contains("coupling_bound")) cfg.epsilon_search.coupling_bound = number(s.at("coupling_bound"), "coupling_bound");
  }
  if (j.contains("step")) {
    cfg.step = number(j.at("step"), "step");
    if (!(*cfg.step > 0.0)) config_error("step must be positive");
  }
  if (j.contains("equilibrium_grid")) cfg.equilibrium_grid = integer(j.at("equilibrium_grid"), "equilibrium_grid");
  return cfg;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    config_error(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json nonlinear_spring_config_json() {
  return json{
      {"spec_version", kConfigVersion},
      {"name", "nonlinear_spring"},
      {"kind", "nonlinear"},
      {"n_r", 2},
      {"n_f", 1},
      {"eps", 0.01},
      {"f", json::array({"x2", "7*tanh(x1) - 5*x1 - 5*z1"})},
      {"g", json::array({"x2 - z1"})},
      {"omega", {{-3, 3}, {-3, 3}, {-3, 3}}},
      {"certificate",
       {{"P_r", {{-5.1987, 3.6260}, {3.6260, 6.1987}}},
        {"P_f", {{1}}},
        {"lambda_r", 2},
        {"lambda_f", 0.5},
        {"sigma_r", 0.01},
        {"sigma_f", 1},
        {"p", 1}}},
      {"hull", {{"entry", {{"block", "A"}, {"row", 2}, {"col", 1}}}, {"bounds", {-5, 2}}}},
      {"initial_conditions", {{1, 1, 1}, {-1, 2, 1}, {-0.5, -2, 1}, {-2, -0.5, 1}, {0.25, 0.5, -1}}},
      {"epsilon_search", {{"eps_max", 1}, {"steps", 60}}},
  };
}

}  // namespace dominion
