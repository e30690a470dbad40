#include "epslab/io.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace epslab {

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw std::invalid_argument("coefficient matrix has wrong row count");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      throw std::invalid_argument("coefficient matrix has wrong column count");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

int domain_tag(Domain d) { return d == Domain::UnitSquare ? 0 : 1; }

}  // namespace

json operator_to_json(const FirstOrderOperator& op) {
  json j;
  j["n"] = op.n;
  j["dim_V"] = op.dim_v;
  j["dim_W"] = op.dim_w;
  json coeffs = json::array();
  for (const auto& a : op.coeffs) coeffs.push_back(matrix_to_json(a));
  j["coeffs"] = std::move(coeffs);
  j["name"] = op.name;
  return j;
}

FirstOrderOperator operator_from_json(const json& j) {
  if (j.is_string()) return make_builtin(j.get<std::string>(), 2);
  if (!j.is_object()) throw std::invalid_argument("operator must be a name or an object");
  FirstOrderOperator op;
  op.n = j.at("n").get<int>();
  op.dim_v = j.at("dim_V").get<int>();
  op.dim_w = j.at("dim_W").get<int>();
  if (op.n < 1 || op.dim_v < 1 || op.dim_w < 1)
    throw std::invalid_argument("operator dimensions must be positive");
  const json& coeffs = j.at("coeffs");
  if (!coeffs.is_array() || static_cast<int>(coeffs.size()) != op.n)
    throw std::invalid_argument("expected one coefficient matrix per space dimension");
  for (const auto& a : coeffs)
    op.coeffs.push_back(matrix_from_json(a, op.dim_w, op.dim_v));
  op.name = j.value("name", std::string("custom"));
  return op;
}

json ellipticity_to_json(const EllipticityReport& r) {
  json j;
  j["elliptic"] = r.elliptic;
  j["min_singular_value"] = r.min_singular_value;
  json xi = json::array();
  for (Eigen::Index i = 0; i < r.witness_xi.size(); ++i) xi.push_back(r.witness_xi[i]);
  j["witness_xi"] = std::move(xi);
  j["samples_used"] = r.samples_used;
  return j;
}

json kk_to_json(const KKReduction& r) {
  json j;
  j["exists"] = r.exists;
  j["residual"] = r.residual;
  j["reduction"] = r.reduction ? matrix_to_json(*r.reduction) : json();
  return j;
}

json mu_report_to_json(const MuReport& r) {
  json j;
  j["pass"] = r.pass;
  j["mu"] = r.mu;
  j["lambda_est"] = r.lambda_est;
  j["Lambda_est"] = r.Lambda_est;
  j["lower_decay"] = r.lower_decay;
  j["upper_growth"] = r.upper_growth;
  j["samples"] = r.samples;
  j["reason"] = r.reason;
  auto witness = [](const MuWitness& w) {
    json wj;
    wj["ratio"] = w.ratio;
    json b = json::array(), a = json::array();
    for (Eigen::Index i = 0; i < w.b.size(); ++i) b.push_back(w.b[i]);
    for (Eigen::Index i = 0; i < w.a.size(); ++i) a.push_back(w.a[i]);
    wj["b"] = std::move(b);
    wj["a"] = std::move(a);
    return wj;
  };
  j["worst_lower"] = witness(r.worst_lower);
  j["worst_upper"] = witness(r.worst_upper);
  return j;
}

json breakdown_to_json(const EnergyBreakdown& b) {
  json j;
  j["absolutely_continuous"] = b.absolutely_continuous;
  j["singular"] = b.singular;
  j["boundary"] = b.boundary;
  j["total"] = b.total;
  return j;
}

BVPiecewise1D bv1d_from_json(const json& j) {
  BVPiecewise1D u;
  u.breakpoints = j.at("breakpoints").get<std::vector<double>>();
  u.slopes = j.at("slopes").get<std::vector<double>>();
  if (j.contains("jumps"))
    for (const auto& jj : j.at("jumps"))
      u.jumps.push_back({jj.at("x").get<double>(), jj.at("height").get<double>()});
  const auto& datum = j.at("datum");
  if (!datum.is_array() || datum.size() != 2)
    throw std::invalid_argument("datum must be [left, right]");
  u.datum_left = datum[0].get<double>();
  u.datum_right = datum[1].get<double>();
  u.trace_left = j.value("trace_left", 0.0);
  u.validate();
  return u;
}

json bv1d_to_json(const BVPiecewise1D& u) {
  json j;
  j["breakpoints"] = u.breakpoints;
  j["slopes"] = u.slopes;
  json jumps = json::array();
  for (const auto& jp : u.jumps) {
    json one;
    one["x"] = jp.x;
    one["height"] = jp.height;
    jumps.push_back(std::move(one));
  }
  j["jumps"] = std::move(jumps);
  j["datum"] = {u.datum_left, u.datum_right};
  j["trace_left"] = u.trace_left;
  return j;
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v || (v != v && back != back)) break;
  }
  return buf;
}

void write_field_csv(const std::string& path, const GridField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "x,y";
  for (int c = 0; c < field.dim(); ++c) out << ",comp" << c;
  out << "\n";
  const Grid& g = *field.grid;
  for (int node : g.active_nodes()) {
    if (!field.support[node]) continue;
    const Eigen::Vector2d x = g.pos(node);
    out << format_double(x[0]) << ',' << format_double(x[1]);
    for (int c = 0; c < field.dim(); ++c)
      out << ',' << format_double(field.values(node, c));
    out << "\n";
  }
}

void write_field_binary(const std::string& path, const GridField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const int32_t header[3] = {static_cast<int32_t>(field.grid->n()),
                             static_cast<int32_t>(field.dim()),
                             static_cast<int32_t>(domain_tag(field.grid->domain()))};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  for (Eigen::Index node = 0; node < field.values.rows(); ++node)
    for (int c = 0; c < field.dim(); ++c) {
      const double v = field.values(node, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

GridField read_field_binary(const std::string& path, GridPtr grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  int32_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in) throw std::runtime_error(path + ": truncated header");
  const int n = header[0], dim = header[1], tag = header[2];
  if (n < 3 || dim < 1 || dim > 64 || (tag != 0 && tag != 1))
    throw std::runtime_error(path + ": implausible field header");
  if (grid) {
    if (grid->n() != n || domain_tag(grid->domain()) != tag)
      throw std::runtime_error(path + ": field does not match the given grid");
  } else {
    grid = tag == 0 ? Grid::make_square(n) : Grid::make_disk(n);
  }
  GridField f;
  f.grid = grid;
  f.values.resize(n * n, dim);
  for (int node = 0; node < n * n; ++node)
    for (int c = 0; c < dim; ++c) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      if (!in) throw std::runtime_error(path + ": truncated payload");
      f.values(node, c) = v;
    }
  f.support = BoolArray::Constant(n * n, false);
  for (int node : grid->active_nodes()) f.support[node] = true;
  return f;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("csv row width does not match header");
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

json toml_scalar(const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty()) throw std::runtime_error("empty config value");
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') &&
      v.back() == v.front())
    return v.substr(1, v.size() - 2);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() + v.size()) {
    if (v.find_first_of(".eE") == std::string::npos &&
        d == static_cast<long long>(d))
      return static_cast<long long>(d);
    return d;
  }
  return v;  // bare string
}

json toml_value(const std::string& raw) {
  const std::string v = trim(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw std::runtime_error("unterminated array value");
    json arr = json::array();
    std::string inner = v.substr(1, v.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (trim(item).empty()) continue;
      arr.push_back(toml_scalar(item));
    }
    return arr;
  }
  return toml_scalar(v);
}

}  // namespace

json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
  }

  json root = json::object();
  std::string section;
  std::stringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": empty key");
    json& dst = section.empty() ? root : root[section];
    dst[key] = toml_value(line.substr(eq + 1));
  }
  return root;
}

}  // namespace epslab
