#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "l0relax/error.hpp"
#include "l0relax/instance.hpp"

namespace l0relax {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

InstanceFormat format_from_path(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return InstanceFormat::kCsv;
  if (ext == ".json") return InstanceFormat::kJson;
  throw UsageError("cannot infer instance format from '" + path.string() +
                   "' (expected .csv or .json)");
}

fs::path sidecar_path(const fs::path& csv_path) {
  fs::path out = csv_path;
  out.replace_extension(".meta.json");
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << text;
}

double parse_number(const std::string& field, std::size_t line) {
  std::size_t b = field.find_first_not_of(" \t");
  std::size_t e = field.find_last_not_of(" \t\r");
  if (b == std::string::npos) {
    throw ParseError("empty field on line " + std::to_string(line));
  }
  const std::string tok = field.substr(b, e - b + 1);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || errno == ERANGE) {
    throw ParseError("bad number '" + tok + "' on line " + std::to_string(line));
  }
  if (!std::isfinite(v)) {
    throw ParseError("non-finite value on line " + std::to_string(line));
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Params {
  double lambda = 0.0;
  double mu = 0.0;
  std::map<std::string, std::string> metadata;
};

Params params_from_json(const json& j) {
  Params p;
  if (!j.contains("lambda") || !j.contains("mu")) {
    throw ParseError("instance JSON must contain 'lambda' and 'mu'");
  }
  p.lambda = j.at("lambda").get<double>();
  p.mu = j.at("mu").get<double>();
  if (j.contains("metadata")) {
    for (const auto& [k, v] : j.at("metadata").items()) {
      p.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  return p;
}

ProblemInstance load_csv(const fs::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split(line);
    if (!header_seen) {
      header_seen = true;
      width = fields.size();
      if (width < 2) throw ParseError("CSV header must be y,x1,...,xp");
      continue;
    }
    if (fields.size() != width) {
      throw DimensionError("ragged row on line " + std::to_string(lineno) + ": " +
                           std::to_string(fields.size()) + " fields, header has " +
                           std::to_string(width));
    }
    std::vector<double> row;
    row.reserve(width);
    for (const auto& f : fields) row.push_back(parse_number(f, lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("CSV instance has no data rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(width - 1);
  Matrix x(n, p);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = rows[i][0];
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rows[i][j + 1];
  }
  const fs::path side = sidecar_path(path);
  Params params;
  if (fs::exists(side)) params = params_from_json(json::parse(read_file(side)));
  ProblemInstance inst(std::move(x), std::move(y), params.lambda, params.mu);
  inst.metadata = std::move(params.metadata);
  return inst;
}

ProblemInstance load_json(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError("invalid JSON in '" + path.string() + "': " + e.what());
  }
  Params params = params_from_json(j);
  if (!j.contains("X") || !j.contains("y")) {
    throw ParseError("instance JSON must contain 'X' and 'y'");
  }
  const auto& jx = j.at("X");
  const auto& jy = j.at("y");
  const auto n = static_cast<Eigen::Index>(jx.size());
  if (n == 0) throw DimensionError("X has no rows");
  const auto p = static_cast<Eigen::Index>(jx.at(0).size());
  Matrix x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = jx.at(i);
    if (static_cast<Eigen::Index>(row.size()) != p) {
      throw DimensionError("ragged row " + std::to_string(i) + " in X");
    }
    for (Eigen::Index k = 0; k < p; ++k) {
      if (!row.at(k).is_number()) throw ParseError("non-numeric entry in X");
      x(i, k) = row.at(k).get<double>();
    }
  }
  if (static_cast<Eigen::Index>(jy.size()) != n) {
    throw DimensionError("y has " + std::to_string(jy.size()) + " entries but X has " +
                         std::to_string(n) + " rows");
  }
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!jy.at(i).is_number()) throw ParseError("non-numeric entry in y");
    y(i) = jy.at(i).get<double>();
  }
  ProblemInstance inst(std::move(x), std::move(y), params.lambda, params.mu);
  inst.metadata = std::move(params.metadata);
  return inst;
}

std::string params_text(const ProblemInstance& inst) {
  std::string s = "\"lambda\": " + format_double(inst.lambda()) +
                  ",\n  \"mu\": " + format_double(inst.mu());
  if (!inst.metadata.empty()) {
    json meta(inst.metadata);
    s += ",\n  \"metadata\": " + meta.dump();
  }
  return s;
}

}  // namespace

ProblemInstance load_instance(const fs::path& path, InstanceFormat format) {
  if (!fs::exists(path)) throw ParseError("instance file '" + path.string() + "' does not exist");
  return format == InstanceFormat::kCsv ? load_csv(path) : load_json(path);
}

ProblemInstance load_instance(const fs::path& path) {
  return load_instance(path, format_from_path(path));
}

void save_instance(const ProblemInstance& inst, const fs::path& path, InstanceFormat format) {
  const Eigen::Index n = inst.n();
  const Eigen::Index p = inst.p();
  std::string out;
  if (format == InstanceFormat::kCsv) {
    out += "y";
    for (Eigen::Index j = 0; j < p; ++j) out += ",x" + std::to_string(j + 1);
    out += "\n";
    for (Eigen::Index i = 0; i < n; ++i) {
      out += format_double(inst.y()(i));
      for (Eigen::Index j = 0; j < p; ++j) out += "," + format_double(inst.x()(i, j));
      out += "\n";
    }
    write_file(path, out);
    write_file(sidecar_path(path), "{\n  " + params_text(inst) + "\n}\n");
    return;
  }
  out += "{\n  " + params_text(inst) + ",\n  \"X\": [\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    out += "    [";
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j) out += ", ";
      out += format_double(inst.x()(i, j));
    }
    out += i + 1 < n ? "],\n" : "]\n";
  }
  out += "  ],\n  \"y\": [";
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i) out += ", ";
    out += format_double(inst.y()(i));
  }
  out += "]\n}\n";
  write_file(path, out);
}

void save_instance(const ProblemInstance& inst, const fs::path& path) {
  save_instance(inst, path, format_from_path(path));
}

}  // namespace l0relax
