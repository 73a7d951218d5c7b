#include "motdual/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "motdual/errors.hpp"

namespace motdual {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

[[noreturn]] void malformed(const std::string& file, int line, const std::string& what) {
  std::ostringstream os;
  os << file << ":" << line << ": " << what;
  throw ConfigError(os.str());
}

double number(const std::string& file, int line, const std::string& cell) {
  try {
    std::size_t used = 0;
    double x = std::stod(cell, &used);
    if (used != cell.size()) malformed(file, line, "not a number: '" + cell + "'");
    return x;
  } catch (const std::logic_error&) {
    malformed(file, line, "not a number: '" + cell + "'");
  }
}

struct CsvLines {
  std::vector<std::pair<int, std::vector<std::string>>> rows;  // (line number, cells)
};

CsvLines read_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file);
  CsvLines out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.rows.push_back({n, split(t)});
  }
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file);
  return out;
}

json tree_json(const PathTree& tree) {
  return {{"N", tree.N()}, {"m", tree.max_jumps()}, {"J", tree.J()}, {"B", tree.cap()}, {"T", tree.T()}};
}

TreeConfig tree_config(const json& j, const std::string& file) {
  try {
    TreeConfig c;
    c.N = j.at("N").get<int>();
    c.max_jumps = j.at("m").get<int>();
    c.J = j.at("J").get<int>();
    c.B = j.at("B").get<double>();
    c.T = j.at("T").get<double>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(file + ": bad tree description: " + e.what());
  }
}

json parse_json(const std::string& file) {
  try {
    return json::parse(read_text_file(file));
  } catch (const json::parse_error& e) {
    throw ConfigError(file + ": " + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& file, const std::string& text) {
  auto out = open_out(file);
  out << text;
  if (!out) throw IoError("failed writing " + file);
}

std::vector<SampledPath> read_paths_csv(const std::string& file) {
  CsvLines csv = read_csv(file);
  if (csv.rows.empty()) malformed(file, 1, "empty file");
  const auto& header = csv.rows.front().second;
  bool multi;
  if (header == std::vector<std::string>{"t", "value"})
    multi = false;
  else if (header == std::vector<std::string>{"path", "t", "value"})
    multi = true;
  else
    malformed(file, csv.rows.front().first, "expected header 't,value' or 'path,t,value'");
  std::vector<std::pair<std::string, std::vector<Knot>>> groups;
  for (std::size_t r = 1; r < csv.rows.size(); ++r) {
    const auto& [line, cells] = csv.rows[r];
    if (cells.size() != (multi ? 3u : 2u)) malformed(file, line, "wrong number of columns");
    std::string id = multi ? cells[0] : "";
    Knot k{number(file, line, cells[multi ? 1 : 0]), number(file, line, cells[multi ? 2 : 1])};
    if (groups.empty() || groups.back().first != id) {
      for (const auto& g : groups)
        if (g.first == id) malformed(file, line, "rows of path '" + id + "' are not contiguous");
      groups.push_back({id, {}});
    }
    groups.back().second.push_back(k);
  }
  std::vector<SampledPath> out;
  for (auto& [id, knots] : groups) {
    try {
      out.emplace_back(std::move(knots));
    } catch (const DomainError& e) {
      throw DomainError(file + (id.empty() ? "" : " (path " + id + ")") + ": " + e.what());
    }
  }
  if (out.empty()) malformed(file, csv.rows.front().first, "no paths");
  return out;
}

void write_paths_csv(const std::string& file, const std::vector<SampledPath>& paths) {
  auto out = open_out(file);
  bool multi = paths.size() != 1;
  out << (multi ? "path,t,value\n" : "t,value\n");
  for (std::size_t i = 0; i < paths.size(); ++i)
    for (const Knot& k : paths[i].knots()) {
      if (multi) out << i << ",";
      out << fmt(k.t) << "," << fmt(k.value) << "\n";
    }
}

std::vector<GridPath> read_grid_paths_csv(const std::string& file) {
  CsvLines csv = read_csv(file);
  std::vector<GridPath> out;
  std::size_t r = 0;
  while (r < csv.rows.size()) {
    const auto& [hl, header] = csv.rows[r];
    if (header != std::vector<std::string>{"N", "T", "initial"})
      malformed(file, hl, "expected header 'N,T,initial'");
    if (r + 2 >= csv.rows.size() + 1) malformed(file, hl, "truncated grid path block");
    if (r + 1 >= csv.rows.size()) malformed(file, hl, "missing 'N,T,initial' values");
    const auto& [vl, v] = csv.rows[r + 1];
    if (v.size() != 3) malformed(file, vl, "wrong number of columns");
    GridPath g;
    double n = number(file, vl, v[0]);
    if (n != static_cast<int>(n) || n < 1) malformed(file, vl, "N must be a positive integer");
    g.N = static_cast<int>(n);
    g.T = number(file, vl, v[1]);
    g.initial = number(file, vl, v[2]);
    r += 2;
    if (r >= csv.rows.size() || csv.rows[r].second != std::vector<std::string>{"jump_time", "sign"})
      malformed(file, r < csv.rows.size() ? csv.rows[r].first : vl, "expected header 'jump_time,sign'");
    ++r;
    while (r < csv.rows.size() && csv.rows[r].second.front() != "N") {
      const auto& [jl, j] = csv.rows[r];
      if (j.size() != 2) malformed(file, jl, "wrong number of columns");
      double s = number(file, jl, j[1]);
      if (s != 1.0 && s != -1.0) malformed(file, jl, "sign must be +1 or -1");
      g.jump_times.push_back(number(file, jl, j[0]));
      g.signs.push_back(static_cast<int>(s));
      ++r;
    }
    out.push_back(std::move(g));
  }
  if (out.empty()) malformed(file, 1, "no grid paths");
  return out;
}

void write_grid_paths_csv(const std::string& file, const std::vector<GridPath>& paths) {
  auto out = open_out(file);
  for (const GridPath& g : paths) {
    out << "N,T,initial\n" << g.N << "," << fmt(g.T) << "," << fmt(g.initial) << "\n";
    out << "jump_time,sign\n";
    for (std::size_t i = 0; i < g.jump_count(); ++i)
      out << fmt(g.jump_times[i]) << "," << (g.signs[i] > 0 ? "1" : "-1") << "\n";
  }
}

Marginal read_marginal_csv(const std::string& file) {
  CsvLines csv = read_csv(file);
  if (csv.rows.empty()) malformed(file, 1, "empty file");
  const auto& header = csv.rows.front().second;
  bool atomic;
  if (header == std::vector<std::string>{"x", "weight"})
    atomic = true;
  else if (header == std::vector<std::string>{"x", "density"})
    atomic = false;
  else
    malformed(file, csv.rows.front().first, "expected header 'x,weight' or 'x,density'");
  std::vector<Atom> atoms;
  std::vector<DensityKnot> knots;
  for (std::size_t r = 1; r < csv.rows.size(); ++r) {
    const auto& [line, cells] = csv.rows[r];
    if (cells.size() != 2) malformed(file, line, "wrong number of columns");
    double x = number(file, line, cells[0]), w = number(file, line, cells[1]);
    if (atomic)
      atoms.push_back({x, w});
    else
      knots.push_back({x, w});
  }
  try {
    return atomic ? Marginal::atomic(std::move(atoms)) : Marginal::density(std::move(knots));
  } catch (const DomainError& e) {
    throw DomainError(file + ": " + e.what());
  }
}

void write_measure_json(const std::string& file, const PathTree& tree, const TreeMeasure& q) {
  json masses = json::array();
  for (int v = 0; v < tree.size(); ++v)
    if (q.mass[v] != 0.0) masses.push_back({v, q.mass[v]});
  json j = {{"kind", "tree-measure"}, {"tree", tree_json(tree)}, {"masses", masses}};
  write_text_file(file, j.dump(2) + "\n");
}

StoredMeasure read_measure_json(const std::string& file) {
  json j = parse_json(file);
  StoredMeasure s;
  s.tree = tree_config(j.at("tree"), file);
  PathTree tree = PathTree::build(s.tree);
  s.measure.mass.assign(tree.size(), 0.0);
  try {
    for (const auto& e : j.at("masses")) {
      int v = e.at(0).get<int>();
      if (v < 0 || v >= tree.size()) throw ConfigError(file + ": node index out of range");
      s.measure.mass[v] = e.at(1).get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(file + ": bad masses: " + e.what());
  }
  return s;
}

void write_certificate_json(const std::string& file, const PathTree& tree,
                            const DualCertificate& c) {
  json h = json::array();
  for (const auto& [k, v] : c.h) h.push_back({k, v});
  json gamma = json::array();
  for (std::size_t v = 0; v < c.gamma.size(); ++v)
    for (std::size_t b = 0; b < c.gamma[v].size(); ++b)
      if (c.gamma[v][b] != 0.0) gamma.push_back({v, b, c.gamma[v][b]});
  json j = {{"kind", "tree-hedge"}, {"tree", tree_json(tree)}, {"h", h},
            {"cash", c.cash},       {"lambda", c.lambda},      {"gamma", gamma}};
  write_text_file(file, j.dump(2) + "\n");
}

StoredCertificate read_certificate_json(const std::string& file) {
  json j = parse_json(file);
  StoredCertificate s;
  try {
    if (j.value("kind", "") != "tree-hedge") throw ConfigError(file + ": not a tree hedge");
    s.tree = tree_config(j.at("tree"), file);
    PathTree tree = PathTree::build(s.tree);
    for (const auto& e : j.at("h")) s.certificate.h[e.at(0).get<long>()] = e.at(1).get<double>();
    s.certificate.cash = j.at("cash").get<double>();
    s.certificate.lambda = j.at("lambda").get<double>();
    s.certificate.gamma.resize(tree.size());
    for (int v = 0; v < tree.size(); ++v) s.certificate.gamma[v].assign(tree.node(v).branches.size(), 0.0);
    for (const auto& e : j.at("gamma")) {
      std::size_t v = e.at(0).get<std::size_t>(), b = e.at(1).get<std::size_t>();
      if (v >= s.certificate.gamma.size() || b >= s.certificate.gamma[v].size())
        throw ConfigError(file + ": position index out of range");
      s.certificate.gamma[v][b] = e.at(2).get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(file + ": bad certificate: " + e.what());
  }
  return s;
}

}  // namespace motdual
