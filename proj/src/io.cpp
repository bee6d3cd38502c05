#include "bans/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "bans/errors.hpp"

namespace bans::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

bool parse_long(const std::string& s, long& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtol(s.c_str(), &end, 10);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

bool is_missing(const std::string& s) {
  const std::string l = lower(s);
  return l.empty() || l == "na" || l == "nan" || l == "null" || l == "?";
}

std::vector<std::string> data_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::PathError, "cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

int column_of(const std::vector<std::string>& header, std::initializer_list<const char*> names, int fallback) {
  for (std::size_t i = 0; i < header.size(); ++i)
    for (const char* n : names)
      if (lower(header[i]) == n) return static_cast<int>(i);
  return fallback;
}

Vertex lookup(const std::map<std::string, Vertex>& index, const std::string& name, const fs::path& path) {
  auto it = index.find(name);
  if (it == index.end()) fail(ErrorCode::ParseError, path.string() + ": unknown vertex '" + name + "'");
  return it->second;
}

Edge make_edge(Vertex src, Vertex dst, EdgeKind kind) {
  return kind == EdgeKind::Directed ? Edge::directed(src, dst) : Edge::undirected(src, dst);
}

struct EdgeColumns {
  int src, dst, kind;
};

EdgeColumns edge_columns(const Table& t) {
  return {column_of(t.header, {"src", "from", "source"}, 0), column_of(t.header, {"dst", "to", "target"}, 1),
          column_of(t.header, {"kind", "type"}, 2)};
}

bool is_kind(const std::string& s) {
  try {
    parse_kind(s);
    return true;
  } catch (const Error&) {
    return false;
  }
}

// The first row is a header unless its third field already names an edge kind.
Table read_edge_table(const fs::path& path) {
  Table t = read_table(path, '\t', false);
  if (!t.rows.empty() && !(t.rows[0].size() >= 3 && is_kind(t.rows[0][2]))) {
    t.header = std::move(t.rows.front());
    t.rows.erase(t.rows.begin());
  }
  return t;
}

const std::string& field(const std::vector<std::string>& row, int col, const fs::path& path) {
  if (col < 0 || static_cast<std::size_t>(col) >= row.size())
    fail(ErrorCode::ParseError, path.string() + ": row has too few fields");
  return row[static_cast<std::size_t>(col)];
}

}  // namespace

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

Table read_table(const fs::path& path, char delim, bool has_header) {
  Table t;
  const auto lines = data_lines(path);
  std::size_t i = 0;
  if (has_header) {
    if (lines.empty()) fail(ErrorCode::ParseError, path.string() + ": missing header");
    t.header = split(lines[0], delim);
    i = 1;
  }
  for (; i < lines.size(); ++i) t.rows.push_back(split(lines[i], delim));
  return t;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

TextFile::TextFile(const std::string& manifest_id) { text_ = "# manifest_id=" + manifest_id + "\n"; }

TextFile& TextFile::line(const std::string& s) {
  text_ += s;
  text_ += '\n';
  return *this;
}

TextFile& TextFile::row(std::span<const std::string> fields, char delim) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_ += delim;
    text_ += fields[i];
  }
  text_ += '\n';
  return *this;
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorCode::PathError, "cannot create " + path.parent_path().string());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::PathError, "cannot write " + path.string());
    out << contents;
    if (!out) fail(ErrorCode::PathError, "write failed for " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::PathError, "cannot move output into " + path.string());
}

std::vector<LayerEntry> read_layer_map(const fs::path& path) {
  const Table t = read_table(path, '\t', false);
  std::vector<LayerEntry> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    if (row.size() < 2) fail(ErrorCode::ParseError, path.string() + ": expected name and layer index");
    long layer = 0;
    if (!parse_long(row[1], layer)) {
      if (i == 0) continue;  // header
      fail(ErrorCode::ParseError, path.string() + ": layer index '" + row[1] + "' is not an integer");
    }
    out.push_back({row[0], layer});
  }
  std::set<std::string> seen;
  for (const auto& e : out)
    if (!seen.insert(e.name).second) fail(ErrorCode::ParseError, path.string() + ": '" + e.name + "' listed twice");
  return out;
}

Layout layout_from_layer_map(std::span<const LayerEntry> entries) {
  if (entries.empty()) fail(ErrorCode::ConfigInvalid, "layer map is empty");
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return entries[a].layer < entries[b].layer; });
  std::vector<std::string> names;
  std::vector<int> sizes;
  for (std::size_t k = 0; k < order.size(); ++k) {
    names.push_back(entries[order[k]].name);
    if (k == 0 || entries[order[k]].layer != entries[order[k - 1]].layer)
      sizes.push_back(1);
    else
      ++sizes.back();
  }
  return {std::move(names), validate(layered_spec(sizes))};
}

Dataset ingest(const fs::path& data_path, const fs::path& layer_path) {
  const Table t = read_table(data_path, ',', true);
  const std::vector<LayerEntry> layers = read_layer_map(layer_path);
  const std::size_t p = t.header.size();
  if (p == 0) fail(ErrorCode::ParseError, data_path.string() + ": empty header");

  std::map<std::string, long> layer_of;
  for (const auto& e : layers) layer_of[e.name] = e.layer;
  std::set<std::string> names_seen;
  std::vector<long> col_layer(p);
  for (std::size_t j = 0; j < p; ++j) {
    if (!names_seen.insert(t.header[j]).second)
      fail(ErrorCode::ParseError, data_path.string() + ": duplicate column '" + t.header[j] + "'");
    auto it = layer_of.find(t.header[j]);
    if (it == layer_of.end())
      fail(ErrorCode::MissingColumnInLayerMap, "column '" + t.header[j] + "' is not in " + layer_path.string());
    col_layer[j] = it->second;
  }
  for (const auto& e : layers)
    if (!names_seen.count(e.name))
      fail(ErrorCode::ConfigInvalid, layer_path.string() + ": '" + e.name + "' is not a data column");

  const std::size_t n = t.rows.size();
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = t.rows[i];
    if (row.size() != p)
      fail(ErrorCode::ParseError, data_path.string() + ": row " + std::to_string(i + 1) + " has " +
                                      std::to_string(row.size()) + " fields, expected " + std::to_string(p));
    for (std::size_t j = 0; j < p; ++j) {
      const std::string& cell = row[j];
      const std::string where = "row " + std::to_string(i + 1) + ", column '" + t.header[j] + "'";
      if (is_missing(cell)) fail(ErrorCode::MissingValue, "missing value at " + where);
      double x = 0.0;
      if (!parse_double(cell, x) || !std::isfinite(x))
        fail(ErrorCode::NonNumericCell, "'" + cell + "' at " + where + " is not a finite number");
      raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x;
    }
  }

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return col_layer[a] < col_layer[b]; });
  std::vector<int> sizes;
  for (std::size_t k = 0; k < p; ++k) {
    if (k == 0 || col_layer[order[k]] != col_layer[order[k - 1]])
      sizes.push_back(1);
    else
      ++sizes.back();
  }

  Eigen::MatrixXd Y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < p; ++k) {
    const auto col = raw.col(static_cast<Eigen::Index>(order[k]));
    if (n == 0 || (col.array() == col(0)).all())
      fail(ErrorCode::ConstantColumn, "column '" + t.header[order[k]] + "' is constant");
    Y.col(static_cast<Eigen::Index>(k)) = col;
    names.push_back(t.header[order[k]]);
  }
  Dataset d{std::move(Y), std::move(names), validate(layered_spec(sizes))};
  center_columns(d);
  return d;
}

std::string data_csv(const Dataset& data, const std::string& manifest_id) {
  TextFile f(manifest_id);
  f.row(data.names, ',');
  std::vector<std::string> row(static_cast<std::size_t>(data.p()));
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.p(); ++j) row[static_cast<std::size_t>(j)] = format_double(data.Y(i, j));
    f.row(row, ',');
  }
  return f.text();
}

std::string layer_tsv(const Dataset& data, const std::string& manifest_id) {
  TextFile f(manifest_id);
  f.line("vertex\tlayer");
  for (int v = 0; v < data.p(); ++v)
    f.line(data.names[static_cast<std::size_t>(v)] + "\t" + std::to_string(data.layout.layer_of(v) + 1));
  return f.text();
}

std::string kind_name(EdgeKind kind) { return kind == EdgeKind::Directed ? "dir" : "undir"; }

EdgeKind parse_kind(const std::string& s) {
  const std::string l = lower(s);
  if (l == "dir" || l == "directed" || l == "->") return EdgeKind::Directed;
  if (l == "undir" || l == "undirected" || l == "-" || l == "--") return EdgeKind::Undirected;
  fail(ErrorCode::ParseError, "unknown edge kind '" + s + "'");
}

std::map<std::string, Vertex> name_index(std::span<const std::string> names) {
  std::map<std::string, Vertex> out;
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = static_cast<Vertex>(i);
  return out;
}

std::vector<Edge> read_edges(const fs::path& path, const std::map<std::string, Vertex>& index) {
  const Table t = read_edge_table(path);
  const EdgeColumns c = edge_columns(t);
  std::vector<Edge> out;
  for (const auto& row : t.rows)
    out.push_back(make_edge(lookup(index, field(row, c.src, path), path), lookup(index, field(row, c.dst, path), path),
                            parse_kind(field(row, c.kind, path))));
  return out;
}

std::vector<EdgeScore> read_scored_edges(const fs::path& path, const std::map<std::string, Vertex>& index) {
  const Table t = read_edge_table(path);
  const EdgeColumns c = edge_columns(t);
  const int sc = column_of(t.header, {"g", "score", "ppi", "prob"}, 3);
  std::vector<EdgeScore> out;
  for (const auto& row : t.rows) {
    double g = 0.0;
    if (!parse_double(field(row, sc, path), g)) fail(ErrorCode::NonNumericCell, path.string() + ": bad score");
    out.push_back({make_edge(lookup(index, field(row, c.src, path), path),
                             lookup(index, field(row, c.dst, path), path), parse_kind(field(row, c.kind, path))),
                   g});
  }
  return out;
}

std::map<Edge, double> read_prior_edges(const fs::path& path, const std::map<std::string, Vertex>& index) {
  std::map<Edge, double> out;
  for (const EdgeScore& s : read_scored_edges(path, index)) out[s.edge] = s.g;
  return out;
}

std::string edges_tsv(std::span<const Edge> edges, std::span<const std::string> names, const std::string& manifest_id) {
  TextFile f(manifest_id);
  f.line("src\tdst\tkind");
  for (const Edge& e : edges)
    f.line(names[static_cast<std::size_t>(e.src)] + "\t" + names[static_cast<std::size_t>(e.dst)] + "\t" +
           kind_name(e.kind));
  return f.text();
}

std::string scores_tsv(std::span<const EdgeScore> scores, std::span<const std::string> names,
                       const std::string& manifest_id) {
  TextFile f(manifest_id);
  f.line("src\tdst\tkind\tg");
  for (const EdgeScore& s : scores)
    f.line(names[static_cast<std::size_t>(s.edge.src)] + "\t" + names[static_cast<std::size_t>(s.edge.dst)] + "\t" +
           kind_name(s.edge.kind) + "\t" + format_double(s.g));
  return f.text();
}

std::string matrix_tsv(const Eigen::MatrixXd& m, std::span<const std::string> names, const std::string& manifest_id) {
  TextFile f(manifest_id);
  std::string header;
  for (const auto& n : names) header += "\t" + n;
  f.line(header);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::string line = names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) line += "\t" + format_double(m(i, j));
    f.line(line);
  }
  return f.text();
}

std::string params_text(const MlggmParameters& params, std::span<const std::string> names,
                        const std::string& manifest_id) {
  TextFile f(manifest_id);
  std::string header = "names";
  for (const auto& n : names) header += "\t" + n;
  f.line(header);
  for (auto [label, m] : {std::pair{"B", &params.B}, std::pair{"K", &params.K}}) {
    f.line(label);
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      std::string line;
      for (Eigen::Index j = 0; j < m->cols(); ++j) line += (j ? "\t" : "") + format_double((*m)(i, j));
      f.line(line);
    }
  }
  return f.text();
}

MlggmParameters read_params(const fs::path& path) {
  const auto lines = data_lines(path);
  if (lines.empty()) fail(ErrorCode::ParseError, path.string() + ": empty parameter file");
  const auto names = split(lines[0], '\t');
  const auto p = static_cast<Eigen::Index>(names.size() - 1);
  if (names[0] != "names" || p < 1) fail(ErrorCode::ParseError, path.string() + ": missing names line");
  MlggmParameters params;
  std::size_t at = 1;
  for (auto [label, m] : {std::pair{"B", &params.B}, std::pair{"K", &params.K}}) {
    if (at >= lines.size() || trim(lines[at]) != label)
      fail(ErrorCode::ParseError, path.string() + ": expected block " + label);
    ++at;
    m->resize(p, p);
    for (Eigen::Index i = 0; i < p; ++i, ++at) {
      if (at >= lines.size()) fail(ErrorCode::ParseError, path.string() + ": truncated block " + label);
      const auto cells = split(lines[at], '\t');
      if (static_cast<Eigen::Index>(cells.size()) != p) fail(ErrorCode::ParseError, path.string() + ": bad row width");
      for (Eigen::Index j = 0; j < p; ++j)
        if (!parse_double(cells[static_cast<std::size_t>(j)], (*m)(i, j)))
          fail(ErrorCode::NonNumericCell, path.string() + ": bad number '" + cells[static_cast<std::size_t>(j)] + "'");
    }
  }
  return params;
}

}  // namespace bans::io
