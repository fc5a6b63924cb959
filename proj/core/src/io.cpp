#include "fiberbayes/io.hpp"

#include "fiberbayes/error.hpp"
#include "fiberbayes/so3.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fiberbayes {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::string_view kMagic = "fiberbayes-curves";
constexpr int kFormatVersion = 1;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

double parse_double_field(std::string_view token, const std::string& where) {
  double v = 0.0;
  if (!parse_number(token, v)) throw ParseError(where + ": bad number '" + std::string(token) + "'");
  return v;
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd json_matrix(const json& rows, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const json& row = rows.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("basis: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json one_based(const std::vector<int>& labels) {
  json out = json::array();
  for (int l : labels) out.push_back(l + 1);
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json gaussian_json(const GaussianParams& p) {
  return {{"mean", vector_json(p.mean)}, {"cov", matrix_json(p.cov)}};
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<ScanGroup> group_by_scan(const FiberDataset& data) {
  std::vector<ScanGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < data.fibers.size(); ++i) {
    const FiberRecord& f = data.fibers[i];
    auto [it, inserted] = index.try_emplace(f.scan_key(), groups.size());
    if (inserted) groups.push_back({f.subject_id, f.scan_id, {}});
    groups[it->second].fibers.push_back(i);
  }
  return groups;
}

FiberDataset parse_fibers(std::istream& in, const std::string& source) {
  FiberDataset data;
  data.source = source;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::unordered_set<std::string> keys;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (!header_seen) {
      if (tokens.size() < 2 || tokens[0] != kMagic) fail_at(source, line_no, "missing fiberbayes-curves header");
      int version = 0;
      if (!parse_number(tokens[1], version) || version != kFormatVersion) {
        fail_at(source, line_no, "unsupported format version '" + std::string(tokens[1]) + "'");
      }
      for (std::size_t t = 2; t < tokens.size(); ++t) {
        const std::string_view tok = tokens[t];
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos) fail_at(source, line_no, "bad header field '" + std::string(tok) + "'");
        const std::string_view key = tok.substr(0, eq);
        const std::string_view value = tok.substr(eq + 1);
        if (key == "grid") {
          long n = 0;
          if (value == "native") {
            data.grid_size = 0;
          } else if (parse_number(value, n) && n >= 2) {
            data.grid_size = n;
          } else {
            fail_at(source, line_no, "bad grid '" + std::string(value) + "'");
          }
        } else if (key == "connection") {
          const auto comma = value.find(',');
          if (comma == std::string_view::npos) fail_at(source, line_no, "connection needs two regions");
          data.region_a = value.substr(0, comma);
          data.region_b = value.substr(comma + 1);
        } else {
          fail_at(source, line_no, "unknown header field '" + std::string(key) + "'");
        }
      }
      header_seen = true;
      continue;
    }
    if (tokens.size() < 4) fail_at(source, line_no, "fiber record needs subject, scan, fiber and point count");
    const std::string fiber_id(tokens[2]);
    const std::string where = source + ":" + std::to_string(line_no) + ": fiber '" + fiber_id + "'";
    long npoints = 0;
    if (!parse_number(tokens[3], npoints) || npoints < 0) throw ParseError(where + ": bad point count");
    if (npoints < 2) throw ParseError(where + ": needs at least 2 points, has " + std::to_string(npoints));
    if (tokens.size() != 4 + 3 * static_cast<std::size_t>(npoints)) {
      throw ParseError(where + ": expected " + std::to_string(3 * npoints) + " coordinates, found " +
                       std::to_string(tokens.size() - 4));
    }
    Points p(npoints, 3);
    for (long k = 0; k < npoints; ++k) {
      for (int c = 0; c < 3; ++c) {
        const double v = parse_double_field(tokens[4 + 3 * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)], where);
        if (!std::isfinite(v)) throw ParseError(where + ": non-finite coordinate");
        p(k, c) = v;
      }
    }
    if (data.grid_size != 0 && npoints != data.grid_size) {
      throw ParseError(where + ": header declares grid=" + std::to_string(data.grid_size) + " but fiber has " +
                       std::to_string(npoints) + " points");
    }
    FiberRecord rec{std::string(tokens[0]), std::string(tokens[1]), fiber_id, Curve(std::move(p))};
    if (!keys.insert(rec.key()).second) throw ParseError(where + ": duplicate fiber id " + rec.key());
    data.fibers.push_back(std::move(rec));
  }
  if (!header_seen) throw ParseError(source + ": empty curve file");
  return data;
}

FiberDataset read_fibers(const fs::path& path) {
  std::ifstream in = open_in(path);
  return parse_fibers(in, path.string());
}

FiberDataset resample_dataset(FiberDataset data, Eigen::Index grid_size) {
  if (data.grid_size == grid_size) return data;
  for (FiberRecord& f : data.fibers) {
    try {
      f.curve = resample(f.curve, grid_size);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("fiber " + f.key() + ": " + e.what());
    }
  }
  data.grid_size = grid_size;
  return data;
}

FiberDataset load_fibers(const fs::path& path, Eigen::Index grid_size) {
  return resample_dataset(read_fibers(path), grid_size);
}

FiberDataset filter_min_fibers(FiberDataset data, int min_fibers) {
  if (min_fibers <= 0) return data;
  std::unordered_set<std::string> dropped;
  for (const ScanGroup& g : group_by_scan(data)) {
    if (static_cast<int>(g.fibers.size()) < min_fibers) {
      warn("dropping scan " + g.key() + ": " + std::to_string(g.fibers.size()) + " fibers, fewer than " +
           std::to_string(min_fibers));
      dropped.insert(g.key());
    }
  }
  std::erase_if(data.fibers, [&](const FiberRecord& f) { return dropped.count(f.scan_key()) > 0; });
  return data;
}

void write_fibers(std::ostream& out, const FiberDataset& data) {
  out << kMagic << ' ' << kFormatVersion << " grid=";
  if (data.grid_size == 0) {
    out << "native";
  } else {
    out << data.grid_size;
  }
  out << " connection=" << (data.region_a.empty() ? "a" : data.region_a) << ','
      << (data.region_b.empty() ? "b" : data.region_b) << '\n';
  for (const FiberRecord& f : data.fibers) {
    const Points& p = f.curve.points();
    out << f.subject_id << ' ' << f.scan_id << ' ' << f.fiber_id << ' ' << p.rows();
    for (Eigen::Index k = 0; k < p.rows(); ++k) {
      for (int c = 0; c < 3; ++c) out << ' ' << format_double(p(k, c));
    }
    out << '\n';
  }
}

void save_fibers(const fs::path& path, const FiberDataset& data) {
  std::ofstream out = open_out(path);
  write_fibers(out, data);
}

void save_basis(const fs::path& path, const ShapeBasis& basis) {
  json doc;
  doc["format"] = "fiberbayes-basis";
  doc["version"] = 1;
  doc["grid_size"] = basis.grid_size();
  doc["T"] = basis.size();
  doc["template"] = matrix_json(basis.template_curve.points());
  doc["eigenvalues"] = vector_json(basis.eigenvalues);
  json fns = json::array();
  for (const Points& f : basis.functions) fns.push_back(matrix_json(f));
  doc["functions"] = std::move(fns);
  std::ofstream out = open_out(path);
  out << doc.dump(1) << '\n';
}

ShapeBasis load_basis(const fs::path& path) {
  std::ifstream in = open_in(path);
  json doc;
  try {
    doc = json::parse(in);
    if (doc.at("format") != "fiberbayes-basis") throw ParseError("not a basis file");
    const auto n = doc.at("grid_size").get<Eigen::Index>();
    const int t = doc.at("T").get<int>();
    ShapeBasis basis{Curve(json_matrix(doc.at("template"), 3)), {}, Eigen::VectorXd(t)};
    if (basis.grid_size() != n) throw ParseError("template length does not match grid_size");
    const json& ev = doc.at("eigenvalues");
    const json& fns = doc.at("functions");
    if (static_cast<int>(ev.size()) != t || static_cast<int>(fns.size()) != t) throw ParseError("T mismatch");
    for (int l = 0; l < t; ++l) {
      basis.eigenvalues(l) = ev.at(static_cast<std::size_t>(l)).get<double>();
      Points f = json_matrix(fns.at(static_cast<std::size_t>(l)), 3);
      if (f.rows() != n) throw ParseError("basis function length does not match grid_size");
      basis.functions.push_back(std::move(f));
    }
    return basis;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_decompositions(const fs::path& path, const std::vector<DecompositionRow>& rows) {
  std::ofstream out = open_out(path);
  const Eigen::Index t = rows.empty() ? 0 : rows.front().decomposition.shape_coeffs.size();
  out << "id,tx,ty,tz";
  for (Eigen::Index l = 1; l <= t; ++l) out << ",c" << l;
  out << ",r1,r2,r3,recon_error\n";
  for (const DecompositionRow& row : rows) {
    const FiberDecomposition& d = row.decomposition;
    if (d.shape_coeffs.size() != t) throw InvalidArgument("save_decompositions: inconsistent T");
    out << row.id;
    for (int c = 0; c < 3; ++c) out << ',' << format_double(d.translation(c));
    for (Eigen::Index l = 0; l < t; ++l) out << ',' << format_double(d.shape_coeffs(l));
    const Eigen::Vector3d r = log_so3(d.rotation);
    for (int c = 0; c < 3; ++c) out << ',' << format_double(r(c));
    out << ',' << format_double(d.recon_error) << '\n';
  }
}

std::vector<DecompositionRow> load_decompositions(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty decomposition file");
  const auto header = split_csv(trim(line));
  if (header.size() < 8 || header[0] != "id") throw ParseError(path.string() + ": bad decomposition header");
  const std::size_t t = header.size() - 8;
  std::vector<DecompositionRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(trim(line));
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (f.size() != header.size()) throw ParseError(where + ": wrong number of fields");
    auto num = [&](std::size_t i) { return parse_double_field(f[i], where); };
    FiberDecomposition d{Eigen::Vector3d(num(1), num(2), num(3)), Eigen::VectorXd(static_cast<Eigen::Index>(t)),
                         RotationSO3(), WarpingFunction::identity(2), 0.0};
    for (std::size_t l = 0; l < t; ++l) d.shape_coeffs(static_cast<Eigen::Index>(l)) = num(4 + l);
    d.rotation = exp_so3(Eigen::Vector3d(num(4 + t), num(5 + t), num(6 + t)));
    d.recon_error = num(7 + t);
    rows.push_back({f[0], std::move(d)});
  }
  return rows;
}

void save_chain(const fs::path& path, const MixtureChain& chain) {
  std::ofstream out = open_out(path);
  for (const MixtureDraw& d : chain.draws) {
    json rec{{"iteration", d.iteration},
             {"occupied", d.occupied},
             {"assignments", one_based(d.assignments)},
             {"weights", vector_json(d.weights)}};
    out << rec.dump() << '\n';
  }
}

void save_chain(const fs::path& path, const NdpChain& chain) {
  std::ofstream out = open_out(path);
  for (const NdpDraw& d : chain.draws) {
    json fibers = json::array();
    for (const auto& f : d.fiber_assign) fibers.push_back(one_based(f));
    json rec{{"iteration", d.iteration},
             {"occupied", d.occupied},
             {"alpha", d.alpha},
             {"beta", d.beta},
             {"subject_assignments", one_based(d.subject_assign)},
             {"subject_weights", vector_json(d.subject_weights)},
             {"fiber_assignments", std::move(fibers)}};
    if (!d.count_params.empty()) {
      json counts = json::array();
      for (const CountParams& c : d.count_params) counts.push_back({{"mean", c.mean}, {"variance", c.variance}});
      rec["count_params"] = std::move(counts);
    }
    out << rec.dump() << '\n';
  }
}

void save_chain_params(const fs::path& path, const MixtureChain& chain) {
  std::ofstream out = open_out(path);
  for (const auto& [index, params] : chain.params) {
    json clusters = json::array();
    for (const auto& blocks : params) {
      json b = json::array();
      for (const GaussianParams& g : blocks) b.push_back(gaussian_json(g));
      clusters.push_back(std::move(b));
    }
    out << json{{"draw", index}, {"clusters", std::move(clusters)}}.dump() << '\n';
  }
}

void save_chain_params(const fs::path& path, const NdpChain& chain) {
  std::ofstream out = open_out(path);
  for (const auto& [index, atoms] : chain.atoms) {
    json columns = json::array();
    for (const auto& column : atoms) {
      json cells = json::array();
      for (const auto& blocks : column) {
        json b = json::array();
        for (const GaussianParams& g : blocks) b.push_back(gaussian_json(g));
        cells.push_back(std::move(b));
      }
      columns.push_back(std::move(cells));
    }
    out << json{{"draw", index}, {"atoms", std::move(columns)}}.dump() << '\n';
  }
}

void save_coclustering(const fs::path& path, const std::vector<std::string>& ids, const Eigen::MatrixXd& p) {
  if (static_cast<Eigen::Index>(ids.size()) != p.rows()) throw InvalidArgument("save_coclustering: id count");
  std::ofstream out = open_out(path);
  out << "id";
  for (const std::string& id : ids) out << ',' << id;
  out << '\n';
  for (Eigen::Index a = 0; a < p.rows(); ++a) {
    out << ids[static_cast<std::size_t>(a)];
    for (Eigen::Index b = 0; b < p.cols(); ++b) out << ',' << format_double(p(a, b));
    out << '\n';
  }
}

void save_partition(const fs::path& path, const std::vector<std::string>& ids, const Partition& p) {
  if (ids.size() != p.size()) throw InvalidArgument("save_partition: id count");
  std::ofstream out = open_out(path);
  out << "id,label\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << p.labels()[i] << '\n';
}

std::vector<std::pair<std::string, int>> load_partition(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "id,label") {
    throw ParseError(path.string() + ": expected header 'id,label'");
  }
  std::vector<std::pair<std::string, int>> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(trim(line));
    int label = 0;
    if (f.size() != 2 || !parse_number(std::string_view(f[1]), label)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected id,label");
    }
    out.emplace_back(f[0], label);
  }
  return out;
}

std::map<std::string, std::string> load_config(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    out[trim(std::string_view(body).substr(0, eq))] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

}  // namespace fiberbayes
