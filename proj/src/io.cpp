#include "shapelift/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace shapelift::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& where) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || text.empty()) {
    throw Error(ErrorCode::MalformedData, where + ": not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    fields.emplace_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

namespace {

bool is_json(const fs::path& path) { return path.extension() == ".json"; }

bool looks_numeric(const std::string& s) {
  if (s.empty()) return false;
  double v;
  const char* first = s.data() + (s.front() == '+' ? 1 : 0);
  const auto res = std::from_chars(first, s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

json parse_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedData, path.string() + ": " + e.what());
  }
}

// Rows of a CSV file as fields, with line numbers; blank lines and a leading
// non-numeric header are skipped.
struct CsvRow {
  std::size_t line;
  std::vector<std::string> fields;
};

std::vector<CsvRow> csv_rows(const fs::path& path, std::size_t numeric_from) {
  std::istringstream in(read_text(path));
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv(line);
    if (rows.empty() && fields.size() > numeric_from && !looks_numeric(fields[numeric_from])) {
      continue;  // header
    }
    rows.push_back({number, std::move(fields)});
  }
  return rows;
}

Mat points_to_matrix(const std::vector<std::vector<double>>& points, const std::string& where) {
  if (points.empty()) throw Error(ErrorCode::MalformedData, where + ": no landmarks");
  const auto m = points.front().size();
  Mat c(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j].size() != m) {
      throw Error(ErrorCode::MalformedData, where + ": landmarks have differing dimensions");
    }
    for (std::size_t r = 0; r < m; ++r) {
      c(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = points[j][r];
    }
  }
  return c;
}

Configuration make_configuration(Mat c, const std::string& where) {
  try {
    return Configuration(std::move(c));
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedData, where + ": " + e.what());
  }
}

std::string landmark_header(Eigen::Index m) {
  static const char* names[] = {"x", "y", "z"};
  std::string h;
  for (Eigen::Index r = 0; r < m; ++r) {
    if (r) h += ',';
    h += r < 3 ? names[r] : "c" + std::to_string(r);
  }
  return h;
}

void append_landmarks(std::string& out, const Mat& c, const std::string& prefix) {
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    out += prefix;
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      if (r) out += ',';
      out += format_double(c(r, j));
    }
    out += '\n';
  }
}

}  // namespace

Mat landmarks_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::MalformedData, where + ": landmarks must be an array");
  std::vector<std::vector<double>> points;
  for (const auto& p : j) {
    if (!p.is_array()) throw Error(ErrorCode::MalformedData, where + ": landmark must be an array");
    std::vector<double> coords;
    for (const auto& v : p) {
      if (!v.is_number()) throw Error(ErrorCode::MalformedData, where + ": non-numeric coordinate");
      coords.push_back(v.get<double>());
    }
    points.push_back(std::move(coords));
  }
  return points_to_matrix(points, where);
}

json landmarks_to_json(const Mat& c) {
  json arr = json::array();
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    json p = json::array();
    for (Eigen::Index r = 0; r < c.rows(); ++r) p.push_back(c(r, j));
    arr.push_back(std::move(p));
  }
  return arr;
}

Configuration read_configuration(const fs::path& path) {
  const std::string where = path.string();
  if (is_json(path)) {
    const json j = parse_json(path);
    const json& lm = j.is_object() && j.contains("landmarks") ? j.at("landmarks") : j;
    return make_configuration(landmarks_from_json(lm, where), where);
  }
  std::vector<std::vector<double>> points;
  for (const auto& row : csv_rows(path, 0)) {
    const std::string at = where + ":" + std::to_string(row.line);
    std::vector<double> coords;
    for (const auto& f : row.fields) coords.push_back(parse_double(f, at));
    if (!points.empty() && coords.size() != points.front().size()) {
      throw Error(ErrorCode::MalformedData, at + ": expected " +
                                                std::to_string(points.front().size()) + " columns");
    }
    points.push_back(std::move(coords));
  }
  return make_configuration(points_to_matrix(points, where), where);
}

void write_configuration(const fs::path& path, const Configuration& c) {
  if (is_json(path)) {
    write_text(path, json{{"landmarks", landmarks_to_json(c.entries())}}.dump(2) + "\n");
    return;
  }
  std::string out = landmark_header(c.dim()) + "\n";
  append_landmarks(out, c.entries(), "");
  write_text(path, out);
}

std::vector<Configuration> read_samples(const fs::path& path) {
  const std::string where = path.string();
  std::vector<Configuration> samples;
  if (is_json(path)) {
    const json j = parse_json(path);
    const json& list = j.is_object() && j.contains("samples") ? j.at("samples") : j;
    if (!list.is_array()) throw Error(ErrorCode::MalformedData, where + ": expected an array of samples");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const json& s = list[i];
      const json& lm = s.is_object() && s.contains("landmarks") ? s.at("landmarks") : s;
      const std::string at = where + ": sample " + std::to_string(i);
      samples.push_back(make_configuration(landmarks_from_json(lm, at), at));
    }
  } else {
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::vector<double>>> groups;
    std::map<std::string, std::size_t> first_line;
    for (const auto& row : csv_rows(path, 1)) {
      const std::string at = where + ":" + std::to_string(row.line);
      if (row.fields.size() < 3) {
        throw Error(ErrorCode::MalformedData, at + ": expected sample,x,y[,z]");
      }
      std::vector<double> coords;
      for (std::size_t f = 1; f < row.fields.size(); ++f) coords.push_back(parse_double(row.fields[f], at));
      auto [it, inserted] = groups.try_emplace(row.fields[0]);
      if (inserted) {
        order.push_back(row.fields[0]);
        first_line[row.fields[0]] = row.line;
      }
      it->second.push_back(std::move(coords));
    }
    for (const auto& id : order) {
      const std::string at = where + ":" + std::to_string(first_line[id]) + " (sample " + id + ")";
      samples.push_back(make_configuration(points_to_matrix(groups[id], at), at));
    }
  }
  for (const auto& s : samples) {
    if (s.dim() != samples.front().dim() || s.landmarks() != samples.front().landmarks()) {
      throw Error(ErrorCode::MalformedData, where + ": samples differ in size");
    }
  }
  return samples;
}

void write_samples(const fs::path& path, const std::vector<Configuration>& samples) {
  if (is_json(path)) {
    json list = json::array();
    for (const auto& s : samples) list.push_back(json{{"landmarks", landmarks_to_json(s.entries())}});
    write_text(path, json{{"samples", list}}.dump(2) + "\n");
    return;
  }
  std::string out = "sample," + landmark_header(samples.empty() ? 2 : samples.front().dim()) + "\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    append_landmarks(out, samples[i].entries(), std::to_string(i) + ",");
  }
  write_text(path, out);
}

json to_json(const TestOutcome& o) {
  json j;
  j["variant"] = std::string(to_string(o.variant));
  j["bootstrap"] = o.bootstrap;
  j["statistic"] = o.statistic;
  j["critical_value"] = o.critical_value;
  j["p_value"] = o.p_value ? json(*o.p_value) : json(nullptr);
  j["reject"] = o.reject;
  j["dof"] = {o.dof_d, o.dof_k};
  j["near_singular"] = o.near_singular;
  j["warnings"] = o.warnings;
  return j;
}

json to_json(const MeanResult& r) {
  return json{{"iterations", r.iterations},
              {"residual", r.residual},
              {"value", r.value},
              {"unique_alignments", r.unique_alignments},
              {"converged", r.converged},
              {"mean", landmarks_to_json(r.mean.entries())}};
}

}  // namespace shapelift::io
