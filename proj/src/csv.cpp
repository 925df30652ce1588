#include "stablesep/error.hpp"
#include "stablesep/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace stablesep::cli {

namespace {

std::string strip(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(strip(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& reason) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + reason);
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& response_column,
                  const std::optional<std::string>& group_column, const std::vector<std::string>& exclude) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty() || strip(line).front() == '#') continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw Error(ErrorKind::ParseError, "missing header row");
  if (line_no == 1 && header.front().starts_with("\xEF\xBB\xBF")) header.front().erase(0, 3);

  auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto y_col = find_col(response_column);
  if (!y_col) throw Error(ErrorKind::MissingColumn, response_column);
  std::optional<std::size_t> g_col;
  if (group_column) {
    g_col = find_col(*group_column);
    if (!g_col) throw Error(ErrorKind::MissingColumn, *group_column);
  }
  for (const auto& name : exclude) {
    if (!find_col(name)) throw Error(ErrorKind::MissingColumn, name);
  }
  std::vector<std::size_t> x_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == *y_col || (g_col && c == *g_col)) continue;
    if (std::find(exclude.begin(), exclude.end(), header[c]) != exclude.end()) continue;
    x_cols.push_back(c);
    names.push_back(header[c]);
  }
  if (x_cols.empty()) throw Error(ErrorKind::MissingColumn, "no predictor columns");

  std::vector<double> values;
  std::vector<double> y;
  std::vector<std::string> keys;
  auto parse_number = [&](const std::string& field, std::size_t col) {
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (field.empty() || ec != std::errc() || ptr != end) {
      parse_error(line_no, "column '" + header[col] + "': not a number '" + field + "'");
    }
    if (!std::isfinite(v)) parse_error(line_no, "column '" + header[col] + "': non-finite value '" + field + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      parse_error(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    }
    for (auto c : x_cols) values.push_back(parse_number(fields[c], c));
    y.push_back(parse_number(fields[*y_col], *y_col));
    if (g_col) keys.push_back(fields[*g_col]);
  }
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto p = static_cast<Eigen::Index>(x_cols.size());
  if (n < 2) throw Error(ErrorKind::ParseError, "fewer than 2 data rows");
  Eigen::MatrixXd x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, p);
  Eigen::VectorXd yv = Eigen::Map<Eigen::VectorXd>(y.data(), n);
  return CsvTable{Dataset(std::move(x), std::move(yv), std::move(names)), std::move(keys)};
}

CsvTable load_csv(const std::filesystem::path& path, const std::string& response_column,
                  const std::optional<std::string>& group_column, const std::vector<std::string>& exclude) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path.string());
  return read_csv(in, response_column, group_column, exclude);
}

void write_dataset_csv(std::ostream& out, const Dataset& d, const std::string& response_name) {
  out << "# roles:";
  for (std::size_t j = 0; j < d.cols(); ++j) out << (j ? "," : " ") << to_string(d.roles()[j]);
  out << '\n';
  for (std::size_t j = 0; j < d.cols(); ++j) out << d.names()[j] << ',';
  out << response_name << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < d.predictors().rows(); ++i) {
    for (Eigen::Index j = 0; j < d.predictors().cols(); ++j) out << d.predictors()(i, j) << ',';
    out << d.response()(i) << '\n';
  }
}

}  // namespace stablesep::cli
