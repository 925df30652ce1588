#include "stablesep/error.hpp"
#include "stablesep/experiment.hpp"
#include "stablesep/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

namespace stablesep::cli {

std::vector<double> default_r_test_grid() {
  return {-3.0, -2.7, -2.3, -2.0, -1.7, -1.3, 1.3, 1.7, 2.0, 2.3, 2.7, 3.0};
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorKind::ConfigError, "invalid value '" + value + "' for " + key);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v);
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Shortest text that parses back to the same double.
std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::size_t ExperimentConfig::effective_k() const { return k ? *k : synth::causal_count(p); }

std::optional<std::size_t> ExperimentConfig::resolve_seed(const std::vector<std::string>& names) const {
  if (seed_variable == "auto") return std::nullopt;
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(seed_variable.data(), seed_variable.data() + seed_variable.size(), idx);
  if (ec == std::errc() && ptr == seed_variable.data() + seed_variable.size()) {
    if (idx >= names.size()) throw Error(ErrorKind::IndexOutOfRange, "seed variable " + seed_variable);
    return idx;
  }
  auto it = std::find(names.begin(), names.end(), seed_variable);
  if (it == names.end()) throw Error(ErrorKind::MissingColumn, "seed variable " + seed_variable);
  return static_cast<std::size_t>(it - names.begin());
}

void ExperimentConfig::validate() const {
  rcit.validate();
  if (seed_variable.empty()) throw Error(ErrorKind::ConfigError, "seed-variable is empty");
  if (output_dir.empty()) throw Error(ErrorKind::ConfigError, "out is required");
  if (mode == Mode::Synthetic) {
    synth::EnvironmentSpec spec{n, p, r_train, 0};
    try {
      spec.validate();
      for (double r : r_test) synth::EnvironmentSpec{n, p, r, 0}.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError, e.what());
    }
    if (synth::causal_count(p) < 3) throw Error(ErrorKind::ConfigError, "p must give at least 3 causal variables");
    if (r_test.empty()) throw Error(ErrorKind::ConfigError, "r-test grid is empty");
    if (seed_count == 0) throw Error(ErrorKind::ConfigError, "seeds must be positive");
    if (effective_k() == 0 || effective_k() > p) throw Error(ErrorKind::ConfigError, "k must be in [1, p]");
    if (n < 50) throw Error(ErrorKind::ConfigError, "n must be at least 50");
  } else {
    if (input_path.empty()) throw Error(ErrorKind::ConfigError, "real mode needs input");
    if (response_column.empty()) throw Error(ErrorKind::ConfigError, "real mode needs response");
    if (group_column.empty()) throw Error(ErrorKind::ConfigError, "real mode needs group");
  }
}

std::string ExperimentConfig::echo() const {
  std::ostringstream os;
  os << "mode = " << (mode == Mode::Synthetic ? "synthetic" : "real") << '\n';
  if (mode == Mode::Synthetic) {
    std::vector<std::string> grid;
    for (double r : r_test) grid.push_back(format_number(r));
    os << "n = " << n << '\n'
       << "p = " << p << '\n'
       << "r-train = " << format_number(r_train) << '\n'
       << "r-test = " << join(grid, ',') << '\n'
       << "seeds = " << seed_count << '\n'
       << "k = " << effective_k() << '\n';
  } else {
    os << "input = " << input_path.string() << '\n'
       << "response = " << response_column << '\n'
       << "group = " << group_column << '\n'
       << "groups = " << format_group_assignment(group_assignment) << '\n'
       << "exclude = " << join(exclude_columns, ',') << '\n';
  }
  os << "method = " << to_string(ci_method) << '\n'
     << "seed-variable = " << seed_variable << '\n'
     << "rcit-features-xy = " << rcit.num_features_xy << '\n'
     << "rcit-features-z = " << rcit.num_features_z << '\n'
     << "rcit-ridge = " << format_number(rcit.ridge) << '\n'
     << "rng-seed = " << rng_seed << '\n'
     << "out = " << output_dir.string() << '\n';
  return os.str();
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = normalize_key(trim(std::string_view(t).substr(0, eq)));
    if (key.empty()) throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": empty key");
    kv[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

GroupAssignment parse_group_assignment(const std::string& text) {
  GroupAssignment out;
  if (trim(text).empty()) return out;
  for (const std::string& part : split(text, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ConfigError, "group spec '" + part + "' lacks '='");
    const std::string label = trim(std::string_view(part).substr(0, eq));
    std::vector<std::string> keys;
    for (auto& key : split(std::string_view(part).substr(eq + 1), ',')) {
      if (!key.empty()) keys.push_back(key);
    }
    if (label.empty() || keys.empty()) throw Error(ErrorKind::ConfigError, "group spec '" + part + "' is empty");
    out.emplace_back(label, std::move(keys));
  }
  return out;
}

std::string format_group_assignment(const GroupAssignment& g) {
  std::vector<std::string> parts;
  for (const auto& [label, keys] : g) parts.push_back(label + "=" + join(keys, ','));
  return join(parts, ';');
}

ExperimentConfig apply_overrides(ExperimentConfig cfg, const KeyValues& kv) {
  for (const auto& [raw_key, value] : kv) {
    const std::string key = normalize_key(raw_key);
    if (key == "mode") {
      if (value == "synthetic" || value == "synth") {
        cfg.mode = Mode::Synthetic;
      } else if (value == "real") {
        cfg.mode = Mode::Real;
      } else {
        bad_value(key, value);
      }
    } else if (key == "n") {
      cfg.n = to_size(key, value);
    } else if (key == "p") {
      cfg.p = to_size(key, value);
    } else if (key == "r-train") {
      cfg.r_train = to_double(key, value);
    } else if (key == "r-test") {
      cfg.r_test.clear();
      for (const auto& item : split(value, ',')) cfg.r_test.push_back(to_double(key, item));
    } else if (key == "seeds") {
      cfg.seed_count = to_size(key, value);
    } else if (key == "k") {
      if (value == "auto") {
        cfg.k.reset();
      } else {
        cfg.k = to_size(key, value);
      }
    } else if (key == "method") {
      cfg.ci_method = parse_ci_method(value);
    } else if (key == "seed-variable") {
      cfg.seed_variable = value;
    } else if (key == "rcit-features-xy") {
      cfg.rcit.num_features_xy = static_cast<int>(to_size(key, value));
    } else if (key == "rcit-features-z") {
      cfg.rcit.num_features_z = static_cast<int>(to_size(key, value));
    } else if (key == "rcit-ridge") {
      cfg.rcit.ridge = to_double(key, value);
    } else if (key == "input") {
      cfg.input_path = value;
    } else if (key == "response") {
      cfg.response_column = value;
    } else if (key == "group") {
      cfg.group_column = value;
    } else if (key == "groups") {
      cfg.group_assignment = parse_group_assignment(value);
    } else if (key == "exclude") {
      cfg.exclude_columns.clear();
      for (auto& c : split(value, ',')) {
        if (!c.empty()) cfg.exclude_columns.push_back(c);
      }
    } else if (key == "out") {
      cfg.output_dir = value;
    } else if (key == "rng-seed") {
      cfg.rng_seed = to_u64(key, value);
    } else if (key == "threads") {
      cfg.threads = static_cast<unsigned>(to_size(key, value));
    } else {
      throw Error(ErrorKind::ConfigError, "unknown key '" + raw_key + "'");
    }
  }
  return cfg;
}

}  // namespace stablesep::cli
