// Command-line front end: synthetic and real-data experiments, ad-hoc CI
// tests and synthetic dataset export.

#include "stablesep/citest.hpp"
#include "stablesep/error.hpp"
#include "stablesep/experiment.hpp"
#include "stablesep/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace {

using namespace stablesep;

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

// String-valued flags that may also come from a key = value config file.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App* app, const std::string& name, const std::string& help) {
    options[name] = app->add_option("--" + name, values[name], help);
  }

  cli::KeyValues provided() const {
    cli::KeyValues kv;
    for (const auto& [name, opt] : options) {
      if (opt->count() > 0) kv[name] = values.at(name);
    }
    return kv;
  }
};

cli::ExperimentConfig build_config(cli::Mode mode, const std::string& config_path, const FlagSet& flags) {
  cli::ExperimentConfig cfg;
  cfg.mode = mode;
  if (mode == cli::Mode::Real) cfg.seed_variable = "auto";
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config " + config_path);
    cli::KeyValues file = cli::parse_key_values(in);
    file.erase("mode");
    cfg = cli::apply_overrides(cfg, file);
  }
  return cli::apply_overrides(cfg, flags.provided());
}

void print_synthetic(const cli::SyntheticRun& run) {
  for (const auto& method : run.methods) {
    double prec = 0.0, avg = 0.0, stab = 0.0;
    std::size_t count = 0;
    for (const auto& c : run.cells) {
      if (c.method != method) continue;
      prec += c.report.precision_at_k;
      avg += c.report.average_error;
      stab += c.report.stability_error;
      ++count;
    }
    std::printf("%-20s precision@k=%.3f average_error=%.3f stability_error=%.3f (%zu seeds)\n", method.c_str(),
                prec / count, avg / count, stab / count, count);
  }
  for (const auto& f : run.files) std::printf("wrote %s\n", f.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal variable separation with a seed variable, and stability experiments"};
  app.require_subcommand(1);

  std::string config_path;

  auto* synth_cmd = app.add_subcommand("synth", "Synthetic stability experiment");
  FlagSet synth_flags;
  synth_cmd->add_option("--config", config_path, "key = value config file");
  for (const auto& [name, help] : std::initializer_list<std::pair<const char*, const char*>>{
           {"n", "rows per environment"},
           {"p", "number of predictors"},
           {"r-train", "bias rate of the training environment"},
           {"r-test", "comma-separated test bias rates"},
           {"seeds", "number of repetitions"},
           {"k", "variables to select (default round(0.3 p))"},
           {"method", "fisherz or rcit"},
           {"seed-variable", "seed column index or 'auto'"},
           {"out", "output directory"},
           {"rng-seed", "base RNG seed"},
           {"threads", "worker threads (0: all cores)"},
           {"rcit-features-xy", "random features for x and y"},
           {"rcit-features-z", "random features for z"},
           {"rcit-ridge", "ridge for feature residualization"}}) {
    synth_flags.add(synth_cmd, name, help);
  }

  auto* real_cmd = app.add_subcommand("real", "Group-split experiment on a CSV file");
  FlagSet real_flags;
  real_cmd->add_option("--config", config_path, "key = value config file");
  for (const auto& [name, help] : std::initializer_list<std::pair<const char*, const char*>>{
           {"input", "CSV file with header"},
           {"response", "response column"},
           {"group", "column holding the group key (e.g. subject id)"},
           {"groups", "label=key,key;label=key,... (default: sorted keys, half to G1, rest in 3 blocks)"},
           {"exclude", "comma-separated columns to drop"},
           {"method", "fisherz or rcit"},
           {"seed-variable", "seed column name, index or 'auto'"},
           {"out", "output directory"},
           {"rng-seed", "base RNG seed"},
           {"rcit-features-xy", "random features for x and y"},
           {"rcit-features-z", "random features for z"},
           {"rcit-ridge", "ridge for feature residualization"}}) {
    real_flags.add(real_cmd, name, help);
  }

  auto* ci_cmd = app.add_subcommand("citest", "Test x _||_ y | z on three CSV columns");
  std::string ci_input, ci_x, ci_y, ci_z, ci_method = "fisherz";
  std::uint64_t ci_seed = 0;
  ci_cmd->add_option("--input", ci_input, "CSV file with header")->required();
  ci_cmd->add_option("--x", ci_x, "first column")->required();
  ci_cmd->add_option("--y", ci_y, "second column")->required();
  ci_cmd->add_option("--z", ci_z, "conditioning column")->required();
  ci_cmd->add_option("--method", ci_method, "fisherz or rcit");
  ci_cmd->add_option("--rng-seed", ci_seed, "seed for the random features");

  auto* gen_cmd = app.add_subcommand("generate", "Write one synthetic environment as CSV");
  synth::EnvironmentSpec gen_spec;
  std::optional<double> gen_r;
  std::string gen_out;
  gen_cmd->add_option("--n", gen_spec.n, "rows");
  gen_cmd->add_option("--p", gen_spec.p, "predictors");
  gen_cmd->add_option("--r", gen_r, "bias rate (omit for unbiased)");
  gen_cmd->add_option("--rng-seed", gen_spec.rng_seed, "RNG seed");
  gen_cmd->add_option("--out", gen_out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (synth_cmd->parsed()) {
      print_synthetic(cli::run_synthetic(build_config(cli::Mode::Synthetic, config_path, synth_flags)));
    } else if (real_cmd->parsed()) {
      const cli::RealRun run = cli::run_real(build_config(cli::Mode::Real, config_path, real_flags));
      for (const auto& [label, rows] : run.group_rows) std::printf("%s: %zu rows\n", label.c_str(), rows);
      for (const auto& f : run.files) std::printf("wrote %s\n", f.string().c_str());
    } else if (ci_cmd->parsed()) {
      const CiMethod method = parse_ci_method(ci_method);
      const cli::CsvTable table = cli::load_csv(ci_input, ci_z, std::nullopt);
      const auto xi = table.data.index_of(ci_x);
      const auto yi = table.data.index_of(ci_y);
      if (!xi) throw Error(ErrorKind::MissingColumn, ci_x);
      if (!yi) throw Error(ErrorKind::MissingColumn, ci_y);
      RcitParams params;
      params.rng_seed = ci_seed;
      const CiTestResult r =
          ci_test(method, table.data.column(*xi), table.data.column(*yi), table.data.response(), params);
      std::printf("method\t%s%s\nstatistic\t%.10g\np_value\t%.10g\n", std::string(to_string(r.method)).c_str(),
                  r.fell_back ? " (fallback: n < 50)" : "", r.statistic, r.p_value);
    } else if (gen_cmd->parsed()) {
      gen_spec.bias_rate = gen_r;
      const Dataset d = synth::make_environment(gen_spec);
      if (gen_out.empty()) {
        cli::write_dataset_csv(std::cout, d);
      } else {
        std::ofstream out(gen_out);
        if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + gen_out);
        cli::write_dataset_csv(out, d);
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return is_configuration_error(e.kind()) ? kConfigError : kRuntimeError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return 0;
}
