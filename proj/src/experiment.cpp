#include "stablesep/experiment.hpp"

#include "manifest.hpp"
#include "stablesep/error.hpp"
#include "stablesep/predict.hpp"
#include "stablesep/separation.hpp"
#include "stablesep/synth.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace stablesep::cli {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string label_of(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", r);
  return buf;
}

std::string join_indices(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) body(i);
    });
  }
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::string ours_label(const ExperimentConfig& cfg) {
  return "ours_" + std::string(to_string(cfg.ci_method)) + (cfg.seed_variable == "auto" ? "_auto" : "");
}

constexpr const char* kCorrelationLabel = "correlation";

struct SeedOutcome {
  bool done = false;
  std::exception_ptr error;
  std::size_t seed_variable = 0;
  std::vector<MethodCell> cells;
  std::vector<VariableRanking> rankings;
  std::vector<std::string> names;
  std::vector<Role> roles;
};

SeedOutcome run_one_seed(const ExperimentConfig& cfg, std::size_t s) {
  SeedOutcome out;
  const Rng base = Rng(cfg.rng_seed).split(s);
  const Dataset train = synth::make_environment({cfg.n, cfg.p, cfg.r_train, base.split(0).seed()});
  const Standardization scaler = fit_standardization(train);
  const Dataset train_s = scaler.apply(train);
  const std::vector<std::size_t> truth = train.causal_indices();
  const std::size_t unstable = *train.unstable_index();
  const std::size_t k = cfg.effective_k();

  SeparationConfig sep;
  sep.seed_variable = cfg.resolve_seed(train.names());
  sep.method = cfg.ci_method;
  sep.k = k;
  sep.rcit = cfg.rcit;
  sep.rcit.rng_seed = base.split(1000).seed();
  CiRanking ours = rank_by_ci(train_s, sep);
  out.seed_variable = ours.seed;
  out.rankings = {ours.ranking, correlation_ranking(train_s)};
  const std::vector<std::string> methods = {ours_label(cfg), kCorrelationLabel};

  std::vector<LinearModel> models;
  for (const auto& r : out.rankings) models.push_back(ols_fit(train_s, select_top_k(r, k)));

  std::vector<std::vector<std::pair<std::string, double>>> per_env(methods.size());
  for (std::size_t e = 0; e < cfg.r_test.size(); ++e) {
    const Dataset test =
        scaler.apply(synth::make_environment({cfg.n, cfg.p, cfg.r_test[e], base.split(1 + e).seed()}));
    for (std::size_t m = 0; m < methods.size(); ++m) {
      per_env[m].emplace_back(label_of(cfg.r_test[e]), rmse(models[m], test));
    }
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodCell cell;
    cell.seed_index = s;
    cell.method = methods[m];
    cell.selected = select_top_k(out.rankings[m], k);
    cell.report = EvaluationReport::build(precision_at_k(out.rankings[m], truth, k),
                                          unstable_rank(out.rankings[m], unstable), std::move(per_env[m]));
    out.cells.push_back(std::move(cell));
  }
  out.names = train.names();
  out.roles = train.roles();
  out.done = true;
  return out;
}

}  // namespace

SyntheticRun run_synthetic(const ExperimentConfig& cfg) {
  if (cfg.mode != Mode::Synthetic) throw Error(ErrorKind::ConfigError, "run_synthetic needs synthetic mode");
  cfg.validate();

  std::vector<SeedOutcome> outcomes(cfg.seed_count);
  parallel_for(cfg.seed_count, cfg.threads, [&](std::size_t s) {
    try {
      outcomes[s] = run_one_seed(cfg, s);
    } catch (...) {
      outcomes[s].error = std::current_exception();
    }
  });

  SyntheticRun run;
  run.methods = {ours_label(cfg), kCorrelationLabel};
  std::ostringstream per_seed, curve, rankings;
  per_seed << "seed\tmethod\tseed_variable\tk\tselected\tprecision_at_k\tunstable_rank\taverage_error\tstability_error\n";
  curve << "seed\tmethod\tr_test\trmse\n";
  rankings << "seed\tmethod\trank\tvariable\tname\trole\tscore\n";
  std::vector<std::string> completed;
  std::exception_ptr first_error;
  for (std::size_t s = 0; s < outcomes.size(); ++s) {
    const SeedOutcome& o = outcomes[s];
    if (!o.done) {
      if (!first_error) first_error = o.error;
      continue;
    }
    for (std::size_t m = 0; m < o.cells.size(); ++m) {
      const MethodCell& c = o.cells[m];
      per_seed << s << '\t' << c.method << '\t' << (m == 0 ? std::to_string(o.seed_variable) : "-") << '\t'
               << c.selected.size() << '\t' << join_indices(c.selected) << '\t' << num(c.report.precision_at_k)
               << '\t' << c.report.unstable_rank << '\t' << num(c.report.average_error) << '\t'
               << num(c.report.stability_error) << '\n';
      for (const auto& [label, v] : c.report.per_env_rmse) curve << s << '\t' << c.method << '\t' << label << '\t' << num(v) << '\n';
      const VariableRanking& r = o.rankings[m];
      for (std::size_t pos = 0; pos < r.order.size(); ++pos) {
        rankings << s << '\t' << c.method << '\t' << pos + 1 << '\t' << r.order[pos] << '\t' << o.names[r.order[pos]]
                 << '\t' << to_string(o.roles[r.order[pos]]) << '\t' << num(r.scores[pos]) << '\n';
      }
      completed.push_back("seed=" + std::to_string(s) + " method=" + c.method);
      run.cells.push_back(c);
    }
  }

  std::ostringstream summary, curve_summary;
  summary << "method\tseeds\tprecision_mean\tprecision_sd\tunstable_rank_median\tunstable_rank_mean"
             "\taverage_error_mean\taverage_error_sd\tstability_error_mean\tstability_error_sd\n";
  curve_summary << "method\tr_test\trmse_mean\trmse_sd\n";
  for (const auto& method : run.methods) {
    std::vector<double> prec, rank, avg, stab;
    std::vector<std::vector<double>> per_r(cfg.r_test.size());
    for (const auto& c : run.cells) {
      if (c.method != method) continue;
      prec.push_back(c.report.precision_at_k);
      rank.push_back(static_cast<double>(c.report.unstable_rank));
      avg.push_back(c.report.average_error);
      stab.push_back(c.report.stability_error);
      for (std::size_t e = 0; e < per_r.size(); ++e) per_r[e].push_back(c.report.per_env_rmse[e].second);
    }
    if (prec.empty()) continue;
    summary << method << '\t' << prec.size() << '\t' << num(mean_of(prec)) << '\t' << num(sd_of(prec)) << '\t'
            << num(median_of(rank)) << '\t' << num(mean_of(rank)) << '\t' << num(mean_of(avg)) << '\t'
            << num(sd_of(avg)) << '\t' << num(mean_of(stab)) << '\t' << num(sd_of(stab)) << '\n';
    for (std::size_t e = 0; e < per_r.size(); ++e) {
      curve_summary << method << '\t' << label_of(cfg.r_test[e]) << '\t' << num(mean_of(per_r[e])) << '\t'
                    << num(sd_of(per_r[e])) << '\n';
    }
  }

  std::vector<detail::ManifestEntry> entries;
  auto emit = [&](const std::string& name, const std::string& content) {
    run.files.push_back(detail::write_file(cfg.output_dir, name, content));
    entries.push_back({name, detail::git_blob_hash(content)});
  };
  emit("per_seed.tsv", per_seed.str());
  emit("rmse_curve.tsv", curve.str());
  emit("rankings.tsv", rankings.str());
  emit("summary.tsv", summary.str());
  emit("curve_summary.tsv", curve_summary.str());
  run.files.push_back(detail::write_file(cfg.output_dir, "manifest.txt",
                                         detail::render_manifest(cfg.echo(), first_error ? "failed" : "complete",
                                                                 entries, completed)));
  if (first_error) std::rethrow_exception(first_error);
  return run;
}

GroupAssignment default_group_assignment(std::vector<std::string> keys) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  const bool numeric = std::all_of(keys.begin(), keys.end(), [](const std::string& k) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(k.data(), k.data() + k.size(), v);
    return !k.empty() && ec == std::errc() && ptr == k.data() + k.size();
  });
  if (numeric) {
    std::sort(keys.begin(), keys.end(), [](const std::string& a, const std::string& b) {
      return std::stoll(a) < std::stoll(b);
    });
  }
  if (keys.size() < 4) throw Error(ErrorKind::ConfigError, "default split needs at least 4 distinct group keys");
  const std::size_t first = (keys.size() + 1) / 2;
  const std::size_t rest = keys.size() - first;
  GroupAssignment out;
  out.emplace_back("G1", std::vector<std::string>(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(first)));
  std::size_t begin = first;
  for (std::size_t g = 0; g < 3; ++g) {
    const std::size_t size = rest / 3 + (g < rest % 3 ? 1 : 0);
    out.emplace_back("G" + std::to_string(g + 2),
                     std::vector<std::string>(keys.begin() + static_cast<std::ptrdiff_t>(begin),
                                              keys.begin() + static_cast<std::ptrdiff_t>(begin + size)));
    begin += size;
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> partition_groups(
    const std::vector<std::string>& row_keys, const GroupAssignment& assignment) {
  if (assignment.empty()) throw Error(ErrorKind::ConfigError, "empty group assignment");
  std::map<std::string, std::size_t> owner;
  std::set<std::string> labels;
  for (std::size_t g = 0; g < assignment.size(); ++g) {
    if (!labels.insert(assignment[g].first).second) {
      throw Error(ErrorKind::ConfigError, "group label '" + assignment[g].first + "' repeated");
    }
    for (const auto& key : assignment[g].second) {
      auto [it, fresh] = owner.emplace(key, g);
      if (!fresh) throw Error(ErrorKind::ConfigError, "group key '" + key + "' assigned to two groups");
    }
  }
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  for (const auto& [label, keys] : assignment) out.emplace_back(label, std::vector<std::size_t>{});
  for (std::size_t i = 0; i < row_keys.size(); ++i) {
    auto it = owner.find(row_keys[i]);
    if (it != owner.end()) out[it->second].second.push_back(i);
  }
  for (const auto& [label, rows] : out) {
    if (rows.empty()) throw Error(ErrorKind::EmptyGroup, label);
  }
  return out;
}

double RealRun::rmse_at(const std::string& method, std::size_t k, const std::string& group) const {
  for (const auto& pt : curve) {
    if (pt.method == method && pt.k == k && pt.group == group) return pt.rmse;
  }
  throw Error(ErrorKind::InvalidArgument, "no curve point for " + method + " k=" + std::to_string(k) + " " + group);
}

RealRun run_real(const ExperimentConfig& cfg) {
  if (cfg.mode != Mode::Real) throw Error(ErrorKind::ConfigError, "run_real needs real mode");
  cfg.validate();
  const CsvTable table = load_csv(cfg.input_path, cfg.response_column, cfg.group_column, cfg.exclude_columns);
  const GroupAssignment assignment =
      cfg.group_assignment.empty() ? default_group_assignment(table.group_keys) : cfg.group_assignment;
  const auto groups = partition_groups(table.group_keys, assignment);

  RealRun run;
  std::vector<Dataset> group_data;
  for (const auto& [label, rows] : groups) {
    group_data.push_back(select_rows(table.data, rows));
    run.group_rows.emplace_back(label, rows.size());
  }
  // The first configured group is the training environment.
  const Standardization scaler = fit_standardization(group_data.front());
  std::vector<Dataset> scaled;
  for (const auto& g : group_data) scaled.push_back(scaler.apply(g));
  const Dataset& train = scaled.front();

  SeparationConfig sep;
  sep.seed_variable = cfg.resolve_seed(train.names());
  sep.method = cfg.ci_method;
  sep.rcit = cfg.rcit;
  sep.rcit.rng_seed = Rng(cfg.rng_seed).split(1000).seed();
  const CiRanking ours = rank_by_ci(train, sep);
  const std::string ours_name = ours_label(cfg);
  run.rankings.emplace(ours_name, ours.ranking);
  run.rankings.emplace(kCorrelationLabel, correlation_ranking(train));

  const std::vector<std::string> methods = {ours_name, kCorrelationLabel};
  const std::size_t p = train.cols();
  for (const auto& method : methods) {
    const VariableRanking& r = run.rankings.at(method);
    for (std::size_t k = 1; k <= p; ++k) {
      const LinearModel model = ols_fit(train, select_top_k(r, k));
      for (std::size_t g = 0; g < scaled.size(); ++g) {
        run.curve.push_back({method, k, groups[g].first, rmse(model, scaled[g])});
      }
    }
  }

  std::ostringstream curve, rankings, group_file;
  curve << "method\tk\tgroup\trmse\n";
  for (const auto& pt : run.curve) curve << pt.method << '\t' << pt.k << '\t' << pt.group << '\t' << num(pt.rmse) << '\n';
  rankings << "method\trank\tvariable\tname\tscore\n";
  for (const auto& method : methods) {
    const VariableRanking& r = run.rankings.at(method);
    for (std::size_t pos = 0; pos < r.order.size(); ++pos) {
      rankings << method << '\t' << pos + 1 << '\t' << r.order[pos] << '\t' << train.names()[r.order[pos]] << '\t'
               << num(r.scores[pos]) << '\n';
    }
  }
  group_file << "group\trows\tkeys\n";
  for (std::size_t g = 0; g < assignment.size(); ++g) {
    std::string keys;
    for (std::size_t i = 0; i < assignment[g].second.size(); ++i) keys += (i ? "," : "") + assignment[g].second[i];
    group_file << assignment[g].first << '\t' << run.group_rows[g].second << '\t' << keys << '\n';
  }

  std::vector<detail::ManifestEntry> entries;
  auto emit = [&](const std::string& name, const std::string& content) {
    run.files.push_back(detail::write_file(cfg.output_dir, name, content));
    entries.push_back({name, detail::git_blob_hash(content)});
  };
  emit("real_rmse.tsv", curve.str());
  emit("real_rankings.tsv", rankings.str());
  emit("groups.tsv", group_file.str());
  std::string echo = cfg.echo();
  echo += "seed-resolved = " + train.names()[ours.seed] + '\n';
  run.files.push_back(detail::write_file(cfg.output_dir, "manifest.txt",
                                         detail::render_manifest(echo, "complete", entries, {})));
  return run;
}

}  // namespace stablesep::cli
