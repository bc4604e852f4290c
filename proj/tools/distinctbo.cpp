// distinctbo: synthetic data, batch experiments, reports and the ranking
// service.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "distinctbo/errors.h"
#include "distinctbo/experiment.h"
#include "distinctbo/service.h"

namespace {

using namespace distinctbo;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t parse_u64(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ConfigError(flag + ": \"" + s + "\" is not a non-negative integer");
  return v;
}

// "1..10" or "1,4,9".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(text, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_u64(part, "--seeds"));
      continue;
    }
    const auto lo = parse_u64(part.substr(0, dots), "--seeds");
    const auto hi = parse_u64(part.substr(dots + 2), "--seeds");
    if (hi < lo) throw ConfigError("--seeds: empty range " + part);
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ConfigError("--seeds: no seeds given");
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size()) throw ConfigError(flag + ": \"" + part + "\" is not a number");
    out.push_back(v);
  }
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

Eigen::VectorXd per_asset(const std::vector<double>& values, std::size_t assets, const std::string& flag) {
  if (values.size() == 1) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(assets), values[0]);
  if (values.size() != assets) throw ConfigError(flag + ": expected 1 or " + std::to_string(assets) + " values");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

struct GenDataArgs {
  std::size_t assets = 5;
  std::size_t days = 260;
  std::uint64_t seed = 0;
  std::string correlation = "two-group";
  std::string drift;
  std::string vol;
  std::string start = "2016-01-04";
  bool sectors = false;
  std::string out;
};

int gen_data(const GenDataArgs& a) {
  SyntheticMarketSpec spec;
  if (a.sectors) {
    spec = two_group_market_spec(a.days);
  } else {
    spec.assets = default_asset_names(a.assets);
    spec.daily_drift = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(a.assets), 3e-4);
    spec.daily_vol = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(a.assets), 0.012);
    spec.days = a.days;
    if (a.correlation == "identity") {
      spec.correlation = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(a.assets),
                                                   static_cast<Eigen::Index>(a.assets));
    } else if (a.correlation == "two-group") {
      spec.correlation = two_group_correlation(a.assets, (a.assets + 1) / 2, 0.6, -0.5);
    } else {
      const Json m = read_json_file(a.correlation);
      if (!m.is_array() || m.size() != a.assets) throw ConfigError("--correlation: expected an assets x assets array");
      spec.correlation.resize(static_cast<Eigen::Index>(a.assets), static_cast<Eigen::Index>(a.assets));
      for (std::size_t i = 0; i < a.assets; ++i) {
        if (!m[i].is_array() || m[i].size() != a.assets) throw ConfigError("--correlation: row " + std::to_string(i) + " has the wrong length");
        for (std::size_t k = 0; k < a.assets; ++k) {
          spec.correlation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = m[i][k].get<double>();
        }
      }
    }
  }
  if (!a.drift.empty()) spec.daily_drift = per_asset(parse_doubles(a.drift, "--drift"), spec.assets.size(), "--drift");
  if (!a.vol.empty()) spec.daily_vol = per_asset(parse_doubles(a.vol, "--vol"), spec.assets.size(), "--vol");
  try {
    spec.start = parse_date(a.start);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--start: ") + e.what());
  }
  write_text(a.out, format_price_csv(generate_market(spec, a.seed)));
  return 0;
}

struct RunArgs {
  std::string config;
  std::string seeds;
  std::string alpha;
  std::string out_dir;
  std::size_t parallel = 0;
  bool emit_frontier = false;
};

int run(const RunArgs& a) {
  const std::filesystem::path config_path(a.config);
  ExperimentConfig config = experiment_config_from_json(read_json_file(config_path), config_path.parent_path());
  if (!a.seeds.empty()) config.seeds = parse_seeds(a.seeds);
  if (!a.alpha.empty()) {
    config.alphas = parse_doubles(a.alpha, "--alpha");
    for (const double v : config.alphas) {
      if (!(v > 0.0 && v < 1.0)) throw ConfigError("--alpha: each alpha must lie in (0, 1)");
    }
  }
  if (!a.out_dir.empty()) config.out_dir = a.out_dir;
  if (a.parallel > 0) config.parallel = a.parallel;
  if (a.emit_frontier) config.emit_frontier = true;

  const PriceSeries series = load_price_series_file(config.data_path);
  const auto outcomes = run_experiment(config, series);
  for (const auto& path : write_experiment_outputs(config, outcomes)) std::cout << path.string() << "\n";
  for (const auto& o : outcomes) {
    if (!o.nesting_verified) {
      std::cerr << "seed " << o.seed << ": efficient sets are not nested across alphas\n";
      return kExitRuntime;
    }
  }
  return 0;
}

struct ReportArgs {
  std::vector<std::string> results;
  std::string data;
  double alpha = -1.0;
  std::size_t horizon = 0;
  std::size_t replicates = 0;
  std::string out;
};

int report(const ReportArgs& a) {
  std::string text;
  for (const auto& path : a.results) {
    const Json doc = read_json_file(path);
    std::filesystem::path data = a.data.empty() ? std::filesystem::path(doc.at("data").get<std::string>())
                                                : std::filesystem::path(a.data);
    const PriceSeries series = load_price_series_file(data);
    const double alpha = a.alpha > 0.0 ? a.alpha : doc.at("alpha").get<double>();
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("--alpha: must lie in (0, 1)");
    const std::size_t horizon = a.horizon > 0 ? a.horizon : doc.value("horizon", std::size_t{1});
    const InclusionRule rule = inclusion_rule_from_string(doc.value("inclusion_rule", "all-preceding"));
    // The stored seed is the stream the run used, so the table reproduces.
    RandomBaseline rb;
    const Json& stored = doc.at("random_baseline");
    rb.k = stored.at("k").get<std::size_t>();
    rb.replicates = stored.at("replicates").get<std::size_t>();
    rb.seed = stored.at("seed").get<std::uint64_t>();
    if (a.replicates > 0) rb.replicates = a.replicates;
    const auto outcomes = outcomes_from_json(doc);
    const StrategyReport r = evaluate_strategies(series, outcomes, alpha, rb, horizon, rule);
    if (a.results.size() > 1) text += "# " + path + "\n";
    text += report_csv(r);
  }
  write_text(a.out, text);
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "sessions";
  std::string ui_dir;
  std::string seed_policy = "config";
};

const char* env_or(const char* name, const char* fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distinctness-aware Bayesian portfolio search"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic price CSV");
  gen_cmd->add_option("--assets", gen.assets, "Number of assets")->check(CLI::Range(2, 64));
  gen_cmd->add_option("--days", gen.days, "Trading days")->check(CLI::Range(11, 100000));
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--correlation", gen.correlation, "identity, two-group, or a JSON matrix file");
  gen_cmd->add_option("--drift", gen.drift, "Daily log drift, one value or one per asset");
  gen_cmd->add_option("--vol", gen.vol, "Daily volatility, one value or one per asset");
  gen_cmd->add_option("--start", gen.start, "First trading day (YYYY-MM-DD)");
  gen_cmd->add_flag("--sectors", gen.sectors, "Five named sectors in two anticorrelated groups");
  gen_cmd->add_option("--out,-o", gen.out, "Output file (stdout when omitted)");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run sessions for every trade date and seed");
  run_cmd->add_option("--config,-c", run_args.config, "Experiment config JSON")->required();
  run_cmd->add_option("--seeds,--seed", run_args.seeds, "Seeds, e.g. 1..10 or 1,2,5");
  run_cmd->add_option("--alpha", run_args.alpha, "Comma-separated alphas for efficient sets");
  run_cmd->add_option("--out-dir", run_args.out_dir, "Output directory");
  run_cmd->add_option("--parallel", run_args.parallel, "Worker threads");
  run_cmd->add_flag("--emit-frontier", run_args.emit_frontier, "Write per-candidate inclusion thresholds");

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Recompute the strategy table from result files");
  report_cmd->add_option("results", report_args.results, "result_seed*.json files")->required();
  report_cmd->add_option("--data", report_args.data, "Price CSV (defaults to the one recorded)");
  report_cmd->add_option("--alpha", report_args.alpha, "Alpha for the efficient sets");
  report_cmd->add_option("--horizon", report_args.horizon, "Holding period in trading days");
  report_cmd->add_option("--replicates", report_args.replicates, "Random-supplement replicates");
  report_cmd->add_option("--out,-o", report_args.out, "Output CSV (stdout when omitted)");

  ServeArgs serve_args;
  serve_args.host = env_or("DISTINCTBO_HOST", "127.0.0.1");
  serve_args.data_dir = env_or("DISTINCTBO_DATA_DIR", "sessions");
  serve_args.ui_dir = env_or("DISTINCTBO_UI_DIR", "");
  serve_args.port = std::atoi(env_or("DISTINCTBO_PORT", "8080"));
  auto* serve_cmd = app.add_subcommand("serve", "Run the ranking service");
  serve_cmd->add_option("--host", serve_args.host, "Bind address");
  serve_cmd->add_option("--port", serve_args.port, "Port (0 picks a free one)");
  serve_cmd->add_option("--data-dir", serve_args.data_dir, "Session store directory");
  serve_cmd->add_option("--ui-dir", serve_args.ui_dir, "Built UI served at /");
  serve_cmd->add_option("--seed-policy", serve_args.seed_policy, "config or random")
      ->check(CLI::IsMember({"config", "random"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen_cmd) return gen_data(gen);
    if (*run_cmd) return run(run_args);
    if (*report_cmd) return report(report_args);
    if (*serve_cmd) {
      ServiceOptions options;
      options.data_dir = serve_args.data_dir;
      options.ui_dir = serve_args.ui_dir;
      options.base_dir = std::filesystem::current_path();
      options.random_seeds = serve_args.seed_policy == "random";
      return serve(options, serve_args.host, serve_args.port);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
