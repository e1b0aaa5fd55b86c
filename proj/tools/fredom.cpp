// Command-line front end: simulate, order, learn, metrics and experiment.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "fredom/io.hpp"
#include "fredom/metrics.hpp"
#include "fredom/pipeline.hpp"
#include "json.hpp"

using namespace fredom;

namespace {

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw InvalidArgument("cannot write " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// A DAG file in csv or json form, told apart by extension.
SummaryDag read_dag(const std::string& path) {
  const std::string text = read_file(path);
  if (ends_with(path, ".json")) return parse_dag_json(text).dag;
  if (ends_with(path, ".csv")) return parse_dag_csv(text);
  throw InvalidArgument(path + ": DAG files must end in .csv or .json");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

CLI::App* subcommand(CLI::App& app, const std::string& name, const std::string& help, std::string& config) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", config, "key=value file with defaults for this command's long options");
  return sub;
}

// Feeds a value to an option the command line left unset.
void fill_unset(CLI::Option* opt, const std::string& value) {
  if (opt->count() != 0) return;
  opt->add_result(value);
  opt->run_callback();
}

// Lines are `key = value` with keys naming long options; blank lines and
// lines starting with # are skipped.
void apply_config(CLI::App* sub, const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError(path + ":" + std::to_string(n), "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
    if (opt == nullptr)
      throw CLI::ValidationError(path + ":" + std::to_string(n), "unknown key '" + key + "' for " + sub->get_name());
    fill_unset(opt, trim(line.substr(eq + 1)));
  }
}

CLI::Option* add_seed(CLI::App* sub, std::uint64_t& seed) {
  return sub->add_option("--seed", seed, "random seed (fallback: FREDOM_SEED)")->capture_default_str();
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw CLI::RequiredError(flag);
}

struct SpectralFlags {
  std::size_t m_blocks = 8;
  std::optional<int> half_window;

  void add(CLI::App* sub) {
    sub->add_option("--m-blocks", m_blocks, "target number of frequency blocks")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--half-window", half_window, "smoothing half-window, overriding --m-blocks")
        ->check(CLI::NonNegativeNumber);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain causal discovery for multivariate time series"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config;
  CLI::App* sim = subcommand(app, "simulate", "generate a replicate of an experiment design", sim_config);
  std::string sim_name = "exp1", sim_out, sim_truth, sim_format = "csv";
  std::size_t sim_K = 5, sim_T = 1000;
  double sim_s = 0.2;
  std::uint64_t sim_seed = 1;
  sim->add_option("--experiment", sim_name, "exp1, exp2, expA, expB or expC")
      ->check(CLI::IsMember({"exp1", "exp2", "expA", "expB", "expC"}))
      ->capture_default_str();
  sim->add_option("--K", sim_K, "dimension where the design allows it")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--T", sim_T, "series length")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--s", sim_s, "edge probability of exp1")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sim->add_option("--output", sim_out, "series CSV (default: standard output)");
  sim->add_option("--truth", sim_truth, "where to write the true summary DAG");
  sim->add_option("--format", sim_format, "format of --truth")->check(CLI::IsMember({"csv", "json", "dot"}))->capture_default_str();
  CLI::Option* sim_seed_opt = add_seed(sim, sim_seed);

  // order
  std::string ord_config;
  CLI::App* ord = subcommand(app, "order", "estimate a topological ordering", ord_config);
  std::string ord_in, ord_kind = "real", ord_out;
  SpectralFlags ord_spec;
  ord->add_option("--input", ord_in, "series CSV")->option_text("PATH (required)");
  ord->add_option("--kind", ord_kind, "real or complex")->check(CLI::IsMember({"real", "complex"}))->capture_default_str();
  ord_spec.add(ord);
  ord->add_option("--output", ord_out, "JSON output (default: standard output)");

  // learn
  std::string lrn_config;
  CLI::App* lrn = subcommand(app, "learn", "learn a summary DAG", lrn_config);
  std::string lrn_in, lrn_kind = "real", lrn_out, lrn_format = "json";
  LearnOptions lo;
  std::optional<double> lrn_lambda;
  SpectralFlags lrn_spec;
  lrn->add_option("--input", lrn_in, "series CSV")->option_text("PATH (required)");
  lrn->add_option("--kind", lrn_kind, "real or complex")->check(CLI::IsMember({"real", "complex"}))->capture_default_str();
  lrn->add_option("--method", lo.method, "fredom, exfredom or tseqvar")
      ->check(CLI::IsMember({"fredom", "exfredom", "tseqvar"}))
      ->capture_default_str();
  lrn->add_option("--lambda", lrn_lambda, "fixed penalty (fredom otherwise selects one by eBIC)")->check(CLI::NonNegativeNumber);
  lrn_spec.add(lrn);
  lrn->add_option("--grid-size", lo.grid_size, "eBIC grid size")->check(CLI::PositiveNumber)->capture_default_str();
  lrn->add_option("--gamma", lo.gamma, "eBIC gamma")->check(CLI::NonNegativeNumber)->capture_default_str();
  lrn->add_option("--w-thresh", lo.w_thresh, "exfredom weight threshold")->check(CLI::NonNegativeNumber)->capture_default_str();
  lrn->add_option("--prune", lo.prune, "tseqvar contemporaneous pruning threshold")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  lrn->add_option("--var-lag", lo.var_lag, "tseqvar VAR order")->capture_default_str();
  lrn->add_option("--format", lrn_format, "csv, json or dot")->check(CLI::IsMember({"csv", "json", "dot"}))->capture_default_str();
  lrn->add_option("--output", lrn_out, "DAG output (default: standard output)");

  // metrics
  std::string met_config;
  CLI::App* met = subcommand(app, "metrics", "compare an estimated DAG with the truth", met_config);
  std::string met_est, met_truth;
  met->add_option("--input", met_est, "estimated DAG (.csv or .json)")->option_text("PATH (required)");
  met->add_option("--truth", met_truth, "true DAG (.csv or .json)")->option_text("PATH (required)");

  // experiment
  std::string exp_config;
  CLI::App* exp = subcommand(app, "experiment", "run replicates of an experiment and score them", exp_config);
  ExperimentConfig ec;
  ec.jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string exp_out = ".";
  std::optional<double> exp_lambda;
  SpectralFlags exp_spec;
  exp->add_option("--name", ec.name, "exp1, exp2, expA, expB or expC")
      ->check(CLI::IsMember({"exp1", "exp2", "expA", "expB", "expC"}))
      ->capture_default_str();
  exp->add_option("--K", ec.K, "dimension where the design allows it")->check(CLI::PositiveNumber)->capture_default_str();
  exp->add_option("--T", ec.T, "series length")->check(CLI::PositiveNumber)->capture_default_str();
  exp->add_option("--s", ec.s, "edge probability of exp1")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  exp->add_option("--reps", ec.reps, "replicates")->check(CLI::PositiveNumber)->capture_default_str();
  exp->add_option("--jobs", ec.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  exp->add_option("--method", ec.methods, "methods to run (default: the design's)")
      ->check(CLI::IsMember({"fredom", "exfredom", "tseqvar"}));
  exp->add_option("--lambda", exp_lambda, "fixed penalty for fredom and exfredom")->check(CLI::NonNegativeNumber);
  exp_spec.add(exp);
  exp->add_option("--output", exp_out, "directory for replicates.csv and summary.csv")->capture_default_str();
  CLI::Option* exp_seed_opt = add_seed(exp, ec.seed);

  try {
    app.parse(argc, argv);
    // Precedence: flags, then the config file, then FREDOM_SEED, then defaults.
    const std::pair<CLI::App*, std::string*> subs[] = {
        {sim, &sim_config}, {ord, &ord_config}, {lrn, &lrn_config}, {met, &met_config}, {exp, &exp_config}};
    for (const auto& [sub, config] : subs)
      if (*sub && !config->empty()) apply_config(sub, *config);
    if (const char* env = std::getenv("FREDOM_SEED"))
      for (const auto& [sub, opt] : {std::pair{sim, sim_seed_opt}, std::pair{exp, exp_seed_opt}})
        if (*sub) fill_unset(opt, env);
    if (*ord) require(ord_in, "--input");
    if (*lrn) require(lrn_in, "--input");
    if (*met) {
      require(met_est, "--input");
      require(met_truth, "--truth");
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "fredom: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*sim) {
      ExperimentConfig cfg;
      cfg.name = sim_name;
      cfg.K = sim_K;
      cfg.T = sim_T;
      cfg.s = sim_s;
      const GroundTruth gt = simulate_experiment(cfg, sim_seed);
      std::ostringstream os;
      write_series(gt.series, os);
      write_output(os.str(), sim_out);
      if (!sim_truth.empty()) {
        SummaryDag truth = gt.dag;
        truth.labels = gt.series.labels;
        DagMetadata meta;
        meta.order = gt.order;
        emit_dag(truth, parse_dag_format(sim_format), sim_truth, meta);
      }
    } else if (*ord) {
      const TimeSeriesMatrix x = ingest(ord_in, parse_series_kind(ord_kind));
      LearnOptions o;
      o.m_target = ord_spec.m_blocks;
      o.half_window = ord_spec.half_window;
      const TopologicalOrder order = learn_order(x, o);
      nlohmann::ordered_json j;
      std::vector<std::string> names;
      for (int k : order.perm) names.push_back(x.labels.at(static_cast<std::size_t>(k)));
      j["order"] = names;
      j["support"] = order.support;
      write_output(j.dump(2) + "\n", ord_out);
    } else if (*lrn) {
      const TimeSeriesMatrix x = ingest(lrn_in, parse_series_kind(lrn_kind));
      lo.m_target = lrn_spec.m_blocks;
      lo.half_window = lrn_spec.half_window;
      lo.lambda = lrn_lambda;
      const LearnResult r = learn(x, lo);
      DagMetadata meta;
      meta.order = r.order;
      meta.lambda = r.lambda;
      write_output(render_dag(r.dag, parse_dag_format(lrn_format), meta), lrn_out);
    } else if (*met) {
      const SummaryDag est = read_dag(met_est), truth = read_dag(met_truth);
      if (est.dim() != truth.dim()) throw InvalidArgument("DAGs have different numbers of nodes");
      std::cout << "shd,sid\n" << shd(est, truth) << ',' << sid(est, truth) << '\n';
    } else if (*exp) {
      ec.learn.m_target = exp_spec.m_blocks;
      ec.learn.half_window = exp_spec.half_window;
      ec.learn.lambda = exp_lambda;
      const ExperimentResult res = run_experiment(ec);
      write_experiment(res, exp_out);
      std::cout << summary_csv(res);
    }
  } catch (const std::exception& e) {
    std::cerr << "fredom: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
