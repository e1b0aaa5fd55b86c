#include "fredom/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "fredom/admm.hpp"
#include "fredom/baseline.hpp"
#include "fredom/exfredom.hpp"
#include "fredom/metrics.hpp"
#include "fredom/spectral.hpp"

namespace fredom {
namespace {

SpectralStack spectra_for(const TimeSeriesMatrix& x, const LearnOptions& opts) {
  if (opts.half_window) return sample_spectral_stack(dft(demean(x)), *opts.half_window);
  return estimate_spectra(x, opts.m_target);
}

std::size_t design_lag(const std::string& name) { return name == "expB" ? 3 : 1; }

std::string fmt(double v, int digits) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

TopologicalOrder learn_order(const TimeSeriesMatrix& x, const LearnOptions& opts) {
  return consensus_order(order_per_frequency(spectra_for(x, opts)));
}

LearnResult learn(const TimeSeriesMatrix& x, const LearnOptions& opts) {
  x.validate();
  const auto labels = x.labels.empty() ? default_labels(x.dim()) : x.labels;
  LearnResult out;
  if (opts.method == "fredom") {
    const SpectralStack stack = spectra_for(x, opts);
    const TopologicalOrder order = consensus_order(order_per_frequency(stack));
    out.order = order;
    if (opts.lambda) {
      out.dag = fredom_fit(stack, order, *opts.lambda).dag;
      out.lambda = opts.lambda;
    } else {
      LambdaPath path = ebic_path(stack, order, opts.grid_size, opts.gamma);
      out.dag = std::move(path.fits[path.chosen].dag);
      out.lambda = path.grid[path.chosen];
    }
  } else if (opts.method == "exfredom") {
    ExfredomConfig cfg;
    cfg.w_thresh = opts.w_thresh;
    const double lambda = opts.lambda.value_or(opts.exfredom_lambda);
    out.dag = exfredom_fit(dft(demean(x)), opts.m_target, lambda, cfg).dag;
    out.lambda = lambda;
  } else if (opts.method == "tseqvar") {
    TseqvarResult r = tseqvar(x, opts.var_lag, opts.prune);
    out.dag = std::move(r.collapsed);
    out.order = r.order;
  } else {
    throw InvalidArgument("unknown method '" + opts.method + "' (expected fredom, exfredom or tseqvar)");
  }
  out.dag.labels = labels;
  return out;
}

std::vector<std::string> default_methods(const std::string& experiment) {
  if (experiment == "exp1") return {"fredom"};
  if (experiment == "exp2" || experiment == "expA") return {"fredom", "exfredom", "tseqvar"};
  if (experiment == "expB") return {"fredom", "tseqvar"};
  if (experiment == "expC") return {"fredom", "exfredom"};
  throw InvalidArgument("unknown experiment '" + experiment + "' (expected exp1, exp2, expA, expB or expC)");
}

GroundTruth simulate_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::uint64_t model_seed = replicate_seed(seed, 0), data_seed = replicate_seed(seed, 1);
  if (cfg.name == "exp1") return generate_transfer_ts(make_experiment1_model(cfg.K, cfg.s, model_seed), cfg.T, data_seed);
  if (cfg.name == "exp2") return generate_nonlinear_svar(cfg.T, data_seed);
  if (cfg.name == "expA") return generate_svar(make_experiment_a_model(model_seed), cfg.T, data_seed);
  if (cfg.name == "expB") return generate_svar(make_experiment_b_model(cfg.K, model_seed), cfg.T, data_seed);
  if (cfg.name == "expC") return generate_cscm(cfg.K, cfg.T, seed);
  throw InvalidArgument("unknown experiment '" + cfg.name + "' (expected exp1, exp2, expA, expB or expC)");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const std::vector<std::string> methods = cfg.methods.empty() ? default_methods(cfg.name) : cfg.methods;
  if (cfg.reps == 0) throw InvalidArgument("need at least one replicate");
  for (const auto& m : methods)
    if (m != "fredom" && m != "exfredom" && m != "tseqvar") throw InvalidArgument("unknown method '" + m + "'");
  default_methods(cfg.name);

  LearnOptions base = cfg.learn;
  if (base.var_lag == 0) base.var_lag = design_lag(cfg.name);

  std::vector<std::vector<ReplicateRecord>> slots(cfg.reps);
  std::vector<std::string> errors(cfg.reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < cfg.reps; r = next++) {
      try {
        const std::uint64_t seed = replicate_seed(cfg.seed, r);
        const GroundTruth gt = simulate_experiment(cfg, seed);
        for (const auto& m : methods) {
          LearnOptions opts = base;
          opts.method = m;
          const LearnResult fit = learn(gt.series, opts);
          ReplicateRecord rec;
          rec.rep = r;
          rec.seed = seed;
          rec.method = m;
          rec.shd = shd(fit.dag, gt.dag);
          rec.sid = sid(fit.dag, gt.dag);
          rec.edges = fit.dag.edge_count();
          rec.true_edges = gt.dag.edge_count();
          rec.lambda = fit.lambda;
          slots[r].push_back(rec);
        }
      } catch (const std::exception& e) {
        errors[r] = e.what();
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, cfg.reps));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t r = 0; r < cfg.reps; ++r)
    if (!errors[r].empty()) throw ReplicateError(r, errors[r]);

  ExperimentResult result;
  result.config = cfg;
  result.config.methods = methods;
  for (auto& s : slots) result.records.insert(result.records.end(), s.begin(), s.end());
  result.summary = summarize(result.records);
  return result;
}

std::vector<MethodSummary> summarize(const std::vector<ReplicateRecord>& records) {
  std::vector<MethodSummary> out;
  std::vector<std::string> order;
  for (const auto& r : records)
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
  for (const auto& m : order) {
    std::vector<double> shds, sids;
    for (const auto& r : records)
      if (r.method == m) {
        shds.push_back(r.shd);
        sids.push_back(r.sid);
      }
    MethodSummary s;
    s.method = m;
    s.reps = shds.size();
    mean_sd(shds, s.mean_shd, s.sd_shd);
    mean_sd(sids, s.mean_sid, s.sd_sid);
    s.median_shd = median(shds);
    s.median_sid = median(sids);
    out.push_back(s);
  }
  return out;
}

std::string replicates_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "experiment,rep,seed,method,shd,sid,edges,true_edges,lambda\n";
  for (const auto& r : result.records) {
    os << result.config.name << ',' << r.rep << ',' << r.seed << ',' << r.method << ',' << r.shd << ',' << r.sid
       << ',' << r.edges << ',' << r.true_edges << ',' << (r.lambda ? fmt(*r.lambda, 17) : "") << '\n';
  }
  return os.str();
}

std::string summary_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "experiment,method,reps,mean_shd,sd_shd,median_shd,mean_sid,sd_sid,median_sid\n";
  for (const auto& s : result.summary)
    os << result.config.name << ',' << s.method << ',' << s.reps << ',' << fmt(s.mean_shd, 4) << ','
       << fmt(s.sd_shd, 4) << ',' << fmt(s.median_shd, 4) << ',' << fmt(s.mean_sid, 4) << ',' << fmt(s.sd_sid, 4)
       << ',' << fmt(s.median_sid, 4) << '\n';
  return os.str();
}

void write_experiment(const ExperimentResult& result, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw InvalidArgument("cannot create " + out_dir + ": " + ec.message());
  for (const auto& [file, text] : {std::pair{std::string("replicates.csv"), replicates_csv(result)},
                                   std::pair{std::string("summary.csv"), summary_csv(result)}}) {
    const auto path = (std::filesystem::path(out_dir) / file).string();
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw InvalidArgument("cannot write " + path);
  }
}

}  // namespace fredom
