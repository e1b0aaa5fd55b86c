#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fredom/dag.hpp"
#include "fredom/ordering.hpp"
#include "fredom/simgen.hpp"
#include "fredom/types.hpp"

namespace fredom {

struct LearnOptions {
  /// fredom, exfredom or tseqvar.
  std::string method = "fredom";
  std::size_t m_target = 8;
  /// Overrides the smoothing half-window chosen from m_target.
  std::optional<int> half_window;
  /// Fixed penalty; fredom otherwise selects one by eBIC.
  std::optional<double> lambda;
  std::size_t grid_size = 20;
  double gamma = 0.5;
  double exfredom_lambda = 0.05;
  double w_thresh = 0.3;
  double prune = 0.1;
  std::size_t var_lag = 1;
};

struct LearnResult {
  SummaryDag dag;
  std::optional<TopologicalOrder> order;
  std::optional<double> lambda;
};

/// Ordering step of fredom alone.
TopologicalOrder learn_order(const TimeSeriesMatrix& x, const LearnOptions& opts = {});

LearnResult learn(const TimeSeriesMatrix& x, const LearnOptions& opts = {});

struct ExperimentConfig {
  /// exp1, exp2, expA, expB or expC.
  std::string name = "exp1";
  /// Dimension for exp1, expB and expC; fixed by the design elsewhere.
  std::size_t K = 5;
  std::size_t T = 1000;
  /// Edge probability of exp1.
  double s = 0.2;
  std::size_t reps = 50;
  std::uint64_t seed = 1;
  /// Empty selects the experiment's default methods.
  std::vector<std::string> methods;
  /// var_lag == 0 selects the design's lag order.
  LearnOptions learn = [] {
    LearnOptions o;
    o.var_lag = 0;
    return o;
  }();
  std::size_t jobs = 1;
};

struct ReplicateRecord {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::string method;
  int shd = 0;
  int sid = 0;
  std::size_t edges = 0;
  std::size_t true_edges = 0;
  std::optional<double> lambda;
};

struct MethodSummary {
  std::string method;
  std::size_t reps = 0;
  double mean_shd = 0.0, sd_shd = 0.0, median_shd = 0.0;
  double mean_sid = 0.0, sd_sid = 0.0, median_sid = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  /// Ordered by replicate, then by method.
  std::vector<ReplicateRecord> records;
  std::vector<MethodSummary> summary;
};

/// Raised when a replicate fails; carries its index.
class ReplicateError : public std::runtime_error {
 public:
  ReplicateError(std::size_t rep, const std::string& what)
      : std::runtime_error("replicate " + std::to_string(rep) + ": " + what), replicate(rep) {}
  std::size_t replicate;
};

std::vector<std::string> default_methods(const std::string& experiment);

/// Data and truth of one replicate of the named design.
GroundTruth simulate_experiment(const ExperimentConfig& cfg, std::uint64_t replicate_seed_value);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::vector<MethodSummary> summarize(const std::vector<ReplicateRecord>& records);

/// replicates.csv (17 significant digits) and summary.csv (4 significant digits).
std::string replicates_csv(const ExperimentResult& result);
std::string summary_csv(const ExperimentResult& result);
void write_experiment(const ExperimentResult& result, const std::string& out_dir);

}  // namespace fredom
