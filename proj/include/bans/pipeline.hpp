#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bans/datagen.hpp"
#include "bans/inference.hpp"
#include "bans/metrics.hpp"
#include "bans/sampler.hpp"

namespace bans {

/// A simulation study: `replicates` independent (graph, parameters, data)
/// draws, each fitted and scored against its own generating graph.
struct ScenarioConfig {
  GenConfig gen;  // gen.seed is the root seed of the study
  PriorConfig prior;
  RunConfig run;  // run.seed is replaced per replicate; run.jobs applies within a chain
  Mode mode = Mode::Bans;
  Symmetrize symmetrize = Symmetrize::And;
  double alpha = 0.1;
  int replicates = 1;
  int jobs = 1;        // replicates fitted concurrently
  bool signs = false;  // structured sign run on the true structure
  bool curves = false; // keep ROC and MCC curves
};

struct Replicate {
  int index = 0;
  std::uint64_t seed = 0;
  MlggmParameters params;
  Dataset data;
};

/// Seeds: replicate root = derive_seed(root, {Replicate, r}); the graph and
/// parameters use it directly, the data stream appends {Data}, the chain
/// {Chain, 0} and the sign run {Chain, 1}.
std::uint64_t replicate_seed(std::uint64_t root, int r);
std::uint64_t chain_seed(std::uint64_t replicate_root, int chain);
Replicate simulate_replicate(const GenConfig& gen, int r);

/// Sign of the coefficient that an edge's sign probability refers to: b_vw
/// for w -> v, alpha_uv = -K_uv / K_vv for u - v.
int true_sign(const MlggmParameters& params, const Edge& e);

struct ReplicateResult {
  int replicate = 0;
  long true_edges = 0;
  long discoveries = 0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double mcc = 0.0;
  double pauc = 0.0;
  double auc = 0.0;
  double phi = 1.0;
  double fdr = 0.0;           // mean 1 - g over the selection
  double expected_fdr = 0.0;  // mean 1 - g over g > phi; NaN when no score exceeds phi
  long invariant_violations = 0;
  double seconds = 0.0;
  double seconds_per_sweep = 0.0;
  std::vector<double> sign_prob;  // true edges, with sign_positive alongside
  std::vector<std::uint8_t> sign_positive;
  std::vector<RocPoint> roc;
  std::vector<MccPoint> mcc_curve;
};

/// Selection at FDR alpha plus threshold-free scores against `truth`.
ReplicateResult score_fit(const ChainGraph& truth, std::span<const EdgeScore> scores, double alpha, bool curves);

ReplicateResult run_replicate(const ScenarioConfig& cfg, int r);
std::vector<ReplicateResult> run_scenario(const ScenarioConfig& cfg);

struct ColumnSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
};

/// Mean, s.d. and standard error of the summary columns across replicates.
std::vector<ColumnSummary> summarize(std::span<const ReplicateResult> results);

/// AUC of P(positive sign) against the true signs, pooled over replicates;
/// NaN when either sign class is absent.
double pooled_sign_auc(std::span<const ReplicateResult> results);

}  // namespace bans
