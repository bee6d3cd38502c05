#include "bans/pipeline.hpp"

#include <cmath>
#include <limits>

#include "bans/errors.hpp"
#include "bans/random.hpp"
#include "bans/worker_pool.hpp"

namespace bans {

std::uint64_t replicate_seed(std::uint64_t root, int r) {
  return rng::derive_seed(root, {rng::tag(rng::Tag::Replicate), static_cast<std::uint64_t>(r)});
}

std::uint64_t chain_seed(std::uint64_t replicate_root, int chain) {
  return rng::derive_seed(replicate_root, {rng::tag(rng::Tag::Chain), static_cast<std::uint64_t>(chain)});
}

Replicate simulate_replicate(const GenConfig& gen, int r) {
  gen.validate();
  GenConfig cfg = gen;
  cfg.seed = replicate_seed(gen.seed, r);
  const ChainGraph graph = random_chain_graph(cfg);
  MlggmParameters params = sample_parameters(graph, cfg);
  rng::Stream stream = rng::make_stream(cfg.seed, {rng::tag(rng::Tag::Data)});
  Dataset data = sample_data(params, graph, cfg.n, stream);
  return {r, cfg.seed, std::move(params), std::move(data)};
}

int true_sign(const MlggmParameters& params, const Edge& e) {
  const double coef = e.kind == EdgeKind::Directed ? params.B(e.dst, e.src) : -params.K(e.src, e.dst);
  return coef > 0.0 ? 1 : -1;
}

ReplicateResult score_fit(const ChainGraph& truth, std::span<const EdgeScore> scores, double alpha, bool curves) {
  ReplicateResult out;
  const std::vector<Edge> true_edges = truth.edges();
  out.true_edges = static_cast<long>(true_edges.size());
  const FdrSelection sel = fdr_select(scores, alpha);
  std::vector<Edge> chosen;
  for (const EdgeScore& s : sel.selected) chosen.push_back(s.edge);
  const Confusion c = confusion(chosen, true_edges, truth);
  out.discoveries = static_cast<long>(chosen.size());
  out.sensitivity = sensitivity(c);
  out.specificity = specificity(c);
  out.mcc = mcc(c);
  out.phi = sel.phi;
  out.fdr = selection_fdr(sel);
  out.expected_fdr = std::numeric_limits<double>::quiet_NaN();
  if (!sel.selected.empty()) {
    try {
      out.expected_fdr = expected_fdr(scores, sel.phi);
    } catch (const Error&) {
      // every selected g equals phi
    }
  }
  const long universe = static_cast<long>(truth.candidate_universe().size());
  if (out.true_edges > 0 && out.true_edges < universe) {
    RocCurve curve = roc(scores, true_edges, truth);
    out.auc = curve.auc;
    out.pauc = curve.pauc;
    if (curves) {
      out.roc = std::move(curve.points);
      out.mcc_curve = mcc_curve(scores, true_edges, truth);
    }
  } else {
    out.auc = out.pauc = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

ReplicateResult run_replicate(const ScenarioConfig& cfg, int r) {
  Replicate rep = simulate_replicate(cfg.gen, r);
  center_columns(rep.data);
  RunConfig run = cfg.run;
  run.seed = chain_seed(rep.seed, 0);
  const ChainTrace trace = cfg.mode == Mode::Bans ? run_bans(rep.data, cfg.prior, run)
                                                  : run_bans_parallel(rep.data, cfg.prior, run, cfg.symmetrize);
  const std::vector<EdgeScore> scores = edge_probabilities(ppi(trace), rep.data.layout);
  ReplicateResult out = score_fit(rep.data.layout, scores, cfg.alpha, cfg.curves);
  out.replicate = r;
  out.invariant_violations = trace.invariant_violations;
  out.seconds = trace.seconds;
  out.seconds_per_sweep = trace.seconds / run.n_iter;

  if (cfg.signs) {
    const std::vector<Edge> truth = rep.data.layout.edges();
    if (!truth.empty()) {
      RunConfig sign_run = run;
      sign_run.seed = chain_seed(rep.seed, 1);
      for (const SignPosterior& s : structured_sign_run(rep.data, truth, cfg.prior, sign_run)) {
        out.sign_prob.push_back(s.prob_positive);
        out.sign_positive.push_back(true_sign(rep.params, s.edge) > 0);
      }
    }
  }
  return out;
}

std::vector<ReplicateResult> run_scenario(const ScenarioConfig& cfg) {
  if (cfg.replicates < 1) fail(ErrorCode::ConfigInvalid, "at least one replicate is required");
  if (cfg.jobs < 1) fail(ErrorCode::ConfigInvalid, "jobs must be at least 1");
  std::vector<ReplicateResult> results(static_cast<std::size_t>(cfg.replicates));
  WorkerPool pool(std::min(cfg.jobs, cfg.replicates));
  pool.parallel_for(cfg.replicates, [&](int r) { results[static_cast<std::size_t>(r)] = run_replicate(cfg, r); });
  return results;
}

std::vector<ColumnSummary> summarize(std::span<const ReplicateResult> results) {
  using Getter = double (*)(const ReplicateResult&);
  const std::pair<const char*, Getter> columns[] = {
      {"sensitivity", [](const ReplicateResult& r) { return r.sensitivity; }},
      {"specificity", [](const ReplicateResult& r) { return r.specificity; }},
      {"mcc", [](const ReplicateResult& r) { return r.mcc; }},
      {"discoveries", [](const ReplicateResult& r) { return static_cast<double>(r.discoveries); }},
      {"pauc", [](const ReplicateResult& r) { return r.pauc; }},
      {"auc", [](const ReplicateResult& r) { return r.auc; }},
      {"true_edges", [](const ReplicateResult& r) { return static_cast<double>(r.true_edges); }},
  };
  std::vector<ColumnSummary> out;
  for (const auto& [name, get] : columns) {
    ColumnSummary s{name};
    double k = 0.0;
    for (const auto& r : results)
      if (std::isfinite(get(r))) {
        s.mean += get(r);
        k += 1.0;
      }
    if (k == 0.0) {
      s.mean = s.sd = s.se = std::numeric_limits<double>::quiet_NaN();
    } else {
      s.mean /= k;
      double ss = 0.0;
      for (const auto& r : results)
        if (std::isfinite(get(r))) ss += (get(r) - s.mean) * (get(r) - s.mean);
      s.sd = k > 1.0 ? std::sqrt(ss / (k - 1.0)) : 0.0;
      s.se = s.sd / std::sqrt(k);
    }
    out.push_back(s);
  }
  return out;
}

double pooled_sign_auc(std::span<const ReplicateResult> results) {
  std::vector<double> prob;
  std::vector<std::uint8_t> pos;
  for (const auto& r : results) {
    prob.insert(prob.end(), r.sign_prob.begin(), r.sign_prob.end());
    pos.insert(pos.end(), r.sign_positive.begin(), r.sign_positive.end());
  }
  long npos = 0;
  for (auto x : pos) npos += x;
  if (npos == 0 || npos == static_cast<long>(pos.size())) return std::numeric_limits<double>::quiet_NaN();
  return binary_auc(prob, pos);
}

}  // namespace bans
