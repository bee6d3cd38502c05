#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bans/datagen.hpp"
#include "bans/errors.hpp"
#include "bans/inference.hpp"
#include "bans/io.hpp"
#include "bans/manifest.hpp"
#include "bans/metrics.hpp"
#include "bans/pipeline.hpp"
#include "bans/sampler.hpp"
#include "bans/worker_pool.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace bans;

namespace {

constexpr const char* kFooter = R"(
Example: the four-variable chain graph with layers {Y1,Y2} < {Y3,Y4} and
edges Y1->Y3, Y2->Y4, Y3-Y4.

  printf 'vertex\tlayer\nY1\t1\nY2\t1\nY3\t2\nY4\t2\n' > layers.tsv
  printf 'src\tdst\tkind\nY1\tY3\tdir\nY2\tY4\tdir\nY3\tY4\tundir\n' > graph.tsv

  bans simulate --layers layers.tsv --graph graph.tsv --n 200 --seed 7 --out toy
  bans fit      --data toy/data.csv --layers toy/layers.tsv --out toy/fit
  bans select   --ppi toy/fit/ppi.tsv --layers toy/layers.tsv --alpha 0.1 --out toy/select
  bans signs    --data toy/data.csv --layers toy/layers.tsv \
                --selected toy/select/selected.tsv --out toy/signs
  bans evaluate --truth toy/truth.tsv --scores toy/fit/ppi.tsv --layers toy/layers.tsv --out toy/eval
  bans analyze  --layers toy/layers.tsv --selected toy/signs/signed.tsv --focus Y3 --out toy/analysis

or all stages over simulated replicates:

  bans pipeline --p 20 --n 200 --q 6 --edge-prob 0.3 --replicates 50 --jobs 4 --out table1

Outputs go to --out, or to $BANS_OUTPUT_ROOT/<command> when --out is omitted.
Every output file starts with a '# manifest_id=...' line; manifest.json
records the configuration, input checksums and outputs of the invocation.
)";

fs::path output_dir(const std::string& out, const std::string& command) {
  if (!out.empty()) return out;
  const char* root = std::getenv("BANS_OUTPUT_ROOT");
  return fs::path(root && *root ? root : ".") / command;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) fail(ErrorCode::PathError, std::string(what) + " is required");
  if (!fs::is_regular_file(path)) fail(ErrorCode::PathError, std::string(what) + " '" + path + "' does not exist");
}

/// Collects outputs in memory; commit() writes them and the manifest.
class Outputs {
 public:
  Outputs(fs::path dir, RunManifest& manifest) : dir_(std::move(dir)), manifest_(manifest) {}
  void add(const std::string& rel, std::string text) { files_.emplace_back(rel, std::move(text)); }
  const std::string id() const { return manifest_.id(); }
  void commit(std::chrono::steady_clock::time_point start) {
    for (const auto& [rel, text] : files_) {
      io::write_file(dir_ / rel, text);
      manifest_.outputs.push_back((dir_ / rel).string());
    }
    manifest_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    io::write_file(dir_ / "manifest.json", manifest_.to_json().dump(2) + "\n");
  }

 private:
  fs::path dir_;
  RunManifest& manifest_;
  std::vector<std::pair<std::string, std::string>> files_;
};

json with_manifest(json j, const std::string& id) {
  j["manifest_id"] = id;
  return j;
}

// --- shared option groups --------------------------------------------------

struct PriorOptions {
  std::vector<double> lambda{2.0};
  std::vector<double> delta{2.0};
  std::vector<double> c2;
  double p_dir = 0.1;
  double q_undir = 0.1;
  std::string prior_edges;

  void attach(CLI::App* app) {
    app->add_option("--lambda", lambda, "Scale lambda, one value or one per layer")->capture_default_str();
    app->add_option("--delta", delta, "Shape parameter delta, one value or one per layer")->capture_default_str();
    app->add_option("--c2", c2, "Slab variance scale c^2 (default 1/lambda)");
    app->add_option("--p-dir", p_dir, "Prior inclusion probability of directed edges")->capture_default_str();
    app->add_option("--q-undir", q_undir, "Prior inclusion probability of undirected edges")->capture_default_str();
    app->add_option("--prior-edges", prior_edges, "TSV src, dst, kind, prob with edge-specific prior probabilities");
  }

  PriorConfig build(const std::vector<std::string>& names) const {
    PriorConfig p;
    p.lambda = lambda;
    p.delta = delta;
    p.c2 = c2;
    p.p_dir = p_dir;
    p.q_undir = q_undir;
    if (!prior_edges.empty()) {
      require_file(prior_edges, "--prior-edges");
      p.overrides = io::read_prior_edges(prior_edges, io::name_index(names));
    }
    return p;
  }

  json to_json() const {
    return {{"lambda", lambda}, {"delta", delta}, {"c2", c2}, {"p_dir", p_dir}, {"q_undir", q_undir}};
  }
};

struct RunOptions {
  int iters = 30000;
  int burnin = 10000;
  int thin = 1;
  std::uint64_t seed = 1;
  int jobs = 1;
  int warm_start = -1;

  void attach(CLI::App* app, bool with_seed = true) {
    app->add_option("--iters", iters, "Total MCMC iterations, burn-in included")->capture_default_str();
    app->add_option("--burnin", burnin, "Burn-in iterations")->capture_default_str();
    app->add_option("--thin", thin, "Keep every thin-th iteration after burn-in")->capture_default_str();
    if (with_seed) app->add_option("--seed", seed, "Root random seed")->capture_default_str();
    app->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
    app->add_option("--warm-start", warm_start,
                    "Node-wise burn-in sweeps before the symmetric sampler (-1: half of burn-in)")
        ->capture_default_str();
  }

  RunConfig build() const {
    RunConfig r;
    r.n_iter = iters;
    r.burn_in = burnin;
    r.thin = thin;
    r.seed = seed;
    r.jobs = jobs;
    r.warm_start = warm_start;
    return r;
  }

  json to_json() const {
    return {{"iters", iters}, {"burnin", burnin}, {"thin", thin}, {"warm_start", warm_start}};
  }
};

Mode parse_mode(const std::string& s) { return s == "bans-parallel" ? Mode::BansParallel : Mode::Bans; }
Symmetrize parse_sym(const std::string& s) { return s == "or" ? Symmetrize::Or : Symmetrize::And; }

// --- text outputs ---------------------------------------------------------

std::string selected_tsv(const FdrSelection& sel, const std::vector<std::string>& names, const std::string& id) {
  return io::scores_tsv(sel.selected, names, id);
}

std::string signed_tsv(std::span<const SignedEdge> signs, const std::map<Edge, double>& g,
                       const std::vector<std::string>& names, const std::string& id) {
  io::TextFile f(id);
  f.line("src\tdst\tkind\tg\tsign\tsign_prob");
  for (const SignedEdge& s : signs) {
    auto it = g.find(s.edge);
    f.line(names[s.edge.src] + "\t" + names[s.edge.dst] + "\t" + io::kind_name(s.edge.kind) + "\t" +
           io::format_double(it == g.end() ? 1.0 : it->second) + "\t" + (s.sign > 0 ? "+" : "-") + "\t" +
           io::format_double(s.prob_positive));
  }
  return f.text();
}

std::string roc_tsv(const std::vector<RocPoint>& pts, const std::string& id) {
  io::TextFile f(id);
  f.line("threshold\tfpr\ttpr");
  for (const auto& p : pts)
    f.line(io::format_double(p.threshold) + "\t" + io::format_double(p.fpr) + "\t" + io::format_double(p.tpr));
  return f.text();
}

std::string mcc_tsv(const std::vector<MccPoint>& pts, const std::string& id) {
  io::TextFile f(id);
  f.line("discoveries\tthreshold\tmcc");
  for (const auto& p : pts)
    f.line(std::to_string(p.discoveries) + "\t" + io::format_double(p.threshold) + "\t" + io::format_double(p.mcc));
  return f.text();
}

json metrics_json(const ReplicateResult& r) {
  return {{"true_edges", r.true_edges}, {"discoveries", r.discoveries}, {"sensitivity", r.sensitivity},
          {"specificity", r.specificity}, {"mcc", r.mcc},         {"pauc", r.pauc},
          {"auc", r.auc},               {"phi", r.phi},           {"selection_fdr", r.fdr}};
}

std::string summary_tsv(const std::vector<ReplicateResult>& results, const std::string& id) {
  io::TextFile f(id);
  f.line("replicate\ttrue_edges\tdiscoveries\tsensitivity\tspecificity\tmcc\tpauc\tauc");
  for (const auto& r : results)
    f.line(std::to_string(r.replicate + 1) + "\t" + std::to_string(r.true_edges) + "\t" + std::to_string(r.discoveries) +
           "\t" + io::format_double(r.sensitivity) + "\t" + io::format_double(r.specificity) + "\t" +
           io::format_double(r.mcc) + "\t" + io::format_double(r.pauc) + "\t" + io::format_double(r.auc));
  const auto cols = summarize(results);
  const char* order[] = {"true_edges", "discoveries", "sensitivity", "specificity", "mcc", "pauc", "auc"};
  for (auto [label, field] : {std::pair{"mean", 0}, std::pair{"sd", 1}, std::pair{"se", 2}}) {
    std::string line = label;
    for (const char* name : order)
      for (const auto& c : cols)
        if (c.name == name) line += "\t" + io::format_double(field == 0 ? c.mean : field == 1 ? c.sd : c.se);
    f.line(line);
  }
  return f.text();
}

// --- analysis -------------------------------------------------------------

struct Analysis {
  std::string cs, intersections, degree, subnetwork;
};

Analysis analyze_runs(const std::vector<std::vector<EdgeScore>>& runs,
                      const std::vector<std::vector<EdgeScore>>& degree_scores, const ChainGraph& layout,
                      const std::vector<std::string>& names, const std::string& focus, const std::string& id) {
  std::vector<std::vector<Edge>> edge_sets;
  for (const auto& run : runs) {
    std::vector<Edge> edges;
    for (const auto& s : run) {
      if (!layout.in_universe(s.edge)) fail(ErrorCode::StructureInconsistent, "selected edge outside the layer map");
      edges.push_back(s.edge);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edge_sets.push_back(std::move(edges));
  }
  Analysis a;
  {
    io::TextFile f(id);
    std::string header = "from_layer\tto_layer\tmean\tsd";
    for (std::size_t r = 0; r < runs.size(); ++r) header += "\trun" + std::to_string(r + 1);
    f.line(header);
    for (const auto& row : connectivity_table(edge_sets, layout)) {
      std::string line = std::to_string(row.from + 1) + "\t" + std::to_string(row.to + 1) + "\t" +
                         io::format_double(row.mean) + "\t" + io::format_double(row.sd);
      for (double x : row.per_run) line += "\t" + io::format_double(x);
      f.line(line);
    }
    a.cs = f.text();
  }
  {
    io::TextFile f(id);
    f.line("runs\tcount");
    for (const auto& row : intersection_counts(edge_sets)) {
      std::string set;
      for (int r : row.runs) set += (set.empty() ? "" : ",") + std::to_string(r + 1);
      f.line(set + "\t" + std::to_string(row.count));
    }
    a.intersections = f.text();
  }
  {
    io::TextFile f(id);
    std::string header = "vertex\tlayer";
    for (std::size_t r = 0; r < runs.size(); ++r) header += "\trun" + std::to_string(r + 1);
    f.line(header);
    std::vector<Eigen::VectorXd> w;
    for (const auto& run : degree_scores) w.push_back(weighted_degree(run, layout.p()));
    for (int v = 0; v < layout.p(); ++v) {
      std::string line = names[v] + "\t" + std::to_string(layout.layer_of(v) + 1);
      for (const auto& x : w) line += "\t" + io::format_double(x(v));
      f.line(line);
    }
    a.degree = f.text();
  }
  if (!focus.empty()) {
    const auto index = io::name_index(names);
    auto it = index.find(focus);
    if (it == index.end()) fail(ErrorCode::ConfigInvalid, "--focus '" + focus + "' is not a vertex");
    io::TextFile f(id);
    f.line("run\tsrc\tdst\tkind");
    for (std::size_t r = 0; r < edge_sets.size(); ++r) {
      const auto comp = connected_component(edge_sets[r], layout.p(), it->second);
      std::vector<bool> in(layout.p(), false);
      for (Vertex v : comp) in[v] = true;
      for (const Edge& e : edge_sets[r])
        if (in[e.src] && in[e.dst])
          f.line(std::to_string(r + 1) + "\t" + names[e.src] + "\t" + names[e.dst] + "\t" + io::kind_name(e.kind));
    }
    a.subnetwork = f.text();
  }
  return a;
}

// --- subcommands ----------------------------------------------------------

struct Common {
  std::string out;
};

void cmd_simulate(const GenConfig& gen, int replicates, const std::string& layers_path, const std::string& graph_path,
                  const Common& c) {
  const auto start = std::chrono::steady_clock::now();
  gen.validate();
  if (replicates < 1) fail(ErrorCode::ConfigInvalid, "--replicates must be at least 1");
  std::optional<io::Layout> fixed;
  std::vector<Edge> fixed_edges;
  if (!layers_path.empty() || !graph_path.empty()) {
    require_file(layers_path, "--layers");
    require_file(graph_path, "--graph");
    fixed = io::layout_from_layer_map(io::read_layer_map(layers_path));
    fixed_edges = io::read_edges(graph_path, io::name_index(fixed->names));
  }
  const fs::path dir = output_dir(c.out, "simulate");

  RunManifest batch;
  batch.command = "simulate";
  batch.seed = gen.seed;
  batch.config = {{"p", gen.p}, {"n", gen.n}, {"q", gen.q}, {"edge_prob", gen.edge_prob},
                  {"magnitude_low", gen.magnitude_low}, {"magnitude_high", gen.magnitude_high},
                  {"diag_pad", gen.diag_pad}, {"replicates", replicates}};
  if (fixed) {
    batch.config["fixed_graph"] = true;
    batch.config["p"] = fixed->graph.p();
    batch.config["q"] = fixed->graph.num_layers();
    batch.add_input(layers_path);
    batch.add_input(graph_path);
  }

  struct Files {
    fs::path sub;
    RunManifest manifest;
    std::vector<std::pair<std::string, std::string>> files;
  };
  std::vector<Files> all;
  for (int r = 0; r < replicates; ++r) {
    auto make = [&]() -> Replicate {
      if (!fixed) return simulate_replicate(gen, r);
      const ChainGraph graph = fixed->graph.with_edges(fixed_edges);
      GenConfig cfg = gen;
      cfg.seed = replicate_seed(gen.seed, r);
      MlggmParameters params = sample_parameters(graph, cfg);
      rng::Stream stream = rng::make_stream(cfg.seed, {rng::tag(rng::Tag::Data)});
      Dataset data = sample_data(params, graph, gen.n, stream);
      data.names = fixed->names;
      return Replicate{r, cfg.seed, std::move(params), std::move(data)};
    };
    const Replicate rep = make();
    Files f;
    f.sub = replicates == 1 ? fs::path() : fs::path("rep_" + std::to_string(r + 1));
    f.manifest = batch;
    f.manifest.config["replicate"] = r;
    const std::string id = f.manifest.id();
    f.files.emplace_back("data.csv", io::data_csv(rep.data, id));
    f.files.emplace_back("layers.tsv", io::layer_tsv(rep.data, id));
    f.files.emplace_back("truth.tsv", io::edges_tsv(rep.data.layout.edges(), rep.data.names, id));
    f.files.emplace_back("params.txt", io::params_text(rep.params, rep.data.names, id));
    all.push_back(std::move(f));
  }
  for (auto& f : all) {
    Outputs out(dir / f.sub, f.manifest);
    for (auto& [rel, text] : f.files) out.add(rel, std::move(text));
    out.commit(start);
  }
  if (replicates > 1) {
    for (int r = 0; r < replicates; ++r) batch.outputs.push_back((dir / ("rep_" + std::to_string(r + 1))).string());
    batch.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    io::write_file(dir / "manifest.json", batch.to_json().dump(2) + "\n");
  }
  std::cout << "wrote " << replicates << " replicate(s) to " << dir.string() << "\n";
}

void cmd_fit(const std::string& data_path, const std::string& layers_path, const PriorOptions& po,
             const RunOptions& ro, const std::string& mode_s, const std::string& sym_s, bool standardize,
             const Common& c) {
  const auto start = std::chrono::steady_clock::now();
  require_file(data_path, "--data");
  require_file(layers_path, "--layers");
  Dataset data = io::ingest(data_path, layers_path);
  if (standardize) standardize_columns(data);
  const PriorConfig prior = po.build(data.names);
  const RunConfig run = ro.build();
  const Mode mode = parse_mode(mode_s);
  const Symmetrize sym = parse_sym(sym_s);

  RunManifest m;
  m.command = "fit";
  m.seed = run.seed;
  m.config = {{"prior", po.to_json()}, {"run", ro.to_json()}, {"mode", mode_s}, {"symmetrize", sym_s},
              {"standardize", standardize}};
  m.add_input(data_path);
  m.add_input(layers_path);
  if (!po.prior_edges.empty()) m.add_input(po.prior_edges);

  const ChainTrace trace = mode == Mode::Bans ? run_bans(data, prior, run) : run_bans_parallel(data, prior, run, sym);
  const Eigen::MatrixXd g = ppi(trace);
  const auto scores = edge_probabilities(g, data.layout);

  Outputs out(output_dir(c.out, "fit"), m);
  const std::string id = out.id();
  out.add("ppi.tsv", io::scores_tsv(scores, data.names, id));
  out.add("ppi_matrix.tsv", io::matrix_tsv(g, data.names, id));
  json tj = {{"mode", mode_s},
             {"symmetrize", sym_s},
             {"n_iter", trace.n_iter},
             {"burn_in", trace.burn_in},
             {"thin", trace.thin},
             {"n_retained", trace.n_retained},
             {"invariant_violations", trace.invariant_violations},
             {"edge_count", trace.edge_count},
             {"mean_kappa", trace.mean_kappa},
             {"log_likelihood", trace.log_likelihood}};
  out.add("trace.json", with_manifest(tj, id).dump() + "\n");
  out.commit(start);
  std::cout << "fitted " << data.p() << " variables, " << trace.n_retained << " retained draws in " << trace.seconds
            << " s\n";
}

void cmd_select(const std::string& ppi_path, const std::string& layers_path, double alpha, double phi,
                const Common& c) {
  const auto start = std::chrono::steady_clock::now();
  require_file(ppi_path, "--ppi");
  require_file(layers_path, "--layers");
  const io::Layout layout = io::layout_from_layer_map(io::read_layer_map(layers_path));
  const auto scores = io::read_scored_edges(ppi_path, io::name_index(layout.names));
  for (const auto& s : scores)
    if (!layout.graph.in_universe(s.edge)) fail(ErrorCode::EdgeOutsideUniverse, "scored edge outside the layer map");

  FdrSelection sel;
  if (phi >= 0.0) {
    if (phi > 1.0) fail(ErrorCode::ConfigInvalid, "--phi must lie in [0, 1]");
    sel.phi = phi;
    for (const auto& s : ranked(scores))
      if (s.g > phi) sel.selected.push_back(s);
    sel.xi = static_cast<int>(sel.selected.size());
  } else {
    sel = fdr_select(scores, alpha);
  }

  RunManifest m;
  m.command = "select";
  m.config = {{"alpha", alpha}, {"phi", phi}};
  m.add_input(ppi_path);
  m.add_input(layers_path);
  Outputs out(output_dir(c.out, "select"), m);
  const std::string id = out.id();
  out.add("selected.tsv", selected_tsv(sel, layout.names, id));
  json sj = {{"alpha", alpha}, {"phi", sel.phi}, {"xi", sel.xi}, {"selected", sel.selected.size()},
             {"selection_fdr", selection_fdr(sel)}};
  if (!sel.selected.empty()) {
    try {
      sj["expected_fdr"] = expected_fdr(scores, sel.phi);
    } catch (const Error&) {
      sj["expected_fdr"] = nullptr;
    }
  }
  out.add("selection.json", with_manifest(sj, id).dump(2) + "\n");
  out.commit(start);
  std::cout << "selected " << sel.selected.size() << " edges at threshold " << sel.phi << "\n";
}

void cmd_signs(const std::string& data_path, const std::string& layers_path, const std::string& selected_path,
               double xi, const PriorOptions& po, const RunOptions& ro, bool standardize, const Common& c) {
  const auto start = std::chrono::steady_clock::now();
  require_file(data_path, "--data");
  require_file(layers_path, "--layers");
  require_file(selected_path, "--selected");
  Dataset data = io::ingest(data_path, layers_path);
  if (standardize) standardize_columns(data);
  const auto index = io::name_index(data.names);
  const auto chosen = io::read_edges(selected_path, index);
  std::map<Edge, double> g;
  try {
    for (const auto& s : io::read_scored_edges(selected_path, index)) g[s.edge] = s.g;
  } catch (const Error&) {
  }
  const PriorConfig prior = po.build(data.names);
  const RunConfig run = ro.build();

  RunManifest m;
  m.command = "signs";
  m.seed = run.seed;
  m.config = {{"xi", xi}, {"prior", po.to_json()}, {"run", ro.to_json()}, {"standardize", standardize}};
  m.add_input(data_path);
  m.add_input(layers_path);
  m.add_input(selected_path);

  const auto posterior = structured_sign_run(data, chosen, prior, run);
  const auto calls = call_signs(posterior, xi);
  Outputs out(output_dir(c.out, "signs"), m);
  out.add("signed.tsv", signed_tsv(calls, g, data.names, out.id()));
  out.commit(start);
  std::cout << "called signs for " << calls.size() << " edges\n";
}

void cmd_evaluate(const std::string& truth_path, const std::string& scores_path, const std::string& selected_path,
                  const std::string& layers_path, double alpha, const Common& c) {
  const auto start = std::chrono::steady_clock::now();
  require_file(truth_path, "--truth");
  require_file(layers_path, "--layers");
  require_file(scores_path, "--scores");
  const io::Layout layout = io::layout_from_layer_map(io::read_layer_map(layers_path));
  const auto index = io::name_index(layout.names);
  const auto truth_edges = io::read_edges(truth_path, index);
  const ChainGraph truth = layout.graph.with_edges(truth_edges);
  const auto scores = io::read_scored_edges(scores_path, index);

  ReplicateResult r = score_fit(truth, scores, alpha, true);
  if (!selected_path.empty()) {
    require_file(selected_path, "--selected");
    const auto chosen = io::read_edges(selected_path, index);
    const Confusion cm = confusion(chosen, truth.edges(), truth);
    r.discoveries = static_cast<long>(chosen.size());
    r.sensitivity = sensitivity(cm);
    r.specificity = specificity(cm);
    r.mcc = mcc(cm);
  }

  RunManifest m;
  m.command = "evaluate";
  m.config = {{"alpha", alpha}, {"external_selection", !selected_path.empty()}};
  m.add_input(truth_path);
  m.add_input(scores_path);
  m.add_input(layers_path);
  if (!selected_path.empty()) m.add_input(selected_path);
  Outputs out(output_dir(c.out, "evaluate"), m);
  const std::string id = out.id();
  out.add("metrics.json", with_manifest(metrics_json(r), id).dump(2) + "\n");
  out.add("roc.tsv", roc_tsv(r.roc, id));
  out.add("mcc_curve.tsv", mcc_tsv(r.mcc_curve, id));
  out.add("summary.tsv", summary_tsv({r}, id));
  out.commit(start);
  std::cout << "MCC " << r.mcc << ", AUC " << r.auc << ", pAUC " << r.pauc << "\n";
}

void cmd_analyze(const std::string& layers_path, const std::vector<std::string>& selected,
                 const std::vector<std::string>& candidates, const std::string& focus, const Common& c) {
  const auto start = std::chrono::steady_clock::now();
  require_file(layers_path, "--layers");
  if (selected.empty()) fail(ErrorCode::PathError, "--selected is required");
  const io::Layout layout = io::layout_from_layer_map(io::read_layer_map(layers_path));
  const auto index = io::name_index(layout.names);
  RunManifest m;
  m.command = "analyze";
  if (!candidates.empty() && candidates.size() != selected.size())
    fail(ErrorCode::ConfigInvalid, "--all-candidates needs one score file per --selected file");
  m.config = {{"focus", focus}, {"runs", selected.size()}, {"all_candidates", !candidates.empty()}};
  m.add_input(layers_path);
  std::vector<std::vector<EdgeScore>> runs, degree;
  for (const auto& path : selected) {
    require_file(path, "--selected");
    m.add_input(path);
    runs.push_back(io::read_scored_edges(path, index));
  }
  for (const auto& path : candidates) {
    require_file(path, "--all-candidates");
    m.add_input(path);
    degree.push_back(io::read_scored_edges(path, index));
  }
  if (candidates.empty()) degree = runs;
  Outputs out(output_dir(c.out, "analyze"), m);
  Analysis a = analyze_runs(runs, degree, layout.graph, layout.names, focus, out.id());
  out.add("cs.tsv", a.cs);
  out.add("intersections.tsv", a.intersections);
  out.add("degree.tsv", a.degree);
  if (!focus.empty()) out.add("subnetwork.tsv", a.subnetwork);
  out.commit(start);
  std::cout << "analyzed " << runs.size() << " run(s)\n";
}

void cmd_pipeline(const GenConfig& gen, int replicates, int jobs, const PriorOptions& po, const RunOptions& ro,
                  const std::string& mode_s, const std::string& sym_s, double alpha, double xi, bool signs,
                  const Common& c) {
  const auto start = std::chrono::steady_clock::now();
  gen.validate();
  if (replicates < 1 || jobs < 1) fail(ErrorCode::ConfigInvalid, "--replicates and --jobs must be positive");
  if (!po.prior_edges.empty()) fail(ErrorCode::ConfigInvalid, "--prior-edges is not supported by pipeline");
  const PriorConfig prior = po.build({});
  RunConfig run = ro.build();
  run.validate();
  run.jobs = 1;
  const Mode mode = parse_mode(mode_s);
  const Symmetrize sym = parse_sym(sym_s);
  const fs::path dir = output_dir(c.out, "pipeline");

  RunManifest batch;
  batch.command = "pipeline";
  batch.seed = gen.seed;
  batch.config = {{"p", gen.p},       {"n", gen.n},
                  {"q", gen.q},       {"edge_prob", gen.edge_prob},
                  {"diag_pad", gen.diag_pad}, {"replicates", replicates},
                  {"prior", po.to_json()},    {"run", ro.to_json()},
                  {"mode", mode_s},   {"symmetrize", sym_s},
                  {"alpha", alpha},   {"xi", xi},
                  {"signs", signs}};

  struct Rep {
    RunManifest manifest;
    std::vector<std::pair<std::string, std::string>> files;
    ReplicateResult result;
    std::string stage;
  };
  std::vector<Rep> reps(static_cast<std::size_t>(replicates));
  WorkerPool pool(std::min(jobs, replicates));
  pool.parallel_for(replicates, [&](int r) {
    Rep& out = reps[static_cast<std::size_t>(r)];
    out.manifest = batch;
    out.manifest.config["replicate"] = r;
    const std::string id = out.manifest.id();
    auto stage = [&](const char* name) { out.stage = name; };
    try {
      stage("simulate");
      Replicate rep = simulate_replicate(gen, r);
      out.files.emplace_back("data.csv", io::data_csv(rep.data, id));
      out.files.emplace_back("layers.tsv", io::layer_tsv(rep.data, id));
      out.files.emplace_back("truth.tsv", io::edges_tsv(rep.data.layout.edges(), rep.data.names, id));
      out.files.emplace_back("params.txt", io::params_text(rep.params, rep.data.names, id));
      center_columns(rep.data);

      stage("fit");
      RunConfig rr = run;
      rr.seed = chain_seed(rep.seed, 0);
      const ChainTrace trace =
          mode == Mode::Bans ? run_bans(rep.data, prior, rr) : run_bans_parallel(rep.data, prior, rr, sym);
      const auto scores = edge_probabilities(ppi(trace), rep.data.layout);
      out.files.emplace_back("ppi.tsv", io::scores_tsv(scores, rep.data.names, id));

      stage("select");
      const FdrSelection sel = fdr_select(scores, alpha);
      out.files.emplace_back("selected.tsv", selected_tsv(sel, rep.data.names, id));

      if (signs && !sel.selected.empty()) {
        stage("signs");
        std::vector<Edge> chosen;
        std::map<Edge, double> g;
        for (const auto& s : sel.selected) {
          chosen.push_back(s.edge);
          g[s.edge] = s.g;
        }
        RunConfig sr = run;
        sr.seed = chain_seed(rep.seed, 1);
        const auto calls = call_signs(structured_sign_run(rep.data, chosen, prior, sr), xi);
        out.files.emplace_back("signed.tsv", signed_tsv(calls, g, rep.data.names, id));
      }

      stage("evaluate");
      out.result = score_fit(rep.data.layout, scores, alpha, true);
      out.result.replicate = r;
      out.result.invariant_violations = trace.invariant_violations;
      out.result.seconds = trace.seconds;
      out.files.emplace_back("metrics.json", with_manifest(metrics_json(out.result), id).dump(2) + "\n");
      out.files.emplace_back("roc.tsv", roc_tsv(out.result.roc, id));
      out.files.emplace_back("mcc_curve.tsv", mcc_tsv(out.result.mcc_curve, id));
    } catch (const Error& e) {
      throw Error(e.code(), "replicate " + std::to_string(r + 1) + ", stage " + out.stage + ": " + e.what());
    }
  });

  std::vector<ReplicateResult> results;
  for (auto& rep : reps) results.push_back(rep.result);
  for (int r = 0; r < replicates; ++r) {
    Rep& rep = reps[static_cast<std::size_t>(r)];
    Outputs out(dir / ("rep_" + std::to_string(r + 1)), rep.manifest);
    for (auto& [rel, text] : rep.files) out.add(rel, std::move(text));
    out.commit(start);
    batch.outputs.push_back((dir / ("rep_" + std::to_string(r + 1))).string());
  }
  const std::string id = batch.id();
  io::write_file(dir / "summary.tsv", summary_tsv(results, id));
  batch.outputs.push_back((dir / "summary.tsv").string());
  batch.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::write_file(dir / "manifest.json", batch.to_json().dump(2) + "\n");

  for (const auto& col : summarize(results))
    std::cout << col.name << "\t" << col.mean << " (" << col.se << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian node-wise selection for multi-layered Gaussian graphical models"};
  app.require_subcommand(1);
  Common common;

  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Output directory (default $BANS_OUTPUT_ROOT/<command>)");
  };
  auto add_gen = [](CLI::App* sub, GenConfig& g) {
    sub->add_option("--p", g.p, "Number of variables")->capture_default_str();
    sub->add_option("--n", g.n, "Sample size")->capture_default_str();
    sub->add_option("--q", g.q, "Number of layers")->capture_default_str();
    sub->add_option("--edge-prob", g.edge_prob, "Within-layer edge probability (half between layers)")
        ->capture_default_str();
    sub->add_option("--magnitude-low", g.magnitude_low, "Smallest nonzero magnitude")->capture_default_str();
    sub->add_option("--magnitude-high", g.magnitude_high, "Largest nonzero magnitude")->capture_default_str();
    sub->add_option("--diag-pad", g.diag_pad, "Constant added to the diagonal of K")->capture_default_str();
    sub->add_option("--seed", g.seed, "Root random seed")->capture_default_str();
  };
  const std::vector<std::string> modes{"bans", "bans-parallel"};
  const std::vector<std::string> syms{"and", "or"};

  GenConfig sim_gen;
  int sim_reps = 1;
  std::string sim_layers, sim_graph;
  auto* sim = app.add_subcommand("simulate", "Draw a random chain graph, parameters and data");
  add_gen(sim, sim_gen);
  sim->add_option("--replicates", sim_reps, "Independent replicates (one directory each)")->capture_default_str();
  sim->add_option("--layers", sim_layers, "Fixed layer map (with --graph) instead of a random graph");
  sim->add_option("--graph", sim_graph, "Fixed edge list src, dst, kind");
  add_out(sim);

  std::string data_path, layers_path, mode_s = "bans", sym_s = "and";
  PriorOptions fit_prior;
  RunOptions fit_run;
  auto* fit = app.add_subcommand("fit", "Run the sampler and write posterior inclusion probabilities");
  fit->add_option("--data", data_path, "Data CSV with a header of variable names");
  fit->add_option("--layers", layers_path, "Layer map TSV: name, layer index");
  fit_prior.attach(fit);
  fit_run.attach(fit);
  fit->add_option("--mode", mode_s, "Sampler")->check(CLI::IsMember(modes))->capture_default_str();
  fit->add_option("--symmetrize", sym_s, "Within-layer rule for bans-parallel")
      ->check(CLI::IsMember(syms))
      ->capture_default_str();
  bool standardize = false;
  fit->add_flag("--standardize", standardize, "Scale columns to unit variance after centring");
  add_out(fit);

  std::string ppi_path;
  double alpha = 0.1, phi = -1.0;
  auto* sel = app.add_subcommand("select", "Select edges by Bayesian FDR");
  sel->add_option("--ppi", ppi_path, "Edge probabilities (src, dst, kind, g)");
  sel->add_option("--layers", layers_path, "Layer map TSV");
  sel->add_option("--alpha", alpha, "FDR level")->capture_default_str();
  sel->add_option("--phi", phi, "Fixed threshold instead of FDR (0.5: median probability model)");
  add_out(sel);

  std::string selected_path;
  double xi = 0.5;
  PriorOptions sign_prior;
  RunOptions sign_run;
  auto* sgn = app.add_subcommand("signs", "Posterior sign probabilities for a fixed structure");
  sgn->add_option("--data", data_path, "Data CSV");
  sgn->add_option("--layers", layers_path, "Layer map TSV");
  sgn->add_option("--selected", selected_path, "Edge list with the structure");
  sgn->add_option("--xi", xi, "Positive iff P(coefficient > 0) exceeds xi")->capture_default_str();
  sign_prior.attach(sgn);
  sign_run.attach(sgn);
  sgn->add_flag("--standardize", standardize, "Scale columns to unit variance after centring");
  add_out(sgn);

  std::string truth_path, scores_path;
  auto* ev = app.add_subcommand("evaluate", "Score edge probabilities or an edge list against a true graph");
  ev->add_option("--truth", truth_path, "True edge list");
  ev->add_option("--scores", scores_path, "Scored edge list (ppi.tsv or external)");
  ev->add_option("--selected", selected_path, "Selected edges (default: FDR selection from the scores)");
  ev->add_option("--layers", layers_path, "Layer map TSV");
  ev->add_option("--alpha", alpha, "FDR level")->capture_default_str();
  add_out(ev);

  std::vector<std::string> runs, candidates;
  std::string focus;
  auto* an = app.add_subcommand("analyze", "Connectivity scores, weighted degrees, intersections, subnetworks");
  an->add_option("--layers", layers_path, "Layer map TSV");
  an->add_option("--selected", runs, "Selected edge lists with g, one per run (repeatable)");
  an->add_option("--all-candidates", candidates,
                 "Edge probability files (ppi.tsv), one per run: weighted degrees sum g over every candidate");
  an->add_option("--focus", focus, "Vertex whose connected subnetwork is extracted");
  add_out(an);

  GenConfig pipe_gen;
  int pipe_reps = 1, pipe_jobs = 1;
  bool pipe_signs = false;
  PriorOptions pipe_prior;
  RunOptions pipe_run;
  auto* pipe = app.add_subcommand("pipeline", "simulate, fit, select, (signs,) evaluate over replicates");
  add_gen(pipe, pipe_gen);
  pipe->add_option("--replicates", pipe_reps, "Replicates")->capture_default_str();
  pipe_prior.attach(pipe);
  pipe_run.attach(pipe, false);
  pipe->get_option("--jobs")->description("Replicates processed concurrently");
  pipe->add_option("--mode", mode_s, "Sampler")->check(CLI::IsMember(modes))->capture_default_str();
  pipe->add_option("--symmetrize", sym_s, "Within-layer rule for bans-parallel")
      ->check(CLI::IsMember(syms))
      ->capture_default_str();
  pipe->add_option("--alpha", alpha, "FDR level")->capture_default_str();
  pipe->add_option("--xi", xi, "Sign cutoff")->capture_default_str();
  pipe->add_flag("--signs", pipe_signs, "Also call signs of the selected edges");
  add_out(pipe);

  app.footer(kFooter);
  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) cmd_simulate(sim_gen, sim_reps, sim_layers, sim_graph, common);
    if (fit->parsed()) cmd_fit(data_path, layers_path, fit_prior, fit_run, mode_s, sym_s, standardize, common);
    if (sel->parsed()) cmd_select(ppi_path, layers_path, alpha, phi, common);
    if (sgn->parsed()) cmd_signs(data_path, layers_path, selected_path, xi, sign_prior, sign_run, standardize, common);
    if (ev->parsed()) cmd_evaluate(truth_path, scores_path, selected_path, layers_path, alpha, common);
    if (an->parsed()) cmd_analyze(layers_path, runs, candidates, focus, common);
    if (pipe->parsed()) {
      pipe_jobs = pipe_run.jobs;
      cmd_pipeline(pipe_gen, pipe_reps, pipe_jobs, pipe_prior, pipe_run, mode_s, sym_s, alpha, xi, pipe_signs,
                   common);
    }
  } catch (const Error& e) {
    std::cerr << "bans " << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
    return e.code() == ErrorCode::PathError ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "bans " << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
