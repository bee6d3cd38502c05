#pragma once

#include <compare>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace bans {

/// Vertices are 0-based positions in layer order; names live in the I/O layer.
using Vertex = int;

enum class EdgeKind { Directed, Undirected };

/// A directed edge src -> dst, or an undirected edge stored with src < dst.
struct Edge {
  Vertex src = 0;
  Vertex dst = 0;
  EdgeKind kind = EdgeKind::Directed;

  static Edge directed(Vertex from, Vertex to) { return {from, to, EdgeKind::Directed}; }
  static Edge undirected(Vertex a, Vertex b) {
    return a < b ? Edge{a, b, EdgeKind::Undirected} : Edge{b, a, EdgeKind::Undirected};
  }

  auto operator<=>(const Edge&) const = default;
};

struct ChainGraphSpec {
  int p = 0;
  std::vector<std::vector<Vertex>> layers;
  std::set<std::pair<Vertex, Vertex>> directed;    // (from, to)
  std::set<std::pair<Vertex, Vertex>> undirected;  // (a, b) with a < b

  void add_directed(Vertex from, Vertex to) { directed.emplace(from, to); }
  void add_undirected(Vertex a, Vertex b) { undirected.emplace(std::min(a, b), std::max(a, b)); }
  void add(const Edge& e);

  std::vector<Edge> edges() const;
  std::size_t num_edges() const { return directed.size() + undirected.size(); }
};

/// Builds a spec with consecutive layers of the given sizes and no edges.
ChainGraphSpec layered_spec(std::span<const int> layer_sizes);

struct VertexContext {
  Vertex v = 0;
  std::vector<Vertex> parents;    // every vertex of the preceding layers
  std::vector<Vertex> neighbors;  // the rest of v's own layer
};

/// Y_u independent of Y_v given Y_given, implied by a missing edge.
struct ConditionalIndependence {
  Vertex u = 0;
  Vertex v = 0;
  std::vector<Vertex> given;
  EdgeKind missing = EdgeKind::Undirected;
};

class ChainGraph;
ChainGraph validate(ChainGraphSpec spec);

/// A chain graph whose layer partition and edges satisfy the dependence-chain
/// rules.  Only obtainable through validate(); immutable afterwards.
class ChainGraph {
 public:
  const ChainGraphSpec& spec() const { return spec_; }
  int p() const { return spec_.p; }
  int num_layers() const { return static_cast<int>(spec_.layers.size()); }

  /// 0-based position of v's layer.
  int layer_of(Vertex v) const { return layer_of_[static_cast<std::size_t>(v)]; }
  /// Layers are contiguous label ranges [begin, end).
  Vertex layer_begin(int k) const { return begin_[static_cast<std::size_t>(k)]; }
  Vertex layer_end(int k) const { return begin_[static_cast<std::size_t>(k) + 1]; }
  int layer_size(int k) const { return layer_end(k) - layer_begin(k); }
  std::span<const Vertex> layer(int k) const { return spec_.layers[static_cast<std::size_t>(k)]; }

  /// Union of the first l layers, 0 <= l <= q.
  std::vector<Vertex> cumulative(int l) const;
  VertexContext context(Vertex v) const;

  bool has_edge(const Edge& e) const;
  std::vector<Edge> edges() const { return spec_.edges(); }

  /// All edges the model can select: within-layer unordered pairs and every
  /// earlier -> later ordered pair, sorted.
  std::vector<Edge> candidate_universe() const;
  bool in_universe(const Edge& e) const;

  /// Same layers, different edge set (validated).
  ChainGraph with_edges(std::span<const Edge> edges) const;

 private:
  friend ChainGraph validate(ChainGraphSpec spec);
  explicit ChainGraph(ChainGraphSpec spec);

  ChainGraphSpec spec_;
  std::vector<int> layer_of_;
  std::vector<Vertex> begin_;
};

std::vector<ConditionalIndependence> implied_independencies(const ChainGraph& g);

}  // namespace bans
