#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "bans/datagen.hpp"
#include "bans/errors.hpp"
#include "support.hpp"

using namespace bans;
using testing::toy_graph;
using testing::toy_params;
using testing::make_graph;

TEST_CASE("precision of the two-vertex chain") {
  const ChainGraph g = make_graph({1, 1}, {Edge::directed(0, 1)});
  MlggmParameters p{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  p.B(1, 0) = 1.0;
  Eigen::Matrix2d expected;
  expected << 2, -1, -1, 1;
  CHECK(precision_from_parameters(p) == expected);
}

TEST_CASE("precision reductions") {
  MlggmParameters p = toy_params();
  const Eigen::MatrixXd B = p.B;
  p.B.setZero();
  CHECK(precision_from_parameters(p) == p.K);
  p.B = B;
  p.K.setIdentity();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
  CHECK((precision_from_parameters(p) - (I - B).transpose() * (I - B)).norm() < 1e-14);
}

TEST_CASE("balanced layer sizes") {
  CHECK(balanced_layer_sizes(20, 6) == std::vector<int>{4, 4, 3, 3, 3, 3});
  CHECK(balanced_layer_sizes(100, 6) == std::vector<int>{17, 17, 17, 17, 16, 16});
  CHECK(balanced_layer_sizes(5, 5) == std::vector<int>{1, 1, 1, 1, 1});
}

TEST_CASE("generator config validation") {
  GenConfig c;
  c.edge_prob = 1.5;
  CHECK_THROWS_AS(random_chain_graph(c), Error);
  c = GenConfig{};
  c.q = 21;
  CHECK_THROWS_AS(random_chain_graph(c), Error);
  c = GenConfig{};
  c.magnitude_low = 2.0;
  CHECK_THROWS_AS(random_chain_graph(c), Error);
}

TEST_CASE("zero edge probability gives the empty graph") {
  GenConfig c;
  c.edge_prob = 0.0;
  CHECK(random_chain_graph(c).spec().num_edges() == 0);
}

TEST_CASE("directed edges join consecutive layers only") {
  GenConfig c;
  c.edge_prob = 1.0;
  const ChainGraph g = random_chain_graph(c);
  for (auto [w, v] : g.spec().directed) CHECK(g.layer_of(v) == g.layer_of(w) + 1);
  // p_E = 1: all within-layer pairs; between consecutive layers p_E / 2 = 0.5
  CHECK(g.spec().undirected.size() == 24);
}

TEST_CASE("mean edge count matches its expectation") {
  GenConfig c;  // p = 20, q = 6, p_E = 0.3
  const auto sizes = balanced_layer_sizes(c.p, c.q);
  double expected = 0.0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    expected += sizes[k] * (sizes[k] - 1) / 2.0 * c.edge_prob;
    if (k > 0) expected += sizes[k - 1] * sizes[k] * c.edge_prob / 2.0;
  }
  CHECK(expected == doctest::Approx(15.45));

  const int draws = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < draws; ++r) {
    c.seed = 1000 + static_cast<std::uint64_t>(r);
    const double e = static_cast<double>(random_chain_graph(c).spec().num_edges());
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum2 / draws - mean * mean) / (draws - 1));
  CHECK(std::abs(mean - expected) < 3.0 * se);
}

TEST_CASE("parameters follow the graph") {
  GenConfig c;
  c.edge_prob = 0.5;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    c.seed = seed;
    const ChainGraph g = random_chain_graph(c);
    const MlggmParameters p = sample_parameters(g, c);
    check_parameters(p, g);
    for (int v = 0; v < g.p(); ++v) {
      for (int w = 0; w < g.p(); ++w) {
        CHECK((p.B(v, w) != 0.0) == g.has_edge(Edge::directed(w, v)));
        if (v != w) {
          CHECK((p.K(v, w) != 0.0) == (g.layer_of(v) == g.layer_of(w) && g.has_edge(Edge::undirected(v, w))));
          if (p.K(v, w) != 0.0) {
            CHECK(std::abs(p.K(v, w)) >= 0.5);
            CHECK(std::abs(p.K(v, w)) <= 1.5);
          }
        }
        if (p.B(v, w) != 0.0) {
          CHECK(std::abs(p.B(v, w)) >= 0.5);
          CHECK(std::abs(p.B(v, w)) <= 1.5);
        }
      }
      double off = 0.0;
      for (int u = 0; u < g.p(); ++u)
        if (u != v) off += std::abs(p.K(u, v));
      CHECK(p.K(v, v) == doctest::Approx(off + c.diag_pad).epsilon(1e-14));
    }
    CHECK(Eigen::LLT<Eigen::MatrixXd>(p.K).info() == Eigen::Success);
  }
}

TEST_CASE("no undirected edges gives a diag_pad diagonal") {
  const ChainGraph g = make_graph({2, 2}, {Edge::directed(0, 2)});
  GenConfig c;
  c.diag_pad = 0.25;
  const MlggmParameters p = sample_parameters(g, c);
  CHECK(p.K == 0.25 * Eigen::MatrixXd::Identity(4, 4));
}

TEST_CASE("generator is deterministic and equivariant within layers") {
  GenConfig c;
  c.edge_prob = 0.5;
  c.seed = 77;
  const ChainGraph a = random_chain_graph(c);
  CHECK(random_chain_graph(c).edges() == a.edges());
  const MlggmParameters pa = sample_parameters(a, c);
  CHECK(sample_parameters(a, c).B == pa.B);

  // Swap the first two vertices of layer 1 and 3 vertices of layer 2 cyclically.
  std::vector<Vertex> perm(static_cast<std::size_t>(c.p));
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[0], perm[1]);
  std::rotate(perm.begin() + 4, perm.begin() + 5, perm.begin() + 7);
  std::vector<std::uint64_t> keys(perm.size());
  for (std::size_t v = 0; v < perm.size(); ++v) keys[static_cast<std::size_t>(perm[v])] = v;

  const ChainGraph b = random_chain_graph(c, keys);
  CHECK(b.spec().num_edges() == a.spec().num_edges());
  for (const Edge& e : a.edges()) {
    const Edge m = e.kind == EdgeKind::Directed ? Edge::directed(perm[e.src], perm[e.dst])
                                                : Edge::undirected(perm[e.src], perm[e.dst]);
    CHECK(b.has_edge(m));
  }
  const MlggmParameters pb = sample_parameters(b, c, keys);
  for (int v = 0; v < c.p; ++v)
    for (int w = 0; w < c.p; ++w) {
      CHECK(pb.B(perm[v], perm[w]) == pa.B(v, w));
      CHECK(pb.K(perm[v], perm[w]) == pa.K(v, w));
    }
}

TEST_CASE("factorisation identity") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  for (int t = 0; t < 100; ++t) {
    GenConfig c;
    c.p = 8;
    c.q = 3;
    c.edge_prob = 0.6;
    c.seed = 500 + static_cast<std::uint64_t>(t);
    const ChainGraph g = random_chain_graph(c);
    const MlggmParameters p = sample_parameters(g, c);
    Eigen::VectorXd y(c.p);
    for (int i = 0; i < c.p; ++i) y(i) = 2.0 * z(rng);
    const double joint = testing::gaussian_log_density(precision_from_parameters(p), y);
    CHECK(std::abs(joint_log_density(precision_from_parameters(p), y) - joint) < 1e-8);
    CHECK(std::abs(layerwise_log_density(p, g, y) - joint) < 1e-8);
  }
}

TEST_CASE("missing edges have zero implied partial correlation") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const ChainGraph g = testing::random_spec(rng, 8, 0.5);
    GenConfig c;
    c.p = g.p();
    c.q = g.num_layers();
    c.seed = 40 + static_cast<std::uint64_t>(t);
    const MlggmParameters p = sample_parameters(g, c);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(g.p(), g.p());
    const Eigen::MatrixXd sigma =
        (I - p.B).inverse() * p.K.inverse() * (I - p.B).inverse().transpose();
    for (const auto& ci : implied_independencies(g)) {
      std::vector<int> idx{ci.u, ci.v};
      idx.insert(idx.end(), ci.given.begin(), ci.given.end());
      Eigen::MatrixXd sub(idx.size(), idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = sigma(idx[i], idx[j]);
      const Eigen::MatrixXd prec = sub.inverse();
      CHECK(std::abs(prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1))) < 1e-10);
    }
  }
}

TEST_CASE("ancestral samples have covariance inverse(omega)") {
  const ChainGraph g = toy_graph();
  const MlggmParameters p = toy_params();
  rng::Stream s = rng::make_stream(21, {rng::tag(rng::Tag::Data)});
  const int n = 100000;
  const Dataset d = sample_data(p, g, n, s);
  const Eigen::MatrixXd sigma = precision_from_parameters(p).inverse();
  const Eigen::MatrixXd S = d.Y.transpose() * d.Y / n;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / n);
      CHECK(std::abs(S(i, j) - sigma(i, j)) < 3.0 * se);
    }
  CHECK(d.Y.colwise().mean().cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("standard normal when B = 0 and K = I") {
  const ChainGraph g = make_graph({3});
  const MlggmParameters p{Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Identity(3, 3)};
  rng::Stream s(8);
  const Dataset d = sample_data(p, g, 50000, s);
  const Eigen::MatrixXd S = d.Y.transpose() * d.Y / 50000.0;
  CHECK((S - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("ancestral and direct joint sampling agree") {
  const ChainGraph g = toy_graph();
  const MlggmParameters p = toy_params();
  const int n = 50000;
  rng::Stream s(17);
  const Dataset a = sample_data(p, g, n, s);
  const Eigen::MatrixXd sigma = precision_from_parameters(p).inverse();
  const Eigen::MatrixXd L = sigma.llt().matrixL();
  std::mt19937_64 rng(18);
  std::normal_distribution<double> z;
  Eigen::MatrixXd Z(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 4; ++j) Z(i, j) = z(rng);
  const Eigen::MatrixXd direct = Z * L.transpose();
  const Eigen::MatrixXd Sa = a.Y.transpose() * a.Y / n, Sd = direct.transpose() * direct / n;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      const double se = std::sqrt(2.0 * (sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / n);
      CHECK(std::abs(Sa(i, j) - Sd(i, j)) < 3.0 * se);
    }
}

TEST_CASE("sampling rejects a non positive definite block") {
  const ChainGraph g = make_graph({2}, {Edge::undirected(0, 1)});
  MlggmParameters p{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  p.K(0, 1) = p.K(1, 0) = 2.0;
  rng::Stream s(1);
  try {
    sample_data(p, g, 10, s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FactorizationFailure);
  }
}
