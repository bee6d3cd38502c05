#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "bans/datagen.hpp"
#include "bans/errors.hpp"
#include "bans/io.hpp"
#include "bans/manifest.hpp"
#include "support.hpp"

using namespace bans;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("bans_io_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

ErrorCode ingest_error(const TempDir& dir, const std::string& csv, const std::string& layers) {
  try {
    io::ingest(dir.write("d.csv", csv), dir.write("l.tsv", layers));
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ConfigInvalid;
}

const std::string kLayers = "vertex\tlayer\nY1\t1\nY2\t1\nY3\t2\nY4\t2\n";

}  // namespace

TEST_CASE("ingest a two-layer data set") {
  TempDir dir;
  const Dataset d = io::ingest(dir.write("d.csv", "Y3,Y1,Y4,Y2\n1,2,3,4\n2,1,5,3\n3,3,4,8\n"),
                               dir.write("l.tsv", kLayers));
  CHECK(d.names == std::vector<std::string>{"Y1", "Y2", "Y3", "Y4"});
  CHECK(d.layout.num_layers() == 2);
  CHECK(d.layout.layer_size(0) == 2);
  CHECK(d.Y.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(d.Y(0, 0) == doctest::Approx(0.0));   // Y1: 2,1,3
  CHECK(d.Y(0, 2) == doctest::Approx(-1.0));  // Y3: 1,2,3
}

TEST_CASE("ingest layer maps with shared layers") {
  TempDir dir;
  // (CNA, methylation) < mRNA < protein with CNA and methylation sharing layer 1
  const Dataset d = io::ingest(dir.write("d.csv", "prot,cna,mrna,meth\n1,2,3,4\n2,1,5,3\n4,3,4,8\n"),
                               dir.write("l.tsv", "cna\t1\nmeth\t1\nmrna\t2\nprot\t3\n"));
  CHECK(d.names == std::vector<std::string>{"cna", "meth", "mrna", "prot"});
  CHECK(d.layout.num_layers() == 3);
  CHECK(d.layout.layer_size(0) == 2);
}

TEST_CASE("ingest errors") {
  TempDir dir;
  CHECK(ingest_error(dir, "Y1,Y2,Y3,Y5\n1,2,3,4\n2,1,5,3\n", kLayers) == ErrorCode::MissingColumnInLayerMap);
  CHECK(ingest_error(dir, "Y1,Y2,Y3,Y4\n1,2,3,4\n1,1,5,3\n1,5,6,7\n", kLayers) == ErrorCode::ConstantColumn);
  CHECK(ingest_error(dir, "Y1,Y2,Y3,Y4\n1,2,3,NA\n2,1,5,3\n", kLayers) == ErrorCode::MissingValue);
  CHECK(ingest_error(dir, "Y1,Y2,Y3,Y4\n1,2,,4\n2,1,5,3\n", kLayers) == ErrorCode::MissingValue);
  CHECK(ingest_error(dir, "Y1,Y2,Y3,Y4\n1,2,x,4\n2,1,5,3\n", kLayers) == ErrorCode::NonNumericCell);
  CHECK(ingest_error(dir, "Y1,Y2,Y3,Y4\n1,2,3\n2,1,5,3\n", kLayers) == ErrorCode::ParseError);
  CHECK(ingest_error(dir, "Y1,Y2,Y3\n1,2,3\n2,1,5\n", kLayers) == ErrorCode::ConfigInvalid);
  CHECK(ingest_error(dir, "Y1,Y2,Y3,Y4\n1,2,3,4\n2,1,5,3\n", kLayers + "Y1\t3\n") == ErrorCode::ParseError);
  try {
    io::ingest(dir.path / "missing.csv", dir.write("l.tsv", kLayers));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PathError);
  }
}

TEST_CASE("data and layer files round-trip") {
  TempDir dir;
  GenConfig gen;
  gen.p = 7;
  gen.q = 3;
  gen.n = 25;
  const ChainGraph g = random_chain_graph(gen);
  const MlggmParameters p = sample_parameters(g, gen);
  rng::Stream s(3);
  Dataset d = sample_data(p, g, gen.n, s);
  center_columns(d);
  const fs::path csv = dir.write("d.csv", io::data_csv(d, "abc"));
  const fs::path tsv = dir.write("l.tsv", io::layer_tsv(d, "abc"));
  const Dataset back = io::ingest(csv, tsv);
  CHECK(back.names == d.names);
  CHECK(back.layout.num_layers() == 3);
  for (int i = 0; i < d.n(); ++i)
    for (int j = 0; j < d.p(); ++j) CHECK(std::abs(back.Y(i, j) - d.Y(i, j)) <= 1e-15 * (1.0 + std::abs(d.Y(i, j))) * 10);

  // the graph survives serialize -> parse -> validate
  const fs::path edges = dir.write("e.tsv", io::edges_tsv(g.edges(), d.names, "abc"));
  const auto parsed = io::read_edges(edges, io::name_index(d.names));
  CHECK(g.with_edges(parsed).edges() == g.edges());

  const fs::path params = dir.write("p.txt", io::params_text(p, d.names, "abc"));
  const MlggmParameters q = io::read_params(params);
  CHECK(q.B == p.B);
  CHECK(q.K == p.K);
}

TEST_CASE("scored edges and prior files") {
  TempDir dir;
  const std::vector<std::string> names{"a", "b", "c"};
  const std::vector<EdgeScore> s{{Edge::directed(0, 2), 0.125}, {Edge::undirected(0, 1), 1.0 / 3.0}};
  const auto back = io::read_scored_edges(dir.write("s.tsv", io::scores_tsv(s, names, "x")), io::name_index(names));
  REQUIRE(back.size() == 2);
  CHECK(back[0].edge == s[0].edge);
  CHECK(back[1].g == s[1].g);

  const auto ext = io::read_scored_edges(dir.write("x.tsv", "src\tdst\tkind\tweight\tscore\nc\ta\tundir\t9\t0.5\n"),
                                         io::name_index(names));
  CHECK(ext[0].edge == Edge::undirected(0, 2));
  CHECK(ext[0].g == 0.5);

  const auto pri = io::read_prior_edges(dir.write("p.tsv", "a\tc\tdir\t0.9\n"), io::name_index(names));
  CHECK(pri.at(Edge::directed(0, 2)) == 0.9);

  CHECK_THROWS_AS(io::read_edges(dir.write("bad.tsv", "a\tq\tdir\n"), io::name_index(names)), Error);
  CHECK_THROWS_AS(io::read_edges(dir.write("bad2.tsv", "src\tdst\tkind\na\tb\tsideways\n"), io::name_index(names)), Error);
}

TEST_CASE("every text output starts with the manifest id") {
  io::TextFile f("0123456789abcdef");
  f.line("x");
  CHECK(f.text().rfind("# manifest_id=0123456789abcdef\n", 0) == 0);
}

TEST_CASE("format_double keeps full precision") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(io::format_double(x)) == x);
}

TEST_CASE("manifest id depends on config, inputs and seed") {
  TempDir dir;
  const fs::path in = dir.write("in.txt", "hello");
  RunManifest a;
  a.command = "fit";
  a.config = {{"iters", 10}, {"alpha", 0.1}};
  a.seed = 3;
  a.add_input(in);
  RunManifest b = a;
  CHECK(a.id() == b.id());
  b.seed = 4;
  CHECK(a.id() != b.id());
  RunManifest c = a;
  c.config["iters"] = 11;
  CHECK(a.id() != c.id());
  dir.write("in.txt", "hello!");
  RunManifest d = a;
  d.inputs.clear();
  d.add_input(in);
  CHECK(a.id() != d.id());
  CHECK(a.to_json()["manifest_id"] == a.id());
  CHECK(file_checksum(in) == hex64(fnv1a64("hello!")));
}

TEST_CASE("write_file creates directories") {
  TempDir dir;
  io::write_file(dir.path / "a" / "b" / "c.txt", "data");
  std::ifstream f(dir.path / "a" / "b" / "c.txt");
  std::string s;
  f >> s;
  CHECK(s == "data");
}
