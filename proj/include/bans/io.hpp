#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bans/datagen.hpp"
#include "bans/inference.hpp"
#include "bans/metrics.hpp"
#include "bans/sampler.hpp"

namespace bans::io {

namespace fs = std::filesystem;

/// Rows of a delimited text file.  Lines starting with '#' and blank lines
/// are skipped; fields may be wrapped in double quotes.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read_table(const fs::path& path, char delim, bool has_header = true);

/// "%.17g".
std::string format_double(double x);

/// Accumulates text and writes it in one step; the first line is the manifest
/// marker "# manifest_id=<id>".
class TextFile {
 public:
  explicit TextFile(const std::string& manifest_id);
  TextFile& line(const std::string& s);
  TextFile& row(std::span<const std::string> fields, char delim = '\t');
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/// Writes through a temporary sibling and renames it into place.
void write_file(const fs::path& path, const std::string& contents);

std::vector<std::string> split(const std::string& line, char delim);

// --- data and layer files --------------------------------------------------

struct LayerEntry {
  std::string name;
  long layer = 0;
};

std::vector<LayerEntry> read_layer_map(const fs::path& path);

/// Vertex names in layer order and the edgeless layout of a layer map.
struct Layout {
  std::vector<std::string> names;
  ChainGraph graph;
};

Layout layout_from_layer_map(std::span<const LayerEntry> entries);

/// Reads a data CSV (header of names) and a layer TSV (name, layer index);
/// columns are put in layer order (ties keep file order), layer indices are
/// compressed to 0..q-1, and columns are centred.
Dataset ingest(const fs::path& data_csv, const fs::path& layer_tsv);

std::string data_csv(const Dataset& data, const std::string& manifest_id);
std::string layer_tsv(const Dataset& data, const std::string& manifest_id);

// --- edges ----------------------------------------------------------------

std::string kind_name(EdgeKind kind);
EdgeKind parse_kind(const std::string& s);

std::map<std::string, Vertex> name_index(std::span<const std::string> names);

/// Edge list with columns src, dst, kind (dir / undir); extra columns ignored.
std::vector<Edge> read_edges(const fs::path& path, const std::map<std::string, Vertex>& index);

/// Edge list with a score column (named "g" or "score", otherwise the fourth).
std::vector<EdgeScore> read_scored_edges(const fs::path& path, const std::map<std::string, Vertex>& index);

/// Per-edge prior probabilities: src, dst, kind, prob.
std::map<Edge, double> read_prior_edges(const fs::path& path, const std::map<std::string, Vertex>& index);

std::string edges_tsv(std::span<const Edge> edges, std::span<const std::string> names, const std::string& manifest_id);
std::string scores_tsv(std::span<const EdgeScore> scores, std::span<const std::string> names,
                       const std::string& manifest_id);
std::string matrix_tsv(const Eigen::MatrixXd& m, std::span<const std::string> names, const std::string& manifest_id);

// --- parameters -------------------------------------------------------------

std::string params_text(const MlggmParameters& params, std::span<const std::string> names,
                        const std::string& manifest_id);
MlggmParameters read_params(const fs::path& path);

}  // namespace bans::io
