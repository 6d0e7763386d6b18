#pragma once

#include "scce/model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace scce {

/// Edge-list ingestion for the comma-separated format
///   layer,i,j[,weight]
/// with `#`-prefixed comment lines. Two optional directives extend plain
/// comments and make export/ingest round trips lossless even with isolated
/// nodes or empty layers:
///   #nodes: id1,id2,...
///   #layers: id1,id2,...
/// Records for the same unordered pair accumulate their weights (default
/// weight 1); an edge exists when the accumulated weight exceeds
/// `threshold`. Self loops are counted and dropped. After thresholding,
/// nodes whose total degree across layers is below `min_total_degree` are
/// removed in a single pass.
struct IngestOptions {
  double threshold = 0.0;
  int min_total_degree = 0;
};

struct IngestReport {
  long records = 0;
  long self_loops_ignored = 0;
  long merged_records = 0;
  int nodes_before_filter = 0;
  int nodes_after_filter = 0;
  std::vector<std::string> dropped_nodes;
  std::vector<double> layer_density;  // per layer, after all filtering
  std::vector<std::string> warnings;
};

struct IngestResult {
  MultiLayerNetwork network;
  std::vector<std::string> node_ids;   // index -> external id
  std::vector<std::string> layer_ids;  // index -> external id
  IngestReport report;
};

/// Parses edge-list text. Node and layer ids are sorted numerically when
/// every id parses as an integer, lexicographically otherwise. Throws
/// std::invalid_argument with the 1-based line number for malformed lines,
/// and when an edge references a node outside a declared #nodes universe.
IngestResult ingest_edge_list_text(const std::string& text,
                                   const IngestOptions& options = {});

IngestResult ingest_edge_list(const std::filesystem::path& path,
                              const IngestOptions& options = {});

/// Inverse of ingestion: emits #nodes / #layers directives followed by one
/// `layer,i,j` row per edge (i < j in id order), deterministically ordered.
std::string export_edge_list_text(const MultiLayerNetwork& network,
                                  const std::vector<std::string>& node_ids,
                                  const std::vector<std::string>& layer_ids);

void export_edge_list(const std::filesystem::path& path,
                      const MultiLayerNetwork& network,
                      const std::vector<std::string>& node_ids,
                      const std::vector<std::string>& layer_ids);

}  // namespace scce
