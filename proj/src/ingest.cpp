#include "scce/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace scce {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, sep)) {
    out.push_back(trim(field));
  }
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

bool parse_integer(const std::string& s, long long& value) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                              ": " + what);
}

// Sort ids numerically when every id is an integer, lexicographically
// otherwise, so external numbering is preserved when it exists.
std::vector<std::string> ordered_ids(const std::set<std::string>& ids) {
  std::vector<std::string> out(ids.begin(), ids.end());
  bool all_numeric = true;
  std::vector<long long> numeric(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!parse_integer(out[i], numeric[i])) {
      all_numeric = false;
      break;
    }
  }
  if (all_numeric) {
    std::vector<std::size_t> order(out.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (numeric[a] != numeric[b]) return numeric[a] < numeric[b];
      return out[a] < out[b];
    });
    std::vector<std::string> sorted;
    sorted.reserve(out.size());
    for (std::size_t i : order) sorted.push_back(out[i]);
    return sorted;
  }
  return out;  // std::set already gives lexicographic order
}

}  // namespace

IngestResult ingest_edge_list_text(const std::string& text,
                                   const IngestOptions& options) {
  std::set<std::string> node_universe;
  std::set<std::string> layer_universe;
  bool declared_nodes = false;
  std::set<std::string> seen_nodes;
  std::set<std::string> seen_layers;
  // (layer id, node id pair) -> accumulated weight
  std::map<std::tuple<std::string, std::string, std::string>, double> weights;

  IngestReport report;
  std::istringstream stream(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '#') {
      const auto directive = [&](const char* name) -> std::string {
        const std::string prefix = std::string("#") + name + ":";
        if (trimmed.rfind(prefix, 0) == 0) return trimmed.substr(prefix.size());
        return {};
      };
      if (std::string ids = directive("nodes"); !ids.empty()) {
        declared_nodes = true;
        for (const auto& id : split_fields(ids, ',')) {
          if (id.empty()) fail(line_no, "empty id in #nodes directive");
          node_universe.insert(id);
        }
      } else if (std::string ids = directive("layers"); !ids.empty()) {
        for (const auto& id : split_fields(ids, ',')) {
          if (id.empty()) fail(line_no, "empty id in #layers directive");
          layer_universe.insert(id);
        }
      }
      continue;  // plain comment
    }
    const std::vector<std::string> fields = split_fields(trimmed, ',');
    if (fields.size() != 3 && fields.size() != 4) {
      fail(line_no, "expected layer,i,j[,weight], got " +
                        std::to_string(fields.size()) + " fields");
    }
    const std::string& layer = fields[0];
    const std::string& a = fields[1];
    const std::string& b = fields[2];
    if (layer.empty() || a.empty() || b.empty()) {
      fail(line_no, "empty layer or node id");
    }
    double w = 1.0;
    if (fields.size() == 4) {
      try {
        std::size_t used = 0;
        w = std::stod(fields[3], &used);
        if (used != fields[3].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        fail(line_no, "cannot parse weight '" + fields[3] + "'");
      }
    }
    if (declared_nodes) {
      const std::string& missing = !node_universe.count(a) ? a : b;
      if (!node_universe.count(a) || !node_universe.count(b)) {
        fail(line_no, "node id '" + missing +
                          "' outside the declared #nodes universe");
      }
    }
    ++report.records;
    if (a == b) {
      ++report.self_loops_ignored;
      continue;
    }
    seen_nodes.insert(a);
    seen_nodes.insert(b);
    seen_layers.insert(layer);
    const auto key = a < b ? std::make_tuple(layer, a, b)
                           : std::make_tuple(layer, b, a);
    auto [it, inserted] = weights.emplace(key, w);
    if (!inserted) {
      it->second += w;
      ++report.merged_records;
    }
  }

  if (!declared_nodes) node_universe = seen_nodes;
  for (const auto& id : seen_layers) layer_universe.insert(id);
  if (node_universe.empty()) {
    throw std::invalid_argument("edge list: no nodes found");
  }
  if (layer_universe.empty()) {
    throw std::invalid_argument("edge list: no layers found");
  }

  std::vector<std::string> node_ids = ordered_ids(node_universe);
  std::vector<std::string> layer_ids = ordered_ids(layer_universe);
  std::map<std::string, int> node_index;
  std::map<std::string, int> layer_index;
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    node_index[node_ids[i]] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < layer_ids.size(); ++i) {
    layer_index[layer_ids[i]] = static_cast<int>(i);
  }

  const int n = static_cast<int>(node_ids.size());
  const int L = static_cast<int>(layer_ids.size());
  std::vector<AdjacencyMatrix> layers(
      static_cast<std::size_t>(L), AdjacencyMatrix::Zero(n, n));
  long thresholded_edges = 0;
  double max_weight = 0.0;
  bool any_weight = false;
  for (const auto& [key, w] : weights) {
    any_weight = true;
    max_weight = std::max(max_weight, w);
    if (w > options.threshold) {
      const int l = layer_index[std::get<0>(key)];
      const int i = node_index[std::get<1>(key)];
      const int j = node_index[std::get<2>(key)];
      layers[static_cast<std::size_t>(l)](i, j) = 1;
      layers[static_cast<std::size_t>(l)](j, i) = 1;
      ++thresholded_edges;
    }
  }
  if (any_weight && thresholded_edges == 0) {
    report.warnings.push_back(
        "threshold " + std::to_string(options.threshold) +
        " exceeds every accumulated weight (max " +
        std::to_string(max_weight) + "); all layers are empty");
  }

  report.nodes_before_filter = n;

  // Single-pass degree filter.
  std::vector<long> total_degree(static_cast<std::size_t>(n), 0);
  for (const auto& a : layers) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        total_degree[static_cast<std::size_t>(i)] += a(i, j);
      }
    }
  }
  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    if (total_degree[static_cast<std::size_t>(i)] >=
        options.min_total_degree) {
      keep.push_back(i);
    } else {
      report.dropped_nodes.push_back(node_ids[static_cast<std::size_t>(i)]);
    }
  }
  if (keep.empty()) {
    throw std::invalid_argument(
        "edge list: the min-total-degree filter removed every node");
  }

  IngestResult result;
  if (static_cast<int>(keep.size()) == n) {
    result.node_ids = std::move(node_ids);
  } else {
    const int m = static_cast<int>(keep.size());
    std::vector<AdjacencyMatrix> filtered(
        static_cast<std::size_t>(L), AdjacencyMatrix::Zero(m, m));
    for (int l = 0; l < L; ++l) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          filtered[static_cast<std::size_t>(l)](i, j) =
              layers[static_cast<std::size_t>(l)](
                  keep[static_cast<std::size_t>(i)],
                  keep[static_cast<std::size_t>(j)]);
        }
      }
    }
    layers = std::move(filtered);
    for (int i : keep) {
      result.node_ids.push_back(node_ids[static_cast<std::size_t>(i)]);
    }
  }
  report.nodes_after_filter = static_cast<int>(result.node_ids.size());

  const int kept_n = report.nodes_after_filter;
  report.layer_density.resize(static_cast<std::size_t>(L), 0.0);
  for (int l = 0; l < L; ++l) {
    long edges = 0;
    for (int i = 0; i < kept_n; ++i) {
      for (int j = i + 1; j < kept_n; ++j) {
        edges += layers[static_cast<std::size_t>(l)](i, j);
      }
    }
    const double pairs = 0.5 * kept_n * (kept_n - 1);
    report.layer_density[static_cast<std::size_t>(l)] =
        pairs > 0 ? edges / pairs : 0.0;
  }

  result.network = MultiLayerNetwork::from_layers(std::move(layers));
  result.layer_ids = std::move(layer_ids);
  result.report = std::move(report);
  return result;
}

IngestResult ingest_edge_list(const std::filesystem::path& path,
                              const IngestOptions& options) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return ingest_edge_list_text(buffer.str(), options);
}

std::string export_edge_list_text(const MultiLayerNetwork& network,
                                  const std::vector<std::string>& node_ids,
                                  const std::vector<std::string>& layer_ids) {
  const int n = network.node_count;
  const int L = network.layer_count();
  if (static_cast<int>(node_ids.size()) != n ||
      static_cast<int>(layer_ids.size()) != L) {
    throw std::invalid_argument("export_edge_list: id lists do not match");
  }
  std::ostringstream out;
  out << "# multilayer edge list: layer,i,j\n";
  out << "#nodes:";
  for (int i = 0; i < n; ++i) out << (i ? "," : " ") << node_ids[static_cast<std::size_t>(i)];
  out << "\n#layers:";
  for (int l = 0; l < L; ++l) out << (l ? "," : " ") << layer_ids[static_cast<std::size_t>(l)];
  out << "\n";
  for (int l = 0; l < L; ++l) {
    const auto& a = network.layers[static_cast<std::size_t>(l)];
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (a(i, j)) {
          out << layer_ids[static_cast<std::size_t>(l)] << ','
              << node_ids[static_cast<std::size_t>(i)] << ','
              << node_ids[static_cast<std::size_t>(j)] << '\n';
        }
      }
    }
  }
  return out.str();
}

void export_edge_list(const std::filesystem::path& path,
                      const MultiLayerNetwork& network,
                      const std::vector<std::string>& node_ids,
                      const std::vector<std::string>& layer_ids) {
  std::ofstream stream(path, std::ios::binary);
  if (!stream) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  stream << export_edge_list_text(network, node_ids, layer_ids);
}

}  // namespace scce
