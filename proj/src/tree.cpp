#include "bmckde/tree.hpp"

#include <bit>
#include <charconv>
#include <stdexcept>
#include <vector>

#include "bmckde/io.hpp"

namespace bmckde {

std::int64_t tree_size(int depth) {
  if (depth < 0) throw std::invalid_argument("tree depth must be >= 0");
  if (depth > 40) throw std::invalid_argument("tree depth must be <= 40");
  return (std::int64_t{1} << (depth + 1)) - 1;
}

int generation_of(std::int64_t u) {
  if (u < 0) throw std::invalid_argument("node index must be >= 0");
  return std::bit_width(static_cast<std::uint64_t>(u) + 1u) - 1;
}

std::pair<std::int64_t, std::int64_t> children_of(std::int64_t u) {
  if (u < 0) throw std::invalid_argument("node index must be >= 0");
  return {2 * u + 1, 2 * u + 2};
}

std::int64_t parent_of(std::int64_t u) {
  if (u <= 0) throw std::invalid_argument("the root has no parent");
  return (u - 1) / 2;
}

std::int64_t generation_begin(int g) {
  if (g < 0) throw std::invalid_argument("generation must be >= 0");
  return (std::int64_t{1} << g) - 1;
}

std::int64_t generation_size(int g) {
  if (g < 0) throw std::invalid_argument("generation must be >= 0");
  return std::int64_t{1} << g;
}

namespace {

double parse_double(const std::string& cell, const char* what) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument(std::string("tree csv: bad ") + what + " '" +
                             cell + "'");
  }
  return value;
}

std::int64_t parse_int(const std::string& cell, const char* what) {
  std::int64_t value = 0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument(std::string("tree csv: bad ") + what + " '" +
                             cell + "'");
  }
  return value;
}

}  // namespace

void save_tree_csv(const TreeSample& tree, const std::string& path) {
  std::vector<std::string> header{"node_index", "generation"};
  for (int j = 0; j < tree.dim(); ++j) {
    header.push_back("x" + std::to_string(j + 1));
  }
  CsvWriter csv(header);
  std::vector<std::string> row(header.size());
  for (std::int64_t u = 0; u < tree.size(); ++u) {
    row[0] = std::to_string(u);
    row[1] = std::to_string(generation_of(u));
    for (int j = 0; j < tree.dim(); ++j) {
      row[2 + j] = format_double(tree.values(u, j));
    }
    csv.add_row(row);
  }
  csv.write(path);
}

TreeSample load_tree_csv(const std::string& path) {
  const std::string text = read_text(path);
  std::vector<std::string> lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw std::invalid_argument("tree csv: empty file");

  const std::vector<std::string> header = split(lines[0], ',');
  if (header.size() < 3 || header[0] != "node_index" ||
      header[1] != "generation") {
    throw std::invalid_argument("tree csv: unexpected header '" + lines[0] + "'");
  }
  const int dim = static_cast<int>(header.size()) - 2;
  for (int j = 0; j < dim; ++j) {
    if (header[2 + j] != "x" + std::to_string(j + 1)) {
      throw std::invalid_argument("tree csv: unexpected header '" + lines[0] +
                               "'");
    }
  }

  const std::int64_t n_nodes = static_cast<std::int64_t>(lines.size()) - 1;
  // A complete tree has 2^(depth+1) - 1 nodes, so n_nodes + 1 must be a
  // power of two.
  if (n_nodes < 1 || (static_cast<std::uint64_t>(n_nodes + 1) &
                      static_cast<std::uint64_t>(n_nodes)) != 0u) {
    throw std::invalid_argument("tree csv: node count " +
                             std::to_string(n_nodes) +
                             " is not 2^(n+1) - 1 for any depth n");
  }

  TreeSample tree;
  tree.depth = generation_of(n_nodes - 1);
  tree.values.resize(n_nodes, dim);
  for (std::int64_t u = 0; u < n_nodes; ++u) {
    const std::vector<std::string> cells = split(lines[1 + u], ',');
    if (static_cast<int>(cells.size()) != dim + 2) {
      throw std::invalid_argument("tree csv: row " + std::to_string(u) +
                               " has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(dim + 2));
    }
    if (parse_int(cells[0], "node_index") != u) {
      throw std::invalid_argument("tree csv: row " + std::to_string(u) +
                               " has node_index " + cells[0]);
    }
    if (parse_int(cells[1], "generation") != generation_of(u)) {
      throw std::invalid_argument("tree csv: node " + std::to_string(u) +
                               " has generation " + cells[1]);
    }
    for (int j = 0; j < dim; ++j) {
      tree.values(u, j) = parse_double(cells[2 + j], "value");
    }
  }
  return tree;
}

}  // namespace bmckde
