#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>

namespace bmckde {

//! Number of nodes in the complete binary tree of depth `n`, i.e. the tree
//! whose generations 0..n are all full: 2^(n+1) - 1.
std::int64_t tree_size(int depth);

//! Generation (root distance) of node `u` under breadth-first indexing,
//! where the root is node 0 and node u has children 2u+1 and 2u+2.
int generation_of(std::int64_t u);

//! Children (2u+1, 2u+2) of node `u`.
std::pair<std::int64_t, std::int64_t> children_of(std::int64_t u);

//! Parent (u-1)/2 of node `u`; the root has no parent.
std::int64_t parent_of(std::int64_t u);

//! First node index of generation `g`: 2^g - 1.
std::int64_t generation_begin(int g);

//! Number of nodes in generation `g`: 2^g.
std::int64_t generation_size(int g);

//! A complete binary tree of depth `depth` with a d-dimensional trait per
//! node; row u of `values` is the trait of node u in breadth-first order.
struct TreeSample {
  int depth = 0;
  Eigen::MatrixXd values;  // tree_size(depth) rows, d columns

  std::int64_t size() const { return values.rows(); }
  int dim() const { return static_cast<int>(values.cols()); }
};

//! Write a tree to CSV with header node_index,generation,x1,...,xd.
void save_tree_csv(const TreeSample& tree, const std::string& path);

//! Read a tree written by save_tree_csv, validating the header, the
//! node count (must be 2^(n+1) - 1) and the per-row index/generation pairs.
TreeSample load_tree_csv(const std::string& path);

}  // namespace bmckde
