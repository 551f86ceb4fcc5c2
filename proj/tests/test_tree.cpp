#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "bmckde/io.hpp"
#include "bmckde/tree.hpp"

using namespace bmckde;

TEST_CASE("tree_size counts complete binary trees") {
  CHECK(tree_size(0) == 1);
  CHECK(tree_size(1) == 3);
  CHECK(tree_size(3) == 15);
  CHECK(tree_size(10) == 2047);
  CHECK(tree_size(12) == 8191);
  CHECK_THROWS_AS((void)tree_size(-1), std::invalid_argument);
  CHECK_THROWS_AS((void)tree_size(41), std::invalid_argument);
}

TEST_CASE("generation_of follows heap indexing") {
  CHECK(generation_of(0) == 0);
  CHECK(generation_of(1) == 1);
  CHECK(generation_of(2) == 1);
  CHECK(generation_of(3) == 2);
  CHECK(generation_of(6) == 2);
  CHECK(generation_of(7) == 3);
  CHECK(generation_of(14) == 3);
}

TEST_CASE("generation ranges tile the tree") {
  for (int g = 0; g < 6; ++g) {
    CHECK(generation_begin(g) == (1ll << g) - 1);
    CHECK(generation_size(g) == (1ll << g));
    // Every node of the generation reports that generation.
    CHECK(generation_of(generation_begin(g)) == g);
    CHECK(generation_of(generation_begin(g) + generation_size(g) - 1) == g);
  }
}

TEST_CASE("children and parent are inverse") {
  for (std::int64_t u = 0; u < 31; ++u) {
    const auto [left, right] = children_of(u);
    CHECK(left == 2 * u + 1);
    CHECK(right == 2 * u + 2);
    CHECK(parent_of(left) == u);
    CHECK(parent_of(right) == u);
  }
  CHECK_THROWS_AS((void)parent_of(0), std::invalid_argument);
}

TEST_CASE("tree CSV round-trips exactly") {
  TreeSample t;
  t.depth = 2;
  t.values.resize(7, 1);
  t.values << 0.1, 0.25, 1.0 / 3.0, 0.875, 1e-17, 0.9999999999999999, 0.5;

  const std::string path = "roundtrip_tree.csv";
  save_tree_csv(t, path);
  const TreeSample back = load_tree_csv(path);
  CHECK(back.depth == 2);
  CHECK(back.dim() == 1);
  REQUIRE(back.size() == 7);
  for (int i = 0; i < 7; ++i) {
    // format_double guarantees shortest round-trip formatting.
    CHECK(back.values(i, 0) == t.values(i, 0));
  }
  std::filesystem::remove(path);
}

TEST_CASE("multivariate tree CSV round-trips") {
  TreeSample t;
  t.depth = 1;
  t.values.resize(3, 2);
  t.values << 0.5, -1.5, 0.25, 3.25, 0.125, 2.0;
  const std::string path = "roundtrip_tree2.csv";
  save_tree_csv(t, path);
  const TreeSample back = load_tree_csv(path);
  CHECK(back.dim() == 2);
  CHECK((back.values - t.values).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("malformed tree CSVs are rejected") {
  const std::string path = "bad_tree.csv";

  SUBCASE("wrong header") {
    write_text_atomic(path, "node,gen,x1\n0,0,0.5\n");
    CHECK_THROWS_AS((void)load_tree_csv(path), std::invalid_argument);
  }
  SUBCASE("node count not a full tree") {
    write_text_atomic(path,
                      "node_index,generation,x1\n0,0,0.5\n1,1,0.25\n");
    CHECK_THROWS_AS((void)load_tree_csv(path), std::invalid_argument);
  }
  SUBCASE("index mismatch") {
    write_text_atomic(path, "node_index,generation,x1\n1,0,0.5\n");
    CHECK_THROWS_AS((void)load_tree_csv(path), std::invalid_argument);
  }
  SUBCASE("generation mismatch") {
    write_text_atomic(path,
                      "node_index,generation,x1\n0,0,0.5\n1,0,0.2\n2,1,0.3\n");
    CHECK_THROWS_AS((void)load_tree_csv(path), std::invalid_argument);
  }
  SUBCASE("non-numeric value") {
    write_text_atomic(path, "node_index,generation,x1\n0,0,zebra\n");
    CHECK_THROWS_AS((void)load_tree_csv(path), std::invalid_argument);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS((void)load_tree_csv("no_such_tree.csv"),
                    std::invalid_argument);
  }
  std::filesystem::remove(path);
}
