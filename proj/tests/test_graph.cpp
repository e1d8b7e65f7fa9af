#include <sstream>
#include <stdexcept>

#include "compdyn/errors.hpp"
#include "compdyn/graph.hpp"
#include "compdyn/rng.hpp"
#include "doctest.h"

using namespace compdyn;

namespace {

NetworkParts two_pairs(double sigma, double xi) {
  NetworkParts p;
  p.populations = {Graph(2, {{0, 1}}), Graph(2, {{0, 1}})};
  p.interlinks[{0, 1}] = {{1, 0}};
  p.sigma = {sigma, sigma};
  p.xi[{0, 1}] = xi;
  p.xi[{1, 0}] = xi;
  p.partitions = {default_partition(2, 1), default_partition(2, 1)};
  p.omega = {0, 0, 0, 0};
  return p;
}

CoupledNetwork usecase(std::uint64_t seed) {
  UseCaseGraphs u = usecase_graphs(seed, 3);
  NetworkParts p;
  p.populations = u.populations;
  p.interlinks = u.interlinks;
  p.sigma = {4, 2, 2};
  p.xi = normalized_xi(u.populations, u.interlinks);
  for (const auto& g : u.populations) p.partitions.push_back(default_partition(g.size()));
  p.omega.assign(63, 0.0);
  return assemble(p);
}

}  // namespace

TEST_CASE("k-ary tree sizes and shape") {
  Graph g = gen_kary_tree(4, 2);
  CHECK(g.size() == 21);
  CHECK(g.edge_count() == 20);
  CHECK(g.connected());

  Graph path = gen_kary_tree(1, 3);
  CHECK(path.size() == 4);
  CHECK(path.edge_count() == 3);
  CHECK(path.degree(0) == 1);
  CHECK(path.degree(1) == 2);

  Graph bin = gen_kary_tree(2, 2);
  CHECK(bin.size() == 7);
  CHECK(bin.degree(0) == 2);
  for (int leaf = 3; leaf < 7; ++leaf) CHECK(bin.degree(leaf) == 1);

  CHECK_THROWS_AS(gen_kary_tree(1000, 10), std::length_error);
  CHECK_THROWS_AS(gen_kary_tree(0, 2), ValidationError);
}

TEST_CASE("adjacency invariants") {
  Graph g = gen_erdos_renyi(15, 0.3, 7);
  const auto& a = g.adjacency();
  CHECK(a == a.transpose());
  int upper = 0;
  for (int i = 0; i < g.size(); ++i) {
    CHECK(a(i, i) == 0);
    for (int j = i + 1; j < g.size(); ++j) upper += a(i, j);
  }
  CHECK(upper == static_cast<int>(g.edge_count()));
}

TEST_CASE("erdos-renyi extremes and edge count distribution") {
  CHECK(gen_erdos_renyi(21, 0.0, 1).edge_count() == 0);
  CHECK(gen_erdos_renyi(21, 1.0, 1).edge_count() == 210);
  // Binomial(210, 0.2) puts 7.3e-5 of its mass outside [20, 65]; with 1000
  // seeds more than one excursion is already a 0.3% event.
  int outside = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto m = gen_erdos_renyi(21, 0.2, derive_seed(99, {s})).edge_count();
    if (m < 20 || m > 65) ++outside;
  }
  CHECK(outside <= 1);
  CHECK(gen_erdos_renyi(21, 0.2, 5).edges() == gen_erdos_renyi(21, 0.2, 5).edges());
  CHECK_THROWS_AS(gen_erdos_renyi(5, 1.5, 1), ValidationError);
}

TEST_CASE("watts-strogatz lattice and rewiring") {
  Graph ring = gen_watts_strogatz(21, 6, 0.0, 3);
  CHECK(ring.edge_count() == 63);
  for (int i = 0; i < 21; ++i) CHECK(ring.degree(i) == 6);

  Graph cycle = gen_watts_strogatz(6, 2, 0.0, 3);
  CHECK(cycle.edge_count() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(cycle.degree(i) == 2);
    CHECK(cycle.adjacency()(i, (i + 1) % 6) == 1);
  }

  UseCaseGraphs u = usecase_graphs(0, 3);
  CHECK(u.populations[2].edge_count() == 63);
  CHECK(u.populations[2].connected());
  for (std::uint64_t s = 0; s < 50; ++s) CHECK(gen_watts_strogatz(21, 6, 0.4, s).edge_count() == 63);

  CHECK_THROWS_AS(gen_watts_strogatz(6, 6, 0.1, 1), ValidationError);
  CHECK_THROWS_AS(gen_watts_strogatz(6, 3, 0.1, 1), ValidationError);
}

TEST_CASE("edge list round trip") {
  Graph g = gen_erdos_renyi(12, 0.4, 11);
  std::stringstream ss;
  write_edge_list(ss, g);
  Graph back = read_edge_list(ss);
  CHECK(back.size() == 12);
  CHECK(back.edges() == g.edges());

  std::istringstream bad("0 1\n2\n");
  CHECK_THROWS_AS(read_edge_list(bad), ValidationError);
}

TEST_CASE("assembly of a two-pair network") {
  CoupledNetwork net = assemble(two_pairs(1.0, 1.0));
  const Eigen::MatrixXd w = net.weights();
  int internal = 0, cross = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (w(i, j) != 0.0) (net.population_of(i) == net.population_of(j) ? internal : cross)++;
  // Each undirected edge occupies two entries of the dense matrix.
  CHECK(internal == 4);
  CHECK(cross == 2);
  CHECK(w(1, 2) == 1.0);
  CHECK(w(2, 1) == 1.0);
  CHECK((w.array() >= 0.0).all());
}

TEST_CASE("frustration blocks") {
  NetworkParts p = two_pairs(1.0, 1.0);
  p.phi = 0.3;
  p.psi = -0.1;
  CoupledNetwork net = assemble(p);
  const Eigen::MatrixXd f = net.frustration();
  CHECK(f.block(0, 2, 2, 2).isConstant(0.3));
  CHECK(f.block(2, 0, 2, 2).isConstant(-0.1));
  CHECK(f.block(0, 0, 2, 2).isZero());
  CHECK(f.block(2, 2, 2, 2).isZero());

  p.interlinks.clear();
  CoupledNetwork bare = assemble(p);
  DegreeStats s = degree_stats(bare);
  CHECK(s.total(0, 1) == 0);
  CHECK(s.total(1, 0) == 0);
  // No links, so no frustrated couplings are ever used.
  for (const auto& row : bare.couplings())
    for (const auto& c : row) CHECK(c.frustration == 0.0);
}

TEST_CASE("partition validation") {
  NetworkParts p = two_pairs(1.0, 1.0);
  p.partitions[0] = Partition{{0, 1}, {1}};
  CHECK_THROWS_AS(assemble(p), ValidationError);
  p.partitions[0] = Partition{{0}, {}};
  CHECK_THROWS_AS(assemble(p), ValidationError);
  p = two_pairs(1.0, 1.0);
  p.omega.pop_back();
  CHECK_THROWS_AS(assemble(p), ValidationError);
  p = two_pairs(-1.0, 1.0);
  CHECK_THROWS_AS(assemble(p), ValidationError);
}

TEST_CASE("use-case degree totals and normalization") {
  CoupledNetwork net = usecase(1);
  DegreeStats s = degree_stats(net);
  CHECK(s.total(0, 1) == 16);
  CHECK(s.total(0, 2) == 5);
  CHECK(s.total(1, 2) == 16);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(s.total(i, j) == s.total(j, i));
  CHECK(net.xi(0, 1) == doctest::Approx(21.0 / 16.0));
  CHECK(effective_coupling(net, s, 0, 1) == doctest::Approx(1.0));
  CHECK(effective_coupling(net, s, 2, 0) == doctest::Approx(1.0));

  // Per-node degrees sum to the totals.
  for (const auto& [key, d] : s.d) {
    int sum = 0;
    for (int x : d) sum += x;
    CHECK(sum == s.total(key.first, key.second));
  }
  CHECK(net.strategic_nodes(1) == std::vector<int>{21, 22, 23, 24, 25});
}

TEST_CASE("complete bipartite interlink") {
  NetworkParts p;
  p.populations = {Graph(3, {}), Graph(4, {})};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 4; ++b) p.interlinks[{0, 1}].emplace_back(a, b);
  p.sigma = {1, 1};
  p.xi[{0, 1}] = 1.0;
  p.xi[{1, 0}] = 2.0;
  p.partitions = {default_partition(3, 1), default_partition(4, 1)};
  p.omega.assign(7, 0.0);
  CoupledNetwork net = assemble(p);
  DegreeStats s = degree_stats(net);
  CHECK(s.total(0, 1) == 12);
  CHECK(s.total(1, 0) == 12);
  const Eigen::MatrixXd w = net.weights();
  // Same sparsity pattern both ways, independent weights.
  CHECK(((w.block(0, 3, 3, 4).array() != 0) == (w.block(3, 0, 4, 3).transpose().array() != 0)).all());
  CHECK(w(0, 3) == 1.0);
  CHECK(w(3, 0) == 2.0);
}

TEST_CASE("generators are bit-identical across runs") {
  for (std::uint64_t s : {0ULL, 1ULL, 12345ULL}) {
    CHECK(usecase_graphs(s).populations[1].edges() == usecase_graphs(s).populations[1].edges());
    CHECK(usecase_graphs(s).populations[2].edges() == usecase_graphs(s).populations[2].edges());
  }
}
