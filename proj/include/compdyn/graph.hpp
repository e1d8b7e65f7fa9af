#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace compdyn {

using Edge = std::pair<int, int>;

/// Simple undirected graph on nodes 0..n-1. Edges are stored normalized
/// (u < v) and sorted; the dense adjacency is kept alongside for the block
/// assembly.
class Graph {
 public:
  Graph() = default;
  Graph(int n, std::vector<Edge> edges);

  int size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  const Eigen::MatrixXi& adjacency() const { return adjacency_; }
  int degree(int node) const;
  std::vector<int> neighbours(int node) const;
  bool connected() const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  Eigen::MatrixXi adjacency_;
};

Graph gen_kary_tree(int branching, int layers);
Graph gen_erdos_renyi(int n, double p, std::uint64_t seed);
Graph gen_watts_strogatz(int n, int k, double p_rewire, std::uint64_t seed);

// Edge-list text: one "u v" pair per line; '#' starts a comment. The node
// count is max index + 1 unless `n` is given.
void write_edge_list(std::ostream& os, const Graph& g);
Graph read_edge_list(std::istream& is, int n = -1);

using PopPair = std::pair<int, int>;

/// Links between population i and population j (i < j). Each pair is
/// (local node in V_i, local node in V_j); the incidence matrix A^(ij) has
/// rows indexed by V_i.
struct InterLinks {
  std::vector<Edge> pairs;
  Eigen::MatrixXi incidence;
};

/// Strategic/tactical split of one population (local node indices).
struct Partition {
  std::vector<int> strategic;
  std::vector<int> tactical;
};

struct NetworkParts {
  std::vector<Graph> populations;
  std::map<PopPair, std::vector<Edge>> interlinks;  // keys with first < second
  std::vector<double> sigma;                        // per population
  std::map<PopPair, double> xi;                     // ordered pairs (i, j), i != j
  double phi = 0.0;                                 // frustration of population 0 towards 1
  double psi = 0.0;                                 // frustration of population 1 towards 0
  std::vector<Partition> partitions;
  std::vector<double> omega;                        // global node order
};

/// One weighted, frustrated neighbour of a node in the combined graph.
struct Coupling {
  int node;
  double weight;
  double frustration;
};

/// Block-coupled network over several populations. Nodes are numbered
/// globally with population blocks contiguous: population p occupies
/// [offset(p), offset(p) + size(p)). Immutable after assembly.
class CoupledNetwork {
 public:
  int population_count() const { return static_cast<int>(populations_.size()); }
  int node_count() const { return total_; }
  int size(int pop) const { return populations_.at(pop).size(); }
  int offset(int pop) const { return offsets_.at(pop); }
  int population_of(int node) const;

  const Graph& population(int pop) const { return populations_.at(pop); }
  const InterLinks* interlinks(int i, int j) const;  // i < j; nullptr when absent
  double sigma(int pop) const { return sigma_.at(pop); }
  double xi(int i, int j) const;                      // 0 when absent
  double phi() const { return phi_; }
  double psi() const { return psi_; }
  const Partition& partition(int pop) const { return partitions_.at(pop); }
  const std::vector<double>& omega() const { return omega_; }

  // Global node indices of the strategic / tactical subsets and whole block.
  const std::vector<int>& strategic_nodes(int pop) const { return strategic_global_.at(pop); }
  const std::vector<int>& tactical_nodes(int pop) const { return tactical_global_.at(pop); }

  // Dense weighted adjacency W and frustration matrix Phi.
  Eigen::MatrixXd weights() const;
  Eigen::MatrixXd frustration() const;

  // Sparse row view of W / Phi used by the phase right-hand side.
  const std::vector<std::vector<Coupling>>& couplings() const { return couplings_; }

  double mean_omega(int pop) const;

  // Rebuild with different intrinsic frequencies (same structure).
  CoupledNetwork with_omega(std::vector<double> omega) const;

  const NetworkParts& parts() const { return parts_; }

 private:
  friend CoupledNetwork assemble(NetworkParts parts);

  NetworkParts parts_;
  std::vector<Graph> populations_;
  std::map<PopPair, InterLinks> links_;
  std::vector<double> sigma_;
  std::map<PopPair, double> xi_;
  double phi_ = 0.0;
  double psi_ = 0.0;
  std::vector<Partition> partitions_;
  std::vector<double> omega_;
  std::vector<int> offsets_;
  int total_ = 0;
  std::vector<std::vector<int>> strategic_global_;
  std::vector<std::vector<int>> tactical_global_;
  std::vector<std::vector<Coupling>> couplings_;
};

/// Validates sizes, couplings and partitions and builds the block structure.
/// Throws ValidationError on any inconsistency.
CoupledNetwork assemble(NetworkParts parts);

/// Per-node and total cross degrees for every ordered population pair.
struct DegreeStats {
  std::map<PopPair, std::vector<int>> d;  // d[(i,j)][k] = degree of node k of V_i into V_j
  std::map<PopPair, int> d_total;

  int total(int i, int j) const;
};

DegreeStats degree_stats(const CoupledNetwork& net);

// Effective cross coupling gamma_ij = xi_ij d_T^(ij) / N_i.
double effective_coupling(const CoupledNetwork& net, const DegreeStats& stats, int i, int j);

// xi_ij = N_i / d_T^(ij) (0 when the pair has no links), which makes every
// effective coupling equal to one.
std::map<PopPair, double> normalized_xi(const std::vector<Graph>& pops,
                                        const std::map<PopPair, std::vector<Edge>>& links);

// Default split: nodes 0..4 strategic, remainder tactical (for the (4,2) tree
// this is the root plus the first layer).
Partition default_partition(int n, int strategic_count = 5);

/// The three-population use case: Blue = 4-ary tree with two layers,
/// Red = Erdos-Renyi(21, 0.2), Green = Watts-Strogatz(21, 6, 0.4); Blue 0-4 to
/// Green 0-4, Blue 5-20 to Red 5-20 and Red 5-20 to Green 5-20, one-to-one.
struct UseCaseGraphs {
  std::vector<Graph> populations;
  std::map<PopPair, std::vector<Edge>> interlinks;
};

UseCaseGraphs usecase_graphs(std::uint64_t seed, int population_count = 3);

}  // namespace compdyn
