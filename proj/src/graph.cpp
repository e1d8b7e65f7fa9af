#include "compdyn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "compdyn/errors.hpp"
#include "compdyn/rng.hpp"

namespace compdyn {

Graph::Graph(int n, std::vector<Edge> edges) : n_(n) {
  if (n < 0) throw ValidationError("graph: negative node count");
  for (auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw ValidationError("graph: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") outside 0.." + std::to_string(n - 1));
    if (u == v) throw ValidationError("graph: self-loop at node " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw ValidationError("graph: duplicate edge");
  edges_ = std::move(edges);
  adjacency_ = Eigen::MatrixXi::Zero(n, n);
  for (const auto& [u, v] : edges_) {
    adjacency_(u, v) = 1;
    adjacency_(v, u) = 1;
  }
}

int Graph::degree(int node) const { return adjacency_.row(node).sum(); }

std::vector<int> Graph::neighbours(int node) const {
  std::vector<int> out;
  for (int j = 0; j < n_; ++j)
    if (adjacency_(node, j) != 0) out.push_back(j);
  return out;
}

bool Graph::connected() const {
  if (n_ <= 1) return true;
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::queue<int> todo;
  todo.push(0);
  seen[0] = 1;
  int count = 1;
  while (!todo.empty()) {
    const int u = todo.front();
    todo.pop();
    for (int v = 0; v < n_; ++v) {
      if (adjacency_(u, v) != 0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        todo.push(v);
      }
    }
  }
  return count == n_;
}

Graph gen_kary_tree(int branching, int layers) {
  if (branching < 1 || layers < 1)
    throw ValidationError("kary tree: branching and layers must be >= 1");
  // n = 1 + k + k^2 + ... + k^layers
  long long n = 1;
  long long level = 1;
  for (int l = 0; l < layers; ++l) {
    if (level > std::numeric_limits<int>::max() / branching)
      throw std::length_error("kary tree: node count overflows");
    level *= branching;
    n += level;
    if (n > std::numeric_limits<int>::max())
      throw std::length_error("kary tree: node count overflows");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  // Breadth-first numbering: children of node i are k*i + 1 .. k*i + k.
  for (long long child = 1; child < n; ++child)
    edges.emplace_back(static_cast<int>((child - 1) / branching), static_cast<int>(child));
  return Graph(static_cast<int>(n), std::move(edges));
}

Graph gen_erdos_renyi(int n, double p, std::uint64_t seed) {
  if (n < 0) throw ValidationError("erdos-renyi: negative size");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("erdos-renyi: p outside [0, 1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) edges.emplace_back(u, v);
  return Graph(n, std::move(edges));
}

Graph gen_watts_strogatz(int n, int k, double p_rewire, std::uint64_t seed) {
  if (k < 0 || k % 2 != 0) throw ValidationError("watts-strogatz: k must be even and >= 0");
  if (k >= n) throw ValidationError("watts-strogatz: k must be smaller than n");
  if (!(p_rewire >= 0.0 && p_rewire <= 1.0))
    throw ValidationError("watts-strogatz: rewiring probability outside [0, 1]");

  std::vector<std::vector<char>> adj(static_cast<std::size_t>(n),
                                     std::vector<char>(static_cast<std::size_t>(n), 0));
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  auto link = [&](int u, int v, char on) {
    adj[u][v] = adj[v][u] = on;
    deg[u] += on ? 1 : -1;
    deg[v] += on ? 1 : -1;
  };
  for (int j = 1; j <= k / 2; ++j)
    for (int u = 0; u < n; ++u) link(u, (u + j) % n, 1);

  // Rewire each lattice edge (u, u+j) with probability p to (u, w), w chosen
  // uniformly among nodes that are neither u nor already adjacent to u.
  Rng rng(seed);
  for (int j = 1; j <= k / 2; ++j) {
    for (int u = 0; u < n; ++u) {
      const int v = (u + j) % n;
      if (!rng.bernoulli(p_rewire)) continue;
      if (deg[u] >= n - 1) continue;
      if (!adj[u][v]) continue;
      int w;
      do {
        w = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      } while (w == u || adj[u][w]);
      link(u, v, 0);
      link(u, w, 1);
    }
  }
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (adj[u][v]) edges.emplace_back(u, v);
  return Graph(n, std::move(edges));
}

void write_edge_list(std::ostream& os, const Graph& g) {
  os << "# nodes " << g.size() << '\n';
  for (const auto& [u, v] : g.edges()) os << u << ' ' << v << '\n';
}

Graph read_edge_list(std::istream& is, int n) {
  std::vector<Edge> edges;
  std::string line;
  int max_node = -1;
  int declared = -1;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      std::istringstream c(line.substr(hash + 1));
      std::string word;
      int count;
      if (c >> word && word == "nodes" && c >> count) declared = count;
      line.resize(hash);
    }
    std::istringstream ls(line);
    int u, v;
    if (!(ls >> u)) continue;
    if (!(ls >> v)) throw ValidationError("edge list line " + std::to_string(lineno) + ": expected 'u v'");
    std::string extra;
    if (ls >> extra) throw ValidationError("edge list line " + std::to_string(lineno) + ": trailing data");
    edges.emplace_back(u, v);
    max_node = std::max({max_node, u, v});
  }
  if (n < 0) n = declared >= 0 ? declared : max_node + 1;
  return Graph(n, std::move(edges));
}

int CoupledNetwork::population_of(int node) const {
  for (int p = population_count() - 1; p >= 0; --p)
    if (node >= offsets_[p]) return p;
  throw ValidationError("node index out of range");
}

const InterLinks* CoupledNetwork::interlinks(int i, int j) const {
  auto it = links_.find({i, j});
  return it == links_.end() ? nullptr : &it->second;
}

double CoupledNetwork::xi(int i, int j) const {
  auto it = xi_.find({i, j});
  return it == xi_.end() ? 0.0 : it->second;
}

double CoupledNetwork::mean_omega(int pop) const {
  double s = 0.0;
  for (int k = 0; k < size(pop); ++k) s += omega_[static_cast<std::size_t>(offset(pop) + k)];
  return s / size(pop);
}

Eigen::MatrixXd CoupledNetwork::weights() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(total_, total_);
  for (int k = 0; k < total_; ++k)
    for (const auto& c : couplings_[static_cast<std::size_t>(k)]) w(k, c.node) = c.weight;
  return w;
}

Eigen::MatrixXd CoupledNetwork::frustration() const {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(total_, total_);
  if (population_count() >= 2) {
    f.block(offset(0), offset(1), size(0), size(1)).setConstant(phi_);
    f.block(offset(1), offset(0), size(1), size(0)).setConstant(psi_);
  }
  return f;
}

CoupledNetwork CoupledNetwork::with_omega(std::vector<double> omega) const {
  NetworkParts p = parts_;
  p.omega = std::move(omega);
  return assemble(std::move(p));
}

CoupledNetwork assemble(NetworkParts parts) {
  const int npop = static_cast<int>(parts.populations.size());
  if (npop < 1) throw ValidationError("network: at least one population required");
  if (static_cast<int>(parts.sigma.size()) != npop)
    throw ValidationError("network: sigma needs one value per population");
  if (static_cast<int>(parts.partitions.size()) != npop)
    throw ValidationError("network: partition needs one entry per population");
  if (!std::isfinite(parts.phi) || !std::isfinite(parts.psi))
    throw ValidationError("network: frustration must be finite");
  for (double s : parts.sigma)
    if (!(std::isfinite(s) && s >= 0.0)) throw ValidationError("network: sigma must be finite and >= 0");

  CoupledNetwork net;
  net.populations_ = parts.populations;
  net.sigma_ = parts.sigma;
  net.phi_ = parts.phi;
  net.psi_ = parts.psi;
  net.partitions_ = parts.partitions;

  net.offsets_.resize(static_cast<std::size_t>(npop));
  int total = 0;
  for (int p = 0; p < npop; ++p) {
    net.offsets_[p] = total;
    total += parts.populations[p].size();
  }
  net.total_ = total;
  if (static_cast<int>(parts.omega.size()) != total)
    throw ValidationError("network: omega has " + std::to_string(parts.omega.size()) +
                          " entries, expected " + std::to_string(total));
  for (double w : parts.omega)
    if (!std::isfinite(w)) throw ValidationError("network: omega must be finite");
  net.omega_ = parts.omega;

  for (const auto& [key, value] : parts.xi) {
    const auto [i, j] = key;
    if (i < 0 || j < 0 || i >= npop || j >= npop || i == j)
      throw ValidationError("network: xi key out of range");
    if (!(std::isfinite(value) && value >= 0.0))
      throw ValidationError("network: xi must be finite and >= 0");
  }
  net.xi_ = parts.xi;

  for (const auto& [key, pairs] : parts.interlinks) {
    const auto [i, j] = key;
    if (i < 0 || j < 0 || i >= npop || j >= npop || i >= j)
      throw ValidationError("network: interlink key must be (i, j) with i < j");
    InterLinks l;
    l.incidence = Eigen::MatrixXi::Zero(parts.populations[i].size(), parts.populations[j].size());
    for (const auto& [a, b] : pairs) {
      if (a < 0 || b < 0 || a >= parts.populations[i].size() || b >= parts.populations[j].size())
        throw ValidationError("network: interlink (" + std::to_string(a) + ", " + std::to_string(b) +
                              ") outside population sizes");
      if (l.incidence(a, b) != 0) throw ValidationError("network: duplicate interlink");
      l.incidence(a, b) = 1;
    }
    l.pairs = pairs;
    std::sort(l.pairs.begin(), l.pairs.end());
    net.links_.emplace(key, std::move(l));
  }

  net.strategic_global_.resize(static_cast<std::size_t>(npop));
  net.tactical_global_.resize(static_cast<std::size_t>(npop));
  for (int p = 0; p < npop; ++p) {
    const int n = parts.populations[p].size();
    std::vector<int> owner(static_cast<std::size_t>(n), 0);
    auto mark = [&](const std::vector<int>& nodes, const char* what) {
      for (int k : nodes) {
        if (k < 0 || k >= n)
          throw ValidationError(std::string("network: ") + what + " node out of range in population " +
                                std::to_string(p));
        if (owner[k]++ != 0)
          throw ValidationError("network: strategic/tactical partition overlaps in population " +
                                std::to_string(p));
      }
    };
    mark(parts.partitions[p].strategic, "strategic");
    mark(parts.partitions[p].tactical, "tactical");
    if (std::find(owner.begin(), owner.end(), 0) != owner.end())
      throw ValidationError("network: strategic/tactical partition incomplete in population " +
                            std::to_string(p));
    for (int k : parts.partitions[p].strategic) net.strategic_global_[p].push_back(net.offsets_[p] + k);
    for (int k : parts.partitions[p].tactical) net.tactical_global_[p].push_back(net.offsets_[p] + k);
  }

  // Sparse rows of W and Phi.
  net.couplings_.assign(static_cast<std::size_t>(total), {});
  for (int p = 0; p < npop; ++p) {
    const double s = parts.sigma[p];
    if (s == 0.0) continue;
    for (const auto& [u, v] : parts.populations[p].edges()) {
      const int gu = net.offsets_[p] + u;
      const int gv = net.offsets_[p] + v;
      net.couplings_[gu].push_back({gv, s, 0.0});
      net.couplings_[gv].push_back({gu, s, 0.0});
    }
  }
  auto frustration_of = [&](int from, int to) {
    if (from == 0 && to == 1) return parts.phi;
    if (from == 1 && to == 0) return parts.psi;
    return 0.0;
  };
  for (const auto& [key, l] : net.links_) {
    const auto [i, j] = key;
    const double xij = net.xi(i, j);
    const double xji = net.xi(j, i);
    for (const auto& [a, b] : l.pairs) {
      const int ga = net.offsets_[i] + a;
      const int gb = net.offsets_[j] + b;
      if (xij != 0.0) net.couplings_[ga].push_back({gb, xij, frustration_of(i, j)});
      if (xji != 0.0) net.couplings_[gb].push_back({ga, xji, frustration_of(j, i)});
    }
  }
  for (auto& row : net.couplings_)
    std::sort(row.begin(), row.end(), [](const Coupling& a, const Coupling& b) { return a.node < b.node; });

  net.parts_ = std::move(parts);
  return net;
}

int DegreeStats::total(int i, int j) const {
  auto it = d_total.find({i, j});
  return it == d_total.end() ? 0 : it->second;
}

DegreeStats degree_stats(const CoupledNetwork& net) {
  DegreeStats s;
  const int npop = net.population_count();
  for (int i = 0; i < npop; ++i) {
    for (int j = 0; j < npop; ++j) {
      if (i == j) continue;
      std::vector<int> d(static_cast<std::size_t>(net.size(i)), 0);
      const InterLinks* l = net.interlinks(std::min(i, j), std::max(i, j));
      if (l != nullptr) {
        for (const auto& [a, b] : l->pairs) {
          if (i < j)
            ++d[static_cast<std::size_t>(a)];
          else
            ++d[static_cast<std::size_t>(b)];
        }
      }
      int total = 0;
      for (int x : d) total += x;
      s.d[{i, j}] = std::move(d);
      s.d_total[{i, j}] = total;
    }
  }
  return s;
}

double effective_coupling(const CoupledNetwork& net, const DegreeStats& stats, int i, int j) {
  return net.xi(i, j) * stats.total(i, j) / net.size(i);
}

std::map<PopPair, double> normalized_xi(const std::vector<Graph>& pops,
                                        const std::map<PopPair, std::vector<Edge>>& links) {
  std::map<PopPair, double> xi;
  const int npop = static_cast<int>(pops.size());
  for (int i = 0; i < npop; ++i) {
    for (int j = 0; j < npop; ++j) {
      if (i == j) continue;
      auto it = links.find({std::min(i, j), std::max(i, j)});
      const std::size_t dt = it == links.end() ? 0 : it->second.size();
      xi[{i, j}] = dt == 0 ? 0.0 : static_cast<double>(pops[i].size()) / static_cast<double>(dt);
    }
  }
  return xi;
}

Partition default_partition(int n, int strategic_count) {
  Partition p;
  for (int k = 0; k < n; ++k) (k < strategic_count ? p.strategic : p.tactical).push_back(k);
  return p;
}

UseCaseGraphs usecase_graphs(std::uint64_t seed, int population_count) {
  if (population_count != 2 && population_count != 3)
    throw ValidationError("use case network has two or three populations");
  UseCaseGraphs u;
  u.populations.push_back(gen_kary_tree(4, 2));
  u.populations.push_back(gen_erdos_renyi(21, 0.2, derive_seed(seed, {stream::graph, 1})));
  if (population_count == 3)
    u.populations.push_back(gen_watts_strogatz(21, 6, 0.4, derive_seed(seed, {stream::graph, 2})));

  std::vector<Edge> blue_red;
  for (int k = 5; k < 21; ++k) blue_red.emplace_back(k, k);
  u.interlinks[{0, 1}] = blue_red;
  if (population_count == 3) {
    std::vector<Edge> blue_green;
    std::vector<Edge> red_green;
    for (int k = 0; k < 5; ++k) blue_green.emplace_back(k, k);
    for (int k = 5; k < 21; ++k) red_green.emplace_back(k, k);
    u.interlinks[{0, 2}] = blue_green;
    u.interlinks[{1, 2}] = red_green;
  }
  return u;
}

}  // namespace compdyn
