#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace lsjm {

// Ordered set of unique node labels; index(label) is a bijection onto 0..N-1.
class NodeSet {
 public:
  explicit NodeSet(std::vector<std::string> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(int i) const { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& labels() const { return labels_; }
  bool contains(const std::string& label) const { return index_.count(label) > 0; }
  int index(const std::string& label) const;  // throws UnknownNode

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

// One binary relation over the node set. The diagonal is structurally absent:
// entries are 0 and the mask is false there. Unobserved dyads store entry 0 with
// mask false and are excluded from every likelihood sum. Undirected views keep
// both ordered entries set so a single ordered-pair code path serves both cases.
class AdjacencyView {
 public:
  AdjacencyView(int n, bool directed, std::string label);

  // Builds from a dense 0/1 matrix (row-major, n*n), validating binarity, the
  // null diagonal and, for undirected views, symmetry.
  static AdjacencyView from_dense(int n, bool directed, std::string label,
                                  const std::vector<int>& entries);

  int n() const { return n_; }
  bool directed() const { return directed_; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  std::uint8_t y(int i, int j) const { return entries_[idx(i, j)]; }
  bool observed(int i, int j) const { return mask_[idx(i, j)] != 0; }

  // Adds or removes a link; mirrored for undirected views.
  void set_edge(int i, int j, bool present);
  // Marks a dyad observed/unobserved; hiding a dyad also zeroes its entry.
  void set_observed(int i, int j, bool obs);

  long link_count() const;          // observed 1-entries over ordered dyads
  long pair_link_count() const;     // observed linked pairs counted once
  long observed_dyad_count() const; // observed ordered dyads
  long observed_pair_count() const; // observed pairs counted once

  // Observed in+out link count at node i (both ordered directions).
  long degree_sum(int i) const;

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
  }

  int n_;
  bool directed_;
  std::string label_;
  std::vector<std::uint8_t> entries_;
  std::vector<std::uint8_t> mask_;
};

// K views over one shared node set.
struct MultiplexNetwork {
  NodeSet nodes;
  std::vector<AdjacencyView> views;

  int n() const { return nodes.size(); }
  int view_count() const { return static_cast<int>(views.size()); }
};

// Validated container; rejects dimension mismatches between views and node set.
MultiplexNetwork build_multiplex(NodeSet nodes, std::vector<AdjacencyView> views);

// Fraction of observed off-diagonal dyads that carry a link. Two published
// conventions disagree for undirected data, so both are computed:
//   per_ordered_dyad  = links / observed ordered dyads  (pairs counted once for
//                       undirected views, so this halves the pair density)
//   per_pair          = linked pairs / observed pairs
struct Density {
  double per_ordered_dyad = 0.0;
  double per_pair = 0.0;
};
Density density_both(const AdjacencyView& view);

// The conventional single number: ordered dyads for directed views, pairs
// counted once for undirected ones.
double density(const AdjacencyView& view);

enum class DegreeKind { Total, In, Out };

// Histogram degree -> node count; counts sum to N. Undirected views use the
// neighbor count for every kind.
std::map<long, int> degree_distribution(const AdjacencyView& view,
                                        DegreeKind kind = DegreeKind::Total);

}  // namespace lsjm
