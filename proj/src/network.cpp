#include "lsjm/network.hpp"

#include "lsjm/errors.hpp"

namespace lsjm {

NodeSet::NodeSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) throw DimensionMismatch("node set needs at least 2 nodes");
  index_.reserve(labels_.size());
  for (int i = 0; i < static_cast<int>(labels_.size()); ++i) {
    auto [it, inserted] = index_.emplace(labels_[static_cast<std::size_t>(i)], i);
    if (!inserted) throw DuplicateNodeLabel("duplicate node label: " + labels_[i]);
  }
}

int NodeSet::index(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw UnknownNode("unknown node label: " + label);
  return it->second;
}

AdjacencyView::AdjacencyView(int n, bool directed, std::string label)
    : n_(n), directed_(directed), label_(std::move(label)) {
  if (n < 2) throw DimensionMismatch("adjacency view needs at least 2 nodes");
  entries_.assign(static_cast<std::size_t>(n) * n, 0);
  mask_.assign(static_cast<std::size_t>(n) * n, 1);
  for (int i = 0; i < n; ++i) mask_[idx(i, i)] = 0;  // null diagonal
}

AdjacencyView AdjacencyView::from_dense(int n, bool directed, std::string label,
                                        const std::vector<int>& entries) {
  if (static_cast<long>(entries.size()) != static_cast<long>(n) * n)
    throw DimensionMismatch("dense matrix size does not match n*n");
  AdjacencyView view(n, directed, std::move(label));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int v = entries[static_cast<std::size_t>(i) * n + j];
      if (v != 0 && v != 1) throw NonBinaryEntry("entry must be 0 or 1");
      if (i == j) {
        if (v != 0) throw NonzeroDiagonal("diagonal entry must be 0");
        continue;
      }
      if (!directed && v != entries[static_cast<std::size_t>(j) * n + i])
        throw DimensionMismatch("undirected view has asymmetric entries");
      view.entries_[view.idx(i, j)] = static_cast<std::uint8_t>(v);
    }
  }
  return view;
}

void AdjacencyView::set_edge(int i, int j, bool present) {
  if (i == j) throw NonzeroDiagonal("self loops are not representable");
  entries_[idx(i, j)] = present ? 1 : 0;
  if (!directed_) entries_[idx(j, i)] = present ? 1 : 0;
}

void AdjacencyView::set_observed(int i, int j, bool obs) {
  if (i == j) return;  // diagonal stays unobserved
  mask_[idx(i, j)] = obs ? 1 : 0;
  if (!obs) entries_[idx(i, j)] = 0;
  if (!directed_) {
    mask_[idx(j, i)] = obs ? 1 : 0;
    if (!obs) entries_[idx(j, i)] = 0;
  }
}

long AdjacencyView::link_count() const {
  long c = 0;
  for (std::size_t k = 0; k < entries_.size(); ++k) c += (entries_[k] & mask_[k]);
  return c;
}

long AdjacencyView::pair_link_count() const {
  long c = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      c += ((y(i, j) && observed(i, j)) || (y(j, i) && observed(j, i))) ? 1 : 0;
  return c;
}

long AdjacencyView::observed_dyad_count() const {
  long c = 0;
  for (std::size_t k = 0; k < mask_.size(); ++k) c += mask_[k];
  return c;
}

long AdjacencyView::observed_pair_count() const {
  long c = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) c += (observed(i, j) || observed(j, i)) ? 1 : 0;
  return c;
}

long AdjacencyView::degree_sum(int i) const {
  long d = 0;
  for (int j = 0; j < n_; ++j) {
    if (j == i) continue;
    if (observed(i, j)) d += y(i, j);
    if (observed(j, i)) d += y(j, i);
  }
  return d;
}

MultiplexNetwork build_multiplex(NodeSet nodes, std::vector<AdjacencyView> views) {
  if (views.empty()) throw DimensionMismatch("multiplex needs at least one view");
  for (const auto& v : views) {
    if (v.n() != nodes.size())
      throw DimensionMismatch("view '" + v.label() + "' has " + std::to_string(v.n()) +
                              " nodes, node set has " + std::to_string(nodes.size()));
  }
  return MultiplexNetwork{std::move(nodes), std::move(views)};
}

Density density_both(const AdjacencyView& view) {
  Density d;
  const long ordered = view.observed_dyad_count();
  const long pairs = view.observed_pair_count();
  const long links = view.directed() ? view.link_count() : view.pair_link_count();
  // Directed: links over ordered dyads. Undirected: same link total related to
  // either denominator; per_ordered_dyad divides pair links by the full ordered
  // dyad count, reproducing the halved convention some sources use.
  if (view.directed()) {
    d.per_ordered_dyad = ordered > 0 ? static_cast<double>(links) / ordered : 0.0;
    d.per_pair = d.per_ordered_dyad;
  } else {
    d.per_ordered_dyad = ordered > 0 ? static_cast<double>(links) / ordered : 0.0;
    d.per_pair = pairs > 0 ? static_cast<double>(links) / pairs : 0.0;
  }
  return d;
}

double density(const AdjacencyView& view) {
  const Density d = density_both(view);
  return view.directed() ? d.per_ordered_dyad : d.per_pair;
}

std::map<long, int> degree_distribution(const AdjacencyView& view, DegreeKind kind) {
  std::map<long, int> hist;
  const int n = view.n();
  for (int i = 0; i < n; ++i) {
    long out = 0, in = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (view.observed(i, j)) out += view.y(i, j);
      if (view.observed(j, i)) in += view.y(j, i);
    }
    long d;
    if (!view.directed()) {
      d = out;  // symmetric storage: row sum is the neighbor count
    } else {
      d = kind == DegreeKind::In ? in : kind == DegreeKind::Out ? out : in + out;
    }
    ++hist[d];
  }
  return hist;
}

}  // namespace lsjm
