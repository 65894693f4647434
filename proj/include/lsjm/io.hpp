#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lsjm/lsjm.hpp"
#include "lsjm/network.hpp"
#include "lsjm/variational.hpp"

namespace lsjm {

// ---------------------------------------------------------------------------
// Edge lists
//
// Plain text, one `source target` pair per line, whitespace- or comma-
// separated. Lines starting with '#' are comments except for the directives
//   # directed | # undirected
//   # nodes: <label> <label> ...   (pins isolated nodes and the node order)
// Without a node list the node set is the sorted union of the endpoints.
// Undirected is the default. Duplicate edges collapse; self loops are errors.
// Files always describe fully observed views.
// ---------------------------------------------------------------------------

struct ParsedView {
  NodeSet nodes;
  AdjacencyView view;
};

ParsedView parse_edge_list(const std::string& text, const std::string& label = "view");

// Canonical form: directive lines then edges in node-index order. Parsing the
// output reproduces the input view bit for bit.
std::string write_edge_list(const AdjacencyView& view, const NodeSet& nodes);

// ---------------------------------------------------------------------------
// Files and fingerprints
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path);                       // throws IoFailure
void write_file(const std::string& path, const std::string& content); // throws IoFailure

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fingerprint_files(const std::vector<std::string>& paths);

// ---------------------------------------------------------------------------
// Model artifact: human-readable key-value text, schema-versioned, floats in
// hex-float form so write -> read is bit-exact.
// ---------------------------------------------------------------------------

struct ModelArtifact {
  int schema_version = 1;
  std::string kind;  // "lsm" or "lsjm"
  std::vector<std::string> node_labels;
  double sigma2 = 1.0;
  std::uint64_t fingerprint = 0;
  std::vector<PriorConfig> priors;
  std::vector<std::string> view_labels;
  std::vector<bool> view_directed;
  std::vector<ViewVariationalState> view_states;
  FusedPosterior fused;
  FitReport report;

  int n() const { return static_cast<int>(node_labels.size()); }
  int dim() const { return static_cast<int>(fused.positions.cols()); }
  int view_count() const { return static_cast<int>(view_states.size()); }
};

std::string serialize_artifact(const ModelArtifact& artifact);
ModelArtifact parse_artifact(const std::string& text);  // throws MalformedLine

std::string hex_double(double v);
double parse_hex_double(const std::string& s);  // throws MalformedLine-free Error on junk

// ---------------------------------------------------------------------------
// Tabular and plot emission
// ---------------------------------------------------------------------------

// node,view,x,y,source rows for every per-view position and the fused ones.
// Views with dim != 2 emit one coordinate column per dimension instead.
std::string positions_csv(const ModelArtifact& artifact);

// 95% credible ellipses of the 2-D position posteriors:
// node,view,source,cx,cy,rx,ry,angle_deg. Defined for dim == 2 only; other
// dimensions yield an empty table (header only).
std::string ellipses_csv(const ModelArtifact& artifact);

// Per-node segments connecting consecutive per-view positions (view k to k+1),
// the data behind arrow overlays. dim == 2 only.
std::string arrows_csv(const ModelArtifact& artifact);

// 0.95 chi-square quantile with 2 degrees of freedom; semi-axes of the 95%
// ellipse are sqrt of this times the covariance eigenvalues.
inline constexpr double kChi2Quantile95Dim2 = 5.991;

struct EllipseSpec {
  double cx = 0.0, cy = 0.0;
  double rx = 0.0, ry = 0.0;  // semi-axes, rx along angle_deg
  double angle_deg = 0.0;
};

EllipseSpec credible_ellipse(double cx, double cy, const Eigen::Matrix2d& cov);

struct SvgScene {
  std::vector<std::array<double, 2>> points;
  std::vector<std::string> labels;                      // empty or one per point
  std::vector<EllipseSpec> ellipses;                    // optional
  std::vector<std::array<double, 4>> arrows;            // x0,y0,x1,y1
  std::string title;
};

// Self-contained deterministic SVG: translucent grey ellipses (overlaps darken),
// points, labels, optional arrows. An empty scene still renders axes.
std::string render_svg(const SvgScene& scene);

}  // namespace lsjm
