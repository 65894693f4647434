#include "lsjm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "lsjm/errors.hpp"

namespace lsjm {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r' || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ParsedView parse_edge_list(const std::string& text, const std::string& label) {
  bool directed = false;
  bool directed_set = false;
  std::vector<std::string> declared;
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<int> edge_lines;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = trim(t.substr(1));
      if (body == "directed") {
        directed = true;
        directed_set = true;
      } else if (body == "undirected") {
        directed = false;
        directed_set = true;
      } else if (body.rfind("nodes:", 0) == 0) {
        for (auto& tok : tokenize(body.substr(6))) declared.push_back(std::move(tok));
      }
      continue;  // plain comment
    }
    auto toks = tokenize(t);
    if (toks.size() != 2)
      throw MalformedLine(lineno, "expected 'source target', got '" + t + "'");
    if (toks[0] == toks[1]) throw SelfLoop(lineno);
    edges.emplace_back(std::move(toks[0]), std::move(toks[1]));
    edge_lines.push_back(lineno);
  }
  (void)directed_set;

  std::vector<std::string> labels;
  if (!declared.empty()) {
    labels = declared;  // declared order pins the matrix order
  } else {
    std::set<std::string> uniq;
    for (const auto& [a, b] : edges) {
      uniq.insert(a);
      uniq.insert(b);
    }
    labels.assign(uniq.begin(), uniq.end());  // sorted
  }

  NodeSet nodes(std::move(labels));
  AdjacencyView view(nodes.size(), directed, label);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    int i, j;
    try {
      i = nodes.index(edges[e].first);
      j = nodes.index(edges[e].second);
    } catch (const UnknownNode&) {
      throw UnknownNode("line " + std::to_string(edge_lines[e]) +
                        ": endpoint not in the declared node list");
    }
    view.set_edge(i, j, true);
  }
  return ParsedView{std::move(nodes), std::move(view)};
}

std::string write_edge_list(const AdjacencyView& view, const NodeSet& nodes) {
  std::string out;
  out += view.directed() ? "# directed\n" : "# undirected\n";
  out += "# nodes:";
  for (const auto& l : nodes.labels()) {
    out += ' ';
    out += l;
  }
  out += '\n';
  const int n = view.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i || !view.y(i, j)) continue;
      if (!view.directed() && j < i) continue;
      out += nodes.label(i);
      out += ' ';
      out += nodes.label(j);
      out += '\n';
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoFailure("error reading " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoFailure("error writing " + path);
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fingerprint_files(const std::vector<std::string>& paths) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& path : paths) {
    const std::string body = read_file(path);
    const std::uint64_t fh = fnv1a64(body.data(), body.size());
    for (int b = 0; b < 8; ++b) {
      h ^= (fh >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw Error("not a number: '" + s + "'");
  return v;
}

namespace {

void put(std::string& out, const std::string& line) {
  out += line;
  out += '\n';
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

}  // namespace

std::string serialize_artifact(const ModelArtifact& a) {
  std::string out;
  put(out, "lsjm-artifact");
  put(out, "schema_version " + std::to_string(a.schema_version));
  put(out, "kind " + a.kind);
  put(out, "sigma2 " + hex_double(a.sigma2));
  put(out, fmt("fingerprint %016llx", static_cast<unsigned long long>(a.fingerprint)));
  put(out, "nodes " + std::to_string(a.n()));
  for (int i = 0; i < a.n(); ++i)
    put(out, "node " + std::to_string(i) + " " + a.node_labels[static_cast<std::size_t>(i)]);
  put(out, "dim " + std::to_string(a.dim()));
  put(out, "views " + std::to_string(a.view_count()));
  for (int k = 0; k < a.view_count(); ++k) {
    const auto& prior = a.priors[static_cast<std::size_t>(k)];
    put(out, "prior " + std::to_string(k) + " " + hex_double(prior.xi) + " " +
                 hex_double(prior.psi2));
  }
  for (int k = 0; k < a.view_count(); ++k) {
    const auto& s = a.view_states[static_cast<std::size_t>(k)];
    put(out, "view " + std::to_string(k) + " meta " +
                 (a.view_directed[static_cast<std::size_t>(k)] ? "1" : "0") + " " +
                 a.view_labels[static_cast<std::size_t>(k)]);
    put(out, "view " + std::to_string(k) + " alpha " + hex_double(s.xi_tilde) + " " +
                 hex_double(s.psi2_tilde));
    for (int r = 0; r < s.dim(); ++r)
      for (int c = 0; c < s.dim(); ++c)
        put(out, "view " + std::to_string(k) + " cov " + std::to_string(r) + " " +
                     std::to_string(c) + " " + hex_double(s.cov(r, c)));
    for (int i = 0; i < s.n(); ++i)
      for (int d = 0; d < s.dim(); ++d)
        put(out, "view " + std::to_string(k) + " pos " + std::to_string(i) + " " +
                     std::to_string(d) + " " + hex_double(s.positions(i, d)));
  }
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c)
      put(out, "fused cov " + std::to_string(r) + " " + std::to_string(c) + " " +
                   hex_double(a.fused.cov(r, c)));
  for (int i = 0; i < a.n(); ++i)
    for (int d = 0; d < a.dim(); ++d)
      put(out, "fused pos " + std::to_string(i) + " " + std::to_string(d) + " " +
                   hex_double(a.fused.positions(i, d)));
  put(out, "report " + std::to_string(a.report.iterations) + " " +
               (a.report.converged ? "1" : "0") + " " +
               std::to_string(a.report.best_restart));
  for (std::size_t t = 0; t < a.report.objective_trace.size(); ++t)
    put(out, "trace " + std::to_string(t) + " " + hex_double(a.report.objective_trace[t]));
  for (std::size_t r = 0; r < a.report.restarts.size(); ++r) {
    const auto& rec = a.report.restarts[r];
    put(out, "restart " + std::to_string(r) + " " + std::to_string(rec.iterations) + " " +
                 (rec.converged ? "1" : "0") + " " + hex_double(rec.initial_objective) +
                 " " + hex_double(rec.final_objective));
  }
  for (const auto& w : a.report.warnings) put(out, "warning " + w);
  put(out, "end");
  return out;
}

namespace {

[[noreturn]] void bad_artifact(int lineno, const std::string& why) {
  throw MalformedLine(lineno, "artifact: " + why);
}

}  // namespace

ModelArtifact parse_artifact(const std::string& text) {
  ModelArtifact a;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int n = -1, dim = -1, views = -1;
  bool saw_header = false, saw_end = false;

  auto need_sizes = [&](int ln) {
    if (n < 0 || dim < 0 || views < 0) bad_artifact(ln, "sizes not declared yet");
  };

  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!saw_header) {
      if (t != "lsjm-artifact") bad_artifact(lineno, "missing header");
      saw_header = true;
      continue;
    }
    auto toks = tokenize(t);
    const std::string& key = toks[0];
    if (key == "schema_version") {
      a.schema_version = std::stoi(toks.at(1));
      if (a.schema_version != 1) bad_artifact(lineno, "unsupported schema version");
    } else if (key == "kind") {
      a.kind = toks.at(1);
    } else if (key == "sigma2") {
      a.sigma2 = parse_hex_double(toks.at(1));
    } else if (key == "fingerprint") {
      a.fingerprint = std::strtoull(toks.at(1).c_str(), nullptr, 16);
    } else if (key == "nodes") {
      n = std::stoi(toks.at(1));
      a.node_labels.assign(static_cast<std::size_t>(n), "");
    } else if (key == "node") {
      const int i = std::stoi(toks.at(1));
      a.node_labels.at(static_cast<std::size_t>(i)) = toks.at(2);
    } else if (key == "dim") {
      dim = std::stoi(toks.at(1));
    } else if (key == "views") {
      views = std::stoi(toks.at(1));
      need_sizes(lineno);
      a.priors.assign(static_cast<std::size_t>(views), PriorConfig{});
      a.view_labels.assign(static_cast<std::size_t>(views), "");
      a.view_directed.assign(static_cast<std::size_t>(views), false);
      a.view_states.assign(static_cast<std::size_t>(views), ViewVariationalState{});
      for (auto& s : a.view_states) {
        s.positions = Eigen::MatrixXd::Zero(n, dim);
        s.cov = Eigen::MatrixXd::Identity(dim, dim);
      }
      for (auto& p : a.priors) {
        p.sigma2 = a.sigma2;
        p.dim = dim;
      }
      a.fused.positions = Eigen::MatrixXd::Zero(n, dim);
      a.fused.cov = Eigen::MatrixXd::Identity(dim, dim);
    } else if (key == "prior") {
      need_sizes(lineno);
      auto& p = a.priors.at(static_cast<std::size_t>(std::stoi(toks.at(1))));
      p.xi = parse_hex_double(toks.at(2));
      p.psi2 = parse_hex_double(toks.at(3));
    } else if (key == "view") {
      need_sizes(lineno);
      const auto k = static_cast<std::size_t>(std::stoi(toks.at(1)));
      const std::string& what = toks.at(2);
      if (what == "meta") {
        a.view_directed.at(k) = toks.at(3) == "1";
        std::string label;
        for (std::size_t w = 4; w < toks.size(); ++w) {
          if (w > 4) label += ' ';
          label += toks[w];
        }
        a.view_labels.at(k) = std::move(label);
      } else if (what == "alpha") {
        a.view_states.at(k).xi_tilde = parse_hex_double(toks.at(3));
        a.view_states.at(k).psi2_tilde = parse_hex_double(toks.at(4));
      } else if (what == "cov") {
        a.view_states.at(k).cov(std::stoi(toks.at(3)), std::stoi(toks.at(4))) =
            parse_hex_double(toks.at(5));
      } else if (what == "pos") {
        a.view_states.at(k).positions(std::stoi(toks.at(3)), std::stoi(toks.at(4))) =
            parse_hex_double(toks.at(5));
      } else {
        bad_artifact(lineno, "unknown view record '" + what + "'");
      }
    } else if (key == "fused") {
      need_sizes(lineno);
      if (toks.at(1) == "cov")
        a.fused.cov(std::stoi(toks.at(2)), std::stoi(toks.at(3))) =
            parse_hex_double(toks.at(4));
      else if (toks.at(1) == "pos")
        a.fused.positions(std::stoi(toks.at(2)), std::stoi(toks.at(3))) =
            parse_hex_double(toks.at(4));
      else
        bad_artifact(lineno, "unknown fused record");
    } else if (key == "report") {
      a.report.iterations = std::stoi(toks.at(1));
      a.report.converged = toks.at(2) == "1";
      a.report.best_restart = std::stoi(toks.at(3));
    } else if (key == "trace") {
      const auto idx = static_cast<std::size_t>(std::stoi(toks.at(1)));
      if (a.report.objective_trace.size() <= idx) a.report.objective_trace.resize(idx + 1);
      a.report.objective_trace[idx] = parse_hex_double(toks.at(2));
    } else if (key == "restart") {
      const auto idx = static_cast<std::size_t>(std::stoi(toks.at(1)));
      if (a.report.restarts.size() <= idx) a.report.restarts.resize(idx + 1);
      auto& rec = a.report.restarts[idx];
      rec.iterations = std::stoi(toks.at(2));
      rec.converged = toks.at(3) == "1";
      rec.initial_objective = parse_hex_double(toks.at(4));
      rec.final_objective = parse_hex_double(toks.at(5));
    } else if (key == "warning") {
      a.report.warnings.push_back(trim(t.substr(8)));
    } else if (key == "end") {
      saw_end = true;
    } else {
      bad_artifact(lineno, "unknown record '" + key + "'");
    }
  }
  if (!saw_header) bad_artifact(lineno, "empty artifact");
  if (!saw_end) bad_artifact(lineno, "truncated artifact (no end line)");
  return a;
}

namespace {

std::string num(double v) { return fmt("%.10g", v); }

void positions_rows(std::string& out, const std::string& view_label,
                    const std::string& source, const Eigen::MatrixXd& pos,
                    const std::vector<std::string>& labels) {
  for (int i = 0; i < pos.rows(); ++i) {
    out += labels[static_cast<std::size_t>(i)];
    out += ',';
    out += view_label;
    for (int d = 0; d < pos.cols(); ++d) {
      out += ',';
      out += num(pos(i, d));
    }
    out += ',';
    out += source;
    out += '\n';
  }
}

}  // namespace

std::string positions_csv(const ModelArtifact& a) {
  std::string out = "node,view";
  if (a.dim() == 2) {
    out += ",x,y";
  } else {
    for (int d = 0; d < a.dim(); ++d) out += fmt(",z%d", d);
  }
  out += ",source\n";
  for (int k = 0; k < a.view_count(); ++k)
    positions_rows(out, a.view_labels[static_cast<std::size_t>(k)], "per_view",
                   a.view_states[static_cast<std::size_t>(k)].positions, a.node_labels);
  positions_rows(out, "fused", "fused", a.fused.positions, a.node_labels);
  return out;
}

EllipseSpec credible_ellipse(double cx, double cy, const Eigen::Matrix2d& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  // Eigenvalues ascending; the major axis is the second one.
  const double minor = std::sqrt(std::max(0.0, kChi2Quantile95Dim2 * es.eigenvalues()(0)));
  const double major = std::sqrt(std::max(0.0, kChi2Quantile95Dim2 * es.eigenvalues()(1)));
  const Eigen::Vector2d axis = es.eigenvectors().col(1);
  EllipseSpec e;
  e.cx = cx;
  e.cy = cy;
  e.rx = major;
  e.ry = minor;
  e.angle_deg = std::atan2(axis(1), axis(0)) * 180.0 / std::numbers::pi;
  return e;
}

namespace {

void ellipse_rows(std::string& out, const std::string& view_label, const std::string& source,
                  const Eigen::MatrixXd& pos, const Eigen::MatrixXd& cov,
                  const std::vector<std::string>& labels) {
  const Eigen::Matrix2d c = cov;
  for (int i = 0; i < pos.rows(); ++i) {
    const EllipseSpec e = credible_ellipse(pos(i, 0), pos(i, 1), c);
    out += labels[static_cast<std::size_t>(i)] + "," + view_label + "," + source + "," +
           num(e.cx) + "," + num(e.cy) + "," + num(e.rx) + "," + num(e.ry) + "," +
           num(e.angle_deg) + "\n";
  }
}

}  // namespace

std::string ellipses_csv(const ModelArtifact& a) {
  std::string out = "node,view,source,cx,cy,rx,ry,angle_deg\n";
  if (a.dim() != 2) return out;
  for (int k = 0; k < a.view_count(); ++k)
    ellipse_rows(out, a.view_labels[static_cast<std::size_t>(k)], "per_view",
                 a.view_states[static_cast<std::size_t>(k)].positions,
                 a.view_states[static_cast<std::size_t>(k)].cov, a.node_labels);
  ellipse_rows(out, "fused", "fused", a.fused.positions, a.fused.cov, a.node_labels);
  return out;
}

std::string arrows_csv(const ModelArtifact& a) {
  std::string out = "node,from_view,to_view,x0,y0,x1,y1\n";
  if (a.dim() != 2) return out;
  for (int k = 0; k + 1 < a.view_count(); ++k) {
    const auto& from = a.view_states[static_cast<std::size_t>(k)].positions;
    const auto& to = a.view_states[static_cast<std::size_t>(k) + 1].positions;
    for (int i = 0; i < a.n(); ++i) {
      out += a.node_labels[static_cast<std::size_t>(i)] + "," +
             a.view_labels[static_cast<std::size_t>(k)] + "," +
             a.view_labels[static_cast<std::size_t>(k) + 1] + "," + num(from(i, 0)) + "," +
             num(from(i, 1)) + "," + num(to(i, 0)) + "," + num(to(i, 1)) + "\n";
    }
  }
  return out;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const SvgScene& scene) {
  const double width = 720.0, height = 720.0, margin = 48.0;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto grow = [&](double x, double y) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  };
  for (const auto& p : scene.points) grow(p[0], p[1]);
  for (const auto& e : scene.ellipses) {
    const double r = std::max(e.rx, e.ry);
    grow(e.cx - r, e.cy - r);
    grow(e.cx + r, e.cy + r);
  }
  for (const auto& s : scene.arrows) {
    grow(s[0], s[1]);
    grow(s[2], s[3]);
  }
  if (xmin > xmax) {
    xmin = ymin = -1.0;
    xmax = ymax = 1.0;
  }
  if (xmax - xmin < 1e-9) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-9) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pad_x = 0.08 * (xmax - xmin), pad_y = 0.08 * (ymax - ymin);
  xmin -= pad_x;
  xmax += pad_x;
  ymin -= pad_y;
  ymax += pad_y;

  const double s = std::min((width - 2 * margin) / (xmax - xmin),
                            (height - 2 * margin) / (ymax - ymin));
  const double ox = 0.5 * width - s * 0.5 * (xmin + xmax);
  const double oy = 0.5 * height + s * 0.5 * (ymin + ymax);
  auto X = [&](double x) { return ox + s * x; };
  auto Y = [&](double y) { return oy - s * y; };

  std::string out;
  out += fmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
             "viewBox=\"0 0 %.0f %.0f\">\n",
             width, height, width, height);
  out += "<defs><marker id=\"ah\" viewBox=\"0 0 8 8\" refX=\"7\" refY=\"4\" "
         "markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\">"
         "<path d=\"M0,0 L8,4 L0,8 z\" fill=\"#555555\"/></marker></defs>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out += fmt("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" "
             "stroke=\"#444444\" stroke-width=\"1\"/>\n",
             margin, margin, width - 2 * margin, height - 2 * margin);
  if (xmin < 0.0 && xmax > 0.0)
    out += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#cccccc\" "
               "stroke-width=\"1\"/>\n",
               X(0.0), margin, X(0.0), height - margin);
  if (ymin < 0.0 && ymax > 0.0)
    out += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#cccccc\" "
               "stroke-width=\"1\"/>\n",
               margin, Y(0.0), width - margin, Y(0.0));

  for (const auto& e : scene.ellipses) {
    out += fmt("<ellipse cx=\"%.2f\" cy=\"%.2f\" rx=\"%.2f\" ry=\"%.2f\" "
               "transform=\"rotate(%.2f %.2f %.2f)\" fill=\"#808080\" "
               "fill-opacity=\"0.18\"/>\n",
               X(e.cx), Y(e.cy), s * e.rx, s * e.ry, -e.angle_deg, X(e.cx), Y(e.cy));
  }
  for (const auto& a : scene.arrows) {
    out += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#555555\" "
               "stroke-width=\"1\" marker-end=\"url(#ah)\"/>\n",
               X(a[0]), Y(a[1]), X(a[2]), Y(a[3]));
  }
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    out += fmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"#1f4e8c\"/>\n",
               X(scene.points[i][0]), Y(scene.points[i][1]));
    if (i < scene.labels.size() && !scene.labels[i].empty()) {
      out += fmt("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"9\" "
                 "fill=\"#222222\">%s</text>\n",
                 X(scene.points[i][0]) + 4.0, Y(scene.points[i][1]) - 4.0,
                 xml_escape(scene.labels[i]).c_str());
    }
  }
  if (!scene.title.empty()) {
    out += fmt("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"14\" "
               "fill=\"#000000\">%s</text>\n",
               margin, margin - 16.0, xml_escape(scene.title).c_str());
  }
  out += "</svg>\n";
  return out;
}

}  // namespace lsjm
