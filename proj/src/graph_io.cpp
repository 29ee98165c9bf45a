#include "gossip/graph_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

#include "gossip/error.hpp"

namespace gossip {

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.num_nodes() << ' ' << g.num_edges() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
  if (const auto& coords = g.coords()) {
    out << "coords\n" << std::setprecision(17);
    for (const auto& p : *coords) out << p.x << ' ' << p.y << '\n';
  }
}

Graph read_edge_list(std::istream& in) {
  long long n = 0, m = 0;
  if (!(in >> n >> m) || n < 0 || m < 0) throw InvalidParameter("edge list: malformed header, expected `n m`");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long k = 0; k < m; ++k) {
    Edge e;
    if (!(in >> e.u >> e.v)) {
      throw InvalidParameter("edge list: expected " + std::to_string(m) + " edges, read " + std::to_string(k));
    }
    edges.push_back(e);
  }
  std::optional<std::vector<Point2>> coords;
  std::string tag;
  if (in >> tag) {
    if (tag != "coords") throw InvalidParameter("edge list: unexpected token `" + tag + "` after edges");
    coords.emplace(static_cast<std::size_t>(n));
    for (auto& p : *coords) {
      if (!(in >> p.x >> p.y)) throw InvalidParameter("edge list: truncated coordinate block");
    }
    if (in >> tag) throw InvalidParameter("edge list: trailing data after coordinate block");
  }
  return Graph(static_cast<int>(n), std::move(edges), std::move(coords));
}

void save_edge_list(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw InvalidParameter("cannot open " + path + " for writing");
  write_edge_list(out, g);
  if (!out) throw InvalidParameter("failed writing " + path);
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open " + path);
  return read_edge_list(in);
}

}  // namespace gossip
