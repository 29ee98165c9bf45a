#pragma once

#include <iosfwd>
#include <string>

#include "gossip/topology.hpp"

namespace gossip {

// Edge-list text format:
//
//   n m
//   i j          (m lines)
//   coords       (optional)
//   x y          (n lines)

void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);

void save_edge_list(const std::string& path, const Graph& g);
Graph load_edge_list(const std::string& path);

}  // namespace gossip
