#ifndef SPATIALREL_GRAPH_HPP
#define SPATIALREL_GRAPH_HPP

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "triples.hpp"

namespace spatialrel {

struct EdgeKey {
  std::string subject;
  std::string object;
  std::string relation;

  auto operator<=>(const EdgeKey&) const = default;
};

/// Directed multigraph collapsed to weights: one node per distinct label,
/// one edge per distinct (subject, object, relation).
struct TripleGraph {
  std::set<std::string> nodes;
  std::map<EdgeKey, std::size_t> edges;

  std::size_t total_weight() const {
    std::size_t sum = 0;
    for (const auto& [key, w] : edges) sum += w;
    return sum;
  }

  bool operator==(const TripleGraph&) const = default;
};

inline TripleGraph build_graph(const std::vector<SemanticTriple>& triples) {
  TripleGraph g;
  for (const auto& t : triples) {
    if (t.validity != Validity::valid) {
      throw Error(ErrorKind::input, "build_graph requires valid triples; got " +
                                        std::string(to_string(t.validity)) + " <" + t.subject +
                                        ", " + t.relation + ", " + t.object + ">");
    }
    EdgeKey key{normalize_place(t.subject), normalize_place(t.object),
                collapse_whitespace(t.relation)};
    if (key.subject.empty() || key.object.empty()) {
      throw Error(ErrorKind::input, "triple with empty place label");
    }
    if (key.subject == key.object) {
      throw Error(ErrorKind::input, "self-loop triple on '" + key.subject + "'");
    }
    g.nodes.insert(key.subject);
    g.nodes.insert(key.object);
    ++g.edges[key];
  }
  return g;
}

enum class GraphFormat { gexf, dot, jsonl };

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // Control characters are not allowed in XML 1.0.
        if (static_cast<unsigned char>(c) < 0x20 && c != '\t' && c != '\n' && c != '\r') {
          out += ' ';
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n' || c == '\r') {
      out += ' ';
      continue;
    }
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline std::string to_gexf(const TripleGraph& g) {
  std::map<std::string, std::size_t> ids;
  for (const auto& n : g.nodes) ids.emplace(n, ids.size());

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n";
  out += "  <meta>\n    <creator>spatialrel</creator>\n  </meta>\n";
  out += "  <graph mode=\"static\" defaultedgetype=\"directed\">\n";
  out += "    <nodes>\n";
  for (const auto& [label, id] : ids) {
    out += "      <node id=\"n" + std::to_string(id) + "\" label=\"" + detail::xml_escape(label) +
           "\"/>\n";
  }
  out += "    </nodes>\n";
  out += "    <edges>\n";
  std::size_t e = 0;
  for (const auto& [key, weight] : g.edges) {
    out += "      <edge id=\"e" + std::to_string(e++) + "\" source=\"n" +
           std::to_string(ids.at(key.subject)) + "\" target=\"n" +
           std::to_string(ids.at(key.object)) + "\" label=\"" + detail::xml_escape(key.relation) +
           "\" weight=\"" + std::to_string(weight) + "\"/>\n";
  }
  out += "    </edges>\n";
  out += "  </graph>\n";
  out += "</gexf>\n";
  return out;
}

inline std::string to_dot(const TripleGraph& g) {
  std::string out = "digraph triples {\n";
  for (const auto& n : g.nodes) out += "  " + detail::dot_quote(n) + ";\n";
  for (const auto& [key, weight] : g.edges) {
    out += "  " + detail::dot_quote(key.subject) + " -> " + detail::dot_quote(key.object) +
           " [label=" + detail::dot_quote(key.relation) +
           ", penwidth=" + std::to_string(1 + weight) + "];\n";
  }
  out += "}\n";
  return out;
}

inline std::string to_edge_jsonl(const TripleGraph& g) {
  std::string out;
  for (const auto& [key, weight] : g.edges) {
    nlohmann::ordered_json j;
    j["subject"] = key.subject;
    j["relation"] = key.relation;
    j["object"] = key.object;
    j["weight"] = weight;
    out += j.dump() + "\n";
  }
  return out;
}

/// Serialized bytes; nodes and edges appear in lexicographic order.
inline std::string export_graph(const TripleGraph& g, GraphFormat format) {
  switch (format) {
    case GraphFormat::gexf: return to_gexf(g);
    case GraphFormat::dot: return to_dot(g);
    case GraphFormat::jsonl: return to_edge_jsonl(g);
  }
  return {};
}

}  // namespace spatialrel

#endif  // SPATIALREL_GRAPH_HPP
