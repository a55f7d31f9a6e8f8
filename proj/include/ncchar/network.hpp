#pragma once

// Directed acyclic coded networks: sources, intermediates, terminals, messages and demands.

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ncchar/gf_linalg.hpp"

namespace ncchar {

struct ParseError : Error {
  using Error::Error;
};

enum class Role { source, intermediate, terminal };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::source: return "source";
    case Role::intermediate: return "intermediate";
    case Role::terminal: return "terminal";
  }
  return "?";
}

inline std::optional<Role> role_from_string(std::string_view s) {
  if (s == "source") return Role::source;
  if (s == "intermediate") return Role::intermediate;
  if (s == "terminal") return Role::terminal;
  return std::nullopt;
}

struct NetNode {
  std::string id;
  Role role = Role::intermediate;
  std::optional<std::string> generates;  // sources only
  std::optional<std::string> demands;    // terminals only

  friend bool operator==(const NetNode&, const NetNode&) = default;
};

struct NetEdge {
  std::string id;
  std::string tail;
  std::string head;

  friend bool operator==(const NetEdge&, const NetEdge&) = default;
};

inline std::string default_edge_id(std::string_view tail, std::string_view head) {
  return std::string(tail) + "->" + std::string(head);
}

struct CodedNetwork {
  std::string name;
  std::vector<std::string> messages;
  std::vector<NetNode> nodes;
  std::vector<NetEdge> edges;

  const NetNode* find_node(std::string_view id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }
  NetNode* find_node(std::string_view id) {
    for (auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }
  const NetEdge* find_edge(std::string_view id) const {
    for (const auto& e : edges)
      if (e.id == id) return &e;
    return nullptr;
  }

  std::vector<const NetEdge*> in_edges(std::string_view node) const {
    std::vector<const NetEdge*> out;
    for (const auto& e : edges)
      if (e.head == node) out.push_back(&e);
    return out;
  }
  std::vector<const NetEdge*> out_edges(std::string_view node) const {
    std::vector<const NetEdge*> out;
    for (const auto& e : edges)
      if (e.tail == node) out.push_back(&e);
    return out;
  }

  std::vector<const NetNode*> nodes_with_role(Role r) const {
    std::vector<const NetNode*> out;
    for (const auto& n : nodes)
      if (n.role == r) out.push_back(&n);
    return out;
  }

  /// Sorts messages, nodes and edges by id; the canonical form used by save() and by equality.
  void canonicalize() {
    std::sort(messages.begin(), messages.end());
    std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  }
};

/// Structural equality: same name, message set, node set and edge set regardless of list order.
inline bool structurally_equal(CodedNetwork a, CodedNetwork b) {
  a.canonicalize();
  b.canonicalize();
  return a.name == b.name && a.messages == b.messages && a.nodes == b.nodes && a.edges == b.edges;
}

struct Violation {
  std::string kind;    // e.g. "cycle", "source-has-in-edge"
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(std::string_view kind) const {
    return std::any_of(violations.begin(), violations.end(), [&](const auto& v) { return v.kind == kind; });
  }
};

namespace detail {

/// Kahn's algorithm with a min-heap (or max-heap) on node id. Returns the partial order when a cycle blocks it.
inline std::vector<std::string> kahn_order(const CodedNetwork& net, bool descending) {
  std::map<std::string, std::size_t> indegree;
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& n : net.nodes) indegree[n.id];
  for (const auto& e : net.edges) {
    if (!indegree.count(e.tail) || !indegree.count(e.head)) continue;
    ++indegree[e.head];
    succ[e.tail].push_back(e.head);
  }
  auto cmp = [descending](const std::string& a, const std::string& b) { return descending ? a < b : a > b; };
  std::priority_queue<std::string, std::vector<std::string>, decltype(cmp)> ready(cmp);
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.push(id);
  std::vector<std::string> order;
  while (!ready.empty()) {
    auto id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& h : succ[id])
      if (--indegree[h] == 0) ready.push(h);
  }
  return order;
}

}  // namespace detail

inline ValidationReport validate(const CodedNetwork& net) {
  ValidationReport report;
  auto add = [&](std::string kind, std::string detail) { report.violations.push_back({std::move(kind), std::move(detail)}); };

  std::set<std::string> messages;
  for (const auto& m : net.messages) {
    if (m.empty()) add("empty-id", "message with empty name");
    if (!messages.insert(m).second) add("duplicate-id", "message " + m);
  }
  std::set<std::string> node_ids;
  for (const auto& n : net.nodes) {
    if (n.id.empty()) add("empty-id", "node with empty id");
    if (!node_ids.insert(n.id).second) add("duplicate-id", "node " + n.id);
    if (n.generates.has_value() != (n.role == Role::source))
      add("role-mismatch", "node " + n.id + ": 'generates' must be present exactly on sources");
    if (n.demands.has_value() != (n.role == Role::terminal))
      add("role-mismatch", "node " + n.id + ": 'demands' must be present exactly on terminals");
    if (n.generates && !messages.count(*n.generates))
      add("dangling-reference", "node " + n.id + " generates undeclared message " + *n.generates);
    if (n.demands && !messages.count(*n.demands))
      add("dangling-reference", "node " + n.id + " demands undeclared message " + *n.demands);
  }
  std::set<std::string> edge_ids;
  for (const auto& e : net.edges) {
    if (e.id.empty()) add("empty-id", "edge with empty id");
    if (!edge_ids.insert(e.id).second) add("duplicate-id", "edge " + e.id);
    const auto* tail = net.find_node(e.tail);
    const auto* head = net.find_node(e.head);
    if (!tail || !head) {
      add("dangling-reference", "edge " + e.id + " references unknown node " + (!tail ? e.tail : e.head));
      continue;
    }
    if (head->role == Role::source) add("source-has-in-edge", "edge " + e.id + " enters source " + head->id);
    if (tail->role == Role::terminal) add("terminal-has-out-edge", "edge " + e.id + " leaves terminal " + tail->id);
  }
  auto order = detail::kahn_order(net, false);
  if (order.size() < node_ids.size()) {
    std::set<std::string> placed(order.begin(), order.end());
    std::string stuck;
    for (const auto& id : node_ids)
      if (!placed.count(id)) stuck += (stuck.empty() ? "" : ",") + id;
    add("cycle", "nodes on or behind a cycle: " + stuck);
  }
  return report;
}

enum class TieBreak { ascending, descending };

/// Node ids such that every edge goes forward; ties broken by node id.
inline std::vector<std::string> topological_order(const CodedNetwork& net, TieBreak tie = TieBreak::ascending) {
  auto order = detail::kahn_order(net, tie == TieBreak::descending);
  if (order.size() < net.nodes.size()) throw Error("topological_order: network '" + net.name + "' has a cycle");
  return order;
}

struct UnicastCheck {
  bool multiple_unicast = false;
  std::vector<std::string> violating_messages;  // sorted
  std::map<std::string, std::size_t> demand_count;
  std::map<std::string, std::size_t> source_count;
};

/// Every message generated by exactly one source and demanded by exactly one terminal.
inline UnicastCheck is_multiple_unicast(const CodedNetwork& net) {
  UnicastCheck out;
  for (const auto& m : net.messages) {
    out.demand_count[m] = 0;
    out.source_count[m] = 0;
  }
  for (const auto& n : net.nodes) {
    if (n.generates) ++out.source_count[*n.generates];
    if (n.demands) ++out.demand_count[*n.demands];
  }
  for (const auto& m : net.messages)
    if (out.demand_count[m] != 1 || out.source_count[m] != 1) out.violating_messages.push_back(m);
  std::sort(out.violating_messages.begin(), out.violating_messages.end());
  out.multiple_unicast = out.violating_messages.empty();
  return out;
}

inline std::map<std::string, std::vector<std::string>> demanders(const CodedNetwork& net) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& n : net.nodes)
    if (n.demands) out[*n.demands].push_back(n.id);
  for (auto& [m, ts] : out) std::sort(ts.begin(), ts.end());
  return out;
}

inline std::string dump_canonical(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

inline nlohmann::json to_json(CodedNetwork net) {
  net.canonicalize();
  nlohmann::json doc;
  doc["name"] = net.name;
  doc["messages"] = net.messages;
  doc["nodes"] = nlohmann::json::array();
  for (const auto& n : net.nodes) {
    nlohmann::json j{{"id", n.id}, {"role", std::string(to_string(n.role))}};
    if (n.generates) j["generates"] = *n.generates;
    if (n.demands) j["demands"] = *n.demands;
    doc["nodes"].push_back(std::move(j));
  }
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : net.edges) doc["edges"].push_back({{"id", e.id}, {"from", e.tail}, {"to", e.head}});
  return doc;
}

/// Canonical JSON text: sorted keys, sorted lists, two-space indent, trailing newline.
inline std::string save(const CodedNetwork& net) { return dump_canonical(to_json(net)); }

namespace detail {

inline nlohmann::json parse_document(std::string_view text) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports a byte offset; translate it to a line number
    std::size_t line = 1 + static_cast<std::size_t>(
                               std::count(text.begin(), text.begin() + std::min(e.byte, text.size()), '\n'));
    throw ParseError("line " + std::to_string(line) + ": " + e.what());
  }
}

inline const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing field \"" + key + "\"");
  return obj.at(key);
}

inline std::string require_string(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw ParseError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline const nlohmann::json& require_array(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_array()) throw ParseError(where + "." + key + ": expected an array");
  return v;
}

}  // namespace detail

inline CodedNetwork from_json(const nlohmann::json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ParseError("network: expected a JSON object");
  CodedNetwork net;
  net.name = require_string(doc, "name", "network");
  for (const auto& m : require_array(doc, "messages", "network")) {
    if (!m.is_string()) throw ParseError("network.messages: expected strings");
    net.messages.push_back(m.get<std::string>());
  }
  const auto& nodes = require_array(doc, "nodes", "network");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::string where = "nodes[" + std::to_string(i) + "]";
    NetNode n;
    n.id = require_string(nodes[i], "id", where);
    auto role = role_from_string(require_string(nodes[i], "role", where));
    if (!role) throw ParseError(where + ".role: expected source, intermediate or terminal");
    n.role = *role;
    if (nodes[i].contains("generates")) n.generates = require_string(nodes[i], "generates", where);
    if (nodes[i].contains("demands")) n.demands = require_string(nodes[i], "demands", where);
    net.nodes.push_back(std::move(n));
  }
  const auto& edges = require_array(doc, "edges", "network");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    std::string where = "edges[" + std::to_string(i) + "]";
    net.edges.push_back({require_string(edges[i], "id", where), require_string(edges[i], "from", where),
                         require_string(edges[i], "to", where)});
  }
  net.canonicalize();
  return net;
}

inline CodedNetwork load(std::string_view text) { return from_json(detail::parse_document(text)); }

/// Graphviz rendering; sources and terminals are drawn as boxes.
inline std::string to_dot(const CodedNetwork& net) {
  std::string out = "digraph \"" + net.name + "\" {\n";
  for (const auto& n : net.nodes) {
    out += "  \"" + n.id + "\"";
    if (n.role == Role::source) out += " [shape=box,label=\"" + n.id + "\\n(" + *n.generates + ")\"]";
    if (n.role == Role::terminal) out += " [shape=box,style=rounded,label=\"" + n.id + "\"]";
    out += ";\n";
  }
  for (const auto& e : net.edges) out += "  \"" + e.tail + "\" -> \"" + e.head + "\" [label=\"" + e.id + "\"];\n";
  return out + "}\n";
}

}  // namespace ncchar
