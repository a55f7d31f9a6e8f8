#pragma once

// Generators for the characteristic-dependent networks N1(q,n) and N2(q,n), their k-copy unions,
// and the gadget transform that turns them into multiple-unicast networks.
//
// Naming follows the figures: u1..u14, v<i>/v<i>p, w<i>/w<i>p; every named edge e is a pair of
// nodes "<e>t" -> "<e>h" joined by edge "<e>". Sources are named by their message, terminals by
// "<set>:<message>". The network name carries the construction, e.g. "n1(q=2,n=1)",
// "union(n2(q=3,n=1),k=2)" or "gadget(n1(q=2,n=1),n=1)".

#include <charconv>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ncchar/network.hpp"

namespace ncchar {

namespace names {

inline std::string a(std::size_t i) { return "a" + std::to_string(i); }
inline std::string c(std::size_t i) { return "c" + std::to_string(i); }
/// b_{ij}; the separator is only needed once an index reaches two digits.
inline std::string b(std::size_t i, std::size_t j) {
  if (i < 10 && j < 10) return "b" + std::to_string(i) + std::to_string(j);
  return "b" + std::to_string(i) + "_" + std::to_string(j);
}
inline std::string tail(std::string_view e) { return std::string(e) + "t"; }
inline std::string head(std::string_view e) { return std::string(e) + "h"; }
inline std::string copy(std::string_view id, std::size_t c) { return std::string(id) + "@" + std::to_string(c); }

}  // namespace names

class NetworkBuilder {
public:
  explicit NetworkBuilder(std::string name) { net_.name = std::move(name); }

  NetworkBuilder& source(const std::string& message) { return source(message, message); }
  NetworkBuilder& source(const std::string& id, const std::string& message) {
    net_.messages.push_back(message);
    net_.nodes.push_back({id, Role::source, message, std::nullopt});
    return *this;
  }
  NetworkBuilder& node(const std::string& id) {
    if (!seen_.insert(id).second) return *this;
    net_.nodes.push_back({id, Role::intermediate, std::nullopt, std::nullopt});
    return *this;
  }
  NetworkBuilder& terminal(const std::string& id, const std::string& demand) {
    net_.nodes.push_back({id, Role::terminal, std::nullopt, demand});
    return *this;
  }
  NetworkBuilder& edge(const std::string& tail, const std::string& head) {
    return edge(default_edge_id(tail, head), tail, head);
  }
  NetworkBuilder& edge(const std::string& id, const std::string& tail, const std::string& head) {
    net_.edges.push_back({id, tail, head});
    return *this;
  }
  /// A named edge e between fresh nodes tail(e) and head(e).
  NetworkBuilder& named_edge(const std::string& e) {
    node(names::tail(e)).node(names::head(e));
    return edge(e, names::tail(e), names::head(e));
  }

  CodedNetwork build() && {
    net_.canonicalize();
    return std::move(net_);
  }

private:
  CodedNetwork net_;
  std::set<std::string> seen_;
};

inline void require_params(std::int64_t q, std::int64_t n) {
  if (q < 2) throw Error("q must be at least 2 (got " + std::to_string(q) + ")");
  if (n < 1) throw Error("n must be at least 1 (got " + std::to_string(n) + ")");
}

inline std::string family_name(std::string_view family, std::size_t q, std::size_t n) {
  return std::string(family) + "(q=" + std::to_string(q) + ",n=" + std::to_string(n) + ")";
}

/// N1(q,n): rate-1/n solvable exactly when the characteristic divides q.
inline CodedNetwork gen_n1(std::int64_t q_in, std::int64_t n_in) {
  require_params(q_in, n_in);
  const auto q = static_cast<std::size_t>(q_in), n = static_cast<std::size_t>(n_in);
  NetworkBuilder nb(family_name("n1", q, n));
  auto u = [](int i) { return "u" + std::to_string(i); };
  auto e = [](std::size_t i) { return "e" + std::to_string(i); };
  auto v = [](std::size_t i) { return "v" + std::to_string(i); };
  auto vp = [](std::size_t i) { return "v" + std::to_string(i) + "p"; };
  auto w = [](std::size_t i) { return "w" + std::to_string(i); };
  auto wp = [](std::size_t i) { return "w" + std::to_string(i) + "p"; };

  for (int i = 1; i <= 14; ++i) nb.node(u(i));
  for (std::size_t i = 1; i < q; ++i) {
    nb.named_edge(e(i));  // item 11
    nb.node(v(i)).node(vp(i)).node(w(i)).node(wp(i));
  }
  for (std::size_t j = 1; j <= n; ++j) nb.source(names::a(j)).source(names::c(j));
  for (std::size_t i = 1; i < q; ++i)
    for (std::size_t j = 1; j <= n; ++j) nb.source(names::b(i, j));

  // edges with a source as tail (items 1-7)
  for (std::size_t j = 1; j <= n; ++j) {
    nb.edge(names::a(j), u(1));
    nb.edge(names::c(j), u(2));
    nb.edge(names::a(j), u(11));
    nb.edge(names::c(j), u(6));
  }
  for (std::size_t i = 1; i < q; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      nb.edge(names::b(i, j), u(1));
      nb.edge(names::b(i, j), u(2));
      for (std::size_t k = 1; k < q; ++k) {
        if (k == i) continue;
        nb.edge(names::b(i, j), names::tail(e(k)));
        nb.edge(names::b(i, j), v(k));
      }
      nb.edge(names::b(i, j), w(i));
    }

  // intermediate-to-intermediate edges (items 8-15)
  for (int i = 1; i <= 7; ++i)
    if (i != 4) nb.edge(u(i), u(i + 2));
  for (int i : {4, 8, 9, 11, 13}) nb.edge(u(i), u(i + 1));
  nb.edge(u(3), u(6)).edge(u(7), u(11)).edge(u(8), u(13));
  for (std::size_t i = 1; i < q; ++i) {
    nb.edge(u(4), names::tail(e(i)));
    nb.edge(names::head(e(i)), u(13)).edge(names::head(e(i)), w(i));
    nb.edge(u(10), v(i)).edge(v(i), vp(i));
    nb.edge(w(i), wp(i));
  }

  // terminal sets T_c, T_a, T_{b_i}, T_{c_i}
  for (std::size_t j = 1; j <= n; ++j) {
    auto tc = "Tc:" + names::c(j);
    auto ta = "Ta:" + names::a(j);
    nb.terminal(tc, names::c(j)).edge(u(12), tc);
    nb.terminal(ta, names::a(j)).edge(u(14), ta);
  }
  for (std::size_t i = 1; i < q; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      auto tb = "Tb" + std::to_string(i) + ":" + names::b(i, j);
      auto tci = "Tc" + std::to_string(i) + ":" + names::c(j);
      nb.terminal(tb, names::b(i, j)).edge(vp(i), tb);
      nb.terminal(tci, names::c(j)).edge(wp(i), tci);
    }
  return std::move(nb).build();
}

/// N2(q,n): rate-1/n solvable exactly when the characteristic does not divide q.
inline CodedNetwork gen_n2(std::int64_t q_in, std::int64_t n_in) {
  require_params(q_in, n_in);
  const auto q = static_cast<std::size_t>(q_in), n = static_cast<std::size_t>(n_in);
  NetworkBuilder nb(family_name("n2", q, n));
  auto e = [](std::size_t i) { return "e" + std::to_string(i); };
  auto ep = [](std::size_t i) { return "e" + std::to_string(i) + "p"; };

  nb.named_edge("ea").named_edge("eb").named_edge("eap").named_edge("ebp");
  for (std::size_t i = 1; i <= q; ++i) nb.named_edge(e(i)).named_edge(ep(i));
  for (std::size_t j = 1; j <= n; ++j) nb.source(names::a(j));
  for (std::size_t i = 1; i <= q; ++i)
    for (std::size_t j = 1; j <= n; ++j) nb.source(names::b(i, j));

  for (std::size_t j = 1; j <= n; ++j) {
    nb.edge(names::a(j), names::tail("ea"));
    for (std::size_t i = 1; i <= q; ++i) nb.edge(names::a(j), names::tail(e(i)));
  }
  for (std::size_t i = 1; i <= q; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      nb.edge(names::b(i, j), names::tail("ea"));
      nb.edge(names::b(i, j), names::tail("eb"));
      for (std::size_t k = 1; k <= q; ++k)
        if (k != i) nb.edge(names::b(i, j), names::tail(e(k)));
    }

  nb.edge(names::head("ea"), names::tail("eap")).edge(names::head("eb"), names::tail("eap"));
  nb.edge(names::head("eb"), names::tail("ebp"));
  for (std::size_t i = 1; i <= q; ++i) {
    nb.edge(names::head(e(i)), names::tail(ep(i)));
    nb.edge(names::head("ea"), names::tail(ep(i)));
    nb.edge(names::head(e(i)), names::tail("ebp"));
  }

  for (std::size_t j = 1; j <= n; ++j) {
    auto t1 = "Ta1:" + names::a(j);
    auto t2 = "Ta2:" + names::a(j);
    nb.terminal(t1, names::a(j)).edge(names::head("eap"), t1);
    nb.terminal(t2, names::a(j)).edge(names::head("ebp"), t2);
  }
  for (std::size_t i = 1; i <= q; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      auto tb = "Tb" + std::to_string(i) + ":" + names::b(i, j);
      nb.terminal(tb, names::b(i, j)).edge(names::head(ep(i)), tb);
    }
  return std::move(nb).build();
}

inline CodedNetwork gen_fano() { return gen_n1(2, 1); }
inline CodedNetwork gen_nonfano() { return gen_n2(2, 1); }

/// k copies of `net` with intermediate nodes and all edges suffixed "@<copy>"; the copies of each
/// source (and of each terminal) are merged into the original node. k == 1 returns `net` unchanged.
inline CodedNetwork union_copies(const CodedNetwork& net, std::int64_t k) {
  if (k < 1) throw Error("union_copies: copies must be at least 1 (got " + std::to_string(k) + ")");
  if (k == 1) return net;
  CodedNetwork out;
  out.name = "union(" + net.name + ",k=" + std::to_string(k) + ")";
  out.messages = net.messages;
  std::set<std::string> shared;
  for (const auto& node : net.nodes)
    if (node.role != Role::intermediate) {
      out.nodes.push_back(node);
      shared.insert(node.id);
    }
  for (std::size_t c = 1; c <= static_cast<std::size_t>(k); ++c) {
    auto rename = [&](const std::string& id) { return shared.count(id) ? id : names::copy(id, c); };
    for (const auto& node : net.nodes)
      if (node.role == Role::intermediate) out.nodes.push_back({names::copy(node.id, c), Role::intermediate, {}, {}});
    for (const auto& e : net.edges) out.edges.push_back({names::copy(e.id, c), rename(e.tail), rename(e.head)});
  }
  out.canonicalize();
  return out;
}

struct GadgetApplication {
  std::size_t index;      // 1-based application counter
  std::string message;    // the doubly-demanded message b
  std::string first;      // n1, demoted terminal
  std::string second;     // n2, demoted terminal

  std::string x(int i) const { return "x" + std::to_string(i) + "#" + std::to_string(index); }
  std::string z() const { return "z#" + std::to_string(index); }
  std::string s(std::size_t i) const { return "s#" + std::to_string(index) + "_" + std::to_string(i); }
  std::string y(std::size_t i) const { return "y#" + std::to_string(index) + "_" + std::to_string(i); }
  std::string t(std::size_t i) const { return "t#" + std::to_string(index) + "_" + std::to_string(i); }
};

struct GadgetResult {
  CodedNetwork network;
  std::vector<GadgetApplication> applications;
};

/// Repeatedly removes a duplicated demand: the two smallest terminals n1, n2 demanding the same
/// message b become intermediates, and the gadget is attached:
///   x1 (source of z), s_i (sources of y_i, i < n), intermediates x2, x3;
///   n1->x2, x1->x2, s_i->x2, x2->x3 (bottleneck), x3->x4, x3->x5, x3->t_i, x1->x4, n2->x5;
///   x4 demands b, x5 demands z, t_i demands y_i.
inline GadgetResult gadget_transform_traced(const CodedNetwork& net, std::int64_t n_in) {
  if (n_in < 1) throw Error("gadget_transform: n must be at least 1");
  const auto n = static_cast<std::size_t>(n_in);
  if (!validate(net).ok()) throw Error("gadget_transform: network '" + net.name + "' is not valid");
  auto uc = is_multiple_unicast(net);
  for (const auto& [m, count] : uc.source_count)
    if (count != 1) throw Error("gadget_transform: message " + m + " must be generated by exactly one source");

  GadgetResult result{net, {}};
  auto& out = result.network;
  for (;;) {
    std::optional<GadgetApplication> next;
    for (const auto& [msg, terms] : demanders(out))
      if (terms.size() >= 2 && (!next || terms[0] < next->first))
        next = GadgetApplication{result.applications.size() + 1, msg, terms[0], terms[1]};
    if (!next) break;
    const auto& g = *next;
    for (const auto& id : {g.first, g.second}) {
      auto* node = out.find_node(id);
      node->role = Role::intermediate;
      node->demands.reset();
    }
    out.messages.push_back(g.z());
    out.nodes.push_back({g.x(1), Role::source, g.z(), std::nullopt});
    out.nodes.push_back({g.x(2), Role::intermediate, std::nullopt, std::nullopt});
    out.nodes.push_back({g.x(3), Role::intermediate, std::nullopt, std::nullopt});
    out.nodes.push_back({g.x(4), Role::terminal, std::nullopt, g.message});
    out.nodes.push_back({g.x(5), Role::terminal, std::nullopt, g.z()});
    auto edge = [&](const std::string& t, const std::string& h) { out.edges.push_back({default_edge_id(t, h), t, h}); };
    edge(g.first, g.x(2));
    edge(g.x(1), g.x(2));
    edge(g.x(2), g.x(3));
    edge(g.x(3), g.x(4));
    edge(g.x(3), g.x(5));
    edge(g.x(1), g.x(4));
    edge(g.second, g.x(5));
    for (std::size_t i = 1; i < n; ++i) {
      out.messages.push_back(g.y(i));
      out.nodes.push_back({g.s(i), Role::source, g.y(i), std::nullopt});
      out.nodes.push_back({g.t(i), Role::terminal, std::nullopt, g.y(i)});
      edge(g.s(i), g.x(2));
      edge(g.x(3), g.t(i));
    }
    result.applications.push_back(g);
  }
  if (!result.applications.empty()) out.name = "gadget(" + net.name + ",n=" + std::to_string(n) + ")";
  out.canonicalize();
  return result;
}

inline CodedNetwork gadget_transform(const CodedNetwork& net, std::int64_t n) {
  return gadget_transform_traced(net, n).network;
}

// ---------------------------------------------------------------------------
// Construction tags embedded in network names

struct ConstructionTag {
  enum class Kind { family, union_of, gadget_of } kind = Kind::family;
  std::string family;  // "n1" or "n2" when kind == family
  std::size_t q = 0;
  std::size_t n = 0;   // block length (family) or gadget n
  std::size_t copies = 0;
  std::shared_ptr<ConstructionTag> inner;
};

namespace detail {

inline bool consume(std::string_view& s, std::string_view token) {
  if (s.substr(0, token.size()) != token) return false;
  s.remove_prefix(token.size());
  return true;
}

inline std::optional<std::size_t> consume_number(std::string_view& s) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr == s.data()) return std::nullopt;
  s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
  return value;
}

inline std::shared_ptr<ConstructionTag> parse_tag(std::string_view& s) {
  auto tag = std::make_shared<ConstructionTag>();
  for (std::string_view fam : {"n1(", "n2("}) {
    if (!consume(s, fam)) continue;
    tag->family = std::string(fam.substr(0, 2));
    std::optional<std::size_t> q, n;
    if (!consume(s, "q=") || !(q = consume_number(s)) || !consume(s, ",n=") || !(n = consume_number(s)) || !consume(s, ")"))
      return nullptr;
    tag->q = *q;
    tag->n = *n;
    return tag;
  }
  bool is_union = consume(s, "union(");
  if (!is_union && !consume(s, "gadget(")) return nullptr;
  tag->kind = is_union ? ConstructionTag::Kind::union_of : ConstructionTag::Kind::gadget_of;
  tag->inner = parse_tag(s);
  if (!tag->inner) return nullptr;
  auto value = (consume(s, is_union ? ",k=" : ",n=")) ? consume_number(s) : std::nullopt;
  if (!value || !consume(s, ")")) return nullptr;
  (is_union ? tag->copies : tag->n) = *value;
  return tag;
}

}  // namespace detail

/// Parses names such as "n1(q=2,n=1)", "union(n2(q=3,n=1),k=2)", "gadget(n1(q=2,n=1),n=1)".
inline std::shared_ptr<ConstructionTag> parse_construction_tag(std::string_view name) {
  auto tag = detail::parse_tag(name);
  if (!tag || !name.empty()) return nullptr;
  return tag;
}

/// Rebuilds the network a construction tag describes.
inline CodedNetwork build_from_tag(const ConstructionTag& tag) {
  switch (tag.kind) {
    case ConstructionTag::Kind::family:
      return tag.family == "n1" ? gen_n1(static_cast<std::int64_t>(tag.q), static_cast<std::int64_t>(tag.n))
                                : gen_n2(static_cast<std::int64_t>(tag.q), static_cast<std::int64_t>(tag.n));
    case ConstructionTag::Kind::union_of:
      return union_copies(build_from_tag(*tag.inner), static_cast<std::int64_t>(tag.copies));
    case ConstructionTag::Kind::gadget_of:
      return gadget_transform(build_from_tag(*tag.inner), static_cast<std::int64_t>(tag.n));
  }
  throw Error("unknown construction tag");
}

}  // namespace ncchar
