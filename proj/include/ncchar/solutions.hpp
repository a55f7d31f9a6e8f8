#pragma once

// Explicit (1,n) codes for N1 and N2 as symbolic codes, and their lifts to k-copy unions and to
// gadget-transformed networks.

#include <functional>
#include <map>
#include <string>

#include "ncchar/constructions.hpp"
#include "ncchar/lincode.hpp"

namespace ncchar {

namespace detail {

/// Index j (1-based) of a source message a_j, c_j or b_ij within its n-block.
inline std::size_t block_index(const std::string& message) {
  auto pos = message.find('_');
  if (pos != std::string::npos) return std::stoul(message.substr(pos + 1));
  if (message[0] == 'b') return std::stoul(message.substr(2));
  return std::stoul(message.substr(1));
}

/// Builds a code where each source edge embeds its message at its block index, each decode rule reads
/// the demand's block index, and each intermediate edge sums its parents weighted by `weight`.
inline SymbolicCode unit_embedding_code(const CodedNetwork& net, std::size_t q, std::size_t n,
                                        const std::function<SymbolicEntry(const NetEdge&, const NetEdge&)>& weight) {
  SymbolicCode sym;
  sym.k = 1;
  sym.n = n;
  sym.q = static_cast<std::int64_t>(q);
  for (const auto& e : net.edges) {
    auto& rule = sym.edge_rules[e.id];
    const auto* tail = net.find_node(e.tail);
    if (tail->role == Role::source) {
      rule.push_back({source_ref(*tail->generates), SymbolicMatrix::unit_column(n, block_index(*tail->generates) - 1)});
      continue;
    }
    for (const auto* parent : net.in_edges(e.tail)) {
      auto w = weight(e, *parent);
      rule.push_back({parent->id, SymbolicMatrix::identity(n, w.coeff, w.inv_q)});
    }
  }
  for (const auto* t : net.nodes_with_role(Role::terminal))
    for (const auto* in : net.in_edges(t->id))
      sym.decode_rules[t->id].push_back({in->id, SymbolicMatrix::unit_row(n, block_index(*t->demands) - 1)});
  return sym;
}

inline bool from_source(const CodedNetwork& net, const NetEdge& e) {
  return net.find_node(e.tail)->role == Role::source;
}

inline bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace detail

/// The (1,n) code for N1(q,n): every edge carries a signed sum of unit-embedded messages; the edge
/// into u14 carries sum(a) - q*sum(c), which is sum(a) exactly when the characteristic divides q.
inline SymbolicCode solve_n1(std::int64_t q, std::int64_t n) {
  auto net = gen_n1(q, n);
  auto weight = [&](const NetEdge& e, const NetEdge& parent) -> SymbolicEntry {
    bool src = detail::from_source(net, parent);
    const auto& t = e.tail;
    if (e.id == "u5->u7" && parent.tail == "u4") return {-1, false};
    if (e.id == "u9->u10" && parent.tail == "u7") return {-1, false};
    if (e.id == "u11->u12" && parent.tail == "u7") return {-1, false};
    if (e.id == "u13->u14" && parent.tail != "u8") return {-1, false};
    // u6->u8, e_i, v_i->v_ip and w_i->w_ip subtract the messages entering directly from sources
    if (src && (t == "u6" || (t.size() > 1 && (t.back() == 't' || t[0] == 'v' || t[0] == 'w')))) return {-1, false};
    return {1, false};
  };
  return detail::unit_embedding_code(net, static_cast<std::size_t>(q), static_cast<std::size_t>(n), weight);
}

/// The (1,n) code for N2(q,n); the edge e_b' uses q^{-1}, so it instantiates only when the
/// characteristic does not divide q.
inline SymbolicCode solve_n2(std::int64_t q, std::int64_t n) {
  auto net = gen_n2(q, n);
  auto weight = [&](const NetEdge& e, const NetEdge& parent) -> SymbolicEntry {
    if (e.id == "eap" && parent.tail == names::head("eb")) return {-1, false};
    if (e.id != "eap" && e.id != "ebp" && detail::starts_with(e.id, "e") && e.id.back() == 'p' &&
        parent.tail != names::head("ea"))
      return {-1, false};
    if (e.id == "ebp") {
      if (parent.tail == names::head("eb")) return {-(q - 1), true};
      return {1, true};
    }
    return {1, false};
  };
  return detail::unit_embedding_code(net, static_cast<std::size_t>(q), static_cast<std::size_t>(n), weight);
}

/// (k*k0, n) code on union_copies(base, k): copy c carries component block c of every source with the
/// base code's matrices; merged terminals stack the per-copy decodes.
inline SymbolicCode lift_union(const SymbolicCode& sym, std::int64_t k_in) {
  if (k_in < 1) throw Error("lift_union: copies must be at least 1");
  if (k_in == 1) return sym;
  const auto k = static_cast<std::size_t>(k_in);
  SymbolicCode out;
  out.k = sym.k * k;
  out.n = sym.n;
  out.q = sym.q;
  for (std::size_t c = 1; c <= k; ++c) {
    const std::size_t offset = (c - 1) * sym.k;
    for (const auto& [edge, inputs] : sym.edge_rules) {
      auto& rule = out.edge_rules[names::copy(edge, c)];
      for (const auto& in : inputs) {
        if (source_ref_message(in.ref)) {
          SymbolicMatrix m(sym.n, out.k);
          for (std::size_t r = 0; r < sym.n; ++r)
            for (std::size_t j = 0; j < sym.k; ++j) m.at(r, offset + j) = in.matrix.at(r, j);
          rule.push_back({in.ref, std::move(m)});
        } else {
          rule.push_back({names::copy(in.ref, c), in.matrix});
        }
      }
    }
    for (const auto& [term, inputs] : sym.decode_rules) {
      auto& rule = out.decode_rules[term];
      for (const auto& in : inputs) {
        SymbolicMatrix m(out.k, sym.n);
        for (std::size_t r = 0; r < sym.k; ++r)
          for (std::size_t j = 0; j < sym.n; ++j) m.at(offset + r, j) = in.matrix.at(r, j);
        rule.push_back({names::copy(in.ref, c), std::move(m)});
      }
    }
  }
  return out;
}

/// Extends a (1,n) code for `base` to gadgeted = gadget_transform(base, n). Per application the
/// bottleneck x2->x3 carries [b+z, y_1, ..., y_{n-1}]; x4 removes z with its direct x1 edge, x5
/// removes b using n2's former decode, t_i reads y_i.
inline SymbolicCode lift_gadget(const SymbolicCode& sym, const CodedNetwork& base, const CodedNetwork& gadgeted) {
  auto traced = gadget_transform_traced(base, static_cast<std::int64_t>(sym.n));
  if (!structurally_equal(traced.network, gadgeted))
    throw Error("lift_gadget: network is not gadget_transform(" + base.name + ", n=" + std::to_string(sym.n) + ")");
  if (traced.applications.empty()) return sym;
  if (sym.k != 1) throw Error("lift_gadget: only (1,n) codes can be lifted through the gadget");
  const std::size_t n = sym.n;
  SymbolicCode out = sym;
  auto identity = SymbolicMatrix::identity(n);
  auto negated_unit_row = [n](std::size_t i) {
    auto m = SymbolicMatrix::unit_row(n, i);
    m.at(0, i).coeff = -1;
    return m;
  };
  // former decode rows of a demoted terminal, placed in the first row of an n x n matrix
  auto forward_decode = [&](const std::string& terminal, const std::string& edge) {
    auto it = out.decode_rules.find(terminal);
    auto& rule = out.edge_rules[edge];
    if (it == out.decode_rules.end()) return;
    for (const auto& in : it->second) {
      SymbolicMatrix m(n, n);
      for (std::size_t j = 0; j < n; ++j) m.at(0, j) = in.matrix.at(0, j);
      rule.push_back({in.ref, std::move(m)});
    }
    out.decode_rules.erase(it);
  };
  for (const auto& g : traced.applications) {
    auto e = [](const std::string& t, const std::string& h) { return default_edge_id(t, h); };
    forward_decode(g.first, e(g.first, g.x(2)));
    forward_decode(g.second, e(g.second, g.x(5)));
    out.edge_rules[e(g.x(1), g.x(2))] = {{source_ref(g.z()), SymbolicMatrix::unit_column(n, 0)}};
    out.edge_rules[e(g.x(1), g.x(4))] = {{source_ref(g.z()), SymbolicMatrix::unit_column(n, 0)}};
    auto& bottleneck = out.edge_rules[e(g.x(2), g.x(3))];
    bottleneck = {{e(g.first, g.x(2)), identity}, {e(g.x(1), g.x(2)), identity}};
    for (std::size_t i = 1; i < n; ++i) {
      out.edge_rules[e(g.s(i), g.x(2))] = {{source_ref(g.y(i)), SymbolicMatrix::unit_column(n, i)}};
      bottleneck.push_back({e(g.s(i), g.x(2)), identity});
      out.edge_rules[e(g.x(3), g.t(i))] = {{e(g.x(2), g.x(3)), identity}};
      out.decode_rules[g.t(i)] = {{e(g.x(3), g.t(i)), SymbolicMatrix::unit_row(n, i)}};
    }
    out.edge_rules[e(g.x(3), g.x(4))] = {{e(g.x(2), g.x(3)), identity}};
    out.edge_rules[e(g.x(3), g.x(5))] = {{e(g.x(2), g.x(3)), identity}};
    out.decode_rules[g.x(4)] = {{e(g.x(3), g.x(4)), SymbolicMatrix::unit_row(n, 0)},
                                {e(g.x(1), g.x(4)), negated_unit_row(0)}};
    out.decode_rules[g.x(5)] = {{e(g.x(3), g.x(5)), SymbolicMatrix::unit_row(n, 0)},
                                {e(g.second, g.x(5)), negated_unit_row(0)}};
  }
  return out;
}

/// Whether the explicit construction behind `tag` admits characteristic p.
inline bool characteristic_admissible(const ConstructionTag& tag, std::uint32_t p) {
  if (tag.kind != ConstructionTag::Kind::family) return characteristic_admissible(*tag.inner, p);
  bool divides = tag.q % p == 0;
  return tag.family == "n1" ? divides : !divides;
}

inline const ConstructionTag& base_family(const ConstructionTag& tag) {
  return tag.kind == ConstructionTag::Kind::family ? tag : base_family(*tag.inner);
}

/// Symbolic solution for a tagged construction (family, unions and gadgets nest in any order).
inline SymbolicCode symbolic_solution(const ConstructionTag& tag) {
  switch (tag.kind) {
    case ConstructionTag::Kind::family:
      return tag.family == "n1" ? solve_n1(static_cast<std::int64_t>(tag.q), static_cast<std::int64_t>(tag.n))
                                : solve_n2(static_cast<std::int64_t>(tag.q), static_cast<std::int64_t>(tag.n));
    case ConstructionTag::Kind::union_of:
      return lift_union(symbolic_solution(*tag.inner), static_cast<std::int64_t>(tag.copies));
    case ConstructionTag::Kind::gadget_of: {
      auto base = build_from_tag(*tag.inner);
      return lift_gadget(symbolic_solution(*tag.inner), base, gadget_transform(base, static_cast<std::int64_t>(tag.n)));
    }
  }
  throw Error("unknown construction tag");
}

/// The explicit code for a tagged construction over GF(p). Throws CharacteristicError when the
/// construction has no solution at this characteristic.
inline FractionalCode solve_construction(const ConstructionTag& tag, const PrimeModulus& p) {
  const auto& fam = base_family(tag);
  if (!characteristic_admissible(tag, p.value())) {
    if (fam.family == "n1")
      throw CharacteristicError("characteristic " + std::to_string(p.value()) + " does not divide q=" +
                                std::to_string(fam.q) + "; N1 needs a characteristic dividing q");
    throw CharacteristicError("characteristic " + std::to_string(p.value()) + " divides q=" + std::to_string(fam.q) +
                              "; N2 needs a characteristic not dividing q");
  }
  return instantiate(symbolic_solution(tag), p);
}

}  // namespace ncchar
