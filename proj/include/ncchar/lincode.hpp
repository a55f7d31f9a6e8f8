#pragma once

// (k,n) fractional linear network codes: representation, evaluation of the global transfer
// blocks carried by every edge, and the terminal-demand verifier.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "ncchar/gf_linalg.hpp"
#include "ncchar/network.hpp"

namespace ncchar {

struct CodeMismatchError : Error {
  using Error::Error;
};

/// q is zero in GF(p), so q^{-1} does not exist.
struct CharacteristicError : Error {
  using Error::Error;
};

inline constexpr std::string_view source_ref_prefix = "src:";

inline std::string source_ref(std::string_view message) { return std::string(source_ref_prefix) + std::string(message); }

inline std::optional<std::string> source_ref_message(std::string_view ref) {
  if (ref.substr(0, source_ref_prefix.size()) != source_ref_prefix) return std::nullopt;
  return std::string(ref.substr(source_ref_prefix.size()));
}

struct CodeInput {
  std::string ref;  // "src:<message>" or a parent edge id
  FieldMatrix matrix;

  friend bool operator==(const CodeInput&, const CodeInput&) = default;
};

using RuleMap = std::map<std::string, std::vector<CodeInput>>;

struct FractionalCode {
  std::size_t k = 1;
  std::size_t n = 1;
  PrimeModulus modulus{2};
  std::optional<std::int64_t> q;  // construction parameter, informational
  RuleMap edge_rules;             // edge id -> inputs; n x k for sources, n x n for edges
  RuleMap decode_rules;           // terminal id -> inputs; k x n

  /// Sorts each rule's inputs by ref (stable), the order used by save_code.
  void canonicalize() {
    for (auto* rules : {&edge_rules, &decode_rules})
      for (auto& [id, inputs] : *rules)
        std::stable_sort(inputs.begin(), inputs.end(), [](const auto& a, const auto& b) { return a.ref < b.ref; });
  }

  /// Equal up to the order of inputs within a rule.
  friend bool operator==(FractionalCode a, FractionalCode b) {
    a.canonicalize();
    b.canonicalize();
    return a.k == b.k && a.n == b.n && a.modulus == b.modulus && a.q == b.q && a.edge_rules == b.edge_rules &&
           a.decode_rules == b.decode_rules;
  }
};

struct Rational {
  std::int64_t num;
  std::int64_t den;
  friend bool operator==(const Rational&, const Rational&) = default;
};

inline Rational rate(std::size_t k, std::size_t n) {
  auto g = std::gcd(k, n);
  return {static_cast<std::int64_t>(k / g), static_cast<std::int64_t>(n / g)};
}
inline Rational rate(const FractionalCode& code) { return rate(code.k, code.n); }

// ---------------------------------------------------------------------------
// Symbolic codes

/// coeff, or coeff * q^{-1} when inv_q is set.
struct SymbolicEntry {
  std::int64_t coeff = 0;
  bool inv_q = false;

  friend bool operator==(const SymbolicEntry&, const SymbolicEntry&) = default;
};

struct SymbolicMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<SymbolicEntry> entries;

  SymbolicMatrix() = default;
  SymbolicMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), entries(r * c) {}

  static SymbolicMatrix identity(std::size_t n, std::int64_t scale = 1, bool inv_q = false) {
    SymbolicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = {scale, inv_q};
    return m;
  }
  static SymbolicMatrix unit_column(std::size_t rows, std::size_t index, std::int64_t scale = 1) {
    SymbolicMatrix m(rows, 1);
    m.at(index, 0) = {scale, false};
    return m;
  }
  static SymbolicMatrix unit_row(std::size_t cols, std::size_t index) {
    SymbolicMatrix m(1, cols);
    m.at(0, index) = {1, false};
    return m;
  }

  SymbolicEntry& at(std::size_t r, std::size_t c) { return entries[r * cols + c]; }
  const SymbolicEntry& at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
  bool uses_inv_q() const {
    for (const auto& e : entries)
      if (e.inv_q && e.coeff != 0) return true;
    return false;
  }

  friend bool operator==(const SymbolicMatrix&, const SymbolicMatrix&) = default;
};

struct SymbolicInput {
  std::string ref;
  SymbolicMatrix matrix;

  friend bool operator==(const SymbolicInput&, const SymbolicInput&) = default;
};

using SymbolicRuleMap = std::map<std::string, std::vector<SymbolicInput>>;

/// Characteristic-agnostic code; instantiate() turns it into a FractionalCode over a chosen GF(p).
struct SymbolicCode {
  std::size_t k = 1;
  std::size_t n = 1;
  std::int64_t q = 1;
  SymbolicRuleMap edge_rules;
  SymbolicRuleMap decode_rules;

  void canonicalize() {
    for (auto* rules : {&edge_rules, &decode_rules})
      for (auto& [id, inputs] : *rules)
        std::stable_sort(inputs.begin(), inputs.end(), [](const auto& a, const auto& b) { return a.ref < b.ref; });
  }

  bool uses_inv_q() const {
    for (const auto* rules : {&edge_rules, &decode_rules})
      for (const auto& [id, inputs] : *rules)
        for (const auto& in : inputs)
          if (in.matrix.uses_inv_q()) return true;
    return false;
  }

  friend bool operator==(SymbolicCode a, SymbolicCode b) {
    a.canonicalize();
    b.canonicalize();
    return a.k == b.k && a.n == b.n && a.q == b.q && a.edge_rules == b.edge_rules && a.decode_rules == b.decode_rules;
  }
};

inline FieldMatrix instantiate(const SymbolicMatrix& m, const PrimeModulus& p, std::optional<std::uint32_t> q_inverse) {
  FieldMatrix out(m.rows, m.cols, p);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) {
      const auto& e = m.at(r, c);
      auto v = p.reduce(e.coeff);
      if (e.inv_q && v != 0) {
        if (!q_inverse) throw CharacteristicError("q^{-1} requested but q is not invertible");
        v = p.mul(v, *q_inverse);
      }
      out.set(r, c, v);
    }
  return out;
}

/// Reduces integer entries mod p and replaces q^{-1} by the modular inverse of q.
/// Throws CharacteristicError when the code uses q^{-1} and p divides q.
inline FractionalCode instantiate(const SymbolicCode& sym, const PrimeModulus& p) {
  std::optional<std::uint32_t> q_inverse;
  if (p.reduce(sym.q) != 0) q_inverse = p.inv(p.reduce(sym.q));
  else if (sym.uses_inv_q())
    throw CharacteristicError("characteristic " + std::to_string(p.value()) + " divides q=" + std::to_string(sym.q) +
                              ": q has no inverse");
  FractionalCode code;
  code.k = sym.k;
  code.n = sym.n;
  code.modulus = p;
  code.q = sym.q;
  auto convert = [&](const SymbolicRuleMap& in, RuleMap& out) {
    for (const auto& [id, inputs] : in) {
      auto& dst = out[id];
      for (const auto& input : inputs) dst.push_back({input.ref, instantiate(input.matrix, p, q_inverse)});
    }
  };
  convert(sym.edge_rules, code.edge_rules);
  convert(sym.decode_rules, code.decode_rules);
  return code;
}

// ---------------------------------------------------------------------------
// Transfer evaluation and verification

/// Per edge, per message: the n x k block expressing what the edge carries in terms of that message.
using TransferMap = std::map<std::string, std::map<std::string, FieldMatrix>>;

/// Checks that every rule references existing edges/messages available at the rule's node and that
/// matrix shapes match. Throws CodeMismatchError.
inline void check_code(const CodedNetwork& net, const FractionalCode& code) {
  auto fail = [](const std::string& msg) { throw CodeMismatchError(msg); };
  for (const auto& [edge_id, inputs] : code.edge_rules) {
    const auto* edge = net.find_edge(edge_id);
    if (!edge) fail("edge rule for unknown edge " + edge_id);
    const auto* tail = net.find_node(edge->tail);
    for (const auto& in : inputs) {
      if (!(in.matrix.modulus() == code.modulus)) fail("edge " + edge_id + ": matrix over a different field");
      if (auto msg = source_ref_message(in.ref)) {
        if (!tail || tail->generates != *msg) fail("edge " + edge_id + ": message " + *msg + " is not generated at " + edge->tail);
        if (in.matrix.rows() != code.n || in.matrix.cols() != code.k)
          fail("edge " + edge_id + ": source matrix for " + *msg + " must be n x k");
      } else {
        const auto* parent = net.find_edge(in.ref);
        if (!parent || parent->head != edge->tail) fail("edge " + edge_id + ": " + in.ref + " is not an in-edge of " + edge->tail);
        if (in.matrix.rows() != code.n || in.matrix.cols() != code.n)
          fail("edge " + edge_id + ": matrix for parent " + in.ref + " must be n x n");
      }
    }
  }
  for (const auto& e : net.edges)
    if (!code.edge_rules.count(e.id)) fail("no rule for edge " + e.id);
  for (const auto& [term_id, inputs] : code.decode_rules) {
    const auto* node = net.find_node(term_id);
    if (!node || node->role != Role::terminal) fail("decode rule for unknown terminal " + term_id);
    for (const auto& in : inputs) {
      if (!(in.matrix.modulus() == code.modulus)) fail("terminal " + term_id + ": matrix over a different field");
      if (source_ref_message(in.ref)) fail("terminal " + term_id + ": decode rules may only read in-edges");
      const auto* parent = net.find_edge(in.ref);
      if (!parent || parent->head != term_id) fail("terminal " + term_id + ": " + in.ref + " is not an in-edge");
      if (in.matrix.rows() != code.k || in.matrix.cols() != code.n)
        fail("terminal " + term_id + ": decode matrix for " + in.ref + " must be k x n");
    }
  }
}

/// Evaluates every edge in topological order. Inputs not named in a rule are weighted zero.
inline TransferMap eval_transfer(const CodedNetwork& net, const FractionalCode& code, TieBreak tie = TieBreak::ascending) {
  check_code(net, code);
  const auto& p = code.modulus;
  TransferMap y;
  for (const auto& node_id : topological_order(net, tie)) {
    for (const auto* edge : net.out_edges(node_id)) {
      auto& blocks = y[edge->id];
      for (const auto& m : net.messages) blocks.emplace(m, FieldMatrix::zero(code.n, code.k, p));
      for (const auto& in : code.edge_rules.at(edge->id)) {
        if (auto msg = source_ref_message(in.ref)) {
          blocks.at(*msg) = blocks.at(*msg) + in.matrix;
        } else {
          for (const auto& [m, parent_block] : y.at(in.ref)) blocks.at(m) = blocks.at(m) + in.matrix * parent_block;
        }
      }
    }
  }
  return y;
}

struct TerminalResult {
  std::string terminal;
  std::string demand;
  bool pass = false;
  FieldMatrix demanded_block;                 // k x k actually decoded for the demand
  std::vector<std::string> interfering;       // messages with nonzero decoded blocks, other than the demand
};

struct VerificationReport {
  std::vector<TerminalResult> terminals;  // sorted by terminal id

  bool pass() const {
    for (const auto& t : terminals)
      if (!t.pass) return false;
    return true;
  }
  std::vector<std::string> failing() const {
    std::vector<std::string> out;
    for (const auto& t : terminals)
      if (!t.pass) out.push_back(t.terminal);
    return out;
  }
  const TerminalResult* find(std::string_view id) const {
    for (const auto& t : terminals)
      if (t.terminal == id) return &t;
    return nullptr;
  }
};

/// Decoded blocks per terminal: sum over in-edges of A_{e,t} * Y_e, per message.
inline std::map<std::string, FieldMatrix> decoded_blocks(const CodedNetwork& net, const FractionalCode& code,
                                                         const TransferMap& y, const std::string& terminal) {
  std::map<std::string, FieldMatrix> out;
  for (const auto& m : net.messages) out.emplace(m, FieldMatrix::zero(code.k, code.k, code.modulus));
  auto it = code.decode_rules.find(terminal);
  if (it == code.decode_rules.end()) return out;
  for (const auto& in : it->second)
    for (const auto& [m, block] : y.at(in.ref)) out.at(m) = out.at(m) + in.matrix * block;
  return out;
}

/// A terminal passes iff its decoded block is I_k on the demand and zero on every other message.
inline VerificationReport verify(const CodedNetwork& net, const FractionalCode& code) {
  auto y = eval_transfer(net, code);
  VerificationReport report;
  auto terminals = net.nodes_with_role(Role::terminal);
  std::sort(terminals.begin(), terminals.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (const auto* t : terminals) {
    auto blocks = decoded_blocks(net, code, y, t->id);
    TerminalResult r{t->id, *t->demands, false, blocks.at(*t->demands), {}};
    for (const auto& [m, block] : blocks)
      if (m != *t->demands && !block.is_zero()) r.interfering.push_back(m);
    r.pass = r.demanded_block.is_identity() && r.interfering.empty();
    report.terminals.push_back(std::move(r));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline nlohmann::json rules_to_json(const RuleMap& rules, const char* key) {
  auto arr = nlohmann::json::array();
  for (const auto& [id, inputs] : rules) {
    std::vector<const CodeInput*> sorted;
    for (const auto& in : inputs) sorted.push_back(&in);
    std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->ref < b->ref; });
    auto ins = nlohmann::json::array();
    for (const auto* in : sorted) ins.push_back({{"ref", in->ref}, {"matrix", in->matrix.to_rows()}});
    arr.push_back({{key, id}, {"inputs", std::move(ins)}});
  }
  return arr;
}

inline nlohmann::json entry_to_json(const SymbolicEntry& e) {
  if (!e.inv_q || e.coeff == 0) return e.coeff;
  if (e.coeff == 1) return "INV_Q";
  return std::to_string(e.coeff) + "*INV_Q";
}

inline SymbolicEntry entry_from_json(const nlohmann::json& v, const std::string& where) {
  if (v.is_number_integer()) return {v.get<std::int64_t>(), false};
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "INV_Q") return {1, true};
    const std::string suffix = "*INV_Q";
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      try {
        std::size_t used = 0;
        auto prefix = s.substr(0, s.size() - suffix.size());
        auto c = std::stoll(prefix, &used);
        if (used == prefix.size()) return {c, true};
      } catch (const std::exception&) {
      }
    }
  }
  throw ParseError(where + ": expected an integer, \"INV_Q\" or \"<int>*INV_Q\"");
}

inline nlohmann::json symbolic_rules_to_json(const SymbolicRuleMap& rules, const char* key) {
  auto arr = nlohmann::json::array();
  for (const auto& [id, inputs] : rules) {
    std::vector<const SymbolicInput*> sorted;
    for (const auto& in : inputs) sorted.push_back(&in);
    std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->ref < b->ref; });
    auto ins = nlohmann::json::array();
    for (const auto* in : sorted) {
      auto rows = nlohmann::json::array();
      for (std::size_t r = 0; r < in->matrix.rows; ++r) {
        auto row = nlohmann::json::array();
        for (std::size_t c = 0; c < in->matrix.cols; ++c) row.push_back(entry_to_json(in->matrix.at(r, c)));
        rows.push_back(std::move(row));
      }
      ins.push_back({{"ref", in->ref}, {"matrix", std::move(rows)}});
    }
    arr.push_back({{key, id}, {"inputs", std::move(ins)}});
  }
  return arr;
}

inline std::size_t require_count(const nlohmann::json& doc, const std::string& key, bool positive) {
  const auto& v = require(doc, key, "code");
  if (!v.is_number_integer() || v.get<std::int64_t>() < (positive ? 1 : 0))
    throw ParseError("code." + key + ": expected a " + (positive ? "positive" : "non-negative") + " integer");
  return v.get<std::size_t>();
}

/// Parses one rules array into (id, ref, matrix-json, where) tuples via a callback.
template <class OnInput>
void parse_rules(const nlohmann::json& doc, const std::string& array_key, const std::string& id_key, OnInput&& on_input) {
  const auto& arr = require_array(doc, array_key, "code");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string where = array_key + "[" + std::to_string(i) + "]";
    auto id = require_string(arr[i], id_key, where);
    if (!seen.insert(id).second) throw ParseError(where + ": duplicate rule for " + id);
    const auto& inputs = require_array(arr[i], "inputs", where);
    on_input(id, std::nullopt, nlohmann::json(), where);  // registers an empty rule
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      std::string w = where + ".inputs[" + std::to_string(j) + "]";
      auto ref = require_string(inputs[j], "ref", w);
      const auto& matrix = require_array(inputs[j], "matrix", w);
      on_input(id, std::optional<std::string>(ref), matrix, w + ".matrix");
    }
  }
}

inline std::pair<std::size_t, std::size_t> expected_shape(const std::string& array_key, const std::string& ref,
                                                          std::size_t k, std::size_t n) {
  if (array_key == "decode_rules") return {k, n};
  return {n, source_ref_message(ref) ? k : n};
}

template <class Entry, class ReadEntry>
std::vector<std::vector<Entry>> parse_matrix(const nlohmann::json& rows, std::size_t want_rows, std::size_t want_cols,
                                             const std::string& where, ReadEntry&& read) {
  if (rows.size() != want_rows) throw ParseError(where + ": expected " + std::to_string(want_rows) + " rows");
  std::vector<std::vector<Entry>> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != want_cols)
      throw ParseError(where + "[" + std::to_string(r) + "]: expected " + std::to_string(want_cols) + " columns");
    out.emplace_back();
    for (std::size_t c = 0; c < want_cols; ++c)
      out.back().push_back(read(rows[r][c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
  }
  return out;
}

}  // namespace detail

inline std::string save_code(const FractionalCode& code) {
  nlohmann::json doc;
  doc["k"] = code.k;
  doc["n"] = code.n;
  doc["p"] = code.modulus.value();
  if (code.q) doc["q"] = *code.q;
  doc["edge_rules"] = detail::rules_to_json(code.edge_rules, "edge");
  doc["decode_rules"] = detail::rules_to_json(code.decode_rules, "terminal");
  return dump_canonical(doc);
}

/// Parses a code file. Entries must be canonical residues in [0, p).
inline FractionalCode load_code(std::string_view text) {
  using namespace detail;
  auto doc = parse_document(text);
  if (!doc.is_object()) throw ParseError("code: expected a JSON object");
  FractionalCode code;
  code.k = require_count(doc, "k", true);
  code.n = require_count(doc, "n", true);
  try {
    code.modulus = PrimeModulus(static_cast<std::int64_t>(require_count(doc, "p", true)));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("code.p: ") + e.what());
  }
  if (doc.contains("q")) {
    if (!doc["q"].is_number_integer()) throw ParseError("code.q: expected an integer");
    code.q = doc["q"].get<std::int64_t>();
  }
  const auto p = code.modulus;
  for (auto [array_key, id_key, target] : {std::tuple{"edge_rules", "edge", &code.edge_rules},
                                           std::tuple{"decode_rules", "terminal", &code.decode_rules}}) {
    std::string key = array_key;
    parse_rules(doc, key, id_key,
                [&](const std::string& id, std::optional<std::string> ref, const nlohmann::json& m, const std::string& where) {
                  auto& rule = (*target)[id];
                  if (!ref) return;
                  auto [r, c] = expected_shape(key, *ref, code.k, code.n);
                  auto rows = parse_matrix<std::int64_t>(m, r, c, where, [&](const nlohmann::json& v, const std::string& w) {
                    if (!v.is_number_integer() || v.get<std::int64_t>() < 0 ||
                        v.get<std::int64_t>() >= static_cast<std::int64_t>(p.value()))
                      throw ParseError(w + ": entry must be an integer in [0, " + std::to_string(p.value()) + ")");
                    return v.get<std::int64_t>();
                  });
                  rule.push_back({*ref, FieldMatrix(rows, p)});
                });
  }
  return code;
}

/// Parses a code file and checks it against the network it is meant for.
inline FractionalCode load_code(std::string_view text, const CodedNetwork& net) {
  auto code = load_code(text);
  try {
    check_code(net, code);
  } catch (const CodeMismatchError& e) {
    throw ParseError(e.what());
  }
  return code;
}

inline std::string save_symbolic_code(const SymbolicCode& sym) {
  nlohmann::json doc;
  doc["k"] = sym.k;
  doc["n"] = sym.n;
  doc["q"] = sym.q;
  doc["edge_rules"] = detail::symbolic_rules_to_json(sym.edge_rules, "edge");
  doc["decode_rules"] = detail::symbolic_rules_to_json(sym.decode_rules, "terminal");
  return dump_canonical(doc);
}

inline SymbolicCode load_symbolic_code(std::string_view text) {
  using namespace detail;
  auto doc = parse_document(text);
  if (!doc.is_object()) throw ParseError("code: expected a JSON object");
  SymbolicCode sym;
  sym.k = require_count(doc, "k", true);
  sym.n = require_count(doc, "n", true);
  sym.q = static_cast<std::int64_t>(require_count(doc, "q", true));
  for (auto [array_key, id_key, target] : {std::tuple{"edge_rules", "edge", &sym.edge_rules},
                                           std::tuple{"decode_rules", "terminal", &sym.decode_rules}}) {
    std::string key = array_key;
    parse_rules(doc, key, id_key,
                [&](const std::string& id, std::optional<std::string> ref, const nlohmann::json& m, const std::string& where) {
                  auto& rule = (*target)[id];
                  if (!ref) return;
                  auto [r, c] = expected_shape(key, *ref, sym.k, sym.n);
                  auto rows = parse_matrix<SymbolicEntry>(m, r, c, where, entry_from_json);
                  SymbolicMatrix mat(r, c);
                  for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j) mat.at(i, j) = rows[i][j];
                  rule.push_back({*ref, std::move(mat)});
                });
  }
  return sym;
}

inline nlohmann::json report_to_json(const VerificationReport& report) {
  nlohmann::json doc;
  doc["pass"] = report.pass();
  doc["failing"] = report.failing();
  doc["terminals"] = nlohmann::json::array();
  for (const auto& t : report.terminals)
    doc["terminals"].push_back({{"terminal", t.terminal},
                                {"demand", t.demand},
                                {"pass", t.pass},
                                {"decoded", t.demanded_block.to_rows()},
                                {"interfering", t.interfering}});
  return doc;
}

}  // namespace ncchar
