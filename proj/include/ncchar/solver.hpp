#pragma once

// Exhaustive search for scalar and small fractional linear solutions.
//
// The search assigns to every edge a global coding space: the row space of the n x (m*k) global
// transfer matrix it carries, where m is the message count. An edge's space must lie inside the
// span of its parents' spaces (or, for source edges, of the generated message's coordinates).
// Only the row space matters, since any invertible n x n local transform is absorbed downstream,
// and a larger space never hurts a descendant, so each edge ranges over the subspaces of maximal
// dimension min(n, dim parents). A terminal is satisfiable iff the demanded message's k unit rows
// lie in the sum of its in-edge spaces. Exhausting this tree therefore certifies unsolvability.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ncchar/gf_linalg.hpp"
#include "ncchar/lincode.hpp"
#include "ncchar/network.hpp"

namespace ncchar {

struct SearchConfig {
  std::uint64_t node_budget = 1'000'000'000;
  bool enable_fractional = false;
  std::size_t k = 1;
  std::size_t n = 1;
  unsigned worker_count = 1;
};

struct SearchOutcome {
  enum class Kind { solvable, unsolvable, inconclusive };
  Kind kind = Kind::inconclusive;
  std::uint64_t states_explored = 0;
  std::optional<FractionalCode> code;  // present iff solvable

  bool solvable() const { return kind == Kind::solvable; }
  bool unsolvable() const { return kind == Kind::unsolvable; }
  bool inconclusive() const { return kind == Kind::inconclusive; }
};

inline std::string_view to_string(SearchOutcome::Kind k) {
  switch (k) {
    case SearchOutcome::Kind::solvable: return "solvable";
    case SearchOutcome::Kind::unsolvable: return "unsolvable";
    case SearchOutcome::Kind::inconclusive: return "inconclusive";
  }
  return "?";
}

/// A subspace of GF(p)^dim kept as a reduced row echelon basis.
class Subspace {
public:
  using Row = std::vector<std::uint32_t>;

  Subspace(std::size_t dim, PrimeModulus mod) : dim_(dim), mod_(mod) {}

  std::size_t ambient() const noexcept { return dim_; }
  std::size_t rank() const noexcept { return basis_.size(); }
  const std::vector<Row>& basis() const noexcept { return basis_; }

  /// Reduces `v` against the basis in place; returns true when it reduces to zero.
  bool reduce(Row& v) const {
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      auto f = v[pivots_[i]];
      if (f == 0) continue;
      const auto& b = basis_[i];
      for (std::size_t c = pivots_[i]; c < dim_; ++c) v[c] = mod_.sub(v[c], mod_.mul(f, b[c]));
    }
    return std::all_of(v.begin(), v.end(), [](auto x) { return x == 0; });
  }

  bool contains(Row v) const { return reduce(v); }

  /// Adds v to the span; returns false if it was already contained.
  bool insert(Row v) {
    if (reduce(v)) return false;
    std::size_t pivot = 0;
    while (v[pivot] == 0) ++pivot;
    auto scale = mod_.inv(v[pivot]);
    for (auto& x : v) x = mod_.mul(x, scale);
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      auto f = basis_[i][pivot];
      if (f == 0) continue;
      for (std::size_t c = pivot; c < dim_; ++c) basis_[i][c] = mod_.sub(basis_[i][c], mod_.mul(f, v[c]));
    }
    auto pos = static_cast<std::size_t>(std::lower_bound(pivots_.begin(), pivots_.end(), pivot) - pivots_.begin());
    pivots_.insert(pivots_.begin() + static_cast<std::ptrdiff_t>(pos), pivot);
    basis_.insert(basis_.begin() + static_cast<std::ptrdiff_t>(pos), std::move(v));
    return true;
  }

  void insert_all(const Subspace& other) {
    for (const auto& r : other.basis_) insert(r);
  }

private:
  std::size_t dim_;
  PrimeModulus mod_;
  std::vector<Row> basis_;
  std::vector<std::size_t> pivots_;
};

/// Walks every d-dimensional subspace of GF(p)^r once, as d x r reduced row echelon coefficient matrices.
class SubspaceEnumerator {
public:
  SubspaceEnumerator(std::size_t r, std::size_t d, PrimeModulus mod) : r_(r), d_(d), mod_(mod) {
    done_ = d_ > r_;
    if (done_) return;
    pivots_.resize(d_);
    for (std::size_t i = 0; i < d_; ++i) pivots_[i] = i;
    layout();
  }

  bool done() const noexcept { return done_; }

  /// Current d x r coefficient matrix (row-major).
  std::vector<std::vector<std::uint32_t>> current() const {
    std::vector<std::vector<std::uint32_t>> m(d_, std::vector<std::uint32_t>(r_, 0));
    for (std::size_t i = 0; i < d_; ++i) m[i][pivots_[i]] = 1;
    for (std::size_t f = 0; f < free_.size(); ++f) m[free_[f].first][free_[f].second] = values_[f];
    return m;
  }

  void advance() {
    for (std::size_t f = values_.size(); f-- > 0;) {
      if (++values_[f] < mod_.value()) return;
      values_[f] = 0;
    }
    // next pivot combination in lexicographic order
    std::size_t i = d_;
    while (i-- > 0) {
      if (pivots_[i] < r_ - d_ + i) {
        ++pivots_[i];
        for (std::size_t j = i + 1; j < d_; ++j) pivots_[j] = pivots_[j - 1] + 1;
        layout();
        return;
      }
    }
    done_ = true;
  }

  /// Gaussian binomial coefficient [r choose d]_p, saturating.
  static std::uint64_t count(std::size_t r, std::size_t d, std::uint64_t p) {
    if (d > r) return 0;
    long double num = 1, den = 1;
    for (std::size_t i = 0; i < d; ++i) {
      num *= std::pow(static_cast<long double>(p), static_cast<long double>(r - i)) - 1;
      den *= std::pow(static_cast<long double>(p), static_cast<long double>(i + 1)) - 1;
    }
    long double v = num / den;
    return v > 1.8e19L ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(v + 0.5L);
  }

private:
  void layout() {
    free_.clear();
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t c = pivots_[i] + 1; c < r_; ++c)
        if (!std::binary_search(pivots_.begin(), pivots_.end(), c)) free_.push_back({i, c});
    values_.assign(free_.size(), 0);
  }

  std::size_t r_, d_;
  PrimeModulus mod_;
  bool done_ = false;
  std::vector<std::size_t> pivots_;
  std::vector<std::pair<std::size_t, std::size_t>> free_;
  std::vector<std::uint32_t> values_;
};

/// True iff the demand's unit vector lies in the span of `vectors` (each of length m).
inline bool decodable(const std::vector<std::vector<std::uint32_t>>& vectors, std::size_t demand, const PrimeModulus& p) {
  if (vectors.empty()) return false;
  Subspace span(vectors.front().size(), p);
  for (const auto& v : vectors) span.insert(v);
  Subspace::Row unit(vectors.front().size(), 0);
  unit.at(demand) = 1;
  return span.contains(unit);
}

/// Name-based overload: vectors are indexed by the network's (sorted) message list.
inline bool decodable(const std::vector<std::vector<std::uint32_t>>& vectors, const std::string& demand,
                      const std::vector<std::string>& messages, const PrimeModulus& p) {
  auto it = std::find(messages.begin(), messages.end(), demand);
  if (it == messages.end()) throw Error("decodable: unknown message " + demand);
  if (vectors.empty()) return false;
  return decodable(vectors, static_cast<std::size_t>(it - messages.begin()), p);
}

namespace detail {

class SearchEngine {
public:
  SearchEngine(const CodedNetwork& net, const PrimeModulus& p, const SearchConfig& cfg)
      : net_(net), p_(p), k_(cfg.k), n_(cfg.n), budget_(cfg.node_budget), workers_(std::max(1u, cfg.worker_count)) {
    index();
    order_edges();
  }

  SearchOutcome run() {
    SearchOutcome out;
    for (std::size_t t = 0; t < terminals_.size(); ++t)
      if (terminals_[t].in_edges.empty()) {
        out.kind = SearchOutcome::Kind::unsolvable;
        return out;
      }
    State root(edges_.size(), Subspace(dim_, p_));
    // walk the forced prefix, then split the first branching edge across workers
    std::size_t pos = 0;
    while (pos < order_.size()) {
      auto choices = choices_for(root, order_[pos]);
      if (choices.size() > 1) break;
      if (choices.empty() || !count_state() || !accept(root, pos, std::move(choices.front()))) {
        out.states_explored = states_.load();
        out.kind = aborted_.load() ? SearchOutcome::Kind::inconclusive : SearchOutcome::Kind::unsolvable;
        return out;
      }
      ++pos;
    }
    if (pos == order_.size()) {
      witness_ = root;
    } else {
      auto choices = choices_for(root, order_[pos]);
      std::atomic<std::size_t> next{0};
      auto work = [&] {
        for (;;) {
          auto i = next.fetch_add(1);
          if (i >= choices.size() || stop_.load()) return;
          State s = root;
          if (!count_state()) return;
          if (accept(s, pos, choices[i]) && dfs(s, pos + 1)) return;
        }
      };
      if (workers_ == 1) {
        work();
      } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers_; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
      }
    }
    out.states_explored = states_.load();
    if (witness_) {
      out.kind = SearchOutcome::Kind::solvable;
      out.code = reconstruct(*witness_);
    } else {
      out.kind = aborted_.load() ? SearchOutcome::Kind::inconclusive : SearchOutcome::Kind::unsolvable;
    }
    return out;
  }

private:
  using Row = Subspace::Row;
  using State = std::vector<Subspace>;  // assigned space per edge (indexed like net_.edges)

  struct EdgeInfo {
    std::size_t tail = 0, head = 0;
    std::optional<std::size_t> source_message;  // set when the tail is a source
    std::vector<std::size_t> parents;           // in-edges of the tail
    std::optional<std::size_t> terminal;        // index into terminals_ when the head is a terminal
    bool reaches_terminal = true;
  };
  struct TerminalInfo {
    std::size_t node = 0;
    std::size_t demand = 0;
    std::vector<std::size_t> in_edges;
    std::size_t last_in_order = 0;  // position in order_ after which all in-edges are assigned
  };

  void index() {
    std::map<std::string, std::size_t> node_ix, msg_ix, edge_ix;
    for (std::size_t i = 0; i < net_.nodes.size(); ++i) node_ix[net_.nodes[i].id] = i;
    for (std::size_t i = 0; i < net_.messages.size(); ++i) msg_ix[net_.messages[i]] = i;
    for (std::size_t i = 0; i < net_.edges.size(); ++i) edge_ix[net_.edges[i].id] = i;
    dim_ = net_.messages.size() * k_;
    edges_.resize(net_.edges.size());
    for (std::size_t i = 0; i < net_.edges.size(); ++i) {
      auto& info = edges_[i];
      info.tail = node_ix.at(net_.edges[i].tail);
      info.head = node_ix.at(net_.edges[i].head);
      const auto& tail = net_.nodes[info.tail];
      if (tail.role == Role::source) info.source_message = msg_ix.at(*tail.generates);
      for (const auto* in : net_.in_edges(tail.id)) info.parents.push_back(edge_ix.at(in->id));
    }
    for (std::size_t v = 0; v < net_.nodes.size(); ++v) {
      const auto& node = net_.nodes[v];
      if (node.role != Role::terminal) continue;
      TerminalInfo t{v, msg_ix.at(*node.demands), {}, 0};
      for (const auto* in : net_.in_edges(node.id)) t.in_edges.push_back(edge_ix.at(in->id));
      for (auto e : t.in_edges) edges_[e].terminal = terminals_.size();
      terminals_.push_back(std::move(t));
    }
    // shortest distance from each node to a terminal, for ordering and to skip dead branches
    const auto inf = std::numeric_limits<std::size_t>::max();
    dist_.assign(net_.nodes.size(), inf);
    for (const auto& t : terminals_) dist_[t.node] = 0;
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& e : edges_)
        if (dist_[e.head] != inf && dist_[e.head] + 1 < dist_[e.tail]) {
          dist_[e.tail] = dist_[e.head] + 1;
          changed = true;
        }
    }
    for (auto& e : edges_) e.reaches_terminal = dist_[e.head] != inf;
  }

  /// Topological edge order; among ready edges prefer those closest to a terminal so that terminal
  /// checks (and pruning) happen as early as possible. Ties by edge id.
  void order_edges() {
    std::vector<std::size_t> pending_in(net_.nodes.size(), 0);
    for (const auto& e : edges_) ++pending_in[e.head];
    std::vector<bool> done(edges_.size(), false);
    for (std::size_t step = 0; step < edges_.size(); ++step) {
      std::optional<std::size_t> best;
      for (std::size_t i = 0; i < edges_.size(); ++i) {
        if (done[i] || pending_in[edges_[i].tail] != 0) continue;
        if (!best || dist_[edges_[i].head] < dist_[edges_[*best].head]) best = i;
      }
      if (!best) throw Error("search: network has a cycle");
      done[*best] = true;
      --pending_in[edges_[*best].head];
      order_.push_back(*best);
    }
    for (auto& t : terminals_)
      for (auto e : t.in_edges)
        t.last_in_order = std::max(t.last_in_order,
                                   static_cast<std::size_t>(std::find(order_.begin(), order_.end(), e) - order_.begin()));
  }

  Row demand_row(std::size_t message, std::size_t component) const {
    Row r(dim_, 0);
    r[message * k_ + component] = 1;
    return r;
  }

  Subspace parent_span(const State& s, std::size_t e) const {
    Subspace span(dim_, p_);
    const auto& info = edges_[e];
    if (info.source_message)
      for (std::size_t c = 0; c < k_; ++c) span.insert(demand_row(*info.source_message, c));
    for (auto parent : info.parents) span.insert_all(s[parent]);
    return span;
  }

  /// Candidate spaces for edge e given the assigned prefix.
  std::vector<Subspace> choices_for(const State& s, std::size_t e) const {
    auto span = parent_span(s, e);
    const auto r = span.rank();
    const auto d = std::min(n_, r);
    const auto& info = edges_[e];
    // the whole span fits, or nothing downstream cares: a single dominant choice
    if (d == r || !info.reaches_terminal) return {span_prefix(span, d)};
    // a terminal fed by this edge alone: feasible iff its demand lies in the span
    if (info.terminal && terminals_[*info.terminal].in_edges.size() == 1) {
      const auto& t = terminals_[*info.terminal];
      Subspace chosen(dim_, p_);
      for (std::size_t c = 0; c < k_; ++c) {
        auto row = demand_row(t.demand, c);
        if (!span.contains(row)) return {};
        chosen.insert(row);
      }
      for (const auto& b : span.basis()) {
        if (chosen.rank() >= d) break;
        chosen.insert(b);
      }
      if (chosen.rank() > d) return {};
      return {std::move(chosen)};
    }
    std::vector<Subspace> out;
    for (SubspaceEnumerator it(r, d, p_); !it.done(); it.advance()) {
      Subspace sub(dim_, p_);
      for (const auto& coeffs : it.current()) {
        Row row(dim_, 0);
        for (std::size_t j = 0; j < r; ++j)
          if (coeffs[j])
            for (std::size_t c = 0; c < dim_; ++c) row[c] = p_.add(row[c], p_.mul(coeffs[j], span.basis()[j][c]));
        sub.insert(std::move(row));
      }
      out.push_back(std::move(sub));
    }
    return out;
  }

  Subspace span_prefix(const Subspace& span, std::size_t d) const {
    Subspace out(dim_, p_);
    for (std::size_t i = 0; i < d; ++i) out.insert(span.basis()[i]);
    return out;
  }

  bool count_state() {
    if (states_.fetch_add(1) + 1 > budget_) {
      states_.fetch_sub(1);
      aborted_.store(true);
      stop_.store(true);
      return false;
    }
    return true;
  }

  /// Assigns the edge at order position `pos` and checks a terminal whose in-edges are now complete.
  bool accept(State& s, std::size_t pos, Subspace space) const {
    const auto e = order_[pos];
    s[e] = std::move(space);
    const auto& info = edges_[e];
    if (!info.terminal) return true;
    const auto& t = terminals_[*info.terminal];
    if (t.last_in_order != pos) return true;
    Subspace span(dim_, p_);
    for (auto in : t.in_edges) span.insert_all(s[in]);
    for (std::size_t c = 0; c < k_; ++c)
      if (!span.contains(demand_row(t.demand, c))) return false;
    return true;
  }

  bool dfs(State& s, std::size_t pos) {
    if (stop_.load(std::memory_order_relaxed)) return false;
    if (pos == order_.size()) {
      std::lock_guard lock(mu_);
      if (!witness_) witness_ = s;
      stop_.store(true);
      return true;
    }
    for (auto& choice : choices_for(s, order_[pos])) {
      if (!count_state()) return false;
      if (!accept(s, pos, std::move(choice))) continue;
      if (dfs(s, pos + 1)) return true;
      if (stop_.load(std::memory_order_relaxed)) return false;
    }
    return false;
  }

  /// Turns an assignment of spaces into local coding matrices.
  FractionalCode reconstruct(const State& s) const {
    FractionalCode code;
    code.k = k_;
    code.n = n_;
    code.modulus = p_;
    // global matrix per edge: basis rows padded with zeros to n rows
    std::vector<FieldMatrix> global;
    for (const auto& space : s) {
      FieldMatrix g(n_, dim_, p_);
      for (std::size_t r = 0; r < space.rank(); ++r)
        for (std::size_t c = 0; c < dim_; ++c) g.set(r, c, space.basis()[r][c]);
      global.push_back(std::move(g));
    }
    // X with X * stack(parents) = target, split into per-parent blocks of width n
    auto combine = [&](const std::vector<std::size_t>& parents, const FieldMatrix& target) {
      std::vector<FieldMatrix> stack;
      for (auto e : parents) stack.push_back(global[e]);
      auto x = solve_right(vstack(stack).transposed(), target.transposed());
      if (!x) throw Error("search: witness reconstruction failed");
      auto xt = x->transposed();
      std::vector<FieldMatrix> blocks;
      for (std::size_t b = 0; b < parents.size(); ++b) {
        FieldMatrix block(xt.rows(), n_, p_);
        for (std::size_t r = 0; r < xt.rows(); ++r)
          for (std::size_t c = 0; c < n_; ++c) block.set(r, c, xt(r, b * n_ + c));
        blocks.push_back(std::move(block));
      }
      return blocks;
    };
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      auto& rule = code.edge_rules[net_.edges[e].id];
      const auto& info = edges_[e];
      if (info.source_message) {
        FieldMatrix a(n_, k_, p_);
        for (std::size_t r = 0; r < n_; ++r)
          for (std::size_t c = 0; c < k_; ++c) a.set(r, c, global[e](r, *info.source_message * k_ + c));
        rule.push_back({source_ref(net_.messages[*info.source_message]), std::move(a)});
        continue;
      }
      if (info.parents.empty()) continue;
      auto blocks = combine(info.parents, global[e]);
      for (std::size_t b = 0; b < info.parents.size(); ++b)
        if (!blocks[b].is_zero()) rule.push_back({net_.edges[info.parents[b]].id, std::move(blocks[b])});
    }
    for (const auto& t : terminals_) {
      FieldMatrix target(k_, dim_, p_);
      for (std::size_t c = 0; c < k_; ++c) target.set(c, t.demand * k_ + c, 1);
      auto blocks = combine(t.in_edges, target);
      auto& rule = code.decode_rules[net_.nodes[t.node].id];
      for (std::size_t b = 0; b < t.in_edges.size(); ++b)
        if (!blocks[b].is_zero()) rule.push_back({net_.edges[t.in_edges[b]].id, std::move(blocks[b])});
    }
    return code;
  }

  const CodedNetwork& net_;
  PrimeModulus p_;
  std::size_t k_, n_;
  std::uint64_t budget_;
  unsigned workers_;
  std::size_t dim_ = 0;
  std::vector<EdgeInfo> edges_;
  std::vector<TerminalInfo> terminals_;
  std::vector<std::size_t> dist_;
  std::vector<std::size_t> order_;

  std::atomic<std::uint64_t> states_{0};
  std::atomic<bool> stop_{false};
  std::atomic<bool> aborted_{false};
  std::mutex mu_;
  std::optional<State> witness_;
};

}  // namespace detail

/// (k,n) search; k = n = 1 is the scalar case.
inline SearchOutcome search_fractional(const CodedNetwork& net, std::size_t k, std::size_t n, const PrimeModulus& p,
                                       SearchConfig cfg = {}) {
  if (k < 1 || n < 1) throw Error("search: k and n must be positive");
  if (cfg.node_budget < 1) throw Error("search: node budget must be positive");
  if (!validate(net).ok()) throw Error("search: network '" + net.name + "' is not valid");
  cfg.k = k;
  cfg.n = n;
  auto outcome = detail::SearchEngine(net, p, cfg).run();
  if (outcome.code && !verify(net, *outcome.code).pass()) throw Error("search: reconstructed witness fails verification");
  return outcome;
}

inline SearchOutcome search_scalar(const CodedNetwork& net, const PrimeModulus& p, SearchConfig cfg = {}) {
  return search_fractional(net, 1, 1, p, cfg);
}

inline nlohmann::json outcome_to_json(const SearchOutcome& outcome) {
  nlohmann::json doc;
  doc["outcome"] = std::string(to_string(outcome.kind));
  doc["states"] = outcome.states_explored;
  if (outcome.code) doc["code"] = nlohmann::json::parse(save_code(*outcome.code));
  return doc;
}

}  // namespace ncchar
