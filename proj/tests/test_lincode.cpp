#include <gtest/gtest.h>

#include <random>

#include "ncchar/constructions.hpp"
#include "ncchar/lincode.hpp"
#include "ncchar/solutions.hpp"
#include "oracle.hpp"

using namespace ncchar;

namespace {

CodedNetwork pair_network() {
  CodedNetwork net;
  net.name = "pair";
  net.messages = {"x"};
  net.nodes = {{"s", Role::source, "x", std::nullopt}, {"t", Role::terminal, std::nullopt, "x"}};
  net.edges = {{"s->t", "s", "t"}};
  return net;
}

FractionalCode pair_code(std::uint32_t entry, PrimeModulus p = PrimeModulus(5)) {
  FractionalCode code;
  code.modulus = p;
  code.edge_rules["s->t"] = {{source_ref("x"), FieldMatrix({{entry}}, p)}};
  code.decode_rules["t"] = {{"s->t", FieldMatrix({{1}}, p)}};
  return code;
}

/// Code with random matrices on every available input, for property tests.
FractionalCode random_code(std::mt19937& rng, const CodedNetwork& net, std::size_t k, std::size_t n, PrimeModulus p) {
  std::uniform_int_distribution<std::uint32_t> dist(0, p.value() - 1);
  auto rnd = [&](std::size_t r, std::size_t c) {
    FieldMatrix m(r, c, p);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m.set(i, j, dist(rng));
    return m;
  };
  FractionalCode code;
  code.k = k;
  code.n = n;
  code.modulus = p;
  for (const auto& e : net.edges) {
    auto& rule = code.edge_rules[e.id];
    const auto* tail = net.find_node(e.tail);
    if (tail->generates) rule.push_back({source_ref(*tail->generates), rnd(n, k)});
    for (const auto* parent : net.in_edges(e.tail)) rule.push_back({parent->id, rnd(n, n)});
  }
  for (const auto* t : net.nodes_with_role(Role::terminal))
    for (const auto* in : net.in_edges(t->id)) code.decode_rules[t->id].push_back({in->id, rnd(k, n)});
  return code;
}

}  // namespace

TEST(Instantiate, InverseOfQ) {
  auto sym = solve_n2(2, 1);
  auto code = instantiate(sym, PrimeModulus(3));
  // q^{-1} = 2 in GF(3); e_b' reads the e_i heads with weight q^{-1}
  bool saw_inverse = false;
  for (const auto& in : code.edge_rules.at("ebp"))
    if (in.ref != default_edge_id(names::head("eb"), names::tail("ebp"))) {
      EXPECT_EQ(in.matrix(0, 0), 2u);
      saw_inverse = true;
    }
  EXPECT_TRUE(saw_inverse);
  EXPECT_THROW(instantiate(sym, PrimeModulus(2)), CharacteristicError);
}

TEST(Instantiate, MinusOneInCharacteristicTwo) {
  SymbolicCode sym;
  sym.edge_rules["e"] = {{"src:x", SymbolicMatrix::unit_column(1, 0, -1)}};
  auto code = instantiate(sym, PrimeModulus(2));
  EXPECT_EQ(code.edge_rules.at("e")[0].matrix(0, 0), 1u);
  EXPECT_EQ(instantiate(sym, PrimeModulus(7)).edge_rules.at("e")[0].matrix(0, 0), 6u);
}

TEST(Instantiate, UnusedInverseIsFine) {
  // p divides q, but nothing asks for q^{-1}
  EXPECT_NO_THROW(instantiate(solve_n1(2, 1), PrimeModulus(2)));
}

TEST(EvalTransfer, SingleSourceEdge) {
  auto y = eval_transfer(pair_network(), pair_code(1));
  EXPECT_EQ(y.at("s->t").at("x"), FieldMatrix({{1}}, PrimeModulus(5)));
}

TEST(EvalTransfer, AllZeroRules) {
  auto net = gen_n1(2, 1);
  FractionalCode code;
  code.modulus = PrimeModulus(3);
  for (const auto& e : net.edges) code.edge_rules[e.id];
  auto y = eval_transfer(net, code);
  ASSERT_EQ(y.size(), net.edges.size());
  for (const auto& [edge, blocks] : y)
    for (const auto& [msg, block] : blocks) EXPECT_TRUE(block.is_zero()) << edge << " " << msg;
}

TEST(EvalTransfer, SumOfAMessagesAtTheEnd) {
  auto net = gen_n1(2, 2);
  PrimeModulus p(2);
  auto y = eval_transfer(net, instantiate(solve_n1(2, 2), p));
  const auto& blocks = y.at("u13->u14");
  EXPECT_EQ(blocks.at("a1"), FieldMatrix::unit_column(2, 0, p));
  EXPECT_EQ(blocks.at("a2"), FieldMatrix::unit_column(2, 1, p));
  for (const char* m : {"b11", "b12", "c1", "c2"}) EXPECT_TRUE(blocks.at(m).is_zero()) << m;
}

TEST(EvalTransfer, ResidualCTermAtWrongCharacteristic) {
  auto net = gen_n1(2, 2);
  auto code = instantiate(solve_n1(2, 2), PrimeModulus(3));
  auto ref = oracle::transfer(net, code);
  // sum(a) - q * sum(c) with q = 2: the c blocks are -2 = 1 mod 3
  EXPECT_EQ(ref.at("u13->u14").at("c1"), (oracle::Mat{{1}, {0}}));
  EXPECT_EQ(ref.at("u13->u14").at("c2"), (oracle::Mat{{0}, {1}}));
  auto y = eval_transfer(net, code);
  for (const auto& [edge, blocks] : ref)
    for (const auto& [msg, block] : blocks) EXPECT_EQ(oracle::to_mat(y.at(edge).at(msg)), block) << edge << " " << msg;
}

TEST(EvalTransfer, RejectsMismatchedCodes) {
  auto net = pair_network();
  auto code = pair_code(1);
  code.edge_rules["s->t"][0].ref = "ghost";
  EXPECT_THROW(eval_transfer(net, code), CodeMismatchError);

  code = pair_code(1);
  code.edge_rules["s->t"][0].matrix = FieldMatrix(2, 1, PrimeModulus(5));
  EXPECT_THROW(eval_transfer(net, code), CodeMismatchError);

  code = pair_code(1);
  code.edge_rules.clear();
  EXPECT_THROW(eval_transfer(net, code), CodeMismatchError);

  code = pair_code(1);
  code.decode_rules["t"] = {{source_ref("x"), FieldMatrix({{1}}, PrimeModulus(5))}};
  EXPECT_THROW(verify(net, code), CodeMismatchError);

  code = pair_code(1);
  code.edge_rules["s->t"][0].matrix = FieldMatrix({{1}}, PrimeModulus(7));
  EXPECT_THROW(verify(net, code), CodeMismatchError);
}

TEST(Verify, FirstNetworkAtMatchingCharacteristic) {
  auto net = gen_n1(2, 2);
  auto report = verify(net, instantiate(solve_n1(2, 2), PrimeModulus(2)));
  EXPECT_TRUE(report.pass());
  EXPECT_EQ(report.terminals.size(), 8u);
}

TEST(Verify, FirstNetworkAtWrongCharacteristicFailsOnlyTa) {
  auto net = gen_n1(2, 2);
  auto code = instantiate(solve_n1(2, 2), PrimeModulus(3));
  auto expected = oracle::failing_terminals(net, code);
  EXPECT_EQ(expected, (std::set<std::string>{"Ta:a1", "Ta:a2"}));
  auto report = verify(net, code);
  EXPECT_FALSE(report.pass());
  auto failing = report.failing();
  EXPECT_EQ(std::set<std::string>(failing.begin(), failing.end()), expected);
  const auto* ta = report.find("Ta:a1");
  ASSERT_NE(ta, nullptr);
  EXPECT_TRUE(ta->demanded_block.is_identity());
  EXPECT_EQ(ta->interfering, (std::vector<std::string>{"c1"}));
}

TEST(Verify, NoTerminalsPassesVacuously) {
  CodedNetwork net;
  net.messages = {"x"};
  net.nodes = {{"s", Role::source, "x", std::nullopt}};
  EXPECT_TRUE(verify(net, FractionalCode{}).pass());
}

TEST(Verify, ReportIsSortedAndDetailed) {
  auto net = pair_network();
  auto report = verify(net, pair_code(3));
  ASSERT_EQ(report.terminals.size(), 1u);
  EXPECT_FALSE(report.terminals[0].pass);
  EXPECT_EQ(report.terminals[0].demanded_block, FieldMatrix({{3}}, PrimeModulus(5)));
  auto doc = report_to_json(report);
  EXPECT_EQ(doc["pass"], false);
}

TEST(Rate, Examples) {
  EXPECT_EQ(rate(1, 2), (Rational{1, 2}));
  EXPECT_EQ(rate(2, 4), (Rational{1, 2}));
  EXPECT_EQ(rate(3, 3), (Rational{1, 1}));
}

TEST(CodeFiles, RoundTrip) {
  auto code = instantiate(solve_n1(2, 2), PrimeModulus(2));
  auto text = save_code(code);
  auto back = load_code(text);
  EXPECT_EQ(back, code);
  EXPECT_EQ(save_code(back), text);
  EXPECT_EQ(load_code(text, gen_n1(2, 2)), code);
}

TEST(CodeFiles, EntryOutOfRange) {
  auto doc = nlohmann::json::parse(save_code(pair_code(1)));
  doc["edge_rules"][0]["inputs"][0]["matrix"][0][0] = 5;
  EXPECT_THROW(load_code(doc.dump()), ParseError);
  doc["edge_rules"][0]["inputs"][0]["matrix"][0][0] = -1;
  EXPECT_THROW(load_code(doc.dump()), ParseError);
}

TEST(CodeFiles, UnknownEdge) {
  auto doc = nlohmann::json::parse(save_code(pair_code(1)));
  doc["edge_rules"][0]["edge"] = "nowhere";
  EXPECT_NO_THROW(load_code(doc.dump()));
  EXPECT_THROW(load_code(doc.dump(), pair_network()), ParseError);
}

TEST(CodeFiles, TruncatedAndMalformed) {
  auto text = save_code(pair_code(1));
  EXPECT_THROW(load_code(text.substr(0, text.size() / 2)), ParseError);
  auto doc = nlohmann::json::parse(text);
  doc.erase("p");
  EXPECT_THROW(load_code(doc.dump()), ParseError);
  doc = nlohmann::json::parse(text);
  doc["p"] = 4;
  EXPECT_THROW(load_code(doc.dump()), ParseError);
  doc = nlohmann::json::parse(text);
  doc["edge_rules"][0]["inputs"][0]["matrix"] = {{1, 0}};
  EXPECT_THROW(load_code(doc.dump()), ParseError);
}

TEST(SymbolicFiles, RoundTripWithInverseMarker) {
  auto sym = solve_n2(3, 2);
  auto text = save_symbolic_code(sym);
  EXPECT_NE(text.find("\"INV_Q\""), std::string::npos);
  EXPECT_NE(text.find("\"-2*INV_Q\""), std::string::npos);
  auto back = load_symbolic_code(text);
  EXPECT_EQ(back, sym);
  EXPECT_EQ(save_symbolic_code(back), text);
  EXPECT_THROW(load_symbolic_code(R"({"k":1,"n":1,"q":2,"edge_rules":[{"edge":"e","inputs":[{"ref":"x","matrix":[["HALF"]]}]}],"decode_rules":[]})"),
               ParseError);
}

// Evaluating with reversed tie-breaks gives the same transfer map.
TEST(Properties, TopologicalOrderIndependence) {
  std::mt19937 rng(7);
  for (const auto& net : {gen_n1(2, 1), gen_n1(3, 2), gen_n2(2, 2), gen_n2(3, 1)})
    for (std::int64_t pv : {2, 5}) {
      auto code = random_code(rng, net, 2, 2, PrimeModulus(pv));
      EXPECT_EQ(eval_transfer(net, code, TieBreak::ascending), eval_transfer(net, code, TieBreak::descending));
      auto ref = oracle::transfer(net, code);
      auto y = eval_transfer(net, code);
      for (const auto& [edge, blocks] : ref)
        for (const auto& [msg, block] : blocks) ASSERT_EQ(oracle::to_mat(y.at(edge).at(msg)), block);
    }
}

// Scaling every decode rule of a passing terminal by c scales its decoded demand block by c.
TEST(Properties, DecodeLinearity) {
  PrimeModulus p(5);
  auto code = instantiate(solve_n2(2, 2), p);
  auto net2 = gen_n2(2, 2);
  auto base = decoded_blocks(net2, code, eval_transfer(net2, code), "Tb1:b11");
  for (std::int64_t c = 1; c < 5; ++c) {
    auto scaled = code;
    for (auto& in : scaled.decode_rules.at("Tb1:b11")) in.matrix = in.matrix.scaled(c);
    auto blocks = decoded_blocks(net2, scaled, eval_transfer(net2, scaled), "Tb1:b11");
    for (const auto& [msg, block] : base) EXPECT_EQ(blocks.at(msg), block.scaled(c)) << msg;
  }
}

TEST(Properties, PassingTerminalsDecodeInvertibleBlocks) {
  for (auto [q, n, pv] : {std::tuple{2, 2, 2}, {3, 1, 3}, {6, 2, 2}}) {
    auto net = gen_n1(q, n);
    auto report = verify(net, instantiate(solve_n1(q, n), PrimeModulus(pv)));
    ASSERT_TRUE(report.pass());
    for (const auto& t : report.terminals) EXPECT_EQ(rank(t.demanded_block), t.demanded_block.rows());
  }
}

// Messages that cannot reach an edge leave a zero block there, whatever the coefficients.
TEST(Properties, UnreachableMessagesContributeZero) {
  std::mt19937 rng(99);
  for (const auto& net : {gen_n1(2, 1), gen_n2(3, 1), gen_n1(3, 1)}) {
    // reachability: which messages have a path to each edge
    std::map<std::string, std::set<std::string>> reach;
    for (const auto& node_id : topological_order(net))
      for (const auto* e : net.out_edges(node_id)) {
        auto& r = reach[e->id];
        const auto* tail = net.find_node(e->tail);
        if (tail->generates) r.insert(*tail->generates);
        for (const auto* parent : net.in_edges(e->tail)) r.insert(reach[parent->id].begin(), reach[parent->id].end());
      }
    for (int trial = 0; trial < 5; ++trial) {
      auto y = eval_transfer(net, random_code(rng, net, 1, 2, PrimeModulus(3)));
      for (const auto& [edge, blocks] : y)
        for (const auto& [msg, block] : blocks)
          if (!reach[edge].count(msg)) EXPECT_TRUE(block.is_zero()) << edge << " " << msg;
    }
  }
}
