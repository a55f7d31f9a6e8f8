#include <gtest/gtest.h>

#include "ncchar/solutions.hpp"
#include "oracle.hpp"

using namespace ncchar;

namespace {

const std::vector<std::int64_t> kPrimes{2, 3, 5, 7};

std::set<std::string> terminals_with_prefix(const CodedNetwork& net, const std::string& prefix) {
  std::set<std::string> out;
  for (const auto* t : net.nodes_with_role(Role::terminal))
    if (t->id.rfind(prefix, 0) == 0) out.insert(t->id);
  return out;
}

std::set<std::string> failing(const VerificationReport& r) {
  auto f = r.failing();
  return {f.begin(), f.end()};
}

}  // namespace

TEST(SolveFirst, VerifiesWhenCharacteristicDividesQ) {
  EXPECT_TRUE(verify(gen_n1(2, 2), instantiate(solve_n1(2, 2), PrimeModulus(2))).pass());
  EXPECT_TRUE(verify(gen_n1(6, 1), instantiate(solve_n1(6, 1), PrimeModulus(3))).pass());
  EXPECT_TRUE(verify(gen_n1(6, 1), instantiate(solve_n1(6, 1), PrimeModulus(2))).pass());
}

TEST(SolveFirst, EntriesAreSmall) {
  auto sym = solve_n1(3, 2);
  EXPECT_FALSE(sym.uses_inv_q());
  for (const auto* rules : {&sym.edge_rules, &sym.decode_rules})
    for (const auto& [id, inputs] : *rules)
      for (const auto& in : inputs)
        for (const auto& e : in.matrix.entries) EXPECT_TRUE(e.coeff >= -1 && e.coeff <= 1) << id;
}

TEST(SolveFirst, WrongCharacteristicFailsOnlyTa) {
  auto net = gen_n1(2, 1);
  auto code = instantiate(solve_n1(2, 1), PrimeModulus(3));
  EXPECT_EQ(oracle::failing_terminals(net, code), (std::set<std::string>{"Ta:a1"}));
  EXPECT_EQ(failing(verify(net, code)), (std::set<std::string>{"Ta:a1"}));
}

TEST(SolveFirst, GridAtEveryAdmissiblePrime) {
  for (std::int64_t q : {2, 3, 6})
    for (std::int64_t n : {1, 2, 3}) {
      auto net = gen_n1(q, n);
      auto sym = solve_n1(q, n);
      for (auto p : kPrimes) {
        auto code = instantiate(sym, PrimeModulus(p));
        auto report = verify(net, code);
        EXPECT_EQ(failing(report), oracle::failing_terminals(net, code)) << net.name << " p=" << p;
        if (q % p == 0) {
          EXPECT_TRUE(report.pass()) << net.name << " p=" << p;
          EXPECT_EQ(report.terminals.size(), static_cast<std::size_t>(2 * q * n));
        } else {
          EXPECT_EQ(failing(report), terminals_with_prefix(net, "Ta:")) << net.name << " p=" << p;
        }
      }
    }
}

TEST(SolveSecond, VerifiesWhenCharacteristicDoesNotDivideQ) {
  EXPECT_TRUE(verify(gen_n2(2, 1), instantiate(solve_n2(2, 1), PrimeModulus(3))).pass());
  EXPECT_TRUE(verify(gen_n2(2, 2), instantiate(solve_n2(2, 2), PrimeModulus(5))).pass());
  EXPECT_THROW(instantiate(solve_n2(2, 1), PrimeModulus(2)), CharacteristicError);
}

TEST(SolveSecond, UsesInverseOnlyOnEbPrime) {
  auto sym = solve_n2(3, 1);
  EXPECT_TRUE(sym.uses_inv_q());
  for (const auto& [id, inputs] : sym.edge_rules)
    for (const auto& in : inputs)
      if (in.matrix.uses_inv_q()) EXPECT_EQ(id, "ebp");
}

TEST(SolveSecond, GridAtEveryAdmissiblePrime) {
  for (std::int64_t q : {2, 3, 6})
    for (std::int64_t n : {1, 2, 3}) {
      auto net = gen_n2(q, n);
      auto sym = solve_n2(q, n);
      for (auto p : kPrimes) {
        if (q % p == 0) {
          EXPECT_THROW(instantiate(sym, PrimeModulus(p)), CharacteristicError);
          continue;
        }
        auto code = instantiate(sym, PrimeModulus(p));
        auto report = verify(net, code);
        EXPECT_TRUE(report.pass()) << net.name << " p=" << p;
        EXPECT_TRUE(oracle::failing_terminals(net, code).empty());
        EXPECT_EQ(report.terminals.size(), static_cast<std::size_t>(n * (q + 2)));
      }
    }
}

TEST(LiftUnion, FirstNetworkTwoCopies) {
  auto net = union_copies(gen_n1(2, 2), 2);
  auto code = instantiate(lift_union(solve_n1(2, 2), 2), PrimeModulus(2));
  EXPECT_EQ(code.k, 2u);
  EXPECT_EQ(code.n, 2u);
  EXPECT_TRUE(verify(net, code).pass());
  EXPECT_TRUE(oracle::failing_terminals(net, code).empty());
}

TEST(LiftUnion, SingleCopyIsIdentity) {
  auto sym = solve_n2(3, 2);
  EXPECT_EQ(lift_union(sym, 1), sym);
  EXPECT_THROW(lift_union(sym, 0), Error);
}

TEST(LiftUnion, SecondNetworkThreeCopies) {
  auto net = union_copies(gen_n2(2, 1), 3);
  auto code = instantiate(lift_union(solve_n2(2, 1), 3), PrimeModulus(3));
  EXPECT_TRUE(verify(net, code).pass());
}

// A merged terminal passes iff the corresponding base terminal passes.
TEST(LiftUnion, PreservesPerTerminalStatus) {
  for (std::int64_t k : {2, 3})
    for (std::int64_t p : {2, 3, 5}) {
      auto base = verify(gen_n1(2, 2), instantiate(solve_n1(2, 2), PrimeModulus(p)));
      auto lifted = verify(union_copies(gen_n1(2, 2), k), instantiate(lift_union(solve_n1(2, 2), k), PrimeModulus(p)));
      ASSERT_EQ(base.terminals.size(), lifted.terminals.size());
      for (std::size_t i = 0; i < base.terminals.size(); ++i) {
        EXPECT_EQ(base.terminals[i].terminal, lifted.terminals[i].terminal);
        EXPECT_EQ(base.terminals[i].pass, lifted.terminals[i].pass) << base.terminals[i].terminal << " p=" << p;
      }
    }
}

TEST(LiftGadget, FirstNetwork) {
  auto base = gen_n1(2, 1);
  auto gadgeted = gadget_transform(base, 1);
  auto code = instantiate(lift_gadget(solve_n1(2, 1), base, gadgeted), PrimeModulus(2));
  EXPECT_TRUE(verify(gadgeted, code).pass());
  EXPECT_TRUE(oracle::failing_terminals(gadgeted, code).empty());
}

TEST(LiftGadget, SecondNetwork) {
  auto base = gen_n2(2, 1);
  auto gadgeted = gadget_transform(base, 1);
  auto code = instantiate(lift_gadget(solve_n2(2, 1), base, gadgeted), PrimeModulus(3));
  EXPECT_TRUE(verify(gadgeted, code).pass());
}

TEST(LiftGadget, LargerBlocksAndRepeatedApplications) {
  for (std::int64_t n : {1, 2, 3}) {
    for (auto [q, p] : {std::pair{2, 2}, {3, 3}, {6, 2}}) {
      auto base = gen_n1(q, n);
      auto gadgeted = gadget_transform(base, n);
      auto code = instantiate(lift_gadget(solve_n1(q, n), base, gadgeted), PrimeModulus(p));
      EXPECT_TRUE(verify(gadgeted, code).pass()) << gadgeted.name << " p=" << p;
    }
    auto base = gen_n2(3, n);
    auto gadgeted = gadget_transform(base, n);
    auto code = instantiate(lift_gadget(solve_n2(3, n), base, gadgeted), PrimeModulus(5));
    EXPECT_TRUE(verify(gadgeted, code).pass()) << gadgeted.name;
  }
}

TEST(LiftGadget, GadgetFreeBaseIsIdentity) {
  CodedNetwork net;
  net.name = "pair";
  net.messages = {"x"};
  net.nodes = {{"s", Role::source, "x", std::nullopt}, {"t", Role::terminal, std::nullopt, "x"}};
  net.edges = {{"s->t", "s", "t"}};
  SymbolicCode sym;
  sym.edge_rules["s->t"] = {{source_ref("x"), SymbolicMatrix::unit_column(1, 0)}};
  sym.decode_rules["t"] = {{"s->t", SymbolicMatrix::unit_row(1, 0)}};
  EXPECT_EQ(lift_gadget(sym, net, gadget_transform(net, 1)), sym);
}

TEST(LiftGadget, StructuralMismatch) {
  auto base = gen_n1(2, 1);
  EXPECT_THROW(lift_gadget(solve_n1(2, 1), base, gadget_transform(gen_n1(3, 1), 1)), Error);
  EXPECT_THROW(lift_gadget(solve_n1(2, 1), base, base), Error);
}

TEST(SolveConstruction, DispatchesOnTags) {
  auto tag = parse_construction_tag("union(gadget(n2(q=3,n=1),n=1),k=2)");
  ASSERT_TRUE(tag);
  auto net = build_from_tag(*tag);
  EXPECT_TRUE(verify(net, solve_construction(*tag, PrimeModulus(2))).pass());
  EXPECT_THROW(solve_construction(*tag, PrimeModulus(3)), CharacteristicError);

  auto n1 = parse_construction_tag("n1(q=6,n=1)");
  try {
    solve_construction(*n1, PrimeModulus(5));
    FAIL() << "expected CharacteristicError";
  } catch (const CharacteristicError& e) {
    EXPECT_NE(std::string(e.what()).find("does not divide"), std::string::npos);
  }
}
