// ncchar: generate characteristic-dependent networks, build and verify their codes, search for
// linear solutions and apply the multiple-unicast gadget.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ncchar/constructions.hpp"
#include "ncchar/lincode.hpp"
#include "ncchar/network.hpp"
#include "ncchar/solutions.hpp"
#include "ncchar/solver.hpp"

namespace {

enum Exit : int {
  ok = 0,
  verification_failed = 1,
  impossible = 2,
  inconclusive = 3,
  usage = 64,
};

struct UsageError : ncchar::Error {
  using ncchar::Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

ncchar::CodedNetwork load_network_file(const std::string& path) {
  auto net = ncchar::load(read_file(path));
  auto report = ncchar::validate(net);
  if (!report.ok()) {
    std::string msg = path + ": invalid network";
    for (const auto& v : report.violations) msg += "\n  " + v.kind + ": " + v.detail;
    throw ncchar::ParseError(msg);
  }
  return net;
}

void log(const std::string& msg) { std::cerr << "ncchar: " << msg << "\n"; }

struct Options {
  bool json = false;

  std::string family = "n1";
  std::int64_t q = 2;
  std::int64_t n = 1;
  std::int64_t k = 1;
  std::int64_t copies = 1;
  std::int64_t p = 2;
  std::string network;
  std::string code;
  std::string out;
  std::uint64_t budget = 0;
  unsigned workers = 1;
  bool dot = false;
};

int cmd_gen(const Options& o) {
  ncchar::CodedNetwork net;
  if (o.family == "n1") net = ncchar::gen_n1(o.q, o.n);
  else if (o.family == "n2") net = ncchar::gen_n2(o.q, o.n);
  else if (o.family == "fano") net = ncchar::gen_fano();
  else if (o.family == "nonfano") net = ncchar::gen_nonfano();
  else throw UsageError("unknown family " + o.family);
  net = ncchar::union_copies(net, o.copies);
  write_output(o.out, ncchar::save(net));
  if (o.json && !o.out.empty() && o.out != "-")
    std::cout << nlohmann::json{{"network", net.name}, {"nodes", net.nodes.size()}, {"edges", net.edges.size()}}.dump()
              << "\n";
  else if (!o.out.empty() && o.out != "-")
    std::cout << "wrote " << net.name << " (" << net.nodes.size() << " nodes, " << net.edges.size() << " edges) to "
              << o.out << "\n";
  return ok;
}

int cmd_solve(const Options& o) {
  auto net = load_network_file(o.network);
  auto tag = ncchar::parse_construction_tag(net.name);
  if (!tag) throw UsageError("network '" + net.name + "' is not a recognized construction");
  if (!ncchar::structurally_equal(ncchar::build_from_tag(*tag), net))
    throw UsageError("network '" + net.name + "' does not match the construction its name describes");
  ncchar::PrimeModulus p(o.p);
  ncchar::FractionalCode code;
  try {
    code = ncchar::solve_construction(*tag, p);
  } catch (const ncchar::CharacteristicError& e) {
    if (o.json) std::cout << nlohmann::json{{"error", e.what()}, {"p", o.p}}.dump() << "\n";
    else std::cerr << "ncchar: " << e.what() << "\n";
    return impossible;
  }
  auto text = ncchar::save_code(code);
  write_output(o.out, text);
  if (!o.out.empty() && o.out != "-") {
    if (o.json)
      std::cout << nlohmann::json{{"network", net.name}, {"k", code.k}, {"n", code.n}, {"p", o.p}, {"out", o.out}}.dump()
                << "\n";
    else
      std::cout << "wrote (" << code.k << "," << code.n << ") code over GF(" << o.p << ") for " << net.name << " to "
                << o.out << "\n";
  }
  return ok;
}

int cmd_verify(const Options& o) {
  auto net = load_network_file(o.network);
  auto code = ncchar::load_code(read_file(o.code), net);
  auto report = ncchar::verify(net, code);
  if (o.json) {
    auto doc = ncchar::report_to_json(report);
    doc["network"] = net.name;
    doc["k"] = code.k;
    doc["n"] = code.n;
    doc["p"] = code.modulus.value();
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << net.name << " with a (" << code.k << "," << code.n << ") code over GF(" << code.modulus.value()
              << ")\n";
    std::cout << std::left << std::setw(22) << "terminal" << std::setw(12) << "demand" << std::setw(8) << "status"
              << "interfering\n";
    for (const auto& t : report.terminals) {
      std::string interfering;
      for (const auto& m : t.interfering) interfering += (interfering.empty() ? "" : ",") + m;
      std::cout << std::setw(22) << t.terminal << std::setw(12) << t.demand << std::setw(8) << (t.pass ? "ok" : "FAIL")
                << (interfering.empty() ? "-" : interfering) << "\n";
    }
    auto failing = report.failing();
    std::cout << (failing.empty() ? "all " + std::to_string(report.terminals.size()) + " terminals decode\n"
                                  : std::to_string(failing.size()) + " of " + std::to_string(report.terminals.size()) +
                                        " terminals fail\n");
  }
  return report.pass() ? ok : verification_failed;
}

int cmd_search(const Options& o) {
  auto net = load_network_file(o.network);
  ncchar::SearchConfig cfg;
  if (o.budget > 0) {
    cfg.node_budget = o.budget;
  } else if (const char* env = std::getenv("NCCHAR_BUDGET")) {
    try {
      cfg.node_budget = std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("NCCHAR_BUDGET is not a number: ") + env);
    }
  }
  cfg.worker_count = o.workers;
  cfg.enable_fractional = o.k != 1 || o.n != 1;
  if (o.k < 1 || o.n < 1) throw UsageError("--k and --n must be positive");
  ncchar::PrimeModulus p(o.p);
  log("searching " + net.name + " for a (" + std::to_string(o.k) + "," + std::to_string(o.n) + ") code over GF(" +
      std::to_string(o.p) + "), budget " + std::to_string(cfg.node_budget));
  auto outcome = ncchar::search_fractional(net, static_cast<std::size_t>(o.k), static_cast<std::size_t>(o.n), p, cfg);
  if (outcome.code && !o.out.empty()) write_output(o.out, ncchar::save_code(*outcome.code));
  if (o.json) {
    std::cout << ncchar::outcome_to_json(outcome).dump(2) << "\n";
  } else {
    std::cout << net.name << " over GF(" << o.p << "), (" << o.k << "," << o.n
              << "): " << ncchar::to_string(outcome.kind) << " after " << outcome.states_explored << " states\n";
  }
  switch (outcome.kind) {
    case ncchar::SearchOutcome::Kind::solvable: return ok;
    case ncchar::SearchOutcome::Kind::unsolvable: return impossible;
    case ncchar::SearchOutcome::Kind::inconclusive: return inconclusive;
  }
  return inconclusive;
}

int cmd_gadget(const Options& o) {
  auto net = load_network_file(o.network);
  ncchar::GadgetResult result;
  try {
    result = ncchar::gadget_transform_traced(net, o.n);
  } catch (const ncchar::Error& e) {
    throw UsageError(e.what());
  }
  write_output(o.out, ncchar::save(result.network));
  auto unicast = ncchar::is_multiple_unicast(result.network);
  if (o.json) {
    std::cout << nlohmann::json{{"network", result.network.name},
                                {"applications", result.applications.size()},
                                {"multiple_unicast", unicast.multiple_unicast}}
                     .dump()
              << "\n";
  } else {
    std::cout << result.applications.size() << " gadget application(s); multiple-unicast: "
              << (unicast.multiple_unicast ? "yes" : "no") << "\n";
  }
  return ok;
}

int cmd_union(const Options& o) {
  auto net = ncchar::union_copies(load_network_file(o.network), o.copies);
  write_output(o.out, ncchar::save(net));
  if (!o.out.empty() && o.out != "-")
    std::cout << (o.json ? nlohmann::json{{"network", net.name}}.dump() : "wrote " + net.name) << "\n";
  return ok;
}

int cmd_info(const Options& o) {
  auto net = ncchar::load(read_file(o.network));
  if (o.dot) {
    std::cout << ncchar::to_dot(net);
    return ok;
  }
  auto report = ncchar::validate(net);
  auto unicast = ncchar::is_multiple_unicast(net);
  auto tag = ncchar::parse_construction_tag(net.name);
  nlohmann::json doc{{"name", net.name},
                     {"messages", net.messages.size()},
                     {"sources", net.nodes_with_role(ncchar::Role::source).size()},
                     {"terminals", net.nodes_with_role(ncchar::Role::terminal).size()},
                     {"intermediates", net.nodes_with_role(ncchar::Role::intermediate).size()},
                     {"edges", net.edges.size()},
                     {"valid", report.ok()},
                     {"multiple_unicast", unicast.multiple_unicast},
                     {"non_unicast_messages", unicast.violating_messages},
                     {"construction", tag != nullptr}};
  doc["violations"] = nlohmann::json::array();
  for (const auto& v : report.violations) doc["violations"].push_back({{"kind", v.kind}, {"detail", v.detail}});
  if (o.json) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << net.name << "\n"
              << "  messages      " << net.messages.size() << "\n"
              << "  sources       " << doc["sources"] << "\n"
              << "  intermediates " << doc["intermediates"] << "\n"
              << "  terminals     " << doc["terminals"] << "\n"
              << "  edges         " << net.edges.size() << "\n"
              << "  valid         " << (report.ok() ? "yes" : "no") << "\n"
              << "  multi-unicast " << (unicast.multiple_unicast ? "yes" : "no") << "\n";
    for (const auto& v : report.violations) std::cout << "  violation: " << v.kind << ": " << v.detail << "\n";
  }
  return report.ok() ? ok : usage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Characteristic-dependent network coding toolkit"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("--json", o.json, "Print a single JSON document on stdout");

  auto* gen = app.add_subcommand("gen", "Generate a network");
  gen->add_option("--family", o.family, "n1, n2, fano or nonfano")
      ->check(CLI::IsMember({"n1", "n2", "fano", "nonfano"}));
  gen->add_option("--q", o.q, "Construction parameter q >= 2");
  gen->add_option("--n", o.n, "Block length n >= 1");
  gen->add_option("--copies", o.copies, "Join this many copies at sources and terminals");
  gen->add_option("--out,-o", o.out, "Output file (default stdout)");

  auto* solve = app.add_subcommand("solve", "Write the explicit code for a generated network");
  solve->add_option("network", o.network)->required();
  solve->add_option("--p", o.p, "Field characteristic")->required();
  solve->add_option("--out,-o", o.out, "Output code file (default stdout)");

  auto* verify = app.add_subcommand("verify", "Check that every terminal decodes its demand");
  verify->add_option("network", o.network)->required();
  verify->add_option("code", o.code)->required();

  auto* search = app.add_subcommand("search", "Exhaustively search for a linear solution");
  search->add_option("network", o.network)->required();
  search->add_option("--p", o.p, "Field characteristic")->required();
  search->add_option("--k", o.k, "Source symbols per generation");
  search->add_option("--n", o.n, "Edge symbols per generation");
  search->add_option("--budget", o.budget, "Maximum search states (default 1e9 or $NCCHAR_BUDGET)");
  search->add_option("--workers", o.workers, "Worker threads");
  search->add_option("--out,-o", o.out, "Write the witness code here when one is found");

  auto* gadget = app.add_subcommand("gadget", "Make a network multiple-unicast");
  gadget->add_option("network", o.network)->required();
  gadget->add_option("--n", o.n, "Block length of the gadget")->required();
  gadget->add_option("--out,-o", o.out, "Output file (default stdout)");

  auto* uni = app.add_subcommand("union", "Join copies of a network at sources and terminals");
  uni->add_option("network", o.network)->required();
  uni->add_option("--k", o.copies, "Number of copies")->required();
  uni->add_option("--out,-o", o.out, "Output file (default stdout)");

  auto* info = app.add_subcommand("info", "Summarize and validate a network");
  info->add_option("network", o.network)->required();
  info->add_flag("--dot", o.dot, "Print Graphviz DOT instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*solve) return cmd_solve(o);
    if (*verify) return cmd_verify(o);
    if (*search) return cmd_search(o);
    if (*gadget) return cmd_gadget(o);
    if (*uni) return cmd_union(o);
    if (*info) return cmd_info(o);
  } catch (const UsageError& e) {
    log(e.what());
    return usage;
  } catch (const ncchar::ParseError& e) {
    log(e.what());
    return usage;
  } catch (const ncchar::CodeMismatchError& e) {
    log(e.what());
    return usage;
  } catch (const ncchar::Error& e) {
    log(e.what());
    return usage;
  }
  return usage;
}
