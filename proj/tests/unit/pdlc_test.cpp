#include <doctest.h>

#include <random>
#include <set>

#include "specleak/error.hpp"
#include "specleak/netlist/parser.hpp"
#include "specleak/pdlc/pdlc.hpp"
#include "specleak/util.hpp"
#include "support/fixtures.hpp"
#include "support/graph_oracle.hpp"

using namespace specleak;
using ifg::Provenance;
using netlist::SignalKind;

namespace {

ifg::Ifg listing1_graph() {
  return ifg::build_ifg(netlist::elaborate(netlist::parse_design(read_text_file(testsupport::fixture("listing1.ntl")))));
}

ifg::Ifg small_graph(const std::vector<std::pair<std::string, SignalKind>>& vs,
                     const std::vector<std::pair<std::string, std::string>>& es) {
  std::vector<ifg::Vertex> vertices;
  for (const auto& [n, k] : vs) vertices.push_back({n, 1, k});
  std::vector<std::tuple<std::string, std::string, Provenance>> edges;
  for (const auto& [a, b] : es) edges.emplace_back(a, b, Provenance::Assignment);
  return ifg::Ifg::from_parts(vertices, edges);
}

std::set<std::vector<std::string>> chains(const pdlc::PdlcResult& r) {
  std::set<std::vector<std::string>> out;
  for (const auto& p : r.paths) out.insert(p.chain);
  return out;
}

} // namespace

TEST_SUITE("pdlc") {

TEST_CASE("classification of listing 1") {
  const ifg::Ifg g = listing1_graph();
  pdlc::RegisterManifest m;
  m.arch_patterns = {"top.q1"};
  const auto c = pdlc::classify_registers(g, m);
  REQUIRE(c.arch.size() == 1);
  CHECK(g.vertex(c.arch[0]).name == "top.q1");
  std::set<std::string> micro;
  for (auto v : c.micro) micro.insert(g.vertex(v).name);
  CHECK(micro == std::set<std::string>{"top.df1.q", "top.df2.q"});

  m.arch_patterns = {"top.o"};
  CHECK_THROWS_AS(pdlc::classify_registers(g, m), ConfigError);
}

TEST_CASE("empty manifest leaves every register microarchitectural") {
  const ifg::Ifg g = listing1_graph();
  const auto c = pdlc::classify_registers(g, {});
  CHECK(c.arch.empty());
  CHECK(c.micro.size() == 3);
  const auto r = pdlc::extract_pdlc(g, c.arch, c.micro);
  CHECK(r.paths.empty());
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("zero-match pattern is a warning") {
  pdlc::RegisterManifest m;
  m.arch_patterns = {"top.nothing*"};
  const auto c = pdlc::classify_registers(listing1_graph(), m);
  CHECK(c.warnings.size() == 1);
}

TEST_CASE("listing 1 has exactly one channel into q1") {
  const ifg::Ifg g = listing1_graph();
  const auto a = *g.find("top.q1");
  const auto r = pdlc::extract_pdlc(g, {a}, {*g.find("top.df1.q"), *g.find("top.df2.q")});
  REQUIRE(r.paths.size() == 1);
  CHECK(r.paths[0].chain == std::vector<std::string>{"top.df1.q", "top.q1"});
  CHECK(!r.truncated);
}

TEST_CASE("single chain and diamond") {
  const auto line = small_graph({{"u", SignalKind::Reg}, {"w", SignalKind::Wire}, {"a", SignalKind::Reg}},
                                {{"u", "w"}, {"w", "a"}});
  const auto r1 = pdlc::extract_pdlc(line, {*line.find("a")}, {*line.find("u")});
  REQUIRE(r1.paths.size() == 1);
  CHECK(r1.paths[0].chain == std::vector<std::string>{"u", "w", "a"});

  const auto diamond = small_graph(
      {{"u", SignalKind::Reg}, {"x", SignalKind::Wire}, {"y", SignalKind::Wire}, {"a", SignalKind::Reg}},
      {{"u", "x"}, {"u", "y"}, {"x", "a"}, {"y", "a"}});
  testsupport::LabeledGraph lg{diamond, {*diamond.find("a")}, {*diamond.find("u")}};
  const auto r2 = pdlc::extract_pdlc(diamond, lg.arch, lg.micro);
  CHECK(r2.paths.size() == 2);
  CHECK(chains(r2) == testsupport::forward_paths(lg));
}

TEST_CASE("paths stop at the first architectural register") {
  const auto g = small_graph({{"u", SignalKind::Reg}, {"a", SignalKind::Reg}, {"w", SignalKind::Wire}, {"b", SignalKind::Reg}},
                             {{"u", "a"}, {"a", "w"}, {"w", "b"}});
  const auto r = pdlc::extract_pdlc(g, {*g.find("a"), *g.find("b")}, {*g.find("u")});
  CHECK(chains(r) == std::set<std::vector<std::string>>{{"u", "a"}});
}

TEST_CASE("limits are reported as truncation") {
  const auto g = small_graph({{"u", SignalKind::Reg}, {"w1", SignalKind::Wire}, {"w2", SignalKind::Wire}, {"a", SignalKind::Reg}},
                             {{"u", "w1"}, {"w1", "w2"}, {"w2", "a"}, {"u", "a"}});
  const auto r = pdlc::extract_pdlc(g, {*g.find("a")}, {*g.find("u")}, {3, 100});
  CHECK(r.truncated);
  CHECK(chains(r) == std::set<std::vector<std::string>>{{"u", "a"}});
  const auto r2 = pdlc::extract_pdlc(g, {*g.find("a")}, {*g.find("u")}, {32, 1});
  CHECK(r2.truncated);
  CHECK(r2.paths.size() == 1);
}

TEST_CASE("reverse search equals forward enumeration on random DAGs") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto lg = testsupport::random_dag(rng, 200, 600);
    const auto r = pdlc::extract_pdlc(lg.graph, lg.arch, lg.micro, {lg.graph.size() + 1, 10'000'000});
    if (lg.arch.empty()) continue;
    CHECK(!r.truncated);
    CHECK(chains(r) == testsupport::forward_paths(lg));
    for (const auto& p : r.paths) {
      for (std::size_t k = 0; k + 1 < p.chain.size(); ++k) {
        CHECK(lg.graph.has_edge(*lg.graph.find(p.chain[k]), *lg.graph.find(p.chain[k + 1])));
      }
    }
  }
}

TEST_CASE("export and import round trip; output is deterministic") {
  std::mt19937_64 rng(11);
  const auto lg = testsupport::random_dag(rng, 60, 200);
  const auto a = pdlc::extract_pdlc(lg.graph, lg.arch, lg.micro);
  const auto b = pdlc::extract_pdlc(lg.graph, lg.arch, lg.micro);
  CHECK(pdlc::export_pdlc(a) == pdlc::export_pdlc(b));
  CHECK(pdlc::export_pdlc(pdlc::import_pdlc(pdlc::export_pdlc(a))) == pdlc::export_pdlc(a));
}

}
