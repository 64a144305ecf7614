#include <doctest.h>

#include <set>

#include "specleak/ifg/ifg.hpp"
#include "specleak/netlist/parser.hpp"
#include "specleak/util.hpp"
#include "support/fixtures.hpp"

using namespace specleak;

namespace {

ifg::Ifg graph_of(const std::string& src) { return ifg::build_ifg(netlist::elaborate(netlist::parse_design(src))); }

std::set<std::pair<std::string, std::string>> edge_names(const ifg::Ifg& g) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& e : g.edges()) out.emplace(g.vertex(e.src).name, g.vertex(e.dst).name);
  return out;
}

} // namespace

TEST_SUITE("ifg") {

TEST_CASE("listing 1 graph has the ten vertices and eight edges") {
  const ifg::Ifg g = graph_of(read_text_file(testsupport::fixture("listing1.ntl")));
  CHECK(g.size() == 10);
  const std::set<std::pair<std::string, std::string>> expected = {
      {"top.clk", "top.df1.clk"}, {"top.clk", "top.df2.clk"}, {"top.i", "top.df1.d"},
      {"top.df1.d", "top.df1.q"}, {"top.df1.q", "top.q1"},    {"top.q1", "top.df2.d"},
      {"top.df2.d", "top.df2.q"}, {"top.df2.q", "top.o"},
  };
  CHECK(edge_names(g) == expected);
}

TEST_CASE("single assignment gives a single edge") {
  const ifg::Ifg g = graph_of("module m(input clk, input i, output o); assign o = i; endmodule");
  CHECK(g.size() == 3);
  CHECK(edge_names(g) == std::set<std::pair<std::string, std::string>>{{"m.i", "m.o"}});
}

TEST_CASE("mux condition flows to the result") {
  const ifg::Ifg g = graph_of("module m(input s, input a, input b, output o); assign o = s ? a : b; endmodule");
  CHECK(edge_names(g) ==
        std::set<std::pair<std::string, std::string>>{{"m.s", "m.o"}, {"m.a", "m.o"}, {"m.b", "m.o"}});
}

TEST_CASE("memory ports produce memory flows") {
  const std::string src = R"(
module m(input clk, input we, input [1:0] wa, input [7:0] wd, input [1:0] ra, output [7:0] rd);
  reg [7:0] mem [0:3];
  always @(posedge clk) if (we) mem[wa] <= wd;
  assign rd = mem[ra];
endmodule
)";
  const ifg::Ifg g = graph_of(src);
  const auto e = edge_names(g);
  for (const char* s : {"m.we", "m.wa", "m.wd"}) CHECK(e.count({s, "m.mem"}) == 1);
  CHECK(e.count({"m.mem", "m.rd"}) == 1);
  CHECK(e.count({"m.ra", "m.rd"}) == 1);
  CHECK(g.edges().size() == 5);
}

TEST_CASE("constants produce no edges and no self loops appear") {
  const std::string src = R"(
module m(input clk, input i, output [3:0] o);
  reg [3:0] c = 4'h0;
  always @(posedge clk) c <= c + 4'h1;
  assign o = c;
endmodule
)";
  const ifg::Ifg g = graph_of(src);
  CHECK(edge_names(g) == std::set<std::pair<std::string, std::string>>{{"m.c", "m.o"}});
}

TEST_CASE("export and import round trip") {
  const ifg::Ifg g = graph_of(read_text_file(testsupport::fixture("listing1.ntl")));
  const std::string text = ifg::export_ifg(g);
  const ifg::Ifg back = ifg::import_ifg(text);
  CHECK(back == g);
  CHECK(ifg::export_ifg(back) == text);
}

TEST_CASE("ports-only design exports vertices and no edges") {
  const ifg::Ifg g = graph_of("module m(input a, input b); endmodule");
  CHECK(g.size() == 2);
  CHECK(g.edges().empty());
  CHECK(ifg::import_ifg(ifg::export_ifg(g)) == g);
}

TEST_CASE("adding an assignment never removes edges") {
  const ifg::Ifg small = graph_of("module m(input a, input b, output o, output p); assign o = a; assign p = b; endmodule");
  const ifg::Ifg big = graph_of("module m(input a, input b, output o, output p); assign o = a; assign p = b ^ a; endmodule");
  const auto s = edge_names(small);
  const auto b = edge_names(big);
  CHECK(std::includes(b.begin(), b.end(), s.begin(), s.end()));
}

}
