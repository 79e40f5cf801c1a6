#include "twinforge/plc.hpp"

#include "twinforge/knowledge_graph.hpp"

#include <doctest.h>

#include <algorithm>
#include <string>

using namespace twinforge;
using namespace twinforge::plc;

namespace {

// 4-row warehouse: 16 light-barrier inputs, 8 motor outputs, 4 row FBs and
// one coordinator. Known counts throughout.
PlcProject warehouse_fixture() {
    PlcProject p;
    p.name = "warehouse";
    p.hardware_modules = {{"cpu1", ModuleKind::CPU},
                          {"di1", ModuleKind::DI},
                          {"di2", ModuleKind::DI},
                          {"do1", ModuleKind::DO}};
    FunctionBlock main_fb;
    main_fb.name = "fb_main";
    int input = 0, output = 0;
    for (int r = 1; r <= 4; ++r) {
        std::string row = "R" + std::to_string(r);
        FunctionBlock fb;
        fb.name = "fb_" + row;
        for (int k = 1; k <= 4; ++k) {
            std::string name = row + ".lb" + std::to_string(k);
            p.signals.push_back({name,
                                 "%I" + std::to_string(input / 8) + "." + std::to_string(input % 8),
                                 SignalDirection::in, DataType::BOOL, r <= 2 ? "di1" : "di2"});
            ++input;
            fb.reads.push_back(name);
        }
        for (const char* motor : {"m_in", "m_out"}) {
            std::string name = row + "." + motor;
            p.signals.push_back({name,
                                 "%Q" + std::to_string(output / 8) + "." + std::to_string(output % 8),
                                 SignalDirection::out, DataType::BOOL, "do1"});
            ++output;
            fb.writes.push_back(name);
        }
        main_fb.calls.push_back(fb.name);
        p.function_blocks.push_back(std::move(fb));
    }
    p.function_blocks.push_back(std::move(main_fb));
    return p;
}

}  // namespace

TEST_CASE("minimal export: one signal, no blocks") {
    const std::string xml = R"(<?xml version="1.0" encoding="UTF-8"?>
<PlcProject name="mini">
  <Hardware><Module id="cpu1" type="CPU"/><Module id="di1" type="DI"/></Hardware>
  <Signals><Signal name="lb1" address="%I0.0" direction="in" datatype="BOOL" module="di1"/></Signals>
  <Blocks></Blocks>
</PlcProject>
)";
    PlcProject p = parse_plc_export(xml);
    CHECK(p.name == "mini");
    REQUIRE(p.signals.size() == 1);
    CHECK(p.signals[0].name == "lb1");
    CHECK(p.signals[0].direction == SignalDirection::in);
    CHECK(p.function_blocks.empty());
}

TEST_CASE("dangling references are collected exhaustively") {
    const std::string xml = R"(<PlcProject name="broken">
  <Hardware><Module id="di1" type="DI"/></Hardware>
  <Signals><Signal name="lb1" address="%I0.0" direction="in" datatype="BOOL" module="di1"/></Signals>
  <Blocks>
    <FunctionBlock name="fb1"><Reads signal="X"/><Reads signal="lb1"/><Writes signal="Y"/><Calls block="fb_ghost"/></FunctionBlock>
  </Blocks>
</PlcProject>
)";
    try {
        parse_plc_export(xml);
        FAIL("expected DanglingReference");
    } catch (const DanglingReference& e) {
        REQUIRE(e.names.size() == 3);
        CHECK(e.names[0] == "X");
        CHECK(e.names[1] == "Y");
        CHECK(e.names[2] == "fb_ghost");
    }
}

TEST_CASE("schema violations name the offending path") {
    CHECK_THROWS_AS(parse_plc_export(std::string("<nope/>")), SchemaViolation);
    CHECK_THROWS_AS(parse_plc_export(std::string("not xml at all")), SchemaViolation);
    CHECK_THROWS_AS(parse_plc_export(std::string(
                        R"(<PlcProject name="p"><Hardware><Module id="m" type="XX"/></Hardware></PlcProject>)")),
                    SchemaViolation);
    CHECK_THROWS_AS(parse_plc_export(std::string(
                        R"(<PlcProject name="p"><Hardware><Module id="m"/></Hardware></PlcProject>)")),
                    SchemaViolation);
    // duplicate signal name
    CHECK_THROWS_AS(parse_plc_export(std::string(R"(<PlcProject name="p">
<Hardware><Module id="di1" type="DI"/></Hardware>
<Signals><Signal name="a" address="%I0.0" direction="in" datatype="BOOL" module="di1"/>
<Signal name="a" address="%I0.1" direction="in" datatype="BOOL" module="di1"/></Signals>
</PlcProject>)")),
                    SchemaViolation);
}

TEST_CASE("warehouse fixture parses with the expected counts") {
    PlcProject p = parse_plc_export(serialize_plc_export(warehouse_fixture()));
    CHECK(p.signals.size() == 24);
    CHECK(p.function_blocks.size() == 5);
    std::size_t inputs = std::count_if(p.signals.begin(), p.signals.end(), [](const Signal& s) {
        return s.direction == SignalDirection::in;
    });
    CHECK(inputs == 16);
}

TEST_CASE("serialize: empty project emits a schema-valid document with empty sections") {
    PlcProject empty;
    empty.name = "empty";
    std::string xml = serialize_plc_export(empty);
    PlcProject back = parse_plc_export(xml);
    CHECK(back == empty);
    CHECK(xml.find("<Hardware>") != std::string::npos);
    CHECK(xml.find("<Signals>") != std::string::npos);
    CHECK(xml.find("<Blocks>") != std::string::npos);
}

TEST_CASE("round-trip: parse then serialize is the identity on the model") {
    PlcProject one;
    one.name = "one";
    one.hardware_modules = {{"di1", ModuleKind::DI}};
    one.signals = {{"lb1", "%I0.0", SignalDirection::in, DataType::BOOL, "di1"}};
    CHECK(parse_plc_export(serialize_plc_export(one)) == one);

    PlcProject fixture = warehouse_fixture();
    CHECK(parse_plc_export(serialize_plc_export(fixture)) == fixture);

    // canonical form is a fixed point byte-for-byte
    std::string canonical = serialize_plc_export(fixture);
    CHECK(serialize_plc_export(parse_plc_export(canonical)) == canonical);
}

TEST_CASE("serializer escapes XML metacharacters") {
    PlcProject p;
    p.name = "a<b>&\"c'";
    p.hardware_modules = {{"m&1", ModuleKind::CPU}};
    CHECK(parse_plc_export(serialize_plc_export(p)) == p);
}

TEST_CASE("software graph: rule application on a small block") {
    PlcProject p;
    p.name = "p";
    p.hardware_modules = {{"di1", ModuleKind::DI}, {"do1", ModuleKind::DO}};
    p.signals = {{"lb1", "%I0.0", SignalDirection::in, DataType::BOOL, "di1"},
                 {"m1", "%Q0.0", SignalDirection::out, DataType::BOOL, "do1"}};
    p.function_blocks = {{"rowctl", {"lb1"}, {"m1"}, {}}};

    kg::Fragment f = build_software_graph(p);
    kg::Graph g;
    g.merge_fragment(f);
    auto reads = g.query_neighbors("fb:rowctl", "READS");
    REQUIRE(reads.size() == 1);
    CHECK(reads[0]->id == "sig:lb1");
    auto writes = g.query_neighbors("fb:rowctl", "WRITES");
    REQUIRE(writes.size() == 1);
    CHECK(writes[0]->id == "sig:m1");
}

TEST_CASE("software graph: empty project gives an empty fragment") {
    PlcProject p;
    p.name = "p";
    kg::Fragment f = build_software_graph(p);
    CHECK(f.nodes.empty());
    CHECK(f.edges.empty());
}

TEST_CASE("software graph: fixture node and edge counts match hand counts") {
    PlcProject fixture = warehouse_fixture();
    kg::Fragment f = build_software_graph(fixture);
    // 24 signals + 5 FBs + 0 DBs + 4 hardware modules
    CHECK(f.nodes.size() == 24 + 5 + 4);
    // READS 16 + WRITES 8 + CALLS 4 + MAPPED_TO 24
    CHECK(f.edges.size() == 16 + 8 + 4 + 24);

    kg::Graph g;
    g.merge_fragment(f);
    CHECK(g.count_edges_of_type("READS") == 16);
    CHECK(g.count_edges_of_type("WRITES") == 8);
    CHECK(g.count_edges_of_type("CALLS") == 4);
    CHECK(g.count_edges_of_type("MAPPED_TO") == 24);
    CHECK(g.count_nodes_with_label("Signal") == 24);
    CHECK(g.count_nodes_with_label("FunctionBlock") == 5);
    CHECK(g.count_nodes_with_label("HardwareModule") == 4);
    CHECK(g.integrity_violations().empty());
}

TEST_CASE("software graph: deterministic ids across runs") {
    PlcProject fixture = warehouse_fixture();
    kg::Graph a, b;
    a.merge_fragment(build_software_graph(fixture));
    b.merge_fragment(build_software_graph(parse_plc_export(serialize_plc_export(fixture))));
    CHECK(a.export_json() == b.export_json());
}

TEST_CASE("data blocks carry their fields as typed props") {
    PlcProject p;
    p.name = "p";
    p.data_blocks = {{"db1", {{"count", DataType::INT}, {"level", DataType::REAL}}}};
    CHECK(parse_plc_export(serialize_plc_export(p)) == p);

    kg::Fragment f = build_software_graph(p);
    REQUIRE(f.nodes.size() == 1);
    CHECK(f.nodes[0].id == "db:db1");
    CHECK(f.nodes[0].props.count("field.count") == 1);

    // duplicate field names rejected
    PlcProject bad;
    bad.name = "p";
    bad.data_blocks = {{"db1", {{"x", DataType::INT}, {"x", DataType::INT}}}};
    CHECK_THROWS_AS(parse_plc_export(serialize_plc_export(bad)), SchemaViolation);
}
