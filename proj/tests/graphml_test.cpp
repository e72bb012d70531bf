#include <gtest/gtest.h>

#include <random>

#include "cpsec/graphml.hpp"
#include "generators.hpp"
#include "test_support.hpp"

using namespace cpsec;
using cpsec::testing::load_model;
using cpsec::testing::read_fixture;

namespace {

Error parse_error(const std::string& doc) {
  try {
    parse_model(doc);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected parse failure";
  return Error(ErrorCode::kInternal, "none");
}

}  // namespace

TEST(GraphmlParse, ScadaCentrifuge) {
  auto parsed = parse_model(read_fixture("models/scada_centrifuge.graphml"));
  const auto& m = parsed.model;
  EXPECT_EQ(m.id, "scada-centrifuge");
  EXPECT_EQ(m.components.size(), 6u);
  EXPECT_EQ(m.connections.size(), 7u);
  const auto* bpcs = m.find_component("bpcs_platform");
  ASSERT_NE(bpcs, nullptr);
  ASSERT_NE(bpcs->find_attribute("entry-point"), nullptr);
  EXPECT_EQ(bpcs->find_attribute("entry-point")->value,
            "accepts external operating system commands over MODBUS");
  const auto* ws = m.find_component("programming_ws");
  ASSERT_NE(ws, nullptr);
  EXPECT_EQ(ws->find_attribute("software")->value, "NI LabVIEW");
  EXPECT_EQ(ws->find_attribute("os"), nullptr);
  ASSERT_EQ(parsed.warnings.size(), 1u);
  EXPECT_EQ(parsed.warnings[0].code, "IGNORED_KEY");
  EXPECT_FALSE(m.metadata.empty());
}

TEST(GraphmlParse, EmptyGraph) {
  auto m = load_model("models/empty.graphml");
  EXPECT_TRUE(m.components.empty());
  EXPECT_TRUE(m.connections.empty());
}

TEST(GraphmlParse, SelfLoopIsAllowed) {
  auto m = load_model("models/self_loop.graphml");
  ASSERT_EQ(m.connections.size(), 1u);
  EXPECT_EQ(m.connections[0].source, m.connections[0].target);
}

TEST(GraphmlParse, ConnectionAttributes) {
  auto m = load_model("models/connection_attributes.graphml");
  const auto* e = m.find_connection("uplink");
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->attributes.size(), 3u);
  EXPECT_EQ(e->find_attribute("medium")->value, "RS-485 serial");
}

TEST(GraphmlParse, EscapedContentSurvives) {
  auto m = load_model("models/escaping.graphml");
  EXPECT_EQ(m.id, "escape & quote");
  const auto* c = m.find_component("hmi<1>");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->name, "HMI \"panel\" & alarms");
  EXPECT_EQ(c->find_attribute("description")->value,
            "setpoint < 20 rpm && temp > 4 'C'");
  EXPECT_EQ(c->find_attribute("rule")->value, "line one\nline two\ttabbed");
}

TEST(GraphmlParse, DanglingEdgeNamesTheEdge) {
  auto e = parse_error(read_fixture("models/invalid/dangling_edge.graphml"));
  EXPECT_EQ(e.code(), ErrorCode::kValidation);
  ASSERT_FALSE(e.detail().empty());
  EXPECT_NE(e.detail()[0].find("e_missing"), std::string::npos);
}

TEST(GraphmlParse, DuplicateNodeNamesTheId) {
  auto e = parse_error(read_fixture("models/invalid/duplicate_node.graphml"));
  EXPECT_EQ(e.code(), ErrorCode::kValidation);
  ASSERT_EQ(e.detail().size(), 1u);
  EXPECT_NE(e.detail()[0].find("c1"), std::string::npos);
}

TEST(GraphmlParse, MalformedXmlReportsPosition) {
  auto e = parse_error(read_fixture("models/invalid/malformed.graphml"));
  EXPECT_EQ(e.code(), ErrorCode::kParse);
  ASSERT_TRUE(e.position().has_value());
  EXPECT_GT(e.position()->line, 0u);
}

TEST(GraphmlParse, UndeclaredKeyIsRejected) {
  auto e = parse_error(read_fixture("models/invalid/undeclared_key.graphml"));
  EXPECT_EQ(e.code(), ErrorCode::kParse);
  ASSERT_FALSE(e.detail().empty());
  EXPECT_EQ(e.detail()[0], "attr:os");
}

TEST(GraphmlParse, RejectsOutsideSubset) {
  EXPECT_EQ(parse_error("<notgraphml/>").code(), ErrorCode::kParse);
  EXPECT_EQ(parse_error("<graphml></graphml>").code(), ErrorCode::kParse);
  EXPECT_EQ(parse_error("<graphml><graph id='g' edgedefault='undirected'/></graphml>")
                .code(),
            ErrorCode::kParse);
  EXPECT_EQ(parse_error("").code(), ErrorCode::kParse);
}

TEST(GraphmlRoundTrip, AllFixtures) {
  for (const auto& path : cpsec::testing::valid_model_fixtures()) {
    auto m = load_model(path);
    auto text = serialize_model(m);
    auto back = parse_model(text);
    EXPECT_TRUE(structurally_equal(m, back.model)) << path;
    EXPECT_TRUE(back.warnings.empty()) << path;
    EXPECT_EQ(serialize_model(back.model), text) << path;
  }
}

TEST(GraphmlRoundTrip, SerializationIsDeterministic) {
  auto m = load_model("models/water_treatment.graphml");
  auto shuffled = m;
  std::reverse(shuffled.components.begin(), shuffled.components.end());
  std::reverse(shuffled.connections.begin(), shuffled.connections.end());
  for (auto& c : shuffled.components) {
    std::reverse(c.attributes.begin(), c.attributes.end());
  }
  EXPECT_EQ(serialize_model(m), serialize_model(shuffled));
}

TEST(GraphmlRoundTrip, RandomModels) {
  std::mt19937 rng(3);
  for (int i = 0; i < 300; ++i) {
    auto m = cpsec::testing::random_model(rng, i % 2 ? "rand & <m>" : "r");
    auto back = parse_model(serialize_model(m)).model;
    ASSERT_TRUE(structurally_equal(m, back)) << serialize_model(m);
  }
}

TEST(GraphmlRoundTrip, WhitespaceInValuesIsPreserved) {
  SystemModel m;
  m.id = "ws";
  m.components = {{"a", "  padded name ", {{"note", " lead\r\n\ttrail  "}}}};
  auto back = parse_model(serialize_model(m)).model;
  EXPECT_TRUE(structurally_equal(m, back));
}
