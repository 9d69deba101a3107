#include <gtest/gtest.h>

#include <string>

#include "softid/model_io.hpp"
#include "support.hpp"

using namespace softid;

namespace {

const char* kModels[] = {"rigid_2r", "pendulum", "pcc_sim6", "pcs_2body", "pac_1body",
                         "lvp_1body", "pcc_pdplus", "pgc_sim5", "varradius_sim4"};

std::string error_of(const std::string& text, std::string* field = nullptr) {
  try {
    build_chain(parse_chain(text));
  } catch (const ModelError& e) {
    if (field) *field = e.field;
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ModelIO, FixturesLoadAndRoundTrip) {
  for (const char* name : kModels) {
    const ChainDesc d = load_chain(test::fixture(std::string(name) + ".json"));
    const ChainDesc again = parse_chain(serialize_chain(d));
    EXPECT_TRUE(d == again) << name;
    EXPECT_NO_THROW(build_chain(d)) << name;
  }
}

TEST(ModelIO, MissingAnchorNamesTheField) {
  std::string field;
  const std::string msg = error_of(read_text_file(test::fixture("missing_anchor.json")), &field);
  ASSERT_FALSE(msg.empty());
  EXPECT_NE(field.find("x_a"), std::string::npos) << field;
}

TEST(ModelIO, NonOrthogonalAnchorsRejected) {
  const std::string msg = error_of(read_text_file(test::fixture("bad_anchors.json")));
  ASSERT_FALSE(msg.empty());
  EXPECT_NE(msg.find("contact area assumption"), std::string::npos) << msg;
}

TEST(ModelIO, SyntaxErrorReportsPosition) {
  try {
    parse_chain("{\n  \"schema_version\": 1,\n  \"links\": [\n}");
    FAIL() << "expected a parse error";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
  }
}

TEST(ModelIO, UnknownKeysAndBadValuesRejected) {
  std::string text = read_text_file(test::fixture("pendulum.json"));
  std::string bad = text;
  bad.replace(bad.find("\"rho\""), 5, "\"rhoo\"");
  EXPECT_THROW(parse_chain(bad), ModelError);
  bad = text;
  bad.replace(bad.find("\"revolute\""), 10, "\"helical\"");
  EXPECT_THROW(build_chain(parse_chain(bad)), ModelError);
  bad = text;
  bad.replace(bad.find("\"schema_version\": 1"), 19, "\"schema_version\": 9");
  EXPECT_THROW(parse_chain(bad), ModelError);
}

TEST(ModelIO, QuadratureOrderOverride) {
  ChainDesc d = load_chain(test::fixture("pcs_2body.json"));
  d.quadrature_order = {2, 3, 4};
  for (auto& l : d.links) l.body.order = {0, 0, 0};
  const ChainModel c = build_chain(d);
  EXPECT_EQ(c.links[0].body.nodes.size(), 24u);
}

TEST(ModelIO, StateParsing) {
  const StateDesc s = parse_state(R"({"q": [0.1, 0.2], "qd": [1, 2]})", 2);
  EXPECT_EQ(s.q(1), 0.2);
  EXPECT_EQ(s.qd(0), 1.0);
  EXPECT_EQ(s.qdd.norm(), 0.0);
  EXPECT_THROW(parse_state(R"({"q": [0.1]})", 2), ModelError);
  EXPECT_THROW(parse_state(R"({"qd": [0.1, 0.2]})", 2), ModelError);
}

TEST(ModelIO, StressLawNames) {
  for (StressLaw s : {StressLaw::neo_hookean_weak, StressLaw::body_force_divergence, StressLaw::none})
    EXPECT_EQ(stress_law_from_string(to_string(s)), s);
  EXPECT_THROW(stress_law_from_string("hookean"), std::invalid_argument);
}
