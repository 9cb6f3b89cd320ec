#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "poisson/model.hpp"
#include "support.hpp"

namespace poisson {
namespace {

TEST(Builtins, AllLoadAndArePoisson) {
  const auto names = builtin_models();
  for (const char* expected : {"first", "second", "so3", "canonical4", "z2", "z2_even", "z4", "product", "product_split"})
    EXPECT_NE(std::find(names.begin(), names.end(), expected), names.end()) << expected;
  for (const auto& n : names) {
    const Model m = load_model("builtin:" + n);
    EXPECT_FALSE(m.name.empty());
    EXPECT_TRUE(all_zero(jacobiator(m.pi))) << n;
    EXPECT_FALSE(m.system.empty()) << n;
    EXPECT_NO_THROW((void)m.system_family()) << n;
    for (const auto& [g, action] : m.groups) {
      std::vector<Point> samples;
      std::mt19937 rng(3);
      for (int i = 0; i < 5; ++i) samples.emplace_back(m.chart, testing::random_point(rng, m.chart->size(), 0.5));
      EXPECT_TRUE(verify_action(action, samples).ok) << n << " " << g;
    }
  }
}

TEST(Builtins, SecondCounterexampleContents) {
  const Model m = load_model("builtin:second");
  EXPECT_EQ(m.chart->names(), (std::vector<std::string>{"x", "y", "p", "q"}));
  EXPECT_EQ(m.pi.entry(0, 1), parse("1", m.chart));
  EXPECT_EQ(m.pi.entry(3, 2), parse("-p", m.chart));
  EXPECT_EQ(m.function("f2"), parse("p + x*q", m.chart));
  EXPECT_EQ(m.function("x*y"), parse("y*x", m.chart));
  EXPECT_EQ(m.point("regular").values, (std::vector<double>{0, 0, 0.5, 0}));
  EXPECT_EQ(m.point("1, 2, 3/2, -1").values, (std::vector<double>{1, 2, 1.5, -1}));
  EXPECT_EQ(m.transversal("T1").base().values, (std::vector<double>{1, 0, 0, 0}));
  EXPECT_THROW(m.point("1, 2"), Error);
  EXPECT_THROW(m.transversal("T9"), Error);
  EXPECT_THROW(m.group("none"), Error);
}

TEST(Builtins, GroupsAndTwoForms) {
  const Model z4 = load_model("builtin:z4");
  const GroupAction& g = z4.group("rotation");
  EXPECT_EQ(g.order(), 4u);
  EXPECT_EQ(g.product(static_cast<int>(g.index_of("r")), static_cast<int>(g.index_of("r3"))), g.identity());
  const Model product = load_model("builtin:product");
  const TwoForm& b = product.two_form("B");
  EXPECT_EQ(b.entry(2, 0), parse("-1", product.chart));
  EXPECT_EQ(b.entry(1, 3), parse("z2", product.chart));
}

TEST(Files, LoadFromDisk) {
  const std::string path = ::testing::TempDir() + "plane.model";
  {
    std::ofstream out(path);
    out << "# canonical plane\n[model]\nname = plane\ncoordinates = q, p\nsystem = p\n\n[bivector]\nq, p = 1\n";
  }
  const Model m = load_model(path);
  EXPECT_EQ(m.name, "plane");
  EXPECT_EQ(m.source, path);
  EXPECT_EQ(m.pi.entry(0, 1), parse("1", m.chart));
  std::remove(path.c_str());
  EXPECT_THROW(load_model(path), Error);
  EXPECT_THROW(load_model("builtin:nope"), Error);
}

struct BadModel {
  const char* text;
  std::size_t line;
  const char* anchor;  // the error position is the first occurrence of this text
};

TEST(Parse, ErrorsCarryLineAndPosition) {
  const std::string head = "[model]\nname = m\ncoordinates = x, y\n";
  const std::vector<BadModel> cases = {
      {"[bivector]\nx, y = x +* y\n", 5, "* y"},
      {"[bivector]\nx, w = 1\n", 5, "x, w"},
      {"[bivector]\nx, x = 1\n", 5, "x, x"},
      {"[bivector]\nx y\n", 5, "x y"},
      {"[functions]\nf = 2 ^ x\n", 5, "x\n"},
      {"[transversal T]\nbase = 0, 0\n", 4, "[transversal"},
      {"[group G]\nelements = e\nproduct.e = e\n", 4, "[group"},
      {"[bivector\n", 4, "[bivector"},
  };
  for (const auto& c : cases) {
    const std::string text = head + c.text;
    try {
      parse_model(text, "m.model");
      ADD_FAILURE() << c.text;
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find("m.model:" + std::to_string(c.line) + ":"), std::string::npos)
          << e.what();
      EXPECT_EQ(e.position(), text.find(c.anchor)) << e.what();
    }
  }
}

TEST(Parse, MissingCoordinatesAndEntriesOutsideSections) {
  EXPECT_THROW(parse_model("[model]\nname = m\n"), ParseError);
  EXPECT_THROW(parse_model("x = 1\n"), ParseError);
  EXPECT_THROW(parse_model("[model]\nname = m\ncoordinates = x, y\nsystem = nothere + 1\n"), ParseError);
}

TEST(Parse, CommentsAndBlankLinesAreIgnored) {
  const Model m = parse_model(
      "# header\n\n[model]  # trailing\nname = c\ncoordinates = q, p\nsystem = p\n[bivector]\n  q, p = 1  # {q,p}\n");
  EXPECT_EQ(m.pi.entry(0, 1), parse("1", m.chart));
}

}  // namespace
}  // namespace poisson
