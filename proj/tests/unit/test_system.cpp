#include <gtest/gtest.h>

#include <string>

#include "domcert/errors.hpp"
#include "domcert/system.hpp"
#include "fixtures.hpp"

using namespace domcert;

namespace {

const char* kAlternating = R"({
  "n": 2,
  "modes": {"1": [[2, 0], [0, 4]], "2": [[1, 0], [0, "1/8"]]},
  "automaton": {"states": ["a", "b"], "transitions": [["a", 1, "b"], ["b", 2, "a"]]}
})";

std::string parse_error_message(const std::string& text) {
  try {
    parse_system(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(RealLiteral, NumbersAndFractions) {
  EXPECT_DOUBLE_EQ(parse_real_literal("0.25"), 0.25);
  EXPECT_DOUBLE_EQ(parse_real_literal("1/8"), 0.125);
  EXPECT_DOUBLE_EQ(parse_real_literal("-3/4"), -0.75);
  EXPECT_DOUBLE_EQ(parse_real_literal(" 1e-3 "), 1e-3);
  EXPECT_THROW(parse_real_literal("1/0"), ParseError);
  EXPECT_THROW(parse_real_literal("abc"), ParseError);
  EXPECT_THROW(parse_real_literal(""), ParseError);
  EXPECT_THROW(parse_real_literal("1/2/3"), ParseError);
}

TEST(ParseSystem, Alternating) {
  const SwitchingSystem sys = parse_system(kAlternating);
  EXPECT_EQ(sys.n, 2);
  ASSERT_EQ(sys.modes.size(), 2u);
  EXPECT_DOUBLE_EQ(sys.mode(2)(1, 1), 0.125);
  EXPECT_DOUBLE_EQ(sys.mode(1)(1, 1), 4.0);
  EXPECT_EQ(sys.automaton.transitions().size(), 2u);
  EXPECT_FALSE(sys.language.has_value());
  EXPECT_THROW(sys.mode(3), InvalidInput);
}

TEST(ParseSystem, FixtureFilesLoad) {
  for (const char* name : {"alternating_diagonal.json", "bacteria.json", "bridged_loops.json", "rotation.json"}) {
    EXPECT_NO_THROW(load_system(fixtures::data(name))) << name;
  }
}

TEST(ParseSystem, ErrorsNameTheField) {
  EXPECT_NE(parse_error_message(R"({"n": 2, "modes": {"1": [[1, 0], [0]]},
      "automaton": {"states": ["a"], "transitions": [["a", 1, "a"]]}})")
                .find("system.modes.1[1]"),
            std::string::npos);
  EXPECT_NE(parse_error_message(R"({"n": 2, "modes": {"1": [[1, 0], [0, "x"]]},
      "automaton": {"states": ["a"], "transitions": [["a", 1, "a"]]}})")
                .find("system.modes.1[1][1]"),
            std::string::npos);
  EXPECT_NE(parse_error_message(R"({"n": 0, "modes": {}, "automaton": {}})").find("system.n"),
            std::string::npos);
  EXPECT_NE(parse_error_message(R"({"n": 1, "modes": {"1": [[1]], "3": [[1]]},
      "automaton": {"states": ["a"], "transitions": [["a", 1, "a"]]}})")
                .find("contiguous"),
            std::string::npos);
  EXPECT_NE(parse_error_message(R"({"n": 1, "modes": {"1": [[1]]}})").find("system.automaton"),
            std::string::npos);
  EXPECT_NE(parse_error_message(R"({"n": 1, "modes": {"1": [[1]]}, "extra": 1,
      "automaton": {"states": ["a"], "transitions": [["a", 1, "a"]]}})")
                .find("extra"),
            std::string::npos);
  EXPECT_NE(parse_error_message(R"({"n": 1, "modes": {"1": [[1]]},
      "automaton": {"states": ["a"], "transitions": [["a", 1]]}})")
                .find("system.automaton"),
            std::string::npos);
  EXPECT_NE(parse_error_message("{not json").find("malformed JSON"), std::string::npos);
}

TEST(ParseSystem, RejectsInconsistentAutomata) {
  EXPECT_THROW(parse_system(R"({"n": 1, "modes": {"1": [[1]]},
      "automaton": {"states": ["a"], "transitions": [["a", 2, "a"]]}})"),
               Error);
  EXPECT_THROW(parse_system(R"({"n": 1, "modes": {"1": [[1]]},
      "automaton": {"states": ["a"], "transitions": [["a", 1, "b"]]}})"),
               Error);
}

TEST(ParseSystem, LanguageOptional) {
  const SwitchingSystem sys = parse_system(R"({"n": 1, "modes": {"1": [[1]], "2": [[2]]},
      "automaton": {"states": ["a", "b"], "transitions": [["a", 1, "b"], ["b", 2, "a"]]},
      "language": {"states": ["x"], "transitions": [["x", 1, "x"], ["x", 2, "x"]]}})");
  ASSERT_TRUE(sys.language.has_value());
  EXPECT_EQ(sys.language->transitions().size(), 2u);
}

TEST(AutomatonFile, BareAndEmbedded) {
  const Automaton bare = parse_automaton_file(
      R"({"states": ["a"], "transitions": [["a", 1, "a"], ["a", 2, "a"]]})");
  EXPECT_EQ(bare.alphabet_size(), 2);
  const Automaton embedded = parse_automaton_file(kAlternating);
  EXPECT_EQ(embedded.transitions().size(), 2u);
  EXPECT_THROW(parse_automaton_file("[]"), ParseError);
}

TEST(Fingerprint, CosmeticEditsDoNotMatter) {
  const std::string base = system_fingerprint(parse_system(kAlternating));
  EXPECT_EQ(base.size(), 64u);
  const char* reordered = R"({"automaton": {"transitions": [["b", 2, "a"], ["a", 1, "b"]], "states": ["b", "a"]},
    "description": "same system, different text",
    "modes": {"2": [[1.0, 0], [0, 0.125]], "1": [[2, 0.0], [0, 4]]}, "n": 2})";
  EXPECT_EQ(system_fingerprint(parse_system(reordered)), base);
}

TEST(Fingerprint, ChangesWithContent) {
  const std::string base = system_fingerprint(parse_system(kAlternating));
  const char* other_matrix = R"({"n": 2,
    "modes": {"1": [[2, 0], [0, 4]], "2": [[1, 0], [0, "1/7"]]},
    "automaton": {"states": ["a", "b"], "transitions": [["a", 1, "b"], ["b", 2, "a"]]}})";
  const char* other_graph = R"({"n": 2,
    "modes": {"1": [[2, 0], [0, 4]], "2": [[1, 0], [0, "1/8"]]},
    "automaton": {"states": ["a", "b"], "transitions": [["a", 1, "b"], ["b", 2, "a"], ["a", 2, "a"]]}})";
  EXPECT_NE(system_fingerprint(parse_system(other_matrix)), base);
  EXPECT_NE(system_fingerprint(parse_system(other_graph)), base);
}

TEST(Fingerprint, CanonicalTextIsStable) {
  const SwitchingSystem sys = parse_system(kAlternating);
  const std::string text = canonical_system_text(sys);
  EXPECT_EQ(text.find(' '), std::string::npos);
  EXPECT_EQ(canonical_system_text(parse_system(text)), text);
}

TEST(Trimmed, DropsDanglingStates) {
  const SwitchingSystem sys = parse_system(R"({"n": 1, "modes": {"1": [[1]], "2": [[2]]},
      "automaton": {"states": ["a", "z"], "transitions": [["a", 1, "a"], ["a", 2, "z"]]}})");
  const SwitchingSystem t = trimmed(sys);
  EXPECT_EQ(t.automaton.states(), (std::vector<State>{"a"}));
  EXPECT_EQ(t.modes.size(), 2u);
}

TEST(ReadFile, MissingFile) {
  EXPECT_THROW(read_text_file(fixtures::data("no_such_file.json")), ParseError);
}
