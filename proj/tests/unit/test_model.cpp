#include <gtest/gtest.h>

#include <set>

#include "agentmend/corpus.hpp"
#include "agentmend/error.hpp"
#include "agentmend/model.hpp"
#include "agentmend/text.hpp"
#include "test_support.hpp"

using namespace agentmend;
using agentmend::testing::TempDir;

namespace {

BenchmarkInstance sample_instance() {
  BenchmarkInstance inst;
  inst.instance_id = "sample-1";
  inst.buggy_source = "import os\n\ndef f(x):\n    return x\n";
  inst.gold_source = "import os\n\ndef f(x):\n    return x + 1\n";
  inst.intent = "f should add one.";
  inst.test_source = "from buggy import f\nassert f(1) == 2\n";
  inst.requirements = {{"langchain", "==", "0.1.0"}, {"openai", ">=", "1.0"}, {"tiktoken", "==", "0.5.1"},
                       {"pydantic", ">=", "2"}};
  inst.readme = "# sample\n";
  inst.annotated_component = AgentComponent::Tool;
  inst.component_regions = std::vector<ComponentRegion>{{{3, 4}, AgentComponent::Tool}};
  inst.source_site = "stackoverflow.com";
  inst.subject_framework = "langchain";
  return inst;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::IoError;
}

}  // namespace

TEST(Taxonomy, HasTwentyThreeUniquePatterns) {
  const auto all = all_fix_patterns();
  ASSERT_EQ(all.size(), 23u);
  std::set<std::string_view> abbrs, names;
  for (auto id : all) {
    abbrs.insert(abbreviation(id));
    names.insert(display_name(id));
    EXPECT_EQ(fix_pattern_from_abbreviation(abbreviation(id)), id);
    EXPECT_EQ(parse_fix_pattern(display_name(id)), id);
    EXPECT_EQ(parse_fix_pattern(text::to_lower(abbreviation(id))), id);
  }
  EXPECT_EQ(abbrs.size(), 23u);
  EXPECT_EQ(names.size(), 23u);
  EXPECT_EQ(display_name(FixPatternId::AOO), "Addition of Operations");
  EXPECT_EQ(display_name(FixPatternId::CV), "Change Version");
}

TEST(Taxonomy, AbbreviationLookupIsCaseSensitive) {
  EXPECT_EQ(fix_pattern_from_abbreviation("UDMo"), FixPatternId::UDMo);
  EXPECT_EQ(fix_pattern_from_abbreviation("UDM"), FixPatternId::UDM);
  EXPECT_FALSE(fix_pattern_from_abbreviation("udmo"));
  EXPECT_FALSE(parse_fix_pattern("Not A Pattern"));
}

TEST(Components, ExactlyFour) {
  EXPECT_EQ(kAllComponents.size(), 4u);
  for (auto c : kAllComponents) EXPECT_EQ(parse_component(to_string(c)), c);
  EXPECT_EQ(parse_component("tool"), AgentComponent::Tool);
  EXPECT_FALSE(parse_component("Embedding"));
}

TEST(AnnotatedFix, JsonRoundTrip) {
  AnnotatedFix f;
  f.source = FixSource::GitHubIssue;
  f.post_id = "gh-1";
  f.title = "t";
  f.body = "b";
  f.fixed_code = "x = 1";
  f.rationale = "adds an attribute";
  f.pattern = FixPatternId::ANA;
  f.component = AgentComponent::Memory;
  f.framework = "langchain";
  f.language = "python";
  const nlohmann::json j = f;
  EXPECT_TRUE(j["buggy_code"].is_null());
  EXPECT_EQ(j.get<AnnotatedFix>(), f);
}

TEST(AnnotatedFix, RejectsEmptyRationaleAndUnknownPattern) {
  nlohmann::json j = AnnotatedFix{FixSource::StackOverflow, "1", "t", "b", {}, {}, "r", FixPatternId::CV,
                                  AgentComponent::Tool, "", ""};
  j["rationale"] = "  ";
  EXPECT_EQ(code_of([&] { (void)j.get<AnnotatedFix>(); }), Errc::ManifestInvalid);
  j["rationale"] = "ok";
  j["pattern"] = "XYZ";
  EXPECT_EQ(code_of([&] { (void)j.get<AnnotatedFix>(); }), Errc::ManifestInvalid);
}

TEST(Timestamps, RoundTrip) {
  const auto tp = parse_timestamp("2024-05-06T07:08:09Z");
  EXPECT_EQ(format_timestamp(tp), "2024-05-06T07:08:09Z");
  EXPECT_EQ(format_timestamp({}), "1970-01-01T00:00:00Z");
  EXPECT_EQ(code_of([] { (void)parse_timestamp("yesterday"); }), Errc::ManifestInvalid);
}

TEST(ValidateInstance, Invariants) {
  EXPECT_NO_THROW(validate_instance(sample_instance()));
  auto bad = sample_instance();
  bad.intent = "two\nlines";
  EXPECT_EQ(code_of([&] { validate_instance(bad); }), Errc::ManifestInvalid);
  bad = sample_instance();
  bad.gold_source = bad.buggy_source;
  EXPECT_EQ(code_of([&] { validate_instance(bad); }), Errc::ManifestInvalid);
  bad = sample_instance();
  bad.test_source = "\n";
  EXPECT_EQ(code_of([&] { validate_instance(bad); }), Errc::ManifestInvalid);
  bad = sample_instance();
  bad.component_regions = std::vector<ComponentRegion>{{{3, 9}, AgentComponent::Tool}};
  EXPECT_EQ(code_of([&] { validate_instance(bad); }), Errc::ManifestInvalid);
  bad = sample_instance();
  bad.component_regions = std::vector<ComponentRegion>{{{1, 3}, AgentComponent::Tool}, {{3, 4}, AgentComponent::Memory}};
  EXPECT_EQ(code_of([&] { validate_instance(bad); }), Errc::ManifestInvalid);
}

TEST(RepairTask, FromInstanceAndValidate) {
  const auto task = RepairTask::from_instance(sample_instance());
  EXPECT_EQ(task.source_site, "stackoverflow.com");
  EXPECT_NO_THROW(task.validate());
  auto empty = task;
  empty.intent = "";
  EXPECT_EQ(code_of([&] { empty.validate(); }), Errc::PreconditionViolation);
}

TEST(Requirements, ParsesBothComparators) {
  const auto reqs = parse_requirements("# pinned\nlangchain==0.1.0\n\nopenai >= 1.2\n");
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0], (Requirement{"langchain", "==", "0.1.0"}));
  EXPECT_EQ(reqs[1], (Requirement{"openai", ">=", "1.2"}));
  EXPECT_EQ(code_of([] { (void)parse_requirements("langchain\n"); }), Errc::ManifestInvalid);
  EXPECT_EQ(code_of([] { (void)parse_requirements("==1.0\n"); }), Errc::ManifestInvalid);
}

TEST(InstanceManifest, WriteParseRoundTrip) {
  TempDir dir;
  const auto inst = sample_instance();
  write_instance(inst, dir.path());
  const auto back = parse_instance_manifest(dir.path());
  EXPECT_EQ(back, inst);
  EXPECT_EQ(back.requirements.size(), 4u);
}

TEST(InstanceManifest, RoundTripWithoutRegions) {
  TempDir dir;
  auto inst = sample_instance();
  inst.component_regions.reset();
  write_instance(inst, dir.path());
  EXPECT_EQ(parse_instance_manifest(dir.path()), inst);
}

TEST(InstanceManifest, MissingTestFileNamesIt) {
  TempDir dir;
  write_instance(sample_instance(), dir.path());
  std::filesystem::remove(dir / "test.py");
  try {
    (void)parse_instance_manifest(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingFile);
    EXPECT_EQ(e.detail().rfind("test", 0), 0u) << e.detail();
  }
}

TEST(InstanceManifest, UnknownComponent) {
  TempDir dir;
  write_instance(sample_instance(), dir.path());
  auto j = nlohmann::json::parse(text::read_file(dir / "instance.json"));
  j["component"] = "Embedding";
  text::write_file(dir / "instance.json", j.dump());
  EXPECT_EQ(code_of([&] { (void)parse_instance_manifest(dir.path()); }), Errc::ComponentUnknown);
}

TEST(InstanceManifest, BadJsonAndMissingField) {
  TempDir dir;
  write_instance(sample_instance(), dir.path());
  text::write_file(dir / "instance.json", "{not json");
  EXPECT_EQ(code_of([&] { (void)parse_instance_manifest(dir.path()); }), Errc::ManifestInvalid);
  text::write_file(dir / "instance.json", R"({"id": "x", "component": "Tool", "source_site": "a.com"})");
  EXPECT_EQ(code_of([&] { (void)parse_instance_manifest(dir.path()); }), Errc::ManifestInvalid);
}

TEST(Corpus, EmptyDirectory) {
  TempDir dir;
  const auto report = validate_corpus(dir.path());
  EXPECT_EQ(report.count, 0u);
  EXPECT_TRUE(report.histogram.empty());
  EXPECT_TRUE(load_corpus(dir.path()).empty());
}

TEST(Corpus, OneMalformedOfThree) {
  TempDir dir;
  for (int i = 1; i <= 3; ++i) {
    auto inst = sample_instance();
    inst.instance_id = "i" + std::to_string(i);
    write_instance(inst, dir / ("i" + std::to_string(i)));
  }
  std::filesystem::remove(dir / "i2" / "README.md");
  const auto report = validate_corpus(dir.path());
  EXPECT_EQ(report.count, 2u);
  EXPECT_EQ(report.errors.size(), 1u);
  ASSERT_EQ(report.entries.size(), 3u);
  EXPECT_TRUE(report.entries[1].error.has_value());
  std::size_t hist_total = 0;
  for (const auto& [c, n] : report.histogram) hist_total += n;
  EXPECT_EQ(hist_total, report.count);
  EXPECT_THROW((void)load_corpus(dir.path()), Error);
}

TEST(Corpus, ReplayCorpusHistogram) {
  const auto report = validate_corpus(agentmend::testing::fixtures() / "replay" / "corpus");
  EXPECT_EQ(report.count, 37u);
  EXPECT_TRUE(report.errors.empty());
  EXPECT_EQ(report.histogram.at(AgentComponent::Tool), 19u);
  const auto loaded = load_corpus(agentmend::testing::fixtures() / "replay" / "corpus");
  ASSERT_EQ(loaded.size(), 37u);
  std::size_t stack_overflow = 0;
  for (const auto& l : loaded) stack_overflow += l.instance.source_site == "stackoverflow.com";
  EXPECT_EQ(stack_overflow, 36u);
}

TEST(AnnotatedFixes, JsonlRoundTrip) {
  TempDir dir;
  const auto fixes = read_annotated_fixes(agentmend::testing::fixtures() / "rulegen" / "fixes.jsonl");
  ASSERT_EQ(fixes.size(), 46u);
  write_annotated_fixes(fixes, dir / "out.jsonl");
  EXPECT_EQ(read_annotated_fixes(dir / "out.jsonl"), fixes);
}

TEST(Text, SplitAndJoin) {
  EXPECT_EQ(text::split_lines("a\nb\n"), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(text::split_lines("a\r\nb"), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(text::split_lines("").empty());
  EXPECT_EQ(text::split_lines("\n"), (std::vector<std::string>{""}));
  EXPECT_EQ(text::join_lines({"a", "b"}), "a\nb\n");
  const auto fl = text::first_nonempty_line("\n  hello \nworld");
  EXPECT_EQ(fl.line, "hello");
  EXPECT_TRUE(fl.had_more);
}
