#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentmend/model.hpp"

namespace agentmend {

/// File names of an instance directory.
namespace instance_files {
inline constexpr const char* kManifest = "instance.json";
inline constexpr const char* kBuggy = "buggy.py";
inline constexpr const char* kFixed = "fixed.py";
inline constexpr const char* kTest = "test.py";
inline constexpr const char* kRequirements = "requirements.txt";
inline constexpr const char* kReadme = "README.md";
}  // namespace instance_files

/// Loads and validates one instance directory.
///
/// Errors: MissingFile (detail starts with the logical file name: "manifest",
/// "buggy", "fixed", "test", "requirements" or "readme"), ManifestInvalid
/// (field + reason), ComponentUnknown (offending value).
BenchmarkInstance parse_instance_manifest(const std::filesystem::path& root);

/// Writes the six-file layout; parse_instance_manifest reads it back equal.
void write_instance(const BenchmarkInstance& instance, const std::filesystem::path& root);

std::vector<Requirement> parse_requirements(std::string_view text);

struct CorpusEntry {
  std::filesystem::path dir;
  std::optional<std::string> instance_id;
  std::optional<std::string> error;  // set when parsing failed
};

struct CorpusReport {
  std::size_t count = 0;  // successfully parsed instances
  std::map<AgentComponent, std::size_t> histogram;
  std::vector<CorpusEntry> entries;  // every subdirectory, sorted by name
  std::vector<std::string> errors;
};

/// Never throws for per-instance problems; they land in the report.
CorpusReport validate_corpus(const std::filesystem::path& dir);

struct LoadedInstance {
  BenchmarkInstance instance;
  std::filesystem::path dir;
};

/// All instances sorted by directory name. Throws the first instance error;
/// an empty directory yields an empty list.
std::vector<LoadedInstance> load_corpus(const std::filesystem::path& dir);

/// Line-delimited JSON of AnnotatedFix records.
std::vector<AnnotatedFix> read_annotated_fixes(const std::filesystem::path& path);
void write_annotated_fixes(const std::vector<AnnotatedFix>& fixes, const std::filesystem::path& path);

}  // namespace agentmend
