#include "agentmend/corpus.hpp"

#include <algorithm>
#include <fstream>

#include "agentmend/error.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

namespace fs = std::filesystem;

namespace {

std::string read_required(const fs::path& root, const char* file, const char* logical) {
  const auto path = root / file;
  if (!fs::is_regular_file(path)) {
    throw Error(Errc::MissingFile, std::string(logical) + " (" + path.string() + ")");
  }
  return text::read_file(path);
}

nlohmann::json parse_manifest_json(const std::string& raw) {
  try {
    return nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ManifestInvalid, std::string("instance.json: ") + e.what());
  }
}

std::string required_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw Error(Errc::ManifestInvalid, std::string(key) + ": missing or not a string");
  }
  return j[key].get<std::string>();
}

AgentComponent component_field(const std::string& value) {
  auto c = parse_component(value);
  if (!c) throw Error(Errc::ComponentUnknown, value);
  return *c;
}

}  // namespace

std::vector<Requirement> parse_requirements(std::string_view contents) {
  std::vector<Requirement> out;
  int line_no = 0;
  for (const auto& raw : text::split_lines(contents)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::size_t pos = std::string_view::npos;
    std::string comparator;
    for (const char* op : {"==", ">="}) {
      pos = line.find(op);
      if (pos != std::string_view::npos) {
        comparator = op;
        break;
      }
    }
    if (pos == std::string_view::npos) {
      throw Error(Errc::ManifestInvalid, "requirements.txt:" + std::to_string(line_no) +
                                             ": expected name==version or name>=version");
    }
    Requirement req{std::string(text::trim(line.substr(0, pos))), comparator,
                    std::string(text::trim(line.substr(pos + 2)))};
    if (req.name.empty() || req.version.empty()) {
      throw Error(Errc::ManifestInvalid,
                  "requirements.txt:" + std::to_string(line_no) + ": empty name or version");
    }
    out.push_back(std::move(req));
  }
  return out;
}

BenchmarkInstance parse_instance_manifest(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(Errc::MissingFile, "directory (" + root.string() + ")");

  const auto manifest = parse_manifest_json(read_required(root, instance_files::kManifest, "manifest"));
  if (!manifest.is_object()) throw Error(Errc::ManifestInvalid, "instance.json: not an object");

  BenchmarkInstance inst;
  inst.instance_id = required_string(manifest, "id");
  inst.intent = required_string(manifest, "intent");
  inst.annotated_component = component_field(required_string(manifest, "component"));
  inst.source_site = required_string(manifest, "source_site");
  inst.subject_framework = manifest.value("framework", std::string{});

  if (manifest.contains("component_regions") && !manifest["component_regions"].is_null()) {
    const auto& regions = manifest["component_regions"];
    if (!regions.is_array()) throw Error(Errc::ManifestInvalid, "component_regions: not an array");
    std::vector<ComponentRegion> parsed;
    for (const auto& r : regions) {
      if (!r.is_object() || !r.contains("start") || !r.contains("end") ||
          !r["start"].is_number_integer() || !r["end"].is_number_integer()) {
        throw Error(Errc::ManifestInvalid, "component_regions: entries need integer start/end");
      }
      parsed.push_back(ComponentRegion{{r["start"].get<int>(), r["end"].get<int>()},
                                       component_field(required_string(r, "component"))});
    }
    inst.component_regions = std::move(parsed);
  }

  inst.buggy_source = read_required(root, instance_files::kBuggy, "buggy");
  inst.gold_source = read_required(root, instance_files::kFixed, "fixed");
  inst.test_source = read_required(root, instance_files::kTest, "test");
  inst.requirements =
      parse_requirements(read_required(root, instance_files::kRequirements, "requirements"));
  inst.readme = read_required(root, instance_files::kReadme, "readme");

  validate_instance(inst);
  return inst;
}

void write_instance(const BenchmarkInstance& instance, const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + root.string() + ": " + ec.message());

  nlohmann::json manifest{{"id", instance.instance_id},
                          {"intent", instance.intent},
                          {"component", to_string(instance.annotated_component)},
                          {"source_site", instance.source_site},
                          {"framework", instance.subject_framework}};
  if (instance.component_regions) {
    auto regions = nlohmann::json::array();
    for (const auto& r : *instance.component_regions) {
      regions.push_back(
          {{"start", r.lines.start}, {"end", r.lines.end}, {"component", to_string(r.component)}});
    }
    manifest["component_regions"] = std::move(regions);
  }
  text::write_file(root / instance_files::kManifest, manifest.dump(2) + "\n");
  text::write_file(root / instance_files::kBuggy, instance.buggy_source);
  text::write_file(root / instance_files::kFixed, instance.gold_source);
  text::write_file(root / instance_files::kTest, instance.test_source);
  std::string reqs;
  for (const auto& r : instance.requirements) reqs += r.to_string() + "\n";
  text::write_file(root / instance_files::kRequirements, reqs);
  text::write_file(root / instance_files::kReadme, instance.readme);
}

namespace {

std::vector<fs::path> instance_dirs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::MissingFile, "corpus directory (" + dir.string() + ")");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace

CorpusReport validate_corpus(const fs::path& dir) {
  CorpusReport report;
  for (const auto& sub : instance_dirs(dir)) {
    CorpusEntry entry{sub, std::nullopt, std::nullopt};
    try {
      auto inst = parse_instance_manifest(sub);
      entry.instance_id = inst.instance_id;
      ++report.count;
      ++report.histogram[inst.annotated_component];
    } catch (const Error& e) {
      entry.error = e.what();
      report.errors.push_back(sub.filename().string() + ": " + e.what());
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

std::vector<LoadedInstance> load_corpus(const fs::path& dir) {
  std::vector<LoadedInstance> out;
  for (const auto& sub : instance_dirs(dir)) {
    try {
      out.push_back(LoadedInstance{parse_instance_manifest(sub), sub});
    } catch (const Error& e) {
      throw Error(e.code(), sub.filename().string() + ": " + e.detail());
    }
  }
  return out;
}

std::vector<AnnotatedFix> read_annotated_fixes(const fs::path& path) {
  std::vector<AnnotatedFix> out;
  int line_no = 0;
  for (const auto& line : text::split_lines(text::read_file(path))) {
    ++line_no;
    if (text::is_blank(line)) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<AnnotatedFix>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ManifestInvalid,
                  path.filename().string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), path.filename().string() + ":" + std::to_string(line_no) + ": " +
                                e.detail());
    }
  }
  return out;
}

void write_annotated_fixes(const std::vector<AnnotatedFix>& fixes, const fs::path& path) {
  std::string out;
  for (const auto& f : fixes) out += nlohmann::json(f).dump() + "\n";
  text::write_file(path, out);
}

}  // namespace agentmend
