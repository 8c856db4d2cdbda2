#include "agentmend/prompts.hpp"

#include "agentmend/error.hpp"
#include "agentmend/hashing.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

namespace detail {
const std::map<std::string, std::string>& builtin_prompt_texts();
}

std::string render_template(const std::string& tmpl, const PromptVars& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string::npos) {
        const auto it = vars.find(tmpl.substr(i + 1, close - i - 1));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

const PromptLibrary& PromptLibrary::builtin() {
  static const PromptLibrary lib = [] {
    PromptLibrary l;
    l.templates_ = detail::builtin_prompt_texts();
    return l;
  }();
  return lib;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  PromptLibrary lib = builtin();
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error(Errc::MissingFile, "prompt directory " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    lib.templates_[entry.path().stem().string()] = text::read_file(entry.path());
  }
  return lib;
}

const std::string& PromptLibrary::get(const std::string& name) const {
  const auto it = templates_.find(name);
  if (it == templates_.end()) throw Error(Errc::ConfigInvalid, "unknown prompt template " + name);
  return it->second;
}

std::string PromptLibrary::render(const std::string& name, const PromptVars& vars) const {
  return render_template(get(name), vars);
}

std::map<std::string, std::string> PromptLibrary::hashes() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, body] : templates_) out[name] = sha256_hex(body);
  return out;
}

}  // namespace agentmend
