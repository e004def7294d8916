#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kbridge/llm.hpp"

namespace kbridge {

/// One prompt. `body` contains {{slot}} placeholders plus an {{examples}}
/// placeholder where the in-context examples are spliced in.
struct PromptTemplate {
    PromptName name = PromptName::SearchCode;
    std::string body;
    std::vector<std::string> in_context_examples;

    std::set<std::string> placeholders() const;
};

/// Slots each template must receive (excluding "examples").
const std::set<std::string>& required_slots(PromptName name);

/// Loads the four templates from a directory of editable text files
/// (search_code.txt, entity_linking.txt, answer.txt, extraction.txt). Within a
/// file, lines equal to "=== example ===" separate the body from each
/// in-context example.
class PromptCatalog {
  public:
    static PromptCatalog load(const std::filesystem::path& dir);
    static std::filesystem::path default_dir();

    const PromptTemplate& get(PromptName name) const;

    /// Throws std::invalid_argument when slots do not match the template's
    /// placeholders exactly.
    std::string fill(PromptName name, const Slots& slots) const;

  private:
    std::map<PromptName, PromptTemplate> templates_;
};

PromptTemplate parse_template(PromptName name, const std::string& file_text);

}  // namespace kbridge
