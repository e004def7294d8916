#include "kbridge/prompts.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kbridge/errors.hpp"

#ifndef KBRIDGE_DATA_DIR
#define KBRIDGE_DATA_DIR "data"
#endif

namespace kbridge {
namespace {

constexpr std::string_view kExampleSeparator = "=== example ===";

std::string file_name(PromptName name) {
    switch (name) {
        case PromptName::SearchCode:
            return "search_code.txt";
        case PromptName::EntityLinking:
            return "entity_linking.txt";
        case PromptName::Answer:
            return "answer.txt";
        case PromptName::Extraction:
            break;
    }
    return "extraction.txt";
}

std::string rstrip_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace

std::set<std::string> PromptTemplate::placeholders() const {
    std::set<std::string> out;
    std::size_t pos = 0;
    while ((pos = body.find("{{", pos)) != std::string::npos) {
        auto end = body.find("}}", pos + 2);
        if (end == std::string::npos) break;
        out.insert(body.substr(pos + 2, end - pos - 2));
        pos = end + 2;
    }
    return out;
}

const std::set<std::string>& required_slots(PromptName name) {
    static const std::map<PromptName, std::set<std::string>> kSlots = {
        {PromptName::SearchCode, {"query"}},
        {PromptName::EntityLinking, {"query", "entity_aliases", "relation_aliases", "candidates"}},
        {PromptName::Answer, {"query", "knowledge"}},
        {PromptName::Extraction, {"document"}},
    };
    return kSlots.at(name);
}

PromptTemplate parse_template(PromptName name, const std::string& file_text) {
    PromptTemplate t;
    t.name = name;
    std::istringstream in(file_text);
    std::string line;
    std::vector<std::string> sections(1);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == kExampleSeparator) {
            sections.emplace_back();
            continue;
        }
        sections.back() += line;
        sections.back() += '\n';
    }
    t.body = rstrip_newlines(sections.front());
    for (std::size_t i = 1; i < sections.size(); ++i) t.in_context_examples.push_back(rstrip_newlines(sections[i]));

    auto expected = required_slots(name);
    expected.insert("examples");
    if (t.placeholders() != expected) {
        throw ConfigError("template " + std::string(to_string(name)) + " has unexpected placeholders");
    }
    return t;
}

PromptCatalog PromptCatalog::load(const std::filesystem::path& dir) {
    PromptCatalog catalog;
    for (auto n : {PromptName::SearchCode, PromptName::EntityLinking, PromptName::Answer, PromptName::Extraction}) {
        auto path = dir / file_name(n);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("missing prompt template " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        catalog.templates_.emplace(n, parse_template(n, ss.str()));
    }
    return catalog;
}

std::filesystem::path PromptCatalog::default_dir() { return std::filesystem::path(KBRIDGE_DATA_DIR) / "prompts"; }

const PromptTemplate& PromptCatalog::get(PromptName name) const { return templates_.at(name); }

std::string PromptCatalog::fill(PromptName name, const Slots& slots) const {
    const auto& t = get(name);
    const auto& required = required_slots(name);
    if (slots.size() != required.size()) {
        throw std::invalid_argument("wrong slot count for template " + std::string(to_string(name)));
    }
    for (const auto& [k, _] : slots) {
        if (!required.contains(k)) throw std::invalid_argument("unknown slot '" + k + "'");
    }
    std::string examples;
    for (std::size_t i = 0; i < t.in_context_examples.size(); ++i) {
        if (i) examples += "\n\n";
        examples += t.in_context_examples[i];
    }
    // Single left-to-right pass so slot values containing "{{" are left alone.
    std::string out;
    std::size_t pos = 0;
    while (true) {
        auto open = t.body.find("{{", pos);
        if (open == std::string::npos) {
            out.append(t.body, pos);
            break;
        }
        auto close = t.body.find("}}", open + 2);
        out.append(t.body, pos, open - pos);
        auto key = t.body.substr(open + 2, close - open - 2);
        out += key == "examples" ? examples : slots.at(key);
        pos = close + 2;
    }
    return out;
}

}  // namespace kbridge
