#include "kbridge/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kbridge/errors.hpp"
#include "kbridge/model.hpp"
#include "kbridge/text.hpp"

namespace kbridge {

using nlohmann::json;

namespace {

class TomlReader {
  public:
    TomlReader(std::string_view src, std::string origin) : src_(src), origin_(std::move(origin)) {}

    json parse() {
        json root = json::object();
        json* table = &root;
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                table = &open_table(root);
            } else {
                auto key = parse_key_path();
                skip_inline_space();
                expect('=');
                skip_inline_space();
                auto value = parse_value();
                assign(*table, key, std::move(value));
            }
            end_of_line();
        }
        return root;
    }

  private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError(origin_ + ":" + std::to_string(line_) + ": " + what);
    }

    bool eof() const { return pos_ >= src_.size(); }
    char peek() const { return eof() ? '\0' : src_[pos_]; }
    char get() {
        char c = src_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        get();
    }

    void skip_inline_space() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) get();
    }
    void skip_comment() {
        if (peek() == '#') {
            while (!eof() && peek() != '\n') get();
        }
    }
    void skip_blank_lines() {
        while (!eof()) {
            skip_inline_space();
            skip_comment();
            if (peek() == '\r') get();
            if (peek() == '\n') {
                get();
                continue;
            }
            break;
        }
    }
    // Whitespace, comments and newlines (inside arrays).
    void skip_all_space() {
        while (!eof()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                get();
            } else if (c == '#') {
                skip_comment();
            } else {
                break;
            }
        }
    }
    void end_of_line() {
        skip_inline_space();
        skip_comment();
        if (peek() == '\r') get();
        if (eof()) return;
        if (peek() != '\n') fail("unexpected text after value");
        get();
    }

    static bool bare_key_char(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    }

    std::string parse_key_part() {
        if (peek() == '"') return parse_basic_string();
        if (peek() == '\'') return parse_literal_string();
        std::string out;
        while (!eof() && bare_key_char(peek())) out += get();
        if (out.empty()) fail("expected a key");
        return out;
    }

    std::vector<std::string> parse_key_path() {
        std::vector<std::string> parts{parse_key_part()};
        skip_inline_space();
        while (peek() == '.') {
            get();
            skip_inline_space();
            parts.push_back(parse_key_part());
            skip_inline_space();
        }
        return parts;
    }

    json& open_table(json& root) {
        expect('[');
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_inline_space();
        auto path = parse_key_path();
        expect(']');
        json* t = &root;
        for (const auto& p : path) {
            if (!t->contains(p)) (*t)[p] = json::object();
            t = &(*t)[p];
            if (!t->is_object()) fail("'" + p + "' is not a table");
        }
        return *t;
    }

    void assign(json& table, const std::vector<std::string>& path, json value) {
        json* t = &table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            if (!t->contains(path[i])) (*t)[path[i]] = json::object();
            t = &(*t)[path[i]];
            if (!t->is_object()) fail("'" + path[i] + "' is not a table");
        }
        if (t->contains(path.back())) fail("duplicate key '" + path.back() + "'");
        (*t)[path.back()] = std::move(value);
    }

    std::string parse_basic_string() {
        expect('"');
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = get();
            if (c == '"') break;
            if (c != '\\') {
                out += c;
                continue;
            }
            if (eof()) fail("unterminated string");
            char e = get();
            switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'u':
                case 'U': {
                    int digits = e == 'u' ? 4 : 8;
                    if (pos_ + digits > src_.size()) fail("bad unicode escape");
                    auto hex = std::string(src_.substr(pos_, digits));
                    pos_ += digits;
                    char32_t cp = 0;
                    try {
                        cp = static_cast<char32_t>(std::stoul(hex, nullptr, 16));
                    } catch (const std::exception&) {
                        fail("bad unicode escape");
                    }
                    text::append_utf8(out, cp);
                    break;
                }
                default:
                    fail(std::string("unknown escape \\") + e);
            }
        }
        return out;
    }

    std::string parse_literal_string() {
        expect('\'');
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = get();
            if (c == '\'') break;
            out += c;
        }
        return out;
    }

    json parse_value() {
        char c = peek();
        if (c == '"') return parse_basic_string();
        if (c == '\'') return parse_literal_string();
        if (c == '[') return parse_array();
        std::string word;
        while (!eof()) {
            char d = peek();
            if (d == ' ' || d == '\t' || d == '\r' || d == '\n' || d == '#' || d == ',' || d == ']') break;
            word += get();
        }
        if (word == "true") return true;
        if (word == "false") return false;
        if (word.empty()) fail("expected a value");
        std::string digits;
        for (char d : word) {
            if (d != '_') digits += d;
        }
        bool is_float = digits.find_first_of(".eE") != std::string::npos;
        try {
            std::size_t used = 0;
            if (is_float) {
                double v = std::stod(digits, &used);
                if (used == digits.size()) return v;
            } else {
                long long v = std::stoll(digits, &used, 10);
                if (used == digits.size()) return v;
            }
        } catch (const std::exception&) {
        }
        fail("invalid value '" + word + "'");
    }

    json parse_array() {
        expect('[');
        json arr = json::array();
        while (true) {
            skip_all_space();
            if (peek() == ']') {
                get();
                return arr;
            }
            arr.push_back(parse_value());
            skip_all_space();
            if (peek() == ',') {
                get();
                continue;
            }
            if (peek() == ']') {
                get();
                return arr;
            }
            fail("expected ',' or ']' in array");
        }
    }

    std::string_view src_;
    std::string origin_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

std::string toml_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

std::string toml_value(const json& v) {
    if (v.is_string()) return toml_string(v.get<std::string>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
        std::ostringstream o;
        o << v.get<double>();
        auto s = o.str();
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        return s;
    }
    if (v.is_array()) {
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ", ";
            out += toml_value(v[i]);
        }
        return out + "]";
    }
    throw std::invalid_argument("value cannot be written as TOML");
}

bool is_header_line(const std::string& line, std::string* name) {
    auto t = text::trim(line);
    if (t.size() < 2 || t.front() != '[' || t[1] == '[') return false;
    auto close = t.find(']');
    if (close == std::string::npos) return false;
    if (name) *name = text::trim(std::string_view(t).substr(1, close - 1));
    return true;
}

}  // namespace

json parse_toml(std::string_view source, const std::string& origin) { return TomlReader(source, origin).parse(); }

std::string render_toml_table(const std::string& header, const json& table) {
    std::string out = "[" + header + "]\n";
    for (const auto& [k, v] : table.items()) out += k + " = " + toml_value(v) + "\n";
    return out;
}

std::string replace_toml_table(const std::string& source, const std::string& header, const json& table) {
    std::istringstream in(source);
    std::vector<std::string> kept;
    std::string line;
    bool skipping = false;
    while (std::getline(in, line)) {
        std::string name;
        if (is_header_line(line, &name)) skipping = name == header;
        if (!skipping) kept.push_back(line);
    }
    while (!kept.empty() && text::trim(kept.back()).empty()) kept.pop_back();
    std::string out;
    for (const auto& l : kept) out += l + "\n";
    if (!out.empty()) out += "\n";
    return out + render_toml_table(header, table);
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
}

const KbEntry* AppConfig::find_kb(const std::string& tag) const {
    for (const auto& kb : kbs) {
        if (kb.tag == tag) return &kb;
    }
    return nullptr;
}

std::optional<std::filesystem::path> default_config_path(const EnvLookup& env) {
    if (auto xdg = env("XDG_CONFIG_HOME")) return std::filesystem::path(*xdg) / "kbridge" / "config.toml";
    if (auto home = env("HOME")) return std::filesystem::path(*home) / ".config" / "kbridge" / "config.toml";
    return std::nullopt;
}

std::optional<std::filesystem::path> resolve_config_path(const ConfigOverrides& flags, const EnvLookup& env) {
    if (flags.config_path) return flags.config_path;
    if (auto p = env("KBRIDGE_CONFIG")) return std::filesystem::path(*p);
    return default_config_path(env);
}

namespace {

const json* section(const json& doc, const std::string& name) {
    auto it = doc.find(name);
    if (it == doc.end()) return nullptr;
    if (!it->is_object()) throw ConfigError("[" + name + "] must be a table");
    return &*it;
}

template <typename T>
std::optional<T> get_opt(const json* table, const std::string& where, const std::string& key) {
    if (!table || !table->contains(key)) return std::nullopt;
    try {
        return table->at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal();
}

std::vector<std::string> string_list(const json* table, const std::string& where, const std::string& key) {
    if (!table || !table->contains(key)) return {};
    const auto& v = table->at(key);
    if (v.is_string()) return {v.get<std::string>()};
    try {
        return v.get<std::vector<std::string>>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " must be a list of strings");
    }
}

ProviderKind provider_kind(const std::string& s) {
    if (s == "scripted") return ProviderKind::Scripted;
    if (s == "live") return ProviderKind::Live;
    throw ConfigError("unknown provider '" + s + "' (expected scripted or live)");
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(what + ": not a number: '" + s + "'");
}

std::size_t parse_size(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(s, &used);
        if (used == s.size() && v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(what + ": not a positive integer: '" + s + "'");
}

KbEntry kb_entry(const std::string& tag, const json& t, const std::filesystem::path& base) {
    auto where = "kb." + tag;
    KbEntry kb;
    kb.tag = tag;
    auto type = get_opt<std::string>(&t, where, "type").value_or("file");
    if (type == "file") {
        kb.type = KbType::File;
        auto path = get_opt<std::string>(&t, where, "path");
        if (!path) throw ConfigError("[" + where + "] needs a path");
        kb.path = resolve(base, *path);
        auto fmt = get_opt<std::string>(&t, where, "format").value_or("triples_tsv");
        auto f = kb_format_from_string(fmt);
        if (!f) throw ConfigError(where + ".format: unknown format '" + fmt + "'");
        kb.format = *f;
        kb.kbqa_mode = get_opt<bool>(&t, where, "kbqa_mode").value_or(false);
        if (t.contains("delimiters")) kb.delimiters = string_list(&t, where, "delimiters");
        if (auto d = get_opt<std::string>(&t, where, "descriptions")) kb.descriptions = resolve(base, *d);
        if (auto a = get_opt<std::string>(&t, where, "aliases")) kb.aliases = resolve(base, *a);
    } else if (type == "remote") {
        kb.type = KbType::Remote;
        kb.search_url = get_opt<std::string>(&t, where, "search_url").value_or("");
        kb.linking_url = get_opt<std::string>(&t, where, "linking_url").value_or("");
        kb.entity_url = get_opt<std::string>(&t, where, "entity_url").value_or("");
        if (kb.entity_url.empty()) throw ConfigError("[" + where + "] needs an entity_url");
        if (auto n = get_opt<long long>(&t, where, "max_candidates")) {
            if (*n <= 0) throw ConfigError(where + ".max_candidates must be positive");
            kb.max_candidates = static_cast<std::size_t>(*n);
        }
        if (auto d = get_opt<std::string>(&t, where, "transport_dir")) kb.transport_dir = resolve(base, *d);
    } else {
        throw ConfigError(where + ".type: unknown type '" + type + "'");
    }
    return kb;
}

void check_fraction(double v, const std::string& name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(name + " must be within [0, 1]");
}

void check_exists(const std::filesystem::path& p, const std::string& what) {
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) throw ConfigError(what + " not found: " + p.string());
}

}  // namespace

AppConfig config_from_toml(const json& doc, const std::filesystem::path& base) {
    AppConfig c;
    if (const auto* p = section(doc, "provider")) {
        if (auto k = get_opt<std::string>(p, "provider", "kind")) c.provider = provider_kind(*k);
        for (const auto& f : string_list(p, "provider", "fixtures")) c.fixtures.push_back(resolve(base, f));
        if (auto r = get_opt<std::string>(p, "provider", "record_misses")) c.record_misses = resolve(base, *r);
        if (auto v = get_opt<std::string>(p, "provider", "base_url")) c.base_url = *v;
        if (auto v = get_opt<std::string>(p, "provider", "model")) c.model = *v;
        if (auto v = get_opt<std::string>(p, "provider", "api_key")) c.api_key = *v;
        if (auto v = get_opt<long long>(p, "provider", "timeout_seconds")) c.timeout_seconds = static_cast<int>(*v);
    }
    if (const auto* e = section(doc, "embedding")) {
        auto kind = get_opt<std::string>(e, "embedding", "kind").value_or("hash");
        if (kind == "hash") {
            c.embedding = EmbeddingKind::Hash;
        } else if (kind == "remote") {
            c.embedding = EmbeddingKind::Remote;
        } else {
            throw ConfigError("embedding.kind: unknown kind '" + kind + "'");
        }
        if (auto d = get_opt<long long>(e, "embedding", "dimension")) {
            if (*d <= 0) throw ConfigError("embedding.dimension must be positive");
            c.embedding_dimension = static_cast<std::size_t>(*d);
        }
        if (auto v = get_opt<std::string>(e, "embedding", "base_url")) c.embedding_url = *v;
        if (auto v = get_opt<std::string>(e, "embedding", "model")) c.embedding_model = *v;
    }
    if (const auto* p = section(doc, "pkb")) {
        if (auto v = get_opt<std::string>(p, "pkb", "path")) c.pkb_path = resolve(base, *v);
    }
    if (const auto* t = section(doc, "thresholds")) {
        if (auto v = get_opt<double>(t, "thresholds", "relation_threshold")) c.relation_threshold = *v;
        if (auto v = get_opt<double>(t, "thresholds", "relation_floor")) c.relation_floor = *v;
        if (auto v = get_opt<double>(t, "thresholds", "embedding_match")) c.embedding_match = *v;
        if (auto v = get_opt<long long>(t, "thresholds", "message_cap")) {
            if (*v <= 0) throw ConfigError("thresholds.message_cap must be positive");
            c.message_cap = static_cast<std::size_t>(*v);
        }
    }
    if (const auto* r = section(doc, "routing")) {
        for (const auto& [lang, _] : r->items()) c.routing[lang] = string_list(r, "routing", lang);
    }
    if (const auto* kbs = section(doc, "kb")) {
        for (const auto& [tag, t] : kbs->items()) {
            if (!t.is_object()) throw ConfigError("[kb." + tag + "] must be a table");
            c.kbs.push_back(kb_entry(tag, t, base));
        }
    }
    return c;
}

AppConfig load_config(const ConfigOverrides& flags, const EnvLookup& env) {
    AppConfig c;
    auto path = resolve_config_path(flags, env);
    bool explicit_path = flags.config_path.has_value() || env("KBRIDGE_CONFIG").has_value();
    std::error_code ec;
    if (path && std::filesystem::exists(*path, ec)) {
        std::ifstream in(*path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config " + path->string());
        std::stringstream buf;
        buf << in.rdbuf();
        c = config_from_toml(parse_toml(buf.str(), path->string()), path->parent_path());
        c.source = *path;
    } else if (path && explicit_path) {
        throw ConfigError("config file not found: " + path->string());
    }

    if (flags.provider) {
        c.provider = provider_kind(*flags.provider);
    } else if (auto v = env("KBRIDGE_PROVIDER")) {
        c.provider = provider_kind(*v);
    }
    if (!flags.fixtures.empty()) {
        c.fixtures = flags.fixtures;
    } else if (auto v = env("KBRIDGE_FIXTURES")) {
        c.fixtures.clear();
        for (const auto& p : text::split(*v, ':')) {
            if (!p.empty()) c.fixtures.emplace_back(p);
        }
    }
    if (flags.record_misses) {
        c.record_misses = flags.record_misses;
    } else if (auto v = env("KBRIDGE_RECORD_MISSES")) {
        c.record_misses = std::filesystem::path(*v);
    }
    if (auto v = env("KNOWLEDGPT_API_KEY")) c.api_key = *v;
    if (auto v = env("KBRIDGE_BASE_URL")) c.base_url = *v;
    if (auto v = env("KBRIDGE_MODEL")) c.model = *v;

    if (flags.pkb_path) {
        c.pkb_path = flags.pkb_path;
    } else if (auto v = env("KBRIDGE_PKB")) {
        c.pkb_path = std::filesystem::path(*v);
    }

    auto real = [&](const std::optional<double>& flag, const char* var, double& slot) {
        if (flag) {
            slot = *flag;
        } else if (auto v = env(var)) {
            slot = parse_double(*v, var);
        }
    };
    real(flags.relation_threshold, "KBRIDGE_RELATION_THRESHOLD", c.relation_threshold);
    real(flags.relation_floor, "KBRIDGE_RELATION_FLOOR", c.relation_floor);
    real(flags.embedding_match, "KBRIDGE_EMBEDDING_MATCH", c.embedding_match);
    if (flags.message_cap) {
        c.message_cap = *flags.message_cap;
    } else if (auto v = env("KBRIDGE_MESSAGE_CAP")) {
        c.message_cap = parse_size(*v, "KBRIDGE_MESSAGE_CAP");
    }

    check_fraction(c.relation_threshold, "relation_threshold");
    check_fraction(c.relation_floor, "relation_floor");
    check_fraction(c.embedding_match, "embedding_match");
    if (c.message_cap == 0) throw ConfigError("message_cap must be positive");

    if (c.provider == ProviderKind::Scripted) {
        for (const auto& f : c.fixtures) check_exists(f, "fixture directory");
    }
    for (const auto& kb : c.kbs) {
        if (kb.type == KbType::File) {
            check_exists(kb.path, "KB file for '" + kb.tag + "'");
            if (kb.descriptions) check_exists(*kb.descriptions, "descriptions file for '" + kb.tag + "'");
            if (kb.aliases) check_exists(*kb.aliases, "aliases file for '" + kb.tag + "'");
        } else if (kb.transport_dir) {
            check_exists(*kb.transport_dir, "transport directory for '" + kb.tag + "'");
        }
    }
    for (const auto& [lang, tags] : c.routing) {
        for (const auto& tag : tags) {
            if (tag != "PKB" && !c.find_kb(tag)) throw ConfigError("routing." + lang + " names unknown KB '" + tag + "'");
        }
    }
    return c;
}

}  // namespace kbridge
