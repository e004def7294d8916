#include <fstream>

#include "kbridge/errors.hpp"
#include "kbridge/eval.hpp"
#include "kbridge/text.hpp"

namespace kbridge {

std::string normalize_answer(std::string_view s) { return text::case_fold(text::trim(text::to_half_width(s))); }

double averaged_f1(const std::vector<std::string>& predictions, const std::vector<std::string>& golds) {
    if (predictions.size() != golds.size()) throw std::invalid_argument("predictions and golds differ in length");
    if (predictions.empty()) throw std::invalid_argument("no predictions to score");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (normalize_answer(predictions[i]) == normalize_answer(golds[i])) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

Stoplist Stoplist::load(const std::filesystem::path& dir) {
    Stoplist s;
    bool any = false;
    for (const char* name : {"en.txt", "zh.txt"}) {
        std::ifstream in(dir / name);
        if (!in) continue;
        any = true;
        std::string line;
        while (std::getline(in, line)) {
            auto w = text::trim(line);
            if (w.empty() || w[0] == '#') continue;
            s.words_.insert(text::case_fold(w));
        }
    }
    if (!any) throw IoError("no stoplists found in " + dir.string());
    return s;
}

const Stoplist& Stoplist::bundled() {
    static const Stoplist s = load(std::filesystem::path(KBRIDGE_DATA_DIR) / "stopwords");
    return s;
}

bool Stoplist::contains(const std::string& token) const { return words_.contains(token); }

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ascii_word(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

std::string undouble(std::string s) {
    auto n = s.size();
    if (n >= 3 && s[n - 1] == s[n - 2] && !is_vowel(s[n - 1]) && s[n - 1] != 'l' && s[n - 1] != 's' &&
        s[n - 1] != 'z') {
        s.pop_back();
    }
    return s;
}

bool has_vowel(const std::string& s) { return std::any_of(s.begin(), s.end(), is_vowel) || s.find('y') != std::string::npos; }

}  // namespace

std::string lemmatize(const std::string& token) {
    if (!ascii_word(token) || token.size() <= 3) return token;
    std::string w = token;
    if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
    if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
    if (ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes")) return w.substr(0, w.size() - 2);
    if (ends_with(w, "ied") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
    if (ends_with(w, "ing") && w.size() > 5) {
        auto stem = w.substr(0, w.size() - 3);
        if (has_vowel(stem)) return undouble(stem);
    }
    if (ends_with(w, "ed") && w.size() > 4 && !ends_with(w, "eed")) {
        auto stem = w.substr(0, w.size() - 2);
        if (has_vowel(stem)) return undouble(stem);
    }
    if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
        return w.substr(0, w.size() - 1);
    }
    return w;
}

std::set<std::string> word_set(std::string_view s, const Stoplist& stoplist) {
    std::set<std::string> out;
    for (const auto& tok : text::tokenize(s)) {
        if (stoplist.contains(tok)) continue;
        out.insert(lemmatize(tok));
    }
    return out;
}

std::string record_text(const ExtractedRecord& r) {
    std::string out = text::join(r.entity.items(), " ");
    if (!r.label.empty()) out += " " + r.label;
    out += " " + r.value;
    return out;
}

double word_recall(const std::vector<ExtractedRecord>& extracted, std::string_view doc, const Stoplist& stoplist) {
    if (text::trim(doc).empty()) throw std::invalid_argument("document is empty");
    auto w_doc = word_set(doc, stoplist);
    std::set<std::string> w_ext;
    for (const auto& r : extracted) {
        auto w = word_set(record_text(r), stoplist);
        w_ext.insert(w.begin(), w.end());
    }
    if (w_doc.empty()) {
        if (w_ext.empty()) return 1.0;
        throw std::invalid_argument("document has no content words");
    }
    std::size_t hit = 0;
    for (const auto& w : w_doc) hit += w_ext.contains(w) ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(w_doc.size());
}

}  // namespace kbridge
