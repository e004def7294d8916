#include "kbridge/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "kbridge/errors.hpp"
#include "kbridge/eval.hpp"
#include "kbridge/text.hpp"

namespace kbridge::cli {

namespace {

std::string language_key(Language lang) {
    switch (lang) {
        case Language::English:
            return "en";
        case Language::Chinese:
            return "zh";
        case Language::Other:
            break;
    }
    return "other";
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string read_stream(std::istream& in) {
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

Runtime::Runtime(AppConfig config) : config_(std::move(config)) {
    if (config_.provider == ProviderKind::Scripted) {
        auto scripted = std::make_unique<ScriptedProvider>(config_.fixtures);
        if (config_.record_misses) scripted->record_misses_to(*config_.record_misses);
        provider_ = std::move(scripted);
    } else {
        if (config_.api_key.empty()) throw ConfigError("live provider needs KNOWLEDGPT_API_KEY");
        provider_ = std::make_unique<LiveProvider>(
            LiveProviderConfig{config_.base_url, config_.model, config_.api_key, config_.timeout_seconds});
    }
    gateway_ = std::make_unique<LlmGateway>(*provider_, PromptCatalog::load(PromptCatalog::default_dir()));
    if (config_.embedding == EmbeddingKind::Hash) {
        embedder_ = std::make_unique<HashEmbedder>(config_.embedding_dimension);
    } else {
        if (config_.api_key.empty()) throw ConfigError("remote embedding needs KNOWLEDGPT_API_KEY");
        RemoteEmbeddingConfig rc;
        rc.base_url = config_.embedding_url;
        rc.model = config_.embedding_model;
        rc.api_key = config_.api_key;
        rc.dimension = config_.embedding_dimension;
        embedder_ = std::make_unique<RemoteEmbedder>(rc);
    }
}

RetrievalConfig Runtime::retrieval() const {
    RetrievalConfig r;
    r.relation_threshold = config_.relation_threshold;
    r.relation_floor = config_.relation_floor;
    r.message_cap = config_.message_cap;
    return r;
}

KbBackend& Runtime::kb(const std::string& tag) {
    if (tag == "PKB") return pkb();
    if (auto it = kbs_.find(tag); it != kbs_.end()) return *it->second;
    const auto* entry = config_.find_kb(tag);
    if (!entry) throw ConfigError("unknown KB '" + tag + "'");
    std::unique_ptr<KbBackend> backend;
    if (entry->type == KbType::File) {
        FileKbOptions opts;
        opts.kb_tag = tag;
        opts.tail_split_delimiters = entry->delimiters;
        opts.kbqa_mode = entry->kbqa_mode;
        opts.descriptions_path = entry->descriptions;
        opts.aliases_path = entry->aliases;
        backend = std::make_unique<FileKb>(load_file_kb(entry->path, entry->format, opts));
    } else {
        RemoteKbConfig rc;
        rc.kb_tag = tag;
        rc.search_url = entry->search_url;
        rc.linking_url = entry->linking_url;
        rc.entity_url = entry->entity_url;
        rc.max_candidates = entry->max_candidates;
        std::shared_ptr<Transport> transport;
        if (entry->transport_dir) {
            transport = std::make_shared<MockTransport>(*entry->transport_dir);
        } else {
            transport = std::make_shared<HttpTransport>(config_.timeout_seconds);
        }
        backend = std::make_unique<RemoteKb>(rc, transport);
    }
    auto& ref = *backend;
    kbs_.emplace(tag, std::move(backend));
    return ref;
}

const FileKb& Runtime::file_kb(const std::string& tag) {
    const auto* entry = config_.find_kb(tag);
    if (!entry) throw ConfigError("unknown KB '" + tag + "'");
    if (entry->type != KbType::File) throw ConfigError("KB '" + tag + "' is not a file KB");
    return static_cast<const FileKb&>(kb(tag));
}

PkbStore& Runtime::pkb() {
    if (pkb_) return *pkb_;
    PkbOptions opts;
    opts.match_threshold = config_.embedding_match;
    if (!config_.pkb_path) {
        pkb_ = std::make_unique<PkbStore>(*embedder_, opts);
        return *pkb_;
    }
    const auto& path = *config_.pkb_path;
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
        pkb_ = std::make_unique<PkbStore>(PkbStore::load(path, *embedder_, opts));
    } else {
        auto parent = path.parent_path();
        if (!parent.empty() && !std::filesystem::is_directory(parent, ec)) {
            throw ConfigError("PKB directory not found: " + parent.string());
        }
        pkb_ = std::make_unique<PkbStore>(*embedder_, opts);
    }
    pkb_->set_path(path);
    return *pkb_;
}

std::vector<KbBackend*> Runtime::backends_for(const Query& query, const std::vector<std::string>& tags,
                                              bool include_session_pkb) {
    std::vector<std::string> chosen = tags;
    if (chosen.empty()) {
        auto it = config_.routing.find(language_key(query.language));
        if (it == config_.routing.end()) it = config_.routing.find("default");
        if (it != config_.routing.end()) {
            chosen = it->second;
        } else {
            for (const auto& kb : config_.kbs) chosen.push_back(kb.tag);
        }
        bool want_pkb = include_session_pkb || config_.pkb_path.has_value();
        if (want_pkb && std::find(chosen.begin(), chosen.end(), "PKB") == chosen.end()) chosen.push_back("PKB");
    }
    std::vector<KbBackend*> out;
    for (const auto& tag : chosen) out.push_back(&kb(tag));
    return out;
}

namespace {

struct AskFlags {
    std::vector<std::string> kbs;
    bool show_trace = false;
    bool no_kb = false;
};

void print_trace(const AnswerResult& result, std::ostream& out) {
    for (const auto& ex : result.executions) {
        out << "[trace " << ex.kb_tag << "]\n";
        for (const auto& e : ex.outcome.trace.entries()) {
            out << "  " << e.call_rendering << " -> " << e.result_rendering << "\n";
        }
        if (ex.outcome.halted_early) out << "  halted: " << ex.outcome.halt_reason.value_or("unknown") << "\n";
    }
}

void ask(Runtime& rt, const std::string& question, const AskFlags& flags, bool session_pkb, std::ostream& out) {
    auto query = Query::from_text(question);
    if (flags.no_kb) {
        AnswerOutput direct;
        try {
            direct = rt.gateway().answer_with_knowledge(query, "");
        } catch (const MalformedOutput& e) {
            throw ProviderError(std::string("answer step: ") + e.what());
        }
        out << direct.answer << "\n";
        return;
    }
    auto backends = rt.backends_for(query, flags.kbs, session_pkb);
    auto result = answer_query(query, backends, rt.gateway(), rt.embedder(), rt.retrieval());
    out << result.answer << "\n";
    if (flags.show_trace) print_trace(result, out);
}

std::size_t store(Runtime& rt, const std::string& doc) {
    return store_document(doc, rt.pkb(), rt.gateway()).size();
}

std::string import_summary(const FileKb& kb) {
    auto s = std::to_string(kb.triple_count()) + (kb.triple_count() == 1 ? " triple" : " triples");
    if (kb.malformed_count()) s += ", " + std::to_string(kb.malformed_count()) + " skipped";
    return s;
}

int run_repl(Runtime& rt, const AskFlags& flags, std::istream& in, std::ostream& out, std::ostream& err) {
    std::string line;
    while (std::getline(in, line)) {
        auto input = text::trim(line);
        if (input.empty()) continue;
        try {
            if (input == ":quit") return kExitOk;
            if (input[0] == ':') {
                auto space = input.find(' ');
                auto directive = input.substr(0, space);
                if (directive != ":store") {
                    err << "error: unknown directive " << directive << "\n";
                    continue;
                }
                auto file = space == std::string::npos ? std::string() : text::trim(input.substr(space + 1));
                if (file.empty()) {
                    err << "error: :store needs a file\n";
                    continue;
                }
                out << "stored " << store(rt, read_file(file)) << " records\n";
                continue;
            }
            ask(rt, input, flags, true, out);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
        }
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
        const EnvLookup& env) {
    CLI::App app{"Answer questions over knowledge bases with a language model", "kbridge"};
    app.require_subcommand(1);
    app.fallthrough();

    ConfigOverrides over;
    std::string config_path, provider, record_misses, pkb_path;
    std::vector<std::string> fixtures;
    double relation_threshold = 0, relation_floor = 0, embedding_match = 0;
    std::size_t message_cap = 0;
    bool verbose = false;
    app.add_option("--config", config_path, "Config file (TOML)");
    app.add_option("--provider", provider, "scripted or live");
    app.add_option("--fixtures", fixtures, "Scripted provider fixture directories");
    app.add_option("--record-misses", record_misses, "Write stubs for unanswered scripted requests here");
    app.add_option("--pkb", pkb_path, "Personal KB file");
    auto* o_rt = app.add_option("--relation-threshold", relation_threshold, "PKB: return every relation scoring at least this");
    auto* o_rf = app.add_option("--relation-floor", relation_floor, "Below this the description is searched instead");
    auto* o_em = app.add_option("--embedding-match", embedding_match, "PKB: minimum alias similarity for an entity match");
    auto* o_mc = app.add_option("--message-cap", message_cap, "Characters of knowledge passed to the answer step");
    app.add_flag("-v,--verbose", verbose, "Debug logging on stderr");

    AskFlags ask_flags;
    std::string question;
    auto* c_ask = app.add_subcommand("ask", "Answer one question");
    c_ask->add_option("question", question)->required();
    c_ask->add_option("--kb", ask_flags.kbs, "KB tags to query");
    c_ask->add_flag("--show-trace", ask_flags.show_trace, "Print each KB's call trace");
    c_ask->add_flag("--no-kb", ask_flags.no_kb, "Answer without retrieval");

    std::string store_file;
    auto* c_store = app.add_subcommand("store", "Extract a document into the personal KB");
    c_store->add_option("--file", store_file, "Document (default: stdin)");

    std::string import_format, import_tag, import_path, import_desc, import_aliases;
    bool import_kbqa = false;
    auto* c_import = app.add_subcommand("import", "Register a TSV knowledge base");
    c_import->add_option("--format", import_format, "nlpcc_tsv or triples_tsv")->required();
    c_import->add_option("--out", import_tag, "Tag to register the KB under")->required();
    c_import->add_option("--descriptions", import_desc, "entity<TAB>description sidecar");
    c_import->add_option("--aliases", import_aliases, "entity<TAB>alias sidecar");
    c_import->add_flag("--kbqa", import_kbqa, "Hint-ranked triples and relation re-alignment");
    c_import->add_option("path", import_path)->required();

    std::string dataset, system_name, eval_kb, report_path;
    std::size_t parallelism = 4;
    auto* c_eval = app.add_subcommand("eval", "Evaluate a system on a QA dataset");
    c_eval->add_option("--dataset", dataset, "question<TAB>answer<TAB>hops file")->required();
    c_eval->add_option("--system", system_name, "knowledgpt, bm25 or embedding")->required();
    c_eval->add_option("--kb", eval_kb, "KB tag");
    c_eval->add_option("--report", report_path, "Write the JSON report here (table next to it as .txt)");
    c_eval->add_option("--parallelism", parallelism, "Examples evaluated concurrently")->check(CLI::PositiveNumber);

    auto* c_repl = app.add_subcommand("repl", "Interactive question loop");
    c_repl->add_option("--kb", ask_flags.kbs, "KB tags to query");
    c_repl->add_flag("--show-trace", ask_flags.show_trace, "Print each KB's call trace");
    c_repl->add_flag("--no-kb", ask_flags.no_kb, "Answer without retrieval");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

    if (!config_path.empty()) over.config_path = config_path;
    if (!provider.empty()) over.provider = provider;
    for (const auto& f : fixtures) over.fixtures.emplace_back(f);
    if (!record_misses.empty()) over.record_misses = record_misses;
    if (!pkb_path.empty()) over.pkb_path = pkb_path;
    if (o_rt->count()) over.relation_threshold = relation_threshold;
    if (o_rf->count()) over.relation_floor = relation_floor;
    if (o_em->count()) over.embedding_match = embedding_match;
    if (o_mc->count()) over.message_cap = message_cap;

    try {
        if (c_import->parsed()) {
            auto format = kb_format_from_string(import_format);
            if (!format) throw ConfigError("unknown format '" + import_format + "'");
            FileKbOptions opts;
            opts.kb_tag = import_tag;
            opts.kbqa_mode = import_kbqa;
            auto abs = [](const std::string& p) { return std::filesystem::absolute(p).lexically_normal(); };
            if (!import_desc.empty()) opts.descriptions_path = abs(import_desc);
            if (!import_aliases.empty()) opts.aliases_path = abs(import_aliases);
            auto kb = load_file_kb(import_path, *format, opts);

            auto target = resolve_config_path(over, env);
            if (!target) throw ConfigError("no config file to register the KB in (use --config)");
            std::string existing;
            std::error_code ec;
            if (std::filesystem::exists(*target, ec)) {
                existing = read_file(*target);
                parse_toml(existing, target->string());
            } else if (target->has_parent_path()) {
                std::filesystem::create_directories(target->parent_path(), ec);
            }
            nlohmann::json table{{"type", "file"},
                                 {"path", abs(import_path).string()},
                                 {"format", std::string(to_string(*format))}};
            if (import_kbqa) table["kbqa_mode"] = true;
            if (opts.descriptions_path) table["descriptions"] = opts.descriptions_path->string();
            if (opts.aliases_path) table["aliases"] = opts.aliases_path->string();
            auto updated = replace_toml_table(existing, "kb." + import_tag, table);
            std::ofstream o(*target, std::ios::binary | std::ios::trunc);
            if (!o || !(o << updated) || !o.flush()) throw IoError("cannot write " + target->string());
            out << import_summary(kb) << "\n";
            return kExitOk;
        }

        std::optional<EvalSystem> system;
        if (c_eval->parsed()) {
            system = eval_system_from_string(system_name);
            if (!system) throw ConfigError("unknown system '" + system_name + "' (expected knowledgpt, bm25 or embedding)");
        }

        Runtime rt(load_config(over, env));

        if (c_ask->parsed()) {
            ask(rt, question, ask_flags, false, out);
            return kExitOk;
        }
        if (c_store->parsed()) {
            if (!rt.has_pkb_path()) throw ConfigError("store needs a PKB path (--pkb, KBRIDGE_PKB or [pkb] path)");
            auto doc = store_file.empty() ? read_stream(in) : read_file(store_file);
            if (text::trim(doc).empty()) throw ConfigError("document is empty");
            out << "stored " << store(rt, doc) << " records\n";
            return kExitOk;
        }
        if (c_eval->parsed()) {
            auto examples = load_qa_tsv(dataset);
            std::string tag = eval_kb;
            if (tag.empty()) {
                std::vector<std::string> files;
                for (const auto& kb : rt.config().kbs) {
                    if (kb.type == KbType::File) files.push_back(kb.tag);
                }
                if (files.size() != 1) throw ConfigError("eval needs --kb when there is not exactly one file KB");
                tag = files.front();
            }
            EvalContext ctx;
            ctx.kb = &rt.file_kb(tag);
            ctx.backends = {&rt.kb(tag)};
            ctx.gateway = &rt.gateway();
            ctx.embedder = &rt.embedder();
            ctx.retrieval = rt.retrieval();
            ctx.parallelism = parallelism;
            auto report = run_eval(examples, *system, ctx);
            auto table = report.to_table();
            if (!report_path.empty()) {
                std::filesystem::path json_path(report_path);
                auto table_path = json_path;
                table_path.replace_extension(".txt");
                std::ofstream j(json_path, std::ios::binary | std::ios::trunc);
                if (!j || !(j << report.to_json().dump(2) << "\n")) throw IoError("cannot write " + json_path.string());
                std::ofstream t(table_path, std::ios::binary | std::ios::trunc);
                if (!t || !(t << table)) throw IoError("cannot write " + table_path.string());
            }
            out << table;
            return kExitOk;
        }
        if (c_repl->parsed()) return run_repl(rt, ask_flags, in, out, err);
    } catch (const ProviderError& e) {
        err << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const MalformedOutput& e) {
        err << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace kbridge::cli
