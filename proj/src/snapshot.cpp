#include "nextkey/snapshot.hpp"

#include <fstream>
#include <sstream>

namespace nextkey {

using json = nlohmann::json;

namespace {

json optional_to_json(const std::optional<std::size_t>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
T required(const json& j, const char* field) {
    const auto it = j.find(field);
    if (it == j.end()) {
        throw SnapshotError(std::string("missing field \"") + field + "\"");
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw SnapshotError(std::string("field \"") + field + "\" has the wrong type");
    }
}

std::optional<std::size_t> optional_count(const json& j, const char* field) {
    const auto it = j.find(field);
    if (it == j.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_number_unsigned()) {
        throw SnapshotError(std::string("field \"") + field + "\" must be a count or null");
    }
    return it->get<std::size_t>();
}

char32_t single_key(const std::string& utf8) {
    const std::u32string key = decode_utf8(utf8);
    if (key.size() != 1) {
        throw SnapshotError("node key must be exactly one character");
    }
    return key.front();
}

json children_to_json(const WeightedTrie& trie, Cursor at) {
    json children = json::array();
    for (Cursor c : trie.children(at)) {
        json node{{"key", encode_utf8(trie.key(c))}, {"weight", trie.weight(c)}};
        if (const WordEnd* end = trie.word_end(c)) {
            node["word_end"] = {
                {"count", end->count}, {"last_used", end->last_used}, {"seq", end->seq}};
        }
        if (!trie.children(c).empty()) {
            node["children"] = children_to_json(trie, c);
        }
        children.push_back(std::move(node));
    }
    return children;
}

void restore_children(WeightedTrie& trie, Cursor at, const json& node) {
    const auto it = node.find("children");
    if (it == node.end()) {
        return;
    }
    if (!it->is_array()) {
        throw SnapshotError("\"children\" must be an array");
    }
    for (const json& child : *it) {
        if (!child.is_object()) {
            throw SnapshotError("trie node must be an object");
        }
        const char32_t key = single_key(required<std::string>(child, "key"));
        const Cursor c = trie.restore_child(at, key, required<std::uint64_t>(child, "weight"));
        if (const auto end = child.find("word_end"); end != child.end()) {
            trie.restore_word_end(c, WordEnd{required<std::uint64_t>(*end, "count"),
                                             required<Timestamp>(*end, "last_used"),
                                             end->value("seq", std::uint64_t{0})});
        }
        restore_children(trie, c, child);
    }
}

}  // namespace

json config_to_json(const EngineConfig& config) {
    return json{
        {"partitions", config.partitions},
        {"conf", config.conf},
        {"diff", config.diff},
        {"n_initial", config.n_initial},
        {"n_min", config.n_min},
        {"separators", config.separators.is_default()
                           ? json(nullptr)
                           : json(encode_utf8(config.separators.chars()))},
        {"word_budget", optional_to_json(config.word_budget)},
        {"alphabet_cap", optional_to_json(config.alphabet_cap)},
        {"utc_offset", config.utc_offset},
    };
}

EngineConfig config_from_json(const json& j) {
    if (!j.is_object()) {
        throw SnapshotError("\"config\" must be an object");
    }
    EngineConfig config;
    config.partitions = required<std::size_t>(j, "partitions");
    config.conf = required<std::size_t>(j, "conf");
    config.diff = required<std::size_t>(j, "diff");
    config.n_initial = required<std::size_t>(j, "n_initial");
    config.n_min = required<std::size_t>(j, "n_min");
    if (const auto it = j.find("separators"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) {
            throw SnapshotError("\"separators\" must be a string or null");
        }
        config.separators = SeparatorSet(decode_utf8(it->get<std::string>()));
    }
    config.word_budget = optional_count(j, "word_budget");
    config.alphabet_cap = optional_count(j, "alphabet_cap");
    config.utc_offset = j.value("utc_offset", std::int64_t{0});
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw SnapshotError(std::string("invalid config: ") + e.what());
    }
    return config;
}

json snapshot_to_json(const Engine& engine) {
    json tries = json::array();
    for (const WeightedTrie& t : engine.tries()) {
        tries.push_back(json{{"children", children_to_json(t, t.root())}});
    }
    const std::u32string alphabet(engine.alphabet().begin(), engine.alphabet().end());
    return json{
        {"format_version", kSnapshotFormatVersion},
        {"config", config_to_json(engine.config())},
        {"alphabet", encode_utf8(alphabet)},
        {"tries", std::move(tries)},
    };
}

Engine engine_from_json(const json& j) {
    if (!j.is_object()) {
        throw SnapshotError("snapshot must be a JSON object");
    }
    const int version = required<int>(j, "format_version");
    if (version != kSnapshotFormatVersion) {
        throw SnapshotError("unsupported snapshot format_version " + std::to_string(version));
    }
    EngineConfig config = config_from_json(required<json>(j, "config"));

    const auto tries_it = j.find("tries");
    if (tries_it == j.end()) {
        throw SnapshotError("missing field \"tries\"");
    }
    const json& tries_json = *tries_it;
    if (!tries_json.is_array() || tries_json.size() != config.partitions) {
        throw SnapshotError("\"tries\" must hold one trie per partition");
    }
    try {
        std::vector<WeightedTrie> tries(config.partitions);
        for (std::size_t i = 0; i < tries.size(); ++i) {
            restore_children(tries[i], tries[i].root(), tries_json[i]);
            if (auto problems = tries[i].validate(); !problems.empty()) {
                throw SnapshotError("partition " + std::to_string(i) + ": " + problems.front());
            }
        }
        std::set<char32_t> alphabet;
        for (char32_t ch : decode_utf8(j.value("alphabet", std::string{}))) {
            alphabet.insert(ch);
        }
        // Every key present in a trie has been learned, whatever the file says.
        for (const WeightedTrie& t : tries) {
            std::vector<Cursor> stack{t.root()};
            while (!stack.empty()) {
                const Cursor at = stack.back();
                stack.pop_back();
                for (Cursor c : t.children(at)) {
                    alphabet.insert(t.key(c));
                    stack.push_back(c);
                }
            }
        }
        return Engine::restore(std::move(config), std::move(tries), std::move(alphabet));
    } catch (const Utf8Error& e) {
        throw SnapshotError(e.what());
    } catch (const std::invalid_argument& e) {
        throw SnapshotError(e.what());
    }
}

std::string dump_snapshot(const Engine& engine) {
    return snapshot_to_json(engine).dump();
}

Engine parse_snapshot(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SnapshotError(std::string("snapshot is not valid JSON: ") + e.what());
    }
    return engine_from_json(j);
}

void save_snapshot(const std::filesystem::path& path, const Engine& engine) {
    // Written beside the target, then renamed over it.
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out << dump_snapshot(engine) << '\n';
        if (!out.flush()) {
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

Engine load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_snapshot(buf.str());
}

}  // namespace nextkey
