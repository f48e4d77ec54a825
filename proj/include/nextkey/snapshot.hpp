#pragma once
// Versioned JSON persistence of an engine's learned tries.
//
//   {"format_version": 1,
//    "config": {...},
//    "alphabet": "<learned keys>",
//    "tries": [{"children": [<node>, ...]}, ...]}     one root per partition
//
//   <node> = {"key": "d", "weight": 3,
//             "word_end": {"count": 1, "last_used": 1700000000, "seq": 7},
//             "children": [...]}
//
// "word_end" and "children" are omitted when absent. Session state (n,
// streaks, idle) is not stored.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nextkey/engine.hpp"

namespace nextkey {

inline constexpr int kSnapshotFormatVersion = 1;

class SnapshotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json config_to_json(const EngineConfig& config);
EngineConfig config_from_json(const nlohmann::json& j);

nlohmann::json snapshot_to_json(const Engine& engine);
Engine engine_from_json(const nlohmann::json& j);

std::string dump_snapshot(const Engine& engine);
Engine parse_snapshot(std::string_view text);

void save_snapshot(const std::filesystem::path& path, const Engine& engine);
Engine load_snapshot(const std::filesystem::path& path);

}  // namespace nextkey
