#include "nextkey/service.hpp"

#include <chrono>

#include "httplib.h"

namespace nextkey {

using json = nlohmann::json;

namespace {

constexpr Timestamp kMaxTimestamp = 1'000'000'000'000'000;

HttpResponse reply(int status, const json& body) {
    return {status, body.dump()};
}

HttpResponse error(int status, std::string_view code, std::string_view message) {
    return reply(status, json{{"error", code}, {"message", message}});
}

// Empty bodies are accepted as {} for the body-less POST endpoints.
std::optional<json> parse_object(std::string_view body, bool allow_empty) {
    if (allow_empty && body.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        return json::object();
    }
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        return std::nullopt;
    }
    return j;
}

}  // namespace

Timestamp system_clock_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

Service::Service(Engine engine, Clock clock) : engine_(std::move(engine)), clock_(std::move(clock)) {}

Engine Service::engine() const {
    std::lock_guard lock(mutex_);
    return engine_;
}

void Service::flush() {
    std::lock_guard lock(mutex_);
    engine_.commit_word(now_at_least_watermark());
}

Timestamp Service::now_at_least_watermark() {
    Timestamp now = clock_();
    if (watermark_ && now < *watermark_) {
        now = *watermark_;
    }
    watermark_ = now;
    return now;
}

json Service::prediction_json() const {
    json entries = json::array();
    for (const Prediction& p : engine_.last_prediction().entries) {
        entries.push_back(json{{"ch", encode_utf8(p.ch)}, {"p", p.p}});
    }
    return json{{"predictions", std::move(entries)}, {"n", engine_.n()}, {"idle", engine_.idle()}};
}

HttpResponse Service::handle(std::string_view method, std::string_view path,
                             std::string_view body) {
    struct Route {
        std::string_view path;
        std::string_view method;
    };
    static constexpr Route routes[] = {
        {"/v1/keystroke", "POST"}, {"/v1/predictions", "GET"}, {"/v1/feedback", "POST"},
        {"/v1/reset", "POST"},     {"/v1/stats", "GET"},
    };
    const Route* route = nullptr;
    for (const Route& r : routes) {
        if (r.path == path) {
            route = &r;
        }
    }
    if (route == nullptr) {
        return error(404, "not_found", "unknown endpoint");
    }
    if (route->method != method) {
        return error(405, "method_not_allowed", std::string("use ") + std::string(route->method));
    }

    try {
        if (path == "/v1/keystroke") {
            return keystroke(body);
        }
        if (path == "/v1/predictions") {
            return predictions();
        }
        if (path == "/v1/feedback") {
            return feedback(body);
        }
        if (path == "/v1/reset") {
            return reset(body);
        }
        return stats();
    } catch (const std::exception& e) {
        return error(500, "internal", e.what());
    }
}

HttpResponse Service::keystroke(std::string_view body) {
    const std::optional<json> request = parse_object(body, false);
    if (!request) {
        return error(400, "malformed_json", "body must be a JSON object");
    }
    const auto ch_field = request->find("ch");
    if (ch_field == request->end()) {
        return error(400, "missing_field", "\"ch\" is required");
    }
    if (!ch_field->is_string()) {
        return error(400, "invalid_field", "\"ch\" must be a string");
    }
    std::u32string ch;
    try {
        ch = decode_utf8(ch_field->get_ref<const std::string&>());
    } catch (const Utf8Error& e) {
        return error(400, "invalid_field", e.what());
    }
    if (ch.empty()) {
        return error(400, "invalid_field", "\"ch\" must hold one character");
    }
    if (ch.size() > 1) {
        return error(409, "multi_scalar", "\"ch\" must hold exactly one character");
    }

    std::optional<Timestamp> ts;
    if (const auto ts_field = request->find("ts"); ts_field != request->end() && !ts_field->is_null()) {
        if (!ts_field->is_number_integer()) {
            return error(400, "invalid_field", "\"ts\" must be integer epoch seconds");
        }
        ts = ts_field->get<Timestamp>();
        if (*ts < -kMaxTimestamp || *ts > kMaxTimestamp) {
            return error(400, "invalid_field", "\"ts\" is out of range");
        }
    }

    std::lock_guard lock(mutex_);
    if (ts && watermark_ && *ts < *watermark_) {
        return error(409, "non_monotone_timestamp", "\"ts\" precedes an earlier keystroke");
    }
    const Timestamp now = ts ? *ts : now_at_least_watermark();
    watermark_ = now;
    engine_.handle_keystroke(ch.front(), now);
    return reply(200, prediction_json());
}

HttpResponse Service::predictions() {
    std::lock_guard lock(mutex_);
    return reply(200, prediction_json());
}

HttpResponse Service::feedback(std::string_view body) {
    if (!parse_object(body, true)) {
        return error(400, "malformed_json", "body must be a JSON object");
    }
    std::lock_guard lock(mutex_);
    engine_.send_feedback();
    return reply(200, json{{"idle", engine_.idle()}, {"n", engine_.n()}});
}

HttpResponse Service::reset(std::string_view body) {
    if (!parse_object(body, true)) {
        return error(400, "malformed_json", "body must be a JSON object");
    }
    std::lock_guard lock(mutex_);
    engine_.commit_word(now_at_least_watermark());
    return reply(200, prediction_json());
}

HttpResponse Service::stats() {
    std::lock_guard lock(mutex_);
    json words = json::array();
    json nodes = json::array();
    for (const WeightedTrie& t : engine_.tries()) {
        words.push_back(t.word_count());
        nodes.push_back(t.node_count());
    }
    json config{
        {"partitions", engine_.config().partitions},
        {"conf", engine_.config().conf},
        {"diff", engine_.config().diff},
        {"n_initial", engine_.config().n_initial},
        {"n_min", engine_.config().n_min},
    };
    return reply(200, json{
                          {"words", std::move(words)},
                          {"nodes", std::move(nodes)},
                          {"total_words", engine_.word_count()},
                          {"total_nodes", engine_.node_count()},
                          {"active_partition", engine_.active_partition()},
                          {"events", engine_.event_index()},
                          {"n", engine_.n()},
                          {"idle", engine_.idle()},
                          {"config", std::move(config)},
                      });
}

void Service::mount(httplib::Server& server) {
    const auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
        const HttpResponse r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_content(r.body, "application/json");
    };
    for (const char* path : {"/v1/keystroke", "/v1/predictions", "/v1/feedback", "/v1/reset",
                             "/v1/stats"}) {
        server.Get(path, dispatch);
        server.Post(path, dispatch);
    }
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
}

}  // namespace nextkey
