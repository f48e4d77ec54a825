#pragma once
// JSON-over-HTTP front end for a single engine.
//
//   POST /v1/keystroke {"ch": "d", "ts": 1700000000}  learn, then predict
//   GET  /v1/predictions                               last prediction, read-only
//   POST /v1/feedback  {}                              bad-prediction feedback
//   POST /v1/reset     {}                              end the current word
//   GET  /v1/stats                                     counts and config
//
// Errors are {"error": <code>, "message": <text>} with status 400 (malformed
// input), 404, 405 or 409 (multi-character key, timestamp before the last
// one). All engine access goes through one mutex, so any set of concurrent
// requests is applied in some sequential order.

#include <functional>
#include <mutex>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nextkey/engine.hpp"

namespace httplib {
class Server;
}

namespace nextkey {

struct HttpResponse {
    int status = 200;
    std::string body;
};

using Clock = std::function<Timestamp()>;

/// Wall clock in epoch seconds.
Timestamp system_clock_seconds();

class Service {
public:
    explicit Service(Engine engine, Clock clock = system_clock_seconds);

    HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

    /// Registers the routes on `server`, plus CORS headers for browser clients.
    void mount(httplib::Server& server);

    /// Copy of the engine taken under the lock.
    Engine engine() const;

    /// Completes a word in progress so the tries are at a word boundary.
    void flush();

private:
    HttpResponse keystroke(std::string_view body);
    HttpResponse predictions();
    HttpResponse feedback(std::string_view body);
    HttpResponse reset(std::string_view body);
    HttpResponse stats();

    nlohmann::json prediction_json() const;
    Timestamp now_at_least_watermark();

    mutable std::mutex mutex_;
    Engine engine_;
    Clock clock_;
    std::optional<Timestamp> watermark_;
};

}  // namespace nextkey
