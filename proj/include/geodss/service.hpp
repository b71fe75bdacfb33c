/**
 * @file service.hpp
 * @brief Session host and its HTTP/SSE front end.
 *
 * Endpoints (JSON bodies):
 *   POST /sessions                   config -> {"id": ...}          201 / 400
 *   GET  /sessions/{id}/state        -> StateView                   200 / 404
 *   POST /sessions/{id}/weights      weights -> StateView           200 / 400 / 404 / 409
 *   POST /sessions/{id}/decision     {"action": "accept"|"stop"|"steer", "target_z": z}
 *                                    -> StateView                   200 / 400 / 404 / 409
 *   GET  /sessions/{id}/events       text/event-stream, one "state" event with the
 *                                    full StateView per mutation
 */
#pragma once

#include "geodss/io.hpp"
#include "geodss/steering.hpp"

#include <condition_variable>
#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace geodss {

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Event queue of one SSE client.
class Subscription {
public:
    void push(std::string event);
    /// Next event, or nullopt after `timeout` or once closed.
    std::optional<std::string> next(std::chrono::milliseconds timeout);
    void close();
    bool closed() const;

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::string> queue_;
    bool closed_ = false;
};

class SessionHost {
public:
    /// With a snapshot directory, sessions are saved after every mutation
    /// and reloaded from it on construction.
    explicit SessionHost(std::optional<std::filesystem::path> snapshot_dir = std::nullopt);
    ~SessionHost();

    /// Throws ArgumentError for an invalid config.
    std::string create(const json& config);

    /// Latest committed view. Throws NotFoundError.
    std::shared_ptr<const json> state(const std::string& id) const;

    /// Throw NotFoundError, ArgumentError, ConstraintViolation or SessionStateError.
    std::shared_ptr<const json> post_weights(const std::string& id, const json& weights);
    std::shared_ptr<const json> post_decision(const std::string& id, const json& decision);

    std::shared_ptr<Subscription> subscribe(const std::string& id);
    void unsubscribe(const std::string& id, const std::shared_ptr<Subscription>& sub);

    std::size_t session_count() const;

    /// SSE wire form of a view.
    static std::string format_event(const json& view);

private:
    struct Hosted;

    std::shared_ptr<Hosted> find(const std::string& id) const;
    std::shared_ptr<const json> mutate(const std::string& id, const std::function<void(SteeringSession&)>& change);
    void save(const std::string& id, const Hosted& hosted) const;

    std::optional<std::filesystem::path> snapshot_dir_;
    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Hosted>> sessions_;
    std::uint64_t next_id_ = 1;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::filesystem::path> snapshot_dir;
    /// Keep-alive comment interval on idle event streams.
    std::chrono::milliseconds heartbeat{15000};
};

class DssServer {
public:
    DssServer(SessionHost& host, ServerOptions options);
    ~DssServer();

    /// Binds (port 0 picks a free port) and serves on a background thread.
    /// Returns the bound port. Throws std::runtime_error if binding fails.
    int start();
    /// Serves on the calling thread until stop().
    void run();
    void stop();
    int port() const noexcept { return port_; }

private:
    void routes();

    SessionHost& host_;
    ServerOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

/// GEODSS_PORT when set, else `fallback`.
int port_from_env(int fallback);

} // namespace geodss
