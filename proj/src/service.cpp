#include "geodss/service.hpp"

#include "geodss/errors.hpp"
#include "geodss/view.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <vector>

namespace geodss {

void Subscription::push(std::string event) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        queue_.push_back(std::move(event));
    }
    cv_.notify_one();
}

std::optional<std::string> Subscription::next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return closed_ || !queue_.empty(); });
    if (queue_.empty()) return std::nullopt;
    std::string event = std::move(queue_.front());
    queue_.pop_front();
    return event;
}

void Subscription::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool Subscription::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

struct SessionHost::Hosted {
    explicit Hosted(SteeringSession s) : session(std::move(s)) {}

    std::mutex mutate_mutex;  // single mutator
    SteeringSession session;
    std::uint64_t version = 1;

    mutable std::mutex view_mutex;
    std::shared_ptr<const json> view;

    std::mutex subs_mutex;
    std::vector<std::shared_ptr<Subscription>> subs;

    std::shared_ptr<const json> current() const {
        std::lock_guard lock(view_mutex);
        return view;
    }

    void publish(std::shared_ptr<const json> v) {
        {
            std::lock_guard lock(view_mutex);
            view = v;
        }
        const std::string event = SessionHost::format_event(*v);
        std::lock_guard lock(subs_mutex);
        for (auto& s : subs) s->push(event);
    }
};

SessionHost::SessionHost(std::optional<std::filesystem::path> snapshot_dir) : snapshot_dir_(std::move(snapshot_dir)) {
    if (!snapshot_dir_) return;
    std::filesystem::create_directories(*snapshot_dir_);
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(*snapshot_dir_))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        std::ifstream in(path);
        const json snap = json::parse(in);
        const std::string id = path.stem().string();
        auto hosted = std::make_shared<Hosted>(load_snapshot(snap));
        hosted->version = snap.value("version", std::uint64_t{1});
        hosted->view = std::make_shared<const json>(state_view(hosted->session, hosted->version));
        sessions_[id] = hosted;
        if (id.size() > 1 && id[0] == 's') {
            const std::uint64_t n = std::strtoull(id.c_str() + 1, nullptr, 10);
            next_id_ = std::max(next_id_, n + 1);
        }
    }
}

SessionHost::~SessionHost() {
    std::lock_guard lock(sessions_mutex_);
    for (auto& [id, hosted] : sessions_) {
        std::lock_guard sl(hosted->subs_mutex);
        for (auto& s : hosted->subs) s->close();
    }
}

std::string SessionHost::create(const json& config_json) {
    SteeringSession session(parse_session_config(config_json));
    auto hosted = std::make_shared<Hosted>(std::move(session));
    hosted->view = std::make_shared<const json>(state_view(hosted->session, hosted->version));
    std::string id;
    {
        std::lock_guard lock(sessions_mutex_);
        id = "s" + std::to_string(next_id_++);
        sessions_[id] = hosted;
    }
    save(id, *hosted);
    return id;
}

std::shared_ptr<SessionHost::Hosted> SessionHost::find(const std::string& id) const {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session " + id);
    return it->second;
}

std::shared_ptr<const json> SessionHost::state(const std::string& id) const { return find(id)->current(); }

std::shared_ptr<const json> SessionHost::mutate(const std::string& id,
                                                const std::function<void(SteeringSession&)>& change) {
    auto hosted = find(id);
    std::lock_guard lock(hosted->mutate_mutex);
    change(hosted->session);
    ++hosted->version;
    auto view = std::make_shared<const json>(state_view(hosted->session, hosted->version));
    hosted->publish(view);
    save(id, *hosted);
    return view;
}

std::shared_ptr<const json> SessionHost::post_weights(const std::string& id, const json& weights) {
    ObjectiveWeights w;
    try {
        w = weights.get<ObjectiveWeights>();
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("invalid weights: ") + e.what());
    }
    w.validate();
    return mutate(id, [&](SteeringSession& s) { s.set_weights(w); });
}

std::shared_ptr<const json> SessionHost::post_decision(const std::string& id, const json& decision) {
    Decision d;
    try {
        d = decision.get<Decision>();
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("invalid decision: ") + e.what());
    }
    return mutate(id, [&](SteeringSession& s) { s.step(d); });
}

std::shared_ptr<Subscription> SessionHost::subscribe(const std::string& id) {
    auto hosted = find(id);
    auto sub = std::make_shared<Subscription>();
    std::lock_guard lock(hosted->subs_mutex);
    hosted->subs.push_back(sub);
    return sub;
}

void SessionHost::unsubscribe(const std::string& id, const std::shared_ptr<Subscription>& sub) {
    sub->close();
    std::shared_ptr<Hosted> hosted;
    try {
        hosted = find(id);
    } catch (const NotFoundError&) {
        return;
    }
    std::lock_guard lock(hosted->subs_mutex);
    std::erase(hosted->subs, sub);
}

std::size_t SessionHost::session_count() const {
    std::lock_guard lock(sessions_mutex_);
    return sessions_.size();
}

std::string SessionHost::format_event(const json& view) {
    return "event: state\nid: " + std::to_string(view.at("version").get<std::uint64_t>()) + "\ndata: " + view.dump() +
           "\n\n";
}

void SessionHost::save(const std::string& id, const Hosted& hosted) const {
    if (!snapshot_dir_) return;
    json snap = session_snapshot(hosted.session);
    snap["version"] = hosted.version;
    const auto path = *snapshot_dir_ / (id + ".json");
    const auto tmp = *snapshot_dir_ / (id + ".json.tmp");
    {
        std::ofstream out(tmp);
        out << snap.dump();
    }
    std::filesystem::rename(tmp, path);
}

namespace {

void reply_error(httplib::Response& res, int status, const std::string& message, const char* constraint = nullptr) {
    json body{{"error", message}};
    if (constraint) body["constraint"] = constraint;
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const NotFoundError& e) {
        reply_error(res, 404, e.what());
    } catch (const ConstraintViolation& e) {
        reply_error(res, 409, e.what(), e.constraint().c_str());
    } catch (const SessionStateError& e) {
        reply_error(res, 409, e.what());
    } catch (const ArgumentError& e) {
        reply_error(res, 400, e.what());
    } catch (const json::exception& e) {
        reply_error(res, 400, e.what());
    } catch (const std::exception& e) {
        reply_error(res, 500, e.what());
    }
}

json parse_body(const httplib::Request& req) {
    try {
        return req.body.empty() ? json::object() : json::parse(req.body);
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("malformed JSON body: ") + e.what());
    }
}

} // namespace

DssServer::DssServer(SessionHost& host, ServerOptions options)
    : host_(host), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
    routes();
}

DssServer::~DssServer() { stop(); }

void DssServer::routes() {
    auto& s = *server_;
    s.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    s.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = host_.create(parse_body(req));
            res.status = 201;
            res.set_content(json{{"id", id}}.dump(), "application/json");
        });
    });

    s.Get(R"(/sessions/([^/]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { res.set_content(host_.state(req.matches[1])->dump(), "application/json"); });
    });

    s.Post(R"(/sessions/([^/]+)/weights)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { res.set_content(host_.post_weights(req.matches[1], parse_body(req))->dump(), "application/json"); });
    });

    s.Post(R"(/sessions/([^/]+)/decision)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { res.set_content(host_.post_decision(req.matches[1], parse_body(req))->dump(), "application/json"); });
    });

    s.Get(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = req.matches[1];
            auto sub = host_.subscribe(id);
            const auto heartbeat = options_.heartbeat;
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream",
                [sub, heartbeat](std::size_t, httplib::DataSink& sink) {
                    if (sub->closed()) return false;
                    const auto event = sub->next(heartbeat);
                    const std::string chunk = event ? *event : std::string(": keepalive\n\n");
                    if (event || !sub->closed()) {
                        if (!sink.write(chunk.data(), chunk.size())) return false;
                    }
                    return !sub->closed();
                },
                [this, id, sub](bool) { host_.unsubscribe(id, sub); });
        });
    });
}

int DssServer::start() {
    if (options_.port == 0) {
        port_ = server_->bind_to_any_port(options_.host);
    } else {
        port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
    }
    if (port_ <= 0) throw std::runtime_error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void DssServer::run() {
    if (!thread_.joinable()) start();
    if (thread_.joinable()) thread_.join();
}

void DssServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
}

int port_from_env(int fallback) {
    if (const char* env = std::getenv("GEODSS_PORT")) {
        char* end = nullptr;
        const long p = std::strtol(env, &end, 10);
        if (end && *end == '\0' && p > 0 && p < 65536) return static_cast<int>(p);
        throw ArgumentError(std::string("GEODSS_PORT is not a valid port: ") + env);
    }
    return fallback;
}

} // namespace geodss
