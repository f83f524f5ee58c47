#include "graphstage/service.hpp"

#include "graphstage/logging.hpp"
#include "graphstage/session_log.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <list>
#include <sstream>

namespace graphstage {

// ---------------------------------------------------------------------------
// ReplayDriver

namespace {

Millis first_heartbeat(const std::vector<GraphEvent>& events, Millis origin) {
    const Millis start = events.empty() ? origin : std::max(origin, events.front().timestamp);
    return origin + ((start - origin) / kHeartbeatInterval + 1) * kHeartbeatInterval;
}

std::string decimal(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

}  // namespace

ReplayDriver::ReplayDriver(std::vector<GraphEvent> events, PipelineOptions options)
    : events_(std::move(events)),
      pipeline_(options),
      clock_(options.origin),
      next_heartbeat_(first_heartbeat(events_, options.origin)) {}

void ReplayDriver::process_until(Millis t, std::vector<std::string>& out) {
    while (next_event_ < events_.size() && events_[next_event_].timestamp <= t) pipeline_.feed(events_[next_event_++]);
    if (next_event_ == events_.size() && !pipeline_.engine().input_closed()) pipeline_.close_input();
    for (auto trigger = pipeline_.next_trigger(); trigger && *trigger <= t; trigger = pipeline_.next_trigger()) {
        out.push_back(wire::stage(*pipeline_.poll(t)));
        ++stages_;
    }
    if (pipeline_.drained()) {
        complete_ = true;
        out.push_back(wire::notice("replay complete: " + std::to_string(stages_) + " stages"));
    }
}

std::vector<std::string> ReplayDriver::advance(Millis clock) {
    std::vector<std::string> out;
    clock = std::max(clock, clock_);
    while (!complete_) {
        if (next_heartbeat_ > clock) {
            process_until(clock, out);
            break;
        }
        process_until(next_heartbeat_, out);
        if (complete_) break;
        const StagingEngine& engine = pipeline_.engine();
        out.push_back(wire::heartbeat(engine.backlog(), engine.pending()));
        next_heartbeat_ += kHeartbeatInterval;
    }
    clock_ = clock;
    return out;
}

std::vector<std::string> ReplayDriver::apply(const wire::ControlCommand& cmd, Millis clock) {
    using K = wire::ControlCommand::Kind;
    std::vector<std::string> out = advance(clock);
    StagingEngine& engine = pipeline_.engine();
    const std::string at = " at " + std::to_string(clock_) + " ms";
    try {
        switch (cmd.kind) {
        case K::SetStrategy:
            engine.set_strategy(*cmd.strategy);
            out.push_back(wire::notice("strategy_changed: " + std::string(to_token(*cmd.strategy)) + at));
            break;
        case K::SetThresholds: {
            engine.set_thresholds(cmd.t_i, cmd.n_events);
            const auto& staged = *engine.staged_thresholds();
            std::string text = "thresholds_staged:";
            if (staged.t_i) text += " t_i=" + std::to_string(*staged.t_i);
            if (staged.n_events) text += " n_events=" + std::to_string(*staged.n_events);
            out.push_back(wire::notice(text + at + "; applies when the current window closes"));
            break;
        }
        case K::Pause:
            out.push_back(wire::notice(paused_ ? "already paused" : "paused" + at));
            paused_ = true;
            break;
        case K::Resume:
            out.push_back(wire::notice(paused_ ? "resumed" + at : "not paused"));
            paused_ = false;
            break;
        case K::SetSpeed:
            speed_ = *cmd.speed;
            out.push_back(wire::notice("speed set to " + decimal(speed_) + at));
            break;
        case K::Snapshot: {
            const GraphState& g = engine.graph();
            out.push_back(wire::notice("snapshot: clock=" + std::to_string(clock_) +
                                       " strategy=" + std::string(to_token(engine.config().strategy)) +
                                       " t_i=" + std::to_string(engine.config().t_i) +
                                       " n_events=" + std::to_string(engine.config().n_events) +
                                       " nodes=" + std::to_string(g.node_count()) +
                                       " edges=" + std::to_string(g.edge_count()) +
                                       " pending=" + std::to_string(engine.pending()) +
                                       " backlog=" + std::to_string(engine.backlog()) +
                                       " stages=" + std::to_string(stages_)));
            break;
        }
        }
    } catch (const ConfigError& e) {
        out.push_back(wire::notice("rejected " + std::string(wire::to_token(cmd.kind)) + ": " + e.what()));
    }
    return out;
}

std::optional<Millis> ReplayDriver::next_wakeup() const {
    if (complete_) return std::nullopt;
    Millis t = next_heartbeat_;
    if (next_event_ < events_.size()) t = std::min(t, events_[next_event_].timestamp);
    if (auto trigger = pipeline_.next_trigger()) t = std::min(t, *trigger);
    return t;
}

// ---------------------------------------------------------------------------
// SessionConfig


// ---------------------------------------------------------------------------
// ReplayServer

namespace {

constexpr std::size_t kMaxClientBuffer = 8u << 20;  // bytes queued before a client is dropped

struct Endpoint {
    std::string host;
    std::uint16_t port;
};

Endpoint parse_listen(const std::string& listen) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw ConfigError("listen address \"" + listen + "\" must be host:port");
    Endpoint ep;
    ep.host = listen.substr(0, colon);
    const std::string port = listen.substr(colon + 1);
    try {
        std::size_t used = 0;
        const int p = std::stoi(port, &used);
        if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range(port);
        ep.port = static_cast<std::uint16_t>(p);
    } catch (const std::logic_error&) {
        throw ConfigError("listen port \"" + port + "\" is not a number in 0..65535");
    }
    if (ep.host.empty()) ep.host = "0.0.0.0";
    return ep;
}

void set_nonblocking(int fd) {
    const int flags = fcntl(fd, F_GETFL, 0);
    fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

std::string errno_text() { return std::strerror(errno); }

struct Client {
    int fd = -1;
    std::string in;
    std::string out;
    bool dead = false;
};

}  // namespace

void SessionConfig::validate() const {
    if (!(speed_multiplier > 0.0) || !std::isfinite(speed_multiplier))
        throw ConfigError("speed multiplier must be > 0 (got " + decimal(speed_multiplier) + ")");
    if (min_lifetime < 0) throw ConfigError("min lifetime must be >= 0");
    parse_listen(listen);
    pipeline.validate();
}

struct ReplayServer::Impl {
    using WallClock = std::chrono::steady_clock;

    SessionConfig config;
    std::vector<GraphEvent> events;
    int listener = -1;
    int wake[2] = {-1, -1};
    std::uint16_t bound_port = 0;
    std::atomic<bool> stopping{false};
    std::list<Client> clients;
    std::unique_ptr<SessionRecorder> recorder;

    explicit Impl(SessionConfig c) : config(std::move(c)) {
        config.validate();
        std::ifstream in(config.events_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read event file \"" + config.events_path + "\"");
        std::ostringstream text;
        text << in.rdbuf();
        events = load_events(text.str(), config.format, config.min_lifetime);
        log::info("loaded " + std::to_string(events.size()) + " events from " + config.events_path);

        const Endpoint ep = parse_listen(config.listen);
        addrinfo hints{};
        hints.ai_family = AF_INET;
        hints.ai_socktype = SOCK_STREAM;
        hints.ai_flags = AI_PASSIVE;
        addrinfo* res = nullptr;
        if (int rc = getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res); rc != 0)
            throw std::runtime_error("cannot resolve \"" + ep.host + "\": " + gai_strerror(rc));
        listener = socket(res->ai_family, res->ai_socktype, res->ai_protocol);
        if (listener < 0) {
            freeaddrinfo(res);
            throw std::runtime_error("socket: " + errno_text());
        }
        const int one = 1;
        setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        const int bound = bind(listener, res->ai_addr, res->ai_addrlen);
        freeaddrinfo(res);
        if (bound != 0 || listen(listener, 16) != 0) {
            const std::string why = errno_text();
            close(listener);
            throw std::runtime_error("cannot listen on " + config.listen + ": " + why);
        }
        set_nonblocking(listener);
        sockaddr_in addr{};
        socklen_t len = sizeof addr;
        getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
        bound_port = ntohs(addr.sin_port);

        if (pipe(wake) != 0) throw std::runtime_error("pipe: " + errno_text());
        set_nonblocking(wake[0]);
        set_nonblocking(wake[1]);

        if (!config.session_log_path.empty())
            recorder = std::make_unique<SessionRecorder>(config.session_log_path, events, config.pipeline);
    }

    ~Impl() {
        for (Client& c : clients) close(c.fd);
        if (listener >= 0) close(listener);
        if (wake[0] >= 0) close(wake[0]);
        if (wake[1] >= 0) close(wake[1]);
    }

    void send_to(Client& c, const std::string& line) {
        if (c.dead) return;
        c.out += line;
        c.out += '\n';
        if (c.out.size() > kMaxClientBuffer) {
            log::warn("dropping slow client (fd " + std::to_string(c.fd) + ")");
            c.dead = true;
        }
    }

    /// Deterministic session output: logged and sent to everyone.
    void broadcast(const std::vector<std::string>& lines) {
        for (const std::string& line : lines) {
            if (recorder) recorder->output(line);
            for (Client& c : clients) send_to(c, line);
        }
    }

    void flush(Client& c) {
        while (!c.dead && !c.out.empty()) {
            const ssize_t n = ::send(c.fd, c.out.data(), c.out.size(), MSG_NOSIGNAL);
            if (n > 0) {
                c.out.erase(0, static_cast<std::size_t>(n));
            } else if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
                return;
            } else {
                c.dead = true;
            }
        }
    }

    void accept_clients() {
        while (true) {
            const int fd = accept(listener, nullptr, nullptr);
            if (fd < 0) return;
            set_nonblocking(fd);
            clients.push_back(Client{fd, {}, {}, false});
            send_to(clients.back(), wire::hello());
            log::info("client connected (fd " + std::to_string(fd) + ")");
        }
    }

    void run() {
        ReplayDriver driver(events, config.pipeline);
        driver.set_initial_speed(config.speed_multiplier);
        bool started = config.await_clients == 0;
        Millis clock_base = config.pipeline.origin;
        auto wall_base = WallClock::now();
        auto next_idle_heartbeat = wall_base;

        auto replay_clock = [&] {
            if (!started || driver.paused()) return clock_base;
            const double elapsed = std::chrono::duration<double, std::milli>(WallClock::now() - wall_base).count();
            const double c = static_cast<double>(clock_base) + elapsed * driver.speed();
            return c >= 4e18 ? Millis{4'000'000'000'000'000'000} : static_cast<Millis>(c);
        };
        auto rebase = [&] {
            clock_base = replay_clock();
            wall_base = WallClock::now();
        };

        while (!stopping.load()) {
            if (!started && clients.size() >= config.await_clients) {
                started = true;
                wall_base = WallClock::now();
            }
            if (started) {
                const bool was_complete = driver.complete();
                broadcast(driver.advance(replay_clock()));
                if (driver.complete() && !was_complete) {
                    next_idle_heartbeat = WallClock::now() + std::chrono::milliseconds(kHeartbeatInterval);
                    if (config.exit_when_complete) break;
                }
                if (driver.complete() && WallClock::now() >= next_idle_heartbeat) {
                    const StagingEngine& engine = driver.pipeline().engine();
                    const std::string hb = wire::heartbeat(engine.backlog(), engine.pending());
                    for (Client& c : clients) send_to(c, hb);
                    next_idle_heartbeat += std::chrono::milliseconds(kHeartbeatInterval);
                }
            }

            std::vector<pollfd> fds;
            fds.push_back({listener, POLLIN, 0});
            fds.push_back({wake[0], POLLIN, 0});
            for (const Client& c : clients)
                fds.push_back({c.fd, static_cast<short>(POLLIN | (c.out.empty() ? 0 : POLLOUT)), 0});

            int timeout = 50;
            if (started && !driver.paused()) {
                if (auto wake_at = driver.next_wakeup()) {
                    const double wait = static_cast<double>(*wake_at - replay_clock()) / driver.speed();
                    timeout = static_cast<int>(std::clamp(std::ceil(wait), 0.0, 50.0));
                }
            }
            if (::poll(fds.data(), fds.size(), timeout) < 0 && errno != EINTR)
                throw std::runtime_error("poll: " + errno_text());

            if (fds[1].revents & POLLIN) {
                char buf[64];
                while (read(wake[0], buf, sizeof buf) > 0) {}
            }
            if (fds[0].revents & POLLIN) accept_clients();

            std::size_t k = 2;
            for (Client& c : clients) {
                if (k >= fds.size()) break;
                const short rev = fds[k++].revents;
                if (rev & (POLLERR | POLLHUP | POLLNVAL)) c.dead = true;
                if (rev & POLLIN) read_commands(c, driver, rebase, replay_clock);
                if (rev & POLLOUT) flush(c);
            }
            clients.remove_if([](const Client& c) {
                if (!c.dead) return false;
                close(c.fd);
                log::info("client disconnected (fd " + std::to_string(c.fd) + ")");
                return true;
            });
        }

        if (recorder) recorder->finish(driver.clock());
        // Best effort: drain queued output before returning.
        const auto deadline = WallClock::now() + std::chrono::seconds(2);
        for (Client& c : clients) {
            while (!c.dead && !c.out.empty() && WallClock::now() < deadline) {
                flush(c);
                if (!c.out.empty()) {
                    pollfd p{c.fd, POLLOUT, 0};
                    ::poll(&p, 1, 20);
                }
            }
        }
    }

    template <class Rebase, class ClockFn>
    void read_commands(Client& c, ReplayDriver& driver, Rebase& rebase, ClockFn& replay_clock) {
        char buf[4096];
        while (true) {
            const ssize_t n = ::recv(c.fd, buf, sizeof buf, 0);
            if (n > 0) {
                c.in.append(buf, static_cast<std::size_t>(n));
                continue;
            }
            if (n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK)) c.dead = true;
            break;
        }
        std::size_t pos;
        while ((pos = c.in.find('\n')) != std::string::npos) {
            std::string line = c.in.substr(0, pos);
            c.in.erase(0, pos + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            wire::ControlCommand cmd;
            try {
                cmd = wire::parse_control(line);
            } catch (const wire::WireError& e) {
                send_to(c, wire::notice(std::string("rejected: ") + e.what()));
                continue;
            }
            // Clock mapping changes take effect from the current instant.
            rebase();
            const Millis now = replay_clock();
            if (recorder) recorder->control(cmd, now);
            broadcast(driver.apply(cmd, now));
            rebase();
        }
    }
};

ReplayServer::ReplayServer(SessionConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
ReplayServer::~ReplayServer() = default;

std::uint16_t ReplayServer::port() const { return impl_->bound_port; }

void ReplayServer::run() { impl_->run(); }

void ReplayServer::stop() {
    impl_->stopping.store(true);
    const char byte = 1;
    [[maybe_unused]] const ssize_t n = write(impl_->wake[1], &byte, 1);
}

}  // namespace graphstage
