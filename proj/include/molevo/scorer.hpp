#pragma once

/// @file scorer.hpp
/// @brief Docking backends: a deterministic descriptor surrogate and an
/// adapter for an external scoring process.
///
/// External protocol, one JSON object per line:
///   request   {"id": <int>, "smiles": "<canonical SMILES>"}
///   response  {"id": <int>, "score": <kcal/mol>} or {"id": <int>, "error": "<text>"}
/// The process receives the docking setup as arguments:
///   --receptor R --center x,y,z --size x,y,z --exhaustiveness N [extra args...]
/// Responses may arrive in any order. If no response arrives for `timeout`
/// seconds, or the process exits, every unanswered id gets an error response
/// and the process is restarted on the next batch.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "molevo/descriptors.hpp"
#include "molevo/log.hpp"
#include "molevo/smiles.hpp"

extern char** environ;

namespace molevo {

enum class DockingBackend { Surrogate, External };

struct DockingConfig {
    DockingBackend backend = DockingBackend::Surrogate;
    std::string executable;
    std::vector<std::string> extra_args;
    std::string receptor = "6LU7";
    std::optional<std::array<double, 3>> grid_center; // required for external runs
    std::array<double, 3> grid_size{22, 24, 22};      // Angstrom
    int exhaustiveness = 8;
    double timeout = 60; // seconds without progress before giving up on a batch
    std::size_t batch_size = 100;

    void validate() const {
        for (double s : grid_size)
            if (!(s > 0)) throw ConfigError("docking grid_size components must be positive");
        if (exhaustiveness < 1) throw ConfigError("docking exhaustiveness must be >= 1");
        if (!(timeout > 0)) throw ConfigError("docking timeout must be positive");
        if (batch_size < 1) throw ConfigError("docking batch_size must be >= 1");
        if (backend == DockingBackend::External) {
            if (executable.empty()) throw ConfigError("external docking backend needs an executable");
            if (!grid_center) throw ConfigError("external docking backend needs grid_center");
        }
    }
};

inline void to_json(nlohmann::json& j, const DockingConfig& c) {
    j = {{"backend", c.backend == DockingBackend::Surrogate ? "surrogate" : "external"},
         {"executable", c.executable},
         {"extra_args", c.extra_args},
         {"receptor", c.receptor},
         {"grid_size", c.grid_size},
         {"exhaustiveness", c.exhaustiveness},
         {"timeout", c.timeout},
         {"batch_size", c.batch_size}};
    j["grid_center"] = c.grid_center ? nlohmann::json(*c.grid_center) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, DockingConfig& c) {
    c = DockingConfig{};
    if (j.contains("backend")) {
        const auto b = j.at("backend").get<std::string>();
        if (b == "surrogate") c.backend = DockingBackend::Surrogate;
        else if (b == "external") c.backend = DockingBackend::External;
        else throw ConfigError("unknown docking backend '" + b + "'");
    }
    if (j.contains("executable")) c.executable = j.at("executable").get<std::string>();
    if (j.contains("extra_args")) c.extra_args = j.at("extra_args").get<std::vector<std::string>>();
    if (j.contains("receptor")) c.receptor = j.at("receptor").get<std::string>();
    if (j.contains("grid_center") && !j.at("grid_center").is_null())
        c.grid_center = j.at("grid_center").get<std::array<double, 3>>();
    if (j.contains("grid_size")) c.grid_size = j.at("grid_size").get<std::array<double, 3>>();
    if (j.contains("exhaustiveness")) c.exhaustiveness = j.at("exhaustiveness").get<int>();
    if (j.contains("timeout")) c.timeout = j.at("timeout").get<double>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
    c.validate();
}

struct ScoreRequest {
    long long id = 0;
    std::string smiles;
};

struct ScoreResponse {
    long long id = 0;
    std::optional<double> score; // kcal/mol
    std::string error;

    [[nodiscard]] bool ok() const noexcept { return score.has_value(); }
};

/// Surrogate binding score in kcal/mol:
///   -(0.35 arom + 0.15 hbd + 0.15 hba + 0.004 mw - 0.02 rotb) - 1, clamped to [-15, 1].
/// A stand-in to exercise the optimizer; it does not model binding.
inline double surrogate_score(const DescriptorSet& d) {
    const double s = -(0.35 * d.arom + 0.15 * d.hbd + 0.15 * d.hba + 0.004 * d.mw - 0.02 * d.rotb) - 1.0;
    return std::clamp(s, -15.0, 1.0);
}

inline double surrogate_score(const MolecularGraph& g) { return surrogate_score(descriptors(g)); }

class ScorerGateway {
public:
    virtual ~ScorerGateway() = default;
    /// One response per request, in request order.
    virtual std::vector<ScoreResponse> score_batch(const std::vector<ScoreRequest>& requests) = 0;
};

namespace detail {
inline void check_unique_ids(const std::vector<ScoreRequest>& requests) {
    std::map<long long, int> seen;
    for (const auto& r : requests)
        if (++seen[r.id] > 1) throw ArgumentError("score_batch: duplicate request id " + std::to_string(r.id));
}
} // namespace detail

class SurrogateGateway final : public ScorerGateway {
public:
    std::vector<ScoreResponse> score_batch(const std::vector<ScoreRequest>& requests) override {
        detail::check_unique_ids(requests);
        std::vector<ScoreResponse> out;
        out.reserve(requests.size());
        for (const auto& r : requests) {
            ScoreResponse resp{r.id, std::nullopt, {}};
            try {
                resp.score = surrogate_score(parse_smiles(r.smiles));
            } catch (const Error& e) {
                resp.error = e.what();
            }
            out.push_back(std::move(resp));
        }
        return out;
    }
};

class ExternalGateway final : public ScorerGateway {
public:
    explicit ExternalGateway(DockingConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }
    ExternalGateway(const ExternalGateway&) = delete;
    ExternalGateway& operator=(const ExternalGateway&) = delete;
    ~ExternalGateway() override { stop(); }

    std::vector<ScoreResponse> score_batch(const std::vector<ScoreRequest>& requests) override {
        detail::check_unique_ids(requests);
        std::lock_guard lock(mutex_);
        if (requests.empty()) return {};
        if (fd_ < 0) start();

        std::map<long long, std::size_t> pending;
        for (std::size_t i = 0; i < requests.size(); ++i) pending[requests[i].id] = i;
        std::vector<ScoreResponse> out(requests.size());
        for (std::size_t i = 0; i < requests.size(); ++i) out[i].id = requests[i].id;

        std::string outbuf;
        for (const auto& r : requests) outbuf += nlohmann::json{{"id", r.id}, {"smiles", r.smiles}}.dump() + "\n";
        std::size_t written = 0;

        using clock = std::chrono::steady_clock;
        const auto budget = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(cfg_.timeout));
        auto deadline = clock::now() + budget;
        std::string failure;

        while (!pending.empty()) {
            const auto now = clock::now();
            if (now >= deadline) {
                failure = "timed out after " + std::to_string(cfg_.timeout) + " s without a response";
                break;
            }
            const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
            pollfd p{fd_, static_cast<short>(POLLIN | (written < outbuf.size() ? POLLOUT : 0)), 0};
            const int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(wait_ms, 1000)));
            if (rc < 0) {
                if (errno == EINTR) continue;
                failure = std::string("poll failed: ") + std::strerror(errno);
                break;
            }
            if (rc == 0) continue;
            if ((p.revents & POLLOUT) && written < outbuf.size()) {
                const ssize_t n = ::send(fd_, outbuf.data() + written, outbuf.size() - written, MSG_NOSIGNAL | MSG_DONTWAIT);
                if (n > 0) written += static_cast<std::size_t>(n);
                else if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
                    failure = "scorer process closed its input";
                    break;
                }
            }
            if (p.revents & (POLLIN | POLLHUP | POLLERR)) {
                char buf[4096];
                const ssize_t n = ::recv(fd_, buf, sizeof buf, MSG_DONTWAIT);
                if (n == 0 || (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR)) {
                    failure = "scorer process exited";
                    break;
                }
                if (n > 0) {
                    inbuf_.append(buf, static_cast<std::size_t>(n));
                    if (consume_lines(pending, out) > 0) deadline = clock::now() + budget;
                }
            }
        }
        if (!failure.empty()) {
            warn("external scorer: " + failure + "; " + std::to_string(pending.size()) + " request(s) unanswered");
            for (const auto& [id, idx] : pending) out[idx].error = failure;
            stop();
        }
        return out;
    }

    [[nodiscard]] bool running() const noexcept { return pid_ > 0; }

private:
    std::size_t consume_lines(std::map<long long, std::size_t>& pending, std::vector<ScoreResponse>& out) {
        std::size_t answered = 0;
        std::size_t nl;
        while ((nl = inbuf_.find('\n')) != std::string::npos) {
            const std::string line = inbuf_.substr(0, nl);
            inbuf_.erase(0, nl + 1);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_number_integer()) {
                warn("external scorer: malformed response line: " + line);
                continue;
            }
            const auto id = j["id"].get<long long>();
            auto it = pending.find(id);
            if (it == pending.end()) {
                warn("external scorer: response for unknown or already answered id " + std::to_string(id));
                continue;
            }
            auto& resp = out[it->second];
            if (j.contains("score") && j["score"].is_number() && std::isfinite(j["score"].get<double>()))
                resp.score = j["score"].get<double>();
            else if (j.contains("error") && j["error"].is_string())
                resp.error = j["error"].get<std::string>();
            else
                resp.error = "malformed response: " + line;
            pending.erase(it);
            ++answered;
        }
        return answered;
    }

    static std::string triple(const std::array<double, 3>& v) {
        std::ostringstream os;
        os.precision(17);
        os << v[0] << ',' << v[1] << ',' << v[2];
        return os.str();
    }

    void start() {
        int sv[2];
        if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
            throw GatewayError(std::string("socketpair failed: ") + std::strerror(errno));
        std::vector<std::string> args = {cfg_.executable,
                                         "--receptor", cfg_.receptor,
                                         "--center", triple(*cfg_.grid_center),
                                         "--size", triple(cfg_.grid_size),
                                         "--exhaustiveness", std::to_string(cfg_.exhaustiveness)};
        args.insert(args.end(), cfg_.extra_args.begin(), cfg_.extra_args.end());
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        argv.push_back(nullptr);

        posix_spawn_file_actions_t fa;
        posix_spawn_file_actions_init(&fa);
        posix_spawn_file_actions_adddup2(&fa, sv[1], STDIN_FILENO);
        posix_spawn_file_actions_adddup2(&fa, sv[1], STDOUT_FILENO);
        pid_t pid = -1;
        const int rc = ::posix_spawnp(&pid, cfg_.executable.c_str(), &fa, nullptr, argv.data(), environ);
        posix_spawn_file_actions_destroy(&fa);
        ::close(sv[1]);
        if (rc != 0) {
            ::close(sv[0]);
            throw GatewayError("cannot start scorer '" + cfg_.executable + "': " + std::strerror(rc));
        }
        pid_ = pid;
        fd_ = sv[0];
        inbuf_.clear();
    }

    void stop() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
        if (pid_ > 0) {
            int status = 0;
            // give a cooperating process a moment to exit on EOF before killing it
            for (int i = 0; i < 20; ++i) {
                if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                    pid_ = -1;
                    return;
                }
                ::usleep(5000);
            }
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
            pid_ = -1;
        }
    }

    DockingConfig cfg_;
    std::mutex mutex_;
    int fd_ = -1;
    pid_t pid_ = -1;
    std::string inbuf_;
};

inline std::unique_ptr<ScorerGateway> make_gateway(const DockingConfig& cfg) {
    cfg.validate();
    if (cfg.backend == DockingBackend::External) return std::make_unique<ExternalGateway>(cfg);
    return std::make_unique<SurrogateGateway>();
}

} // namespace molevo
