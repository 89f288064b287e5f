#pragma once

#include <cstdint>
#include <memory>
#include <string>

namespace sdgen {

struct GenerationRequest;

struct BackendRequest {
    std::string system;
    std::string user;
    double temperature = 0.1;
    int max_tokens = 4096;
    // Set for data-generation calls; the deterministic backend synthesizes
    // rows from this instead of reading the prose. Null for annotation and
    // judge calls.
    const GenerationRequest* origin = nullptr;
};

struct BackendResult {
    bool ok = false;
    std::string text;
    std::string error;
};

class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string kind() const = 0;  // "deterministic" | "http"
    /// Thread-safe; called concurrently by the request runner.
    virtual BackendResult complete(const BackendRequest& request) = 0;
};

struct BackendSpec {
    enum class Kind { Deterministic, Http };
    Kind kind = Kind::Deterministic;
    uint64_t seed = 0;  // deterministic backend base seed

    std::string endpoint;  // http://host:port/path
    std::string model;
    std::string auth_env = "SDGEN_API_TOKEN";
    int timeout_seconds = 60;

    static BackendSpec deterministic(uint64_t seed) {
        BackendSpec s;
        s.kind = Kind::Deterministic;
        s.seed = seed;
        return s;
    }
    static BackendSpec http(std::string endpoint, std::string model) {
        BackendSpec s;
        s.kind = Kind::Http;
        s.endpoint = std::move(endpoint);
        s.model = std::move(model);
        return s;
    }
};

std::unique_ptr<Backend> make_backend(const BackendSpec& spec);

/// Deterministic offline backend: a pure function of the structured request
/// plus the configured seed. Annotation calls get "<Type> field <name>"
/// stubs; generation calls synthesize rows honoring the request directives.
class DeterministicBackend : public Backend {
  public:
    explicit DeterministicBackend(uint64_t seed) : seed_(seed) {}
    std::string kind() const override { return "deterministic"; }
    BackendResult complete(const BackendRequest& request) override;

  private:
    uint64_t seed_;
};

/// HTTP backend speaking a minimal JSON completion protocol:
/// POST {"system","user","temperature","max_tokens"} -> {"text": "..."}.
/// Transport failures (connect errors, 5xx) are retried twice; those
/// retries are separate from the pipeline's semantic validation retries.
class HttpBackend : public Backend {
  public:
    explicit HttpBackend(const BackendSpec& spec);
    std::string kind() const override { return "http"; }
    BackendResult complete(const BackendRequest& request) override;

  private:
    std::string host_part_;  // scheme://host:port
    std::string path_;
    std::string model_;
    std::string token_;
    int timeout_seconds_;
};

inline constexpr int kTransportRetries = 2;

}  // namespace sdgen
