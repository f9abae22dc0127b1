#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "gmner/geometry.hpp"

namespace gmner {

// Wire protocol (JSON over HTTP):
//   POST /v1/ve      {"image","expression"}               -> {"label":"e"|"c","score"}
//   POST /v1/vg      {"image","expression"}               -> {"box":[x1,y1,x2,y2],"score"}
//   POST /v1/segment {"image","box","width","height"}     -> {"mask":{"w","h","counts"}}
//   POST /v1/llm     {"prompt","max_tokens"}              -> {"text"}
//   GET  /v1/health                                       -> {"status":"ok"}
// /v1/ve and /v1/vg requests additionally carry "id" and "surface" (and /v1/vg
// "width"/"height") so a mock can key its lookup; live servers ignore them.

namespace endpoint {
inline constexpr std::string_view kVe = "/v1/ve";
inline constexpr std::string_view kVg = "/v1/vg";
inline constexpr std::string_view kSegment = "/v1/segment";
inline constexpr std::string_view kLlm = "/v1/llm";
inline constexpr std::string_view kHealth = "/v1/health";
} // namespace endpoint

struct BackendConfig {
	/// "mock" or an http(s) base URL such as "http://127.0.0.1:8080".
	std::string base_url = "mock";
	int timeout_ms = 30000;
	int max_in_flight = 4;
	int retries = 2;
	std::optional<std::filesystem::path> mock_lookup;

	/// timeout > 0, max in-flight >= 1, retries >= 0.
	bool valid() const { return timeout_ms > 0 && max_in_flight >= 1 && retries >= 0; }
};

class Backend {
public:
	virtual ~Backend() = default;
	/// POST `body` to `path`. Throws BackendError on transport failure or a
	/// non-JSON response.
	virtual nlohmann::json post(std::string_view path, const nlohmann::json& body) = 0;
	virtual nlohmann::json get(std::string_view path) = 0;
};

struct MockEntry {
	char label = 'c';
	std::optional<BBox> box;
};

/// Mock responses keyed by (sample id, entity surface).
class MockLookup {
public:
	MockLookup() = default;

	/// JSONL `{"id":str,"surface":str,"label":"e"|"c","box":[..]?}`.
	static MockLookup load(const std::filesystem::path& path);
	static MockLookup parse(std::istream& in);

	void add(std::string id, std::string surface, MockEntry entry);
	const MockEntry* find(const std::string& id, const std::string& surface) const;
	std::size_t size() const { return entries_.size(); }

private:
	std::map<std::pair<std::string, std::string>, MockEntry> entries_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Deterministic mock of every endpoint. Pure function of (lookup, request):
///  ve:      lookup label (score 1.0); otherwise "e" iff fnv1a64("id|surface") is even (score 0.5)
///  vg:      lookup box when present; otherwise the centred box covering 25% of the image
///  segment: RLE of the half-open rasterization of the box
///  llm:     "MOCK:" + first 32 bytes of the prompt
///  health:  {"status":"ok"}
/// Throws DataError when the request does not match the wire schema.
nlohmann::json mock_respond(const MockLookup& lookup, std::string_view path, const nlohmann::json& request);

class MockBackend final : public Backend {
public:
	explicit MockBackend(MockLookup lookup) : lookup_(std::move(lookup)) {}

	nlohmann::json post(std::string_view path, const nlohmann::json& body) override;
	nlohmann::json get(std::string_view path) override;

private:
	MockLookup lookup_;
};

/// HTTP client for the wire protocol. Retries transport failures and 5xx
/// responses up to `retries` extra attempts; 4xx responses fail immediately.
class HttpBackend final : public Backend {
public:
	explicit HttpBackend(BackendConfig config);

	nlohmann::json post(std::string_view path, const nlohmann::json& body) override;
	nlohmann::json get(std::string_view path) override;

private:
	nlohmann::json request(std::string_view method, std::string_view path, const nlohmann::json* body);

	BackendConfig config_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// In-process HTTP server answering the wire protocol with mock_respond.
/// Used by the integration tests; binds to an ephemeral port on 127.0.0.1.
class MockServer {
public:
	explicit MockServer(MockLookup lookup);
	~MockServer();
	MockServer(const MockServer&) = delete;
	MockServer& operator=(const MockServer&) = delete;

	int port() const;
	std::string url() const;
	/// Number of requests answered so far.
	std::size_t requests() const;
	/// Make the next `n` requests fail with HTTP 503.
	void fail_next(std::size_t n);

private:
	struct Impl;
	std::unique_ptr<Impl> impl_;
};

} // namespace gmner
