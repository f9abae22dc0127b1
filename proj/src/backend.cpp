#include "gmner/backend.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <istream>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "gmner/corpus.hpp"
#include "gmner/errors.hpp"
#include "gmner/prompts.hpp"

namespace gmner {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes)
{
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for (unsigned char c : bytes) {
		h ^= c;
		h *= 0x100000001b3ULL;
	}
	return h;
}

// ---------------------------------------------------------------------------
// MockLookup

void MockLookup::add(std::string id, std::string surface, MockEntry entry)
{
	entries_[{std::move(id), std::move(surface)}] = std::move(entry);
}

const MockEntry* MockLookup::find(const std::string& id, const std::string& surface) const
{
	auto it = entries_.find({id, surface});
	return it == entries_.end() ? nullptr : &it->second;
}

MockLookup MockLookup::parse(std::istream& in)
{
	MockLookup out;
	std::string line;
	std::size_t lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		if (line.find_first_not_of(" \t\r") == std::string::npos)
			continue;
		const std::string where = "line " + std::to_string(lineno) + ": ";
		json j;
		try {
			j = json::parse(line);
		} catch (const json::parse_error& e) {
			throw DataError(where + "invalid JSON: " + e.what());
		}
		for (const char* f : {"id", "surface", "label"})
			if (!j.contains(f) || !j[f].is_string())
				throw DataError(where + "field '" + f + "': missing or not a string");
		const std::string label = j["label"].get<std::string>();
		if (label != "e" && label != "c")
			throw DataError(where + "field 'label': must be \"e\" or \"c\"");
		MockEntry entry{label[0], std::nullopt};
		if (auto it = j.find("box"); it != j.end() && !it->is_null()) {
			entry.box = bbox_from_json(*it, where + "field 'box'");
			if (!entry.box->valid())
				throw DataError(where + "field 'box': degenerate box");
		}
		out.add(j["id"].get<std::string>(), j["surface"].get<std::string>(), entry);
	}
	return out;
}

MockLookup MockLookup::load(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open mock lookup file '" + path.string() + "'");
	try {
		return parse(in);
	} catch (const DataError& e) {
		throw DataError(path.string() + ": " + e.what());
	}
}

// ---------------------------------------------------------------------------
// mock_respond

namespace {

const json& field(const json& req, const char* name, json::value_t type, std::string_view path)
{
	auto it = req.find(name);
	const bool ok = it != req.end() &&
	                (it->type() == type || (type == json::value_t::number_float && it->is_number()) ||
	                 (type == json::value_t::number_integer && it->is_number_integer()));
	if (!ok)
		throw DataError(std::string(path) + ": request field '" + name + "' missing or of wrong type");
	return *it;
}

// (sample id, surface) for the lookup; falls back to the image reference and
// the entity parsed out of the expression when the request omits them.
std::pair<std::string, std::string> lookup_key(const json& req, std::string_view path)
{
	const std::string image = field(req, "image", json::value_t::string, path).get<std::string>();
	const std::string expr = field(req, "expression", json::value_t::string, path).get<std::string>();
	std::string id = req.contains("id") && req["id"].is_string() ? req["id"].get<std::string>() : image;
	std::string surface;
	if (req.contains("surface") && req["surface"].is_string())
		surface = req["surface"].get<std::string>();
	else if (auto parsed = parse_referring_expression(expr))
		surface = parsed->entity;
	else
		surface = expr;
	return {std::move(id), std::move(surface)};
}

} // namespace

json mock_respond(const MockLookup& lookup, std::string_view path, const json& req)
{
	if (path == endpoint::kHealth)
		return {{"status", "ok"}};
	if (!req.is_object())
		throw DataError(std::string(path) + ": request body must be a JSON object");

	if (path == endpoint::kVe) {
		const auto [id, surface] = lookup_key(req, path);
		if (const MockEntry* e = lookup.find(id, surface))
			return {{"label", std::string(1, e->label)}, {"score", 1.0}};
		const bool even = fnv1a64(id + "|" + surface) % 2 == 0;
		return {{"label", even ? "e" : "c"}, {"score", 0.5}};
	}
	if (path == endpoint::kVg) {
		const auto [id, surface] = lookup_key(req, path);
		if (const MockEntry* e = lookup.find(id, surface); e && e->box)
			return {{"box", to_json(*e->box)}, {"score", 1.0}};
		const double w = field(req, "width", json::value_t::number_integer, path).get<double>();
		const double h = field(req, "height", json::value_t::number_integer, path).get<double>();
		return {{"box", to_json(BBox{w / 4, h / 4, 3 * w / 4, 3 * h / 4})}, {"score", 0.5}};
	}
	if (path == endpoint::kSegment) {
		field(req, "image", json::value_t::string, path);
		const BBox box = bbox_from_json(field(req, "box", json::value_t::array, path), std::string(path));
		const int w = field(req, "width", json::value_t::number_integer, path).get<int>();
		const int h = field(req, "height", json::value_t::number_integer, path).get<int>();
		if (w < 1 || h < 1 || !box.valid())
			throw DataError(std::string(path) + ": invalid box or image dimensions");
		return {{"mask", to_json(rle_encode(rasterize_box(box, w, h)))}};
	}
	if (path == endpoint::kLlm) {
		const std::string prompt = field(req, "prompt", json::value_t::string, path).get<std::string>();
		field(req, "max_tokens", json::value_t::number_integer, path);
		return {{"text", "MOCK:" + prompt.substr(0, 32)}};
	}
	throw DataError("unknown endpoint '" + std::string(path) + "'");
}

json MockBackend::post(std::string_view path, const json& body)
{
	return mock_respond(lookup_, path, body);
}

json MockBackend::get(std::string_view path)
{
	return mock_respond(lookup_, path, json::object());
}

// ---------------------------------------------------------------------------
// HttpBackend

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config))
{
	if (!config_.valid())
		throw UsageError("backend config: timeout must be > 0, max in-flight >= 1, retries >= 0");
}

json HttpBackend::post(std::string_view path, const json& body)
{
	return request("POST", path, &body);
}

json HttpBackend::get(std::string_view path)
{
	return request("GET", path, nullptr);
}

json HttpBackend::request(std::string_view method, std::string_view path, const json* body)
{
	// One client per call keeps concurrent callers independent.
	httplib::Client client(config_.base_url);
	const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
	client.set_connection_timeout(timeout);
	client.set_read_timeout(timeout);
	client.set_write_timeout(timeout);

	std::string last_error;
	for (int attempt = 0; attempt <= config_.retries; ++attempt) {
		httplib::Result res = method == "GET"
		                          ? client.Get(std::string(path))
		                          : client.Post(std::string(path), body->dump(), "application/json");
		if (!res) {
			last_error = "transport error: " + httplib::to_string(res.error());
			continue;
		}
		if (res->status >= 500) {
			last_error = "HTTP " + std::to_string(res->status);
			continue;
		}
		if (res->status != 200)
			throw BackendError(std::string(path) + ": HTTP " + std::to_string(res->status) + ": " + res->body);
		try {
			return json::parse(res->body);
		} catch (const json::parse_error&) {
			throw BackendError(std::string(path) + ": malformed backend response (not JSON)");
		}
	}
	throw BackendError(std::string(path) + ": " + last_error + " after " + std::to_string(config_.retries + 1) +
	                   " attempt(s)");
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config)
{
	if (!config.valid())
		throw UsageError("backend config: timeout must be > 0, max in-flight >= 1, retries >= 0");
	if (config.base_url == "mock")
		return std::make_unique<MockBackend>(config.mock_lookup ? MockLookup::load(*config.mock_lookup)
		                                                        : MockLookup{});
	return std::make_unique<HttpBackend>(config);
}

// ---------------------------------------------------------------------------
// MockServer

struct MockServer::Impl {
	MockLookup lookup;
	httplib::Server server;
	std::thread thread;
	int port = 0;
	std::atomic<std::size_t> requests{0};
	std::atomic<std::size_t> failures_left{0};

	void handle(const httplib::Request& req, httplib::Response& res)
	{
		++requests;
		for (std::size_t left = failures_left.load(); left > 0;) {
			if (failures_left.compare_exchange_weak(left, left - 1)) {
				res.status = 503;
				res.set_content(R"({"error":"injected failure"})", "application/json");
				return;
			}
		}
		try {
			json body = req.method == "GET" ? json::object() : json::parse(req.body);
			res.set_content(mock_respond(lookup, req.path, body).dump(), "application/json");
		} catch (const std::exception& e) {
			res.status = 400;
			res.set_content(json{{"error", e.what()}}.dump(), "application/json");
		}
	}
};

MockServer::MockServer(MockLookup lookup) : impl_(std::make_unique<Impl>())
{
	impl_->lookup = std::move(lookup);
	auto handler = [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
		impl->handle(req, res);
	};
	for (std::string_view p : {endpoint::kVe, endpoint::kVg, endpoint::kSegment, endpoint::kLlm})
		impl_->server.Post(std::string(p), handler);
	impl_->server.Get(std::string(endpoint::kHealth), handler);
	impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
	if (impl_->port <= 0)
		throw BackendError("mock server: cannot bind to 127.0.0.1");
	impl_->thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
	impl_->server.wait_until_ready();
}

MockServer::~MockServer()
{
	impl_->server.stop();
	if (impl_->thread.joinable())
		impl_->thread.join();
}

int MockServer::port() const
{
	return impl_->port;
}

std::string MockServer::url() const
{
	return "http://127.0.0.1:" + std::to_string(impl_->port);
}

std::size_t MockServer::requests() const
{
	return impl_->requests.load();
}

void MockServer::fail_next(std::size_t n)
{
	impl_->failures_left = n;
}

} // namespace gmner
