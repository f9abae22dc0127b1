#include "gmner/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <thread>
#include <variant>

#include "gmner/errors.hpp"

namespace gmner {

using nlohmann::json;

namespace {

json image_request(const ImageContext& ctx, const ReferringExpression& expr)
{
	return {{"image", ctx.image.path},
	        {"expression", expr.rendered},
	        {"id", ctx.sample_id},
	        {"surface", expr.entity},
	        {"width", ctx.image.width},
	        {"height", ctx.image.height}};
}

[[noreturn]] void malformed(std::string_view path, const std::string& what)
{
	throw BackendError(std::string(path) + ": malformed backend response: " + what);
}

} // namespace

VeVerdict ve_classify(Backend& backend, const ImageContext& ctx, const ReferringExpression& expr)
{
	if (expr.rendered.empty())
		throw DataError("ve_classify: empty referring expression");
	const json res = backend.post(endpoint::kVe, image_request(ctx, expr));
	if (!res.is_object() || !res.contains("label") || !res["label"].is_string())
		malformed(endpoint::kVe, "missing 'label'");
	const std::string label = res["label"].get<std::string>();
	if (label != "e" && label != "c")
		malformed(endpoint::kVe, "label must be \"e\" or \"c\"");
	VeVerdict v{label[0], 0.0};
	if (res.contains("score")) {
		if (!res["score"].is_number())
			malformed(endpoint::kVe, "'score' is not a number");
		v.score = res["score"].get<double>();
	}
	return v;
}

GroundingResult vg_ground(Backend& backend, const ImageContext& ctx, const ReferringExpression& expr)
{
	const json res = backend.post(endpoint::kVg, image_request(ctx, expr));
	if (!res.is_object() || !res.contains("box"))
		malformed(endpoint::kVg, "missing 'box'");
	BBox raw;
	try {
		raw = bbox_from_json(res["box"], std::string(endpoint::kVg));
	} catch (const DataError& e) {
		malformed(endpoint::kVg, e.what());
	}
	GroundingResult g{clamp_box(raw, ctx.image.width, ctx.image.height), 0.0};
	if (!g.box.valid())
		throw BackendError(std::string(endpoint::kVg) + ": degenerate box from backend");
	if (res.contains("score") && res["score"].is_number())
		g.score = res["score"].get<double>();
	return g;
}

RleMask segment_from_box(Backend& backend, const ImageContext& ctx, const BBox& box)
{
	if (!box.valid())
		throw DataError("segment_from_box: invalid box");
	const json req{{"image", ctx.image.path},
	               {"box", to_json(box)},
	               {"width", ctx.image.width},
	               {"height", ctx.image.height}};
	const json res = backend.post(endpoint::kSegment, req);
	if (!res.is_object() || !res.contains("mask"))
		malformed(endpoint::kSegment, "missing 'mask'");
	RleMask mask;
	try {
		mask = mask_from_json(res["mask"], std::string(endpoint::kSegment));
	} catch (const DataError& e) {
		malformed(endpoint::kSegment, e.what());
	}
	if (mask.width != ctx.image.width || mask.height != ctx.image.height)
		throw BackendError(std::string(endpoint::kSegment) + ": mask is " + std::to_string(mask.width) + "x" +
		                   std::to_string(mask.height) + ", image is " + std::to_string(ctx.image.width) + "x" +
		                   std::to_string(ctx.image.height));
	if (mask.total() != static_cast<std::uint64_t>(mask.width) * static_cast<std::uint64_t>(mask.height))
		throw BackendError(std::string(endpoint::kSegment) + ": mask counts do not sum to w*h");
	return mask;
}

ExpansionMap load_expansions(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open expansion file '" + path.string() + "'");
	ExpansionMap out;
	std::string line;
	std::size_t lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		if (line.find_first_not_of(" \t\r") == std::string::npos)
			continue;
		const std::string where = path.string() + ": line " + std::to_string(lineno) + ": ";
		json j;
		try {
			j = json::parse(line);
		} catch (const json::parse_error& e) {
			throw DataError(where + "invalid JSON: " + e.what());
		}
		if (!j.contains("id") || !j["id"].is_string() || !j.contains("expansion") || !j["expansion"].is_string())
			throw DataError(where + "fields 'id' and 'expansion' must be strings");
		if (!j.contains("start") || !j["start"].is_number_integer() || !j.contains("end") ||
		    !j["end"].is_number_integer())
			throw DataError(where + "fields 'start' and 'end' must be integers");
		out[{j["id"].get<std::string>(), j["start"].get<int>(), j["end"].get<int>()}] =
		    j["expansion"].get<std::string>();
	}
	return out;
}

namespace {

struct EntityTask {
	std::size_t sample;
	std::size_t slot;
	EntitySpan span;
};

using TaskOutcome = std::variant<std::monostate, PredictionTriple, std::string>;

PredictionTriple run_entity(Backend& backend, const Sample& sample, const EntitySpan& span,
                            const ExpansionMap& expansions)
{
	PredictionTriple t;
	t.surface = sample.span_text(span.start, span.end);
	t.start = span.start;
	t.end = span.end;
	t.etype = span.etype;

	std::string expansion;
	if (auto it = expansions.find({sample.id, span.start, span.end}); it != expansions.end())
		expansion = it->second;
	const ReferringExpression expr = compose_referring_expression(t.surface, t.etype, expansion);
	const ImageContext ctx{sample.id, sample.image};

	if (!ve_classify(backend, ctx, expr).groundable())
		return t;
	const GroundingResult g = vg_ground(backend, ctx, expr);
	t.mask = segment_from_box(backend, ctx, g.box);
	t.box = g.box;
	return t;
}

} // namespace

PipelineResult run_pipeline(const std::vector<Sample>& samples, EntitySource source, const SpanMap* predicted,
                            const ExpansionMap& expansions, Backend& backend, const RunOptions& options)
{
	if (options.max_in_flight < 1)
		throw UsageError("run_pipeline: max in-flight must be >= 1");
	if (source == EntitySource::Predicted && predicted == nullptr)
		throw UsageError("run_pipeline: predicted entity source requires a span map");

	std::vector<EntityTask> tasks;
	std::vector<std::size_t> first_task(samples.size() + 1, 0);
	for (std::size_t s = 0; s < samples.size(); ++s) {
		first_task[s] = tasks.size();
		const Sample& sample = samples[s];
		std::vector<EntitySpan> spans;
		if (source == EntitySource::Gold) {
			for (const GoldEntity& e : sample.entities)
				spans.push_back({e.start, e.end, e.etype});
		} else if (auto it = predicted->find(sample.id); it != predicted->end()) {
			spans = it->second;
		}
		for (std::size_t k = 0; k < spans.size(); ++k) {
			const EntitySpan& sp = spans[k];
			if (sp.start < 0 || sp.start >= sp.end || sp.end > static_cast<int>(sample.tokens.size()))
				throw DataError("sample '" + sample.id + "': entity span [" + std::to_string(sp.start) + "," +
				                std::to_string(sp.end) + ") out of range");
			tasks.push_back({s, k, sp});
		}
	}
	first_task[samples.size()] = tasks.size();

	std::vector<TaskOutcome> outcomes(tasks.size());
	std::atomic<std::size_t> next{0};
	std::atomic<bool> abort{false};

	auto worker = [&] {
		for (;;) {
			if (abort.load())
				return;
			const std::size_t i = next.fetch_add(1);
			if (i >= tasks.size())
				return;
			const EntityTask& task = tasks[i];
			try {
				outcomes[i] = run_entity(backend, samples[task.sample], task.span, expansions);
			} catch (const std::exception& e) {
				outcomes[i] = std::string(e.what());
				if (options.fail_fast)
					abort = true;
			}
		}
	};

	const std::size_t n_workers =
	    std::min<std::size_t>(static_cast<std::size_t>(options.max_in_flight), std::max<std::size_t>(tasks.size(), 1));
	{
		std::vector<std::jthread> pool;
		for (std::size_t w = 1; w < n_workers; ++w)
			pool.emplace_back(worker);
		worker();
	}

	if (options.fail_fast) {
		for (std::size_t i = 0; i < tasks.size(); ++i)
			if (auto* msg = std::get_if<std::string>(&outcomes[i]))
				throw BackendError("sample '" + samples[tasks[i].sample].id + "': " + *msg);
	}

	PipelineResult result;
	for (std::size_t s = 0; s < samples.size(); ++s) {
		PredictionRecord record{samples[s].id, {}};
		std::optional<std::string> error;
		for (std::size_t i = first_task[s]; i < first_task[s + 1]; ++i) {
			if (auto* t = std::get_if<PredictionTriple>(&outcomes[i])) {
				record.triples.push_back(std::move(*t));
			} else if (auto* msg = std::get_if<std::string>(&outcomes[i])) {
				if (!error)
					error = *msg;
			}
		}
		if (error) {
			result.errors.push_back({samples[s].id, *error});
		} else {
			result.records.push_back(std::move(record));
		}
	}
	return result;
}

} // namespace gmner
