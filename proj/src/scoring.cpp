#include "gmner/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <set>

#include "gmner/errors.hpp"
#include "gmner/metrics.hpp"

namespace gmner {

using nlohmann::json;

std::string_view to_string(Task t)
{
	switch (t) {
	case Task::MNER: return "MNER";
	case Task::GMNER: return "GMNER";
	case Task::SMNER: return "SMNER";
	case Task::EEG: return "EEG";
	case Task::EES: return "EES";
	}
	return "?";
}

std::optional<Task> parse_task(std::string_view s)
{
	std::string upper(s);
	for (char& c : upper)
		c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
	for (Task t : kAllTasks)
		if (to_string(t) == upper)
			return t;
	return std::nullopt;
}

std::string_view to_string(IouRule r)
{
	return r == IouRule::Gte ? "gte" : "gt";
}

std::optional<IouRule> parse_iou_rule(std::string_view s)
{
	if (s == "gte")
		return IouRule::Gte;
	if (s == "gt")
		return IouRule::Gt;
	return std::nullopt;
}

std::optional<ReportFormat> parse_report_format(std::string_view s)
{
	if (s == "json")
		return ReportFormat::Json;
	if (s == "markdown" || s == "md")
		return ReportFormat::Markdown;
	return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

bool region_correct(const PredictionTriple& pred, const GoldEntity& gold, const MatchPolicy& policy)
{
	if (gold.boxes.empty())
		return !pred.box.has_value();
	if (!pred.box || !pred.box->valid())
		return false;
	return std::any_of(gold.boxes.begin(), gold.boxes.end(), [&](const BBox& g) {
		return g.valid() && policy.passes(box_iou(*pred.box, g));
	});
}

bool mask_correct(const PredictionTriple& pred, const GoldEntity& gold, const MatchPolicy& policy)
{
	if (gold.masks.empty())
		return !pred.mask.has_value();
	if (!pred.mask)
		return false;
	return std::any_of(gold.masks.begin(), gold.masks.end(), [&](const RleMask& g) {
		if (g.width != pred.mask->width || g.height != pred.mask->height)
			return false;
		MaskOverlap o;
		try {
			o = mask_overlap(*pred.mask, g);
		} catch (const DataError&) {
			return false;
		}
		if (o.union_area() == 0)
			return false;
		return policy.passes(static_cast<double>(o.intersection) / static_cast<double>(o.union_area()));
	});
}

} // namespace

bool triple_correct(const PredictionTriple& pred, const GoldEntity& gold, const MatchPolicy& policy)
{
	if (pred.start != gold.start || pred.end != gold.end)
		return false;
	const bool typed = policy.task == Task::MNER || policy.task == Task::GMNER || policy.task == Task::SMNER;
	if (typed && pred.etype != gold.etype)
		return false;
	switch (policy.task) {
	case Task::MNER: return true;
	case Task::GMNER:
	case Task::EEG: return region_correct(pred, gold, policy);
	case Task::SMNER:
	case Task::EES: return mask_correct(pred, gold, policy);
	}
	return false;
}

namespace {

// Maximum one-to-one matching between predictions and gold entities of one
// sample, by augmenting paths.
std::size_t max_matching(const std::vector<PredictionTriple>& preds, const std::vector<GoldEntity>& golds,
                         const MatchPolicy& policy)
{
	const std::size_t np = preds.size(), ng = golds.size();
	if (np == 0 || ng == 0)
		return 0;
	std::vector<std::vector<std::size_t>> adj(np);
	for (std::size_t p = 0; p < np; ++p)
		for (std::size_t g = 0; g < ng; ++g)
			if (triple_correct(preds[p], golds[g], policy))
				adj[p].push_back(g);

	constexpr std::size_t kFree = static_cast<std::size_t>(-1);
	std::vector<std::size_t> owner(ng, kFree);
	std::vector<char> visited(ng);
	std::function<bool(std::size_t)> augment = [&](std::size_t p) {
		for (std::size_t g : adj[p]) {
			if (visited[g])
				continue;
			visited[g] = 1;
			if (owner[g] == kFree || augment(owner[g])) {
				owner[g] = p;
				return true;
			}
		}
		return false;
	};

	std::size_t matched = 0;
	for (std::size_t p = 0; p < np; ++p) {
		if (adj[p].empty())
			continue;
		std::fill(visited.begin(), visited.end(), 0);
		if (augment(p))
			++matched;
	}
	return matched;
}

void finish(ScoreReport& r)
{
	r.precision = r.n_pred ? static_cast<double>(r.n_correct) / static_cast<double>(r.n_pred) : 0.0;
	r.recall = r.n_gold ? static_cast<double>(r.n_correct) / static_cast<double>(r.n_gold) : 0.0;
	// 2PR/(P+R) reduced to counts: one rounding, so hand-derived fractions compare exactly.
	r.f1 = r.n_correct ? 2.0 * static_cast<double>(r.n_correct) / static_cast<double>(r.n_pred + r.n_gold) : 0.0;
}

} // namespace

ScoreReport score_task(const DatasetSplit& gold, const std::vector<PredictionRecord>& preds,
                       const MatchPolicy& policy)
{
	if (!(policy.iou_threshold >= 0.0 && policy.iou_threshold < 1.0))
		throw DataError("IoU threshold must lie in [0, 1)");
	std::map<std::string_view, const Sample*> by_id;
	for (const Sample& s : gold.samples)
		by_id.emplace(s.id, &s);

	ScoreReport r;
	r.task = policy.task;
	r.iou_threshold = policy.iou_threshold;
	r.iou_rule = policy.iou_rule;
	for (const Sample& s : gold.samples)
		r.n_gold += s.entities.size();

	std::set<std::string_view> seen;
	for (const PredictionRecord& rec : preds) {
		auto it = by_id.find(rec.id);
		if (it == by_id.end())
			throw DataError("prediction for unknown sample id '" + rec.id + "'");
		if (!seen.insert(rec.id).second)
			throw DataError("duplicate prediction record for sample id '" + rec.id + "'");
		r.n_pred += rec.triples.size();
		r.n_correct += max_matching(rec.triples, it->second->entities, policy);
	}
	finish(r);
	return r;
}

std::vector<ScoreReport> iou_sweep(const DatasetSplit& gold, const std::vector<PredictionRecord>& preds, Task task,
                                   const std::vector<double>& thresholds, IouRule rule)
{
	for (std::size_t i = 0; i < thresholds.size(); ++i) {
		if (!(thresholds[i] >= 0.0 && thresholds[i] < 1.0))
			throw DataError("sweep thresholds must lie in [0, 1)");
		if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
			throw DataError("sweep thresholds must be strictly increasing");
	}
	std::vector<ScoreReport> out;
	out.reserve(thresholds.size());
	for (double t : thresholds)
		out.push_back(score_task(gold, preds, {task, t, rule}));
	return out;
}

double topn_prec_at(const DatasetSplit& gold, const std::vector<CandidateList>& candidates, std::size_t n,
                    double threshold, IouRule rule)
{
	if (n < 1)
		throw DataError("topn_prec_at: n must be >= 1");
	std::map<std::pair<std::string_view, std::string_view>, const CandidateList*> lists;
	for (const CandidateList& c : candidates)
		lists.emplace(std::pair<std::string_view, std::string_view>{c.id, c.surface}, &c);

	const MatchPolicy policy{Task::GMNER, threshold, rule};
	std::size_t groundable = 0, hits = 0;
	for (const Sample& s : gold.samples) {
		for (const GoldEntity& e : s.entities) {
			if (!e.groundable())
				continue;
			++groundable;
			auto it = lists.find({s.id, e.surface});
			if (it == lists.end())
				continue;
			const auto& cands = it->second->candidates;
			std::vector<std::size_t> order(cands.size());
			std::iota(order.begin(), order.end(), std::size_t{0});
			std::stable_sort(order.begin(), order.end(),
			                 [&](std::size_t a, std::size_t b) { return cands[a].score > cands[b].score; });
			const std::size_t k = std::min(n, order.size());
			bool hit = false;
			for (std::size_t i = 0; i < k && !hit; ++i) {
				const BBox& box = cands[order[i]].box;
				if (!box.valid())
					continue;
				for (const BBox& g : e.boxes)
					hit = hit || (g.valid() && policy.passes(box_iou(box, g)));
			}
			hits += hit ? 1 : 0;
		}
	}
	return groundable ? static_cast<double>(hits) / static_cast<double>(groundable) : 0.0;
}

std::vector<CandidateList> read_candidates(std::istream& in)
{
	std::vector<CandidateList> out;
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
		for (const char* f : {"id", "surface"})
			if (!j.contains(f) || !j[f].is_string())
				throw DataError(where + "field '" + f + "': missing or not a string");
		if (!j.contains("candidates") || !j["candidates"].is_array())
			throw DataError(where + "field 'candidates': missing or not an array");
		CandidateList c{j["id"].get<std::string>(), j["surface"].get<std::string>(), {}};
		for (const json& cand : j["candidates"]) {
			if (!cand.is_object() || !cand.contains("box") || !cand.contains("score") || !cand["score"].is_number())
				throw DataError(where + "candidate must be {\"box\":[..],\"score\":float}");
			c.candidates.push_back({bbox_from_json(cand["box"], where + "candidate box"), cand["score"].get<double>()});
		}
		out.push_back(std::move(c));
	}
	return out;
}

std::vector<CandidateList> load_candidates(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open candidate file '" + path.string() + "'");
	try {
		return read_candidates(in);
	} catch (const DataError& e) {
		throw DataError(path.string() + ": " + e.what());
	}
}

// ---------------------------------------------------------------------------
// reports

json to_json(const ScoreReport& r)
{
	return {{"task", std::string(to_string(r.task))},
	        {"iou_threshold", r.iou_threshold},
	        {"iou_rule", std::string(to_string(r.iou_rule))},
	        {"n_pred", r.n_pred},
	        {"n_gold", r.n_gold},
	        {"n_correct", r.n_correct},
	        {"precision", r.precision},
	        {"recall", r.recall},
	        {"f1", r.f1}};
}

ScoreReport report_from_json(const json& j)
{
	try {
		ScoreReport r;
		auto task = parse_task(j.at("task").get<std::string>());
		auto rule = parse_iou_rule(j.at("iou_rule").get<std::string>());
		if (!task || !rule)
			throw DataError("report: unknown task or IoU rule");
		r.task = *task;
		r.iou_rule = *rule;
		r.iou_threshold = j.at("iou_threshold").get<double>();
		r.n_pred = j.at("n_pred").get<std::size_t>();
		r.n_gold = j.at("n_gold").get<std::size_t>();
		r.n_correct = j.at("n_correct").get<std::size_t>();
		r.precision = j.at("precision").get<double>();
		r.recall = j.at("recall").get<double>();
		r.f1 = j.at("f1").get<double>();
		return r;
	} catch (const json::exception& e) {
		throw DataError(std::string("report: ") + e.what());
	}
}

namespace {

std::string fixed(double v, int decimals)
{
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
	return buf;
}

} // namespace

std::string emit_report(const std::vector<ScoreReport>& reports, ReportFormat format)
{
	if (format == ReportFormat::Json) {
		json arr = json::array();
		for (const ScoreReport& r : reports)
			arr.push_back(to_json(r));
		return arr.dump(2) + "\n";
	}
	std::string out = "| Task | IoU | Rule | #Pred | #Gold | #Correct | Pre. | Rec. | F1 |\n"
	                  "|------|-----|------|------:|------:|---------:|-----:|-----:|---:|\n";
	for (const ScoreReport& r : reports) {
		out += "| " + std::string(to_string(r.task)) + " | " + fixed(r.iou_threshold, 2) + " | " +
		       std::string(to_string(r.iou_rule)) + " | " + std::to_string(r.n_pred) + " | " +
		       std::to_string(r.n_gold) + " | " + std::to_string(r.n_correct) + " | " +
		       fixed(100 * r.precision, 2) + " | " + fixed(100 * r.recall, 2) + " | " + fixed(100 * r.f1, 2) +
		       " |\n";
	}
	return out;
}

} // namespace gmner
