#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gmner/corpus.hpp"
#include "gmner/predictions.hpp"

namespace gmner {

enum class Task { MNER, GMNER, SMNER, EEG, EES };

inline constexpr Task kAllTasks[] = {Task::MNER, Task::GMNER, Task::SMNER, Task::EEG, Task::EES};

std::string_view to_string(Task t);
/// Case-insensitive: "mner", "GMNER", ...
std::optional<Task> parse_task(std::string_view s);

/// gte: IoU >= threshold counts as a hit; gt: IoU > threshold.
enum class IouRule { Gte, Gt };

std::string_view to_string(IouRule r);
std::optional<IouRule> parse_iou_rule(std::string_view s);

struct MatchPolicy {
	Task task = Task::GMNER;
	double iou_threshold = 0.5;
	IouRule iou_rule = IouRule::Gte;

	bool passes(double iou) const { return iou_rule == IouRule::Gte ? iou >= iou_threshold : iou > iou_threshold; }
};

/// Element-wise correctness of one prediction against one gold entity:
///   MNER  offsets + type
///   GMNER offsets + type + region (both ungroundable, or box IoU passes vs some gold box)
///   SMNER offsets + type + mask   (both ungroundable, or mask IoU passes vs some gold mask)
///   EEG   offsets + region, type ignored
///   EES   offsets + mask, type ignored
bool triple_correct(const PredictionTriple& pred, const GoldEntity& gold, const MatchPolicy& policy);

struct ScoreReport {
	Task task = Task::GMNER;
	double iou_threshold = 0.5;
	IouRule iou_rule = IouRule::Gte;
	std::size_t n_pred = 0;
	std::size_t n_gold = 0;
	std::size_t n_correct = 0;
	double precision = 0;
	double recall = 0;
	double f1 = 0;

	friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

/// Micro-averaged P/R/F1 with one-to-one matching inside each sample
/// (maximum matching; predictions and gold entities are visited in input
/// order so the result is deterministic). Throws DataError when a prediction
/// names an unknown or repeated sample id.
ScoreReport score_task(const DatasetSplit& gold, const std::vector<PredictionRecord>& preds,
                       const MatchPolicy& policy);

/// One report per threshold. Throws DataError unless thresholds are strictly
/// increasing within [0, 1).
std::vector<ScoreReport> iou_sweep(const DatasetSplit& gold, const std::vector<PredictionRecord>& preds, Task task,
                                   const std::vector<double>& thresholds, IouRule rule = IouRule::Gte);

struct ScoredBox {
	BBox box;
	double score = 0;
};

struct CandidateList {
	std::string id;
	std::string surface;
	std::vector<ScoredBox> candidates;
};

/// Fraction of groundable gold entities with at least one of their top-n
/// candidates (descending score, ties keep list order) hitting some gold box.
/// Candidates are matched to entities by (sample id, surface). Throws
/// DataError when n < 1.
double topn_prec_at(const DatasetSplit& gold, const std::vector<CandidateList>& candidates, std::size_t n,
                    double threshold = 0.5, IouRule rule = IouRule::Gte);

/// JSONL `{"id":str,"surface":str,"candidates":[{"box":[..],"score":float}]}`.
std::vector<CandidateList> load_candidates(const std::filesystem::path& path);
std::vector<CandidateList> read_candidates(std::istream& in);

enum class ReportFormat { Json, Markdown };
std::optional<ReportFormat> parse_report_format(std::string_view s);

nlohmann::json to_json(const ScoreReport& report);
ScoreReport report_from_json(const nlohmann::json& j);

/// Deterministic rendering. Markdown: one table row per report with
/// Pre./Rec./F1 as percentages; JSON: an array of report objects.
std::string emit_report(const std::vector<ScoreReport>& reports, ReportFormat format);

} // namespace gmner
