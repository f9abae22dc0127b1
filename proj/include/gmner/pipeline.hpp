#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "gmner/backend.hpp"
#include "gmner/bio.hpp"
#include "gmner/corpus.hpp"
#include "gmner/predictions.hpp"
#include "gmner/prompts.hpp"

namespace gmner {

struct VeVerdict {
	/// 'e' groundable, 'c' not groundable
	char label = 'c';
	double score = 0;

	bool groundable() const { return label == 'e'; }
};

struct GroundingResult {
	BBox box;
	double score = 0;
};

/// Which sample an image request belongs to.
struct ImageContext {
	std::string sample_id;
	ImageRef image;
};

/// Throws BackendError on transport failure or a malformed response.
VeVerdict ve_classify(Backend& backend, const ImageContext& ctx, const ReferringExpression& expr);

/// Box clamped to the image. Throws BackendError on a malformed response or a
/// box that is degenerate after clamping.
GroundingResult vg_ground(Backend& backend, const ImageContext& ctx, const ReferringExpression& expr);

/// Throws BackendError when the mask does not match the image dimensions or
/// its counts are inconsistent.
RleMask segment_from_box(Backend& backend, const ImageContext& ctx, const BBox& box);

/// (sample id, start, end) -> expansion text.
using ExpansionMap = std::map<std::tuple<std::string, int, int>, std::string>;
/// JSONL `{"id":str,"start":int,"end":int,"expansion":str}`.
ExpansionMap load_expansions(const std::filesystem::path& path);

/// Sample id -> predicted spans. Samples absent from the map have none.
using SpanMap = std::map<std::string, std::vector<EntitySpan>>;

enum class EntitySource { Gold, Predicted };

struct RunOptions {
	int max_in_flight = 4;
	/// Abort the run on the first failure instead of recording it per sample.
	bool fail_fast = false;
};

struct SampleError {
	std::string id;
	std::string message;
};

struct PipelineResult {
	/// One record per successful sample, in input order.
	std::vector<PredictionRecord> records;
	std::vector<SampleError> errors;
};

/// Runs referring expression -> VE -> (VG -> segmentation) for every entity.
/// Entities come from the gold annotations or from `predicted`; a missing
/// expansion counts as empty. Output order follows input order regardless of
/// which request completes first. A failing entity fails its sample only,
/// unless `fail_fast` is set, in which case the first failure is rethrown.
PipelineResult run_pipeline(const std::vector<Sample>& samples, EntitySource source, const SpanMap* predicted,
                            const ExpansionMap& expansions, Backend& backend, const RunOptions& options = {});

} // namespace gmner
