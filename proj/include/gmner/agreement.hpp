#pragma once

#include <cstddef>

#include <json.hpp>

#include "gmner/corpus.hpp"
#include "gmner/metrics.hpp"

namespace gmner {

/// Inter-annotator agreement between two annotations of the same split.
struct AgreementSummary {
	/// Entities present in both annotations (same id, start, end).
	std::size_t n_items = 0;
	/// Fleiss kappa over the groundable / ungroundable judgement.
	double kappa = 0;
	/// Entities groundable in both annotations.
	std::size_t n_mask_pairs = 0;
	/// Mean Dice of the per-entity union masks over those pairs.
	double mean_dice = 0;
	/// Fraction of those pairs whose union-mask IoU exceeds 0.5.
	double consistent_rate = 0;
};

/// Union of all masks of one entity. Throws DataError on an empty list or
/// mismatched dimensions.
RleMask union_mask(const std::vector<RleMask>& masks);

AgreementSummary compare_annotations(const DatasetSplit& first, const DatasetSplit& second);

nlohmann::json to_json(const AgreementSummary& s);

} // namespace gmner
