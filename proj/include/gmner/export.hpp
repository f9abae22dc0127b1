#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gmner/corpus.hpp"
#include "gmner/pipeline.hpp"

namespace gmner {

/// Visual-entailment training pair: label 'e' for groundable entities, 'c'
/// otherwise. One record per gold entity.
struct VeExample {
	std::string id;
	std::string image;
	std::string expression;
	char label = 'c';
};

/// Visual-grounding training pair for a groundable entity; the gold box is
/// the largest-area annotated box (first one on ties).
struct VgExample {
	std::string id;
	std::string image;
	std::string expression;
	BBox box;
};

std::vector<VeExample> export_ve(const DatasetSplit& split, const ExpansionMap& expansions);
std::vector<VgExample> export_vg(const DatasetSplit& split, const ExpansionMap& expansions);

/// Largest-area box, ties to the earliest. Throws DataError on an empty list.
const BBox& largest_box(const std::vector<BBox>& boxes);

nlohmann::json to_json(const VeExample& r);
nlohmann::json to_json(const VgExample& r);

} // namespace gmner
