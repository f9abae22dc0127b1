#include "gmner/export.hpp"

#include "gmner/errors.hpp"
#include "gmner/prompts.hpp"

namespace gmner {

namespace {

std::string expression_for(const Sample& s, const GoldEntity& e, const ExpansionMap& expansions)
{
	auto it = expansions.find({s.id, e.start, e.end});
	return compose_referring_expression(e.surface, e.etype, it == expansions.end() ? "" : it->second).rendered;
}

} // namespace

const BBox& largest_box(const std::vector<BBox>& boxes)
{
	if (boxes.empty())
		throw DataError("largest_box: no boxes");
	const BBox* best = &boxes.front();
	for (const BBox& b : boxes)
		if (b.area() > best->area())
			best = &b;
	return *best;
}

std::vector<VeExample> export_ve(const DatasetSplit& split, const ExpansionMap& expansions)
{
	std::vector<VeExample> out;
	for (const Sample& s : split.samples)
		for (const GoldEntity& e : s.entities)
			out.push_back({s.id, s.image.path, expression_for(s, e, expansions), e.groundable() ? 'e' : 'c'});
	return out;
}

std::vector<VgExample> export_vg(const DatasetSplit& split, const ExpansionMap& expansions)
{
	std::vector<VgExample> out;
	for (const Sample& s : split.samples)
		for (const GoldEntity& e : s.entities)
			if (e.groundable())
				out.push_back({s.id, s.image.path, expression_for(s, e, expansions), largest_box(e.boxes)});
	return out;
}

nlohmann::json to_json(const VeExample& r)
{
	return {{"id", r.id}, {"image", r.image}, {"expression", r.expression}, {"label", std::string(1, r.label)}};
}

nlohmann::json to_json(const VgExample& r)
{
	return {{"id", r.id}, {"image", r.image}, {"expression", r.expression}, {"box", to_json(r.box)}};
}

} // namespace gmner
