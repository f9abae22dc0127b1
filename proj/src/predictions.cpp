#include "gmner/predictions.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "gmner/errors.hpp"

namespace gmner {

using nlohmann::json;

namespace {

PredictionTriple triple_from_json(const json& t, const std::string& where)
{
	if (!t.is_object())
		throw DataError(where + "triple must be an object");
	PredictionTriple p;
	if (!t.contains("surface") || !t["surface"].is_string())
		throw DataError(where + "field 'surface': missing or not a string");
	p.surface = t["surface"].get<std::string>();
	for (const char* f : {"start", "end"})
		if (!t.contains(f) || !t[f].is_number_integer())
			throw DataError(where + "field '" + f + "': missing or not an integer");
	p.start = t["start"].get<int>();
	p.end = t["end"].get<int>();
	if (!t.contains("type") || !t["type"].is_string())
		throw DataError(where + "field 'type': missing or not a string");
	auto et = parse_entity_type(t["type"].get<std::string>());
	if (!et)
		throw DataError(where + "field 'type': unknown entity type '" + t["type"].get<std::string>() + "'");
	p.etype = *et;
	if (auto it = t.find("box"); it != t.end() && !it->is_null())
		p.box = bbox_from_json(*it, where + "field 'box'");
	if (auto it = t.find("mask"); it != t.end() && !it->is_null())
		p.mask = mask_from_json(*it, where + "field 'mask'");
	if (p.box.has_value() != p.mask.has_value())
		throw DataError(where + "box and mask must both be present or both be null");
	return p;
}

} // namespace

json to_json(const PredictionRecord& r)
{
	json triples = json::array();
	for (const PredictionTriple& t : r.triples)
		triples.push_back({{"surface", t.surface},
		                   {"start", t.start},
		                   {"end", t.end},
		                   {"type", std::string(to_string(t.etype))},
		                   {"box", t.box ? to_json(*t.box) : json(nullptr)},
		                   {"mask", t.mask ? to_json(*t.mask) : json(nullptr)}});
	return {{"id", r.id}, {"triples", std::move(triples)}};
}

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records)
{
	for (const PredictionRecord& r : records)
		out << to_json(r).dump() << '\n';
}

std::vector<PredictionRecord> read_predictions(std::istream& in)
{
	std::vector<PredictionRecord> out;
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
		if (!j.contains("id") || !j["id"].is_string())
			throw DataError(where + "field 'id': missing or not a string");
		if (!j.contains("triples") || !j["triples"].is_array())
			throw DataError(where + "field 'triples': missing or not an array");
		PredictionRecord r;
		r.id = j["id"].get<std::string>();
		for (const json& t : j["triples"])
			r.triples.push_back(triple_from_json(t, where));
		out.push_back(std::move(r));
	}
	return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open prediction file '" + path.string() + "'");
	try {
		return read_predictions(in);
	} catch (const DataError& e) {
		throw DataError(path.string() + ": " + e.what());
	}
}

} // namespace gmner
