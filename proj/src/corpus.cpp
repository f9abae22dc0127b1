#include "gmner/corpus.hpp"

#include <fstream>
#include <initializer_list>
#include <iostream>
#include <set>
#include <sstream>
#include <tuple>

#include "gmner/errors.hpp"

namespace gmner {

using nlohmann::json;

std::string_view to_string(EntityType t)
{
	switch (t) {
	case EntityType::PER: return "PER";
	case EntityType::LOC: return "LOC";
	case EntityType::ORG: return "ORG";
	case EntityType::MISC: return "MISC";
	}
	return "?";
}

std::optional<EntityType> parse_entity_type(std::string_view s)
{
	for (EntityType t : kEntityTypes)
		if (to_string(t) == s)
			return t;
	return std::nullopt;
}

std::string Sample::span_text(int start, int end) const
{
	std::string out;
	for (int i = start; i < end; ++i) {
		if (i > start)
			out += ' ';
		out += tokens.at(static_cast<std::size_t>(i));
	}
	return out;
}

const Sample* DatasetSplit::find(std::string_view id) const
{
	for (const Sample& s : samples)
		if (s.id == id)
			return &s;
	return nullptr;
}

// ---------------------------------------------------------------------------
// validation

std::vector<Violation> validate_sample(const Sample& s)
{
	std::vector<Violation> out;
	auto add = [&out](std::string field, std::string rule) {
		out.push_back({std::move(field), std::move(rule)});
	};

	if (s.id.empty())
		add("id", "id must be non-empty");
	if (s.tokens.empty())
		add("tokens", "token count must be >= 1");
	if (s.image.width < 1 || s.image.height < 1)
		add("image", "image width and height must be >= 1");

	const int n_tokens = static_cast<int>(s.tokens.size());
	std::set<std::tuple<int, int, EntityType>> seen;
	for (std::size_t k = 0; k < s.entities.size(); ++k) {
		const GoldEntity& e = s.entities[k];
		const std::string f = "entities[" + std::to_string(k) + "]";
		const bool in_range = e.start >= 0 && e.start < e.end && e.end <= n_tokens;
		if (!in_range) {
			add(f, "entity offset out of range");
		} else if (s.span_text(e.start, e.end) != e.surface) {
			add(f + ".surface", "surface does not match tokens [start,end)");
		}
		if (!seen.insert({e.start, e.end, e.etype}).second)
			add(f, "duplicate (start,end,type) entity");
		if (e.boxes.empty() != e.masks.empty())
			add(f, "boxes/masks groundability mismatch");
		for (std::size_t b = 0; b < e.boxes.size(); ++b) {
			const BBox& box = e.boxes[b];
			if (!box.valid())
				add(f + ".boxes[" + std::to_string(b) + "]", "box must satisfy 0 <= x1 < x2, 0 <= y1 < y2");
			else if (s.image.width >= 1 && !box.within(s.image.width, s.image.height))
				add(f + ".boxes[" + std::to_string(b) + "]", "box exceeds image bounds");
		}
		for (std::size_t m = 0; m < e.masks.size(); ++m) {
			const RleMask& mask = e.masks[m];
			const std::string mf = f + ".masks[" + std::to_string(m) + "]";
			if (mask.width != s.image.width || mask.height != s.image.height)
				add(mf, "mask dimensions differ from image dimensions");
			if (!mask.valid())
				add(mf, "counts must sum to w*h with no empty runs after the first");
		}
	}
	return out;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& field,
                               const std::string& what)
{
	throw DataError(where + ": field '" + field + "': " + what);
}

void check_fields(const json& j, std::initializer_list<std::string_view> known,
                  const std::string& prefix, const LoadOptions& opt, const std::string& where)
{
	for (const auto& [key, value] : j.items()) {
		bool ok = false;
		for (std::string_view k : known)
			ok = ok || k == key;
		if (ok)
			continue;
		if (opt.strict)
			schema_error(where, prefix + key, "unknown field");
		const std::string msg = where + ": ignoring unknown field '" + prefix + key + "'";
		if (opt.on_warning)
			opt.on_warning(msg);
		else
			std::cerr << "warning: " << msg << '\n';
	}
}

const json& require(const json& j, const char* key, const std::string& path, const std::string& where)
{
	auto it = j.find(key);
	if (it == j.end())
		schema_error(where, path, "missing");
	return *it;
}

std::string get_string(const json& j, const char* key, const std::string& path, const std::string& where)
{
	const json& v = require(j, key, path, where);
	if (!v.is_string())
		schema_error(where, path, "expected string");
	return v.get<std::string>();
}

int get_int(const json& j, const char* key, const std::string& path, const std::string& where)
{
	const json& v = require(j, key, path, where);
	if (!v.is_number_integer())
		schema_error(where, path, "expected integer");
	return v.get<int>();
}

std::optional<std::string> get_opt_string(const json& j, const char* key, const std::string& path,
                                          const std::string& where)
{
	auto it = j.find(key);
	if (it == j.end() || it->is_null())
		return std::nullopt;
	if (!it->is_string())
		schema_error(where, path, "expected string");
	return it->get<std::string>();
}

} // namespace

BBox bbox_from_json(const json& j, const std::string& where)
{
	if (!j.is_array() || j.size() != 4)
		throw DataError(where + ": box must be an array [x1,y1,x2,y2]");
	std::array<double, 4> v{};
	for (std::size_t i = 0; i < 4; ++i) {
		if (!j[i].is_number())
			throw DataError(where + ": box coordinates must be numbers");
		v[i] = j[i].get<double>();
	}
	return {v[0], v[1], v[2], v[3]};
}

RleMask mask_from_json(const json& j, const std::string& where)
{
	if (!j.is_object())
		throw DataError(where + ": mask must be an object {w,h,counts}");
	RleMask m;
	m.width = get_int(j, "w", "w", where);
	m.height = get_int(j, "h", "h", where);
	const json& counts = require(j, "counts", "counts", where);
	if (!counts.is_array())
		schema_error(where, "counts", "expected array");
	m.counts.reserve(counts.size());
	for (const json& c : counts) {
		if (!c.is_number_integer() || c.get<std::int64_t>() < 0)
			schema_error(where, "counts", "run lengths must be non-negative integers");
		m.counts.push_back(c.get<std::uint32_t>());
	}
	return m;
}

Sample sample_from_json(const json& j, const LoadOptions& opt, const std::string& where)
{
	if (!j.is_object())
		throw DataError(where + ": expected a JSON object");
	check_fields(j, {"id", "tokens", "image", "caption", "description", "knowledge", "entities"}, "",
	             opt, where);

	Sample s;
	s.id = get_string(j, "id", "id", where);

	const json& tokens = require(j, "tokens", "tokens", where);
	if (!tokens.is_array())
		schema_error(where, "tokens", "expected array of strings");
	for (const json& t : tokens) {
		if (!t.is_string())
			schema_error(where, "tokens", "expected array of strings");
		s.tokens.push_back(t.get<std::string>());
	}

	const json& image = require(j, "image", "image", where);
	if (!image.is_object())
		schema_error(where, "image", "expected object");
	check_fields(image, {"path", "width", "height"}, "image.", opt, where);
	s.image.path = get_string(image, "path", "image.path", where);
	s.image.width = get_int(image, "width", "image.width", where);
	s.image.height = get_int(image, "height", "image.height", where);

	s.caption = get_opt_string(j, "caption", "caption", where);
	s.description = get_opt_string(j, "description", "description", where);

	if (auto it = j.find("knowledge"); it != j.end() && !it->is_null()) {
		if (!it->is_object())
			schema_error(where, "knowledge", "expected object of strings");
		std::map<std::string, std::string> k;
		for (const auto& [llm, text] : it->items()) {
			if (!text.is_string())
				schema_error(where, "knowledge." + llm, "expected string");
			k.emplace(llm, text.get<std::string>());
		}
		s.knowledge = std::move(k);
	}

	const json& entities = require(j, "entities", "entities", where);
	if (!entities.is_array())
		schema_error(where, "entities", "expected array");
	for (std::size_t k = 0; k < entities.size(); ++k) {
		const json& ej = entities[k];
		const std::string p = "entities[" + std::to_string(k) + "].";
		if (!ej.is_object())
			schema_error(where, p, "expected object");
		check_fields(ej, {"surface", "start", "end", "type", "boxes", "masks"}, p, opt, where);
		GoldEntity e;
		e.surface = get_string(ej, "surface", p + "surface", where);
		e.start = get_int(ej, "start", p + "start", where);
		e.end = get_int(ej, "end", p + "end", where);
		const std::string type = get_string(ej, "type", p + "type", where);
		auto et = parse_entity_type(type);
		if (!et)
			schema_error(where, p + "type", "must be one of PER|LOC|ORG|MISC, got '" + type + "'");
		e.etype = *et;
		const json& boxes = require(ej, "boxes", p + "boxes", where);
		if (!boxes.is_array())
			schema_error(where, p + "boxes", "expected array");
		for (const json& b : boxes)
			e.boxes.push_back(bbox_from_json(b, where + ": " + p + "boxes"));
		const json& masks = require(ej, "masks", p + "masks", where);
		if (!masks.is_array())
			schema_error(where, p + "masks", "expected array");
		for (const json& m : masks)
			e.masks.push_back(mask_from_json(m, where + ": " + p + "masks"));
		s.entities.push_back(std::move(e));
	}
	return s;
}

json to_json(const BBox& b)
{
	return json::array({b.x1, b.y1, b.x2, b.y2});
}

json to_json(const RleMask& m)
{
	return json{{"w", m.width}, {"h", m.height}, {"counts", m.counts}};
}

json to_json(const Sample& s)
{
	json j;
	j["id"] = s.id;
	j["tokens"] = s.tokens;
	j["image"] = {{"path", s.image.path}, {"width", s.image.width}, {"height", s.image.height}};
	if (s.caption)
		j["caption"] = *s.caption;
	if (s.description)
		j["description"] = *s.description;
	if (s.knowledge)
		j["knowledge"] = *s.knowledge;
	json entities = json::array();
	for (const GoldEntity& e : s.entities) {
		json boxes = json::array();
		for (const BBox& b : e.boxes)
			boxes.push_back(to_json(b));
		json masks = json::array();
		for (const RleMask& m : e.masks)
			masks.push_back(to_json(m));
		entities.push_back({{"surface", e.surface},
		                    {"start", e.start},
		                    {"end", e.end},
		                    {"type", std::string(to_string(e.etype))},
		                    {"boxes", std::move(boxes)},
		                    {"masks", std::move(masks)}});
	}
	j["entities"] = std::move(entities);
	return j;
}

void write_dataset(std::ostream& out, const DatasetSplit& split)
{
	for (const Sample& s : split.samples)
		out << to_json(s).dump() << '\n';
}

DatasetSplit parse_dataset(std::istream& in, std::string split_name, const LoadOptions& options)
{
	DatasetSplit split;
	split.name = std::move(split_name);
	std::set<std::string> ids;
	std::string line;
	std::size_t lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		if (line.find_first_not_of(" \t\r") == std::string::npos)
			continue;
		const std::string where = "line " + std::to_string(lineno);
		json j;
		try {
			j = json::parse(line);
		} catch (const json::parse_error& e) {
			throw DataError(where + ": invalid JSON: " + e.what());
		}
		Sample s = sample_from_json(j, options, where);
		if (auto v = validate_sample(s); !v.empty())
			throw DataError(where + ": sample '" + s.id + "': " + v.front().field + ": " + v.front().rule);
		if (!ids.insert(s.id).second)
			throw DataError(where + ": duplicate sample id '" + s.id + "'");
		split.samples.push_back(std::move(s));
	}
	return split;
}

DatasetSplit load_dataset(const std::filesystem::path& path, std::string split_name,
                          const LoadOptions& options)
{
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open dataset file '" + path.string() + "'");
	try {
		return parse_dataset(in, std::move(split_name), options);
	} catch (const DataError& e) {
		throw DataError(path.string() + ": " + e.what());
	}
}

// ---------------------------------------------------------------------------
// statistics

DatasetStats dataset_stats(const DatasetSplit& split)
{
	DatasetStats st;
	for (EntityType t : kEntityTypes)
		st.per_type[t] = {};
	st.n_samples = split.samples.size();
	for (const Sample& s : split.samples) {
		std::size_t image_masks = 0;
		for (const GoldEntity& e : s.entities) {
			++st.n_entities;
			if (e.groundable()) {
				++st.n_groundable;
				++st.per_type[e.etype].groundable;
			} else {
				++st.per_type[e.etype].ungroundable;
			}
			image_masks += e.masks.size();
		}
		st.n_masks += image_masks;
		++st.masks_per_image[image_masks];
	}
	return st;
}

json to_json(const DatasetStats& st)
{
	json per_type = json::object();
	for (const auto& [t, c] : st.per_type)
		per_type[std::string(to_string(t))] = {{"groundable", c.groundable},
		                                       {"ungroundable", c.ungroundable}};
	json hist = json::object();
	for (const auto& [k, v] : st.masks_per_image)
		hist[std::to_string(k)] = v;
	return {{"n_samples", st.n_samples},     {"n_entities", st.n_entities},
	        {"n_groundable", st.n_groundable}, {"n_masks", st.n_masks},
	        {"per_type", per_type},          {"masks_per_image", hist}};
}

} // namespace gmner
