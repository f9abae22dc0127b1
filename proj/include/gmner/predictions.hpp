#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gmner/corpus.hpp"

namespace gmner {

/// One predicted (entity, type, region, mask) element. A groundable
/// prediction carries both box and mask; an ungroundable one carries neither.
struct PredictionTriple {
	std::string surface;
	int start = 0;
	int end = 0;
	EntityType etype = EntityType::PER;
	std::optional<BBox> box;
	std::optional<RleMask> mask;

	friend bool operator==(const PredictionTriple&, const PredictionTriple&) = default;
};

struct PredictionRecord {
	std::string id;
	std::vector<PredictionTriple> triples;

	friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// JSONL `{"id":str,"triples":[{"surface","start","end","type","box":[..]|null,"mask":{..}|null}]}`.
/// A missing "box"/"mask" key reads as null, so MNER-only predictions may omit them.
std::vector<PredictionRecord> read_predictions(std::istream& in);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records);
nlohmann::json to_json(const PredictionRecord& record);

} // namespace gmner
