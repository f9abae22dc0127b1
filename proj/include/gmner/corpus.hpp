#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gmner/geometry.hpp"

namespace gmner {

enum class EntityType { PER = 0, LOC = 1, ORG = 2, MISC = 3 };

inline constexpr std::array<EntityType, 4> kEntityTypes{EntityType::PER, EntityType::LOC,
                                                        EntityType::ORG, EntityType::MISC};

std::string_view to_string(EntityType t);
/// Accepts exactly "PER", "LOC", "ORG", "MISC".
std::optional<EntityType> parse_entity_type(std::string_view s);

struct ImageRef {
	std::string path;
	int width = 0;
	int height = 0;

	friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

/// A gold named entity. Offsets are token-level and half-open; an entity is
/// groundable iff it carries boxes (and then also masks).
struct GoldEntity {
	std::string surface;
	int start = 0;
	int end = 0;
	EntityType etype = EntityType::PER;
	std::vector<BBox> boxes;
	std::vector<RleMask> masks;

	bool groundable() const { return !boxes.empty(); }

	friend bool operator==(const GoldEntity&, const GoldEntity&) = default;
};

struct Sample {
	std::string id;
	std::vector<std::string> tokens;
	ImageRef image;
	std::optional<std::string> caption;
	std::optional<std::string> description;
	std::optional<std::map<std::string, std::string>> knowledge;
	std::vector<GoldEntity> entities;

	/// Tokens [start, end) joined by single spaces.
	std::string span_text(int start, int end) const;

	friend bool operator==(const Sample&, const Sample&) = default;
};

struct DatasetSplit {
	std::string name;
	std::vector<Sample> samples;

	const Sample* find(std::string_view id) const;

	friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

struct Violation {
	std::string field;
	std::string rule;

	friend bool operator==(const Violation&, const Violation&) = default;
};

/// Empty iff every Sample invariant holds.
std::vector<Violation> validate_sample(const Sample& sample);

struct LoadOptions {
	/// Reject unknown JSON fields instead of warning.
	bool strict = false;
	/// Receives non-fatal warnings; defaults to standard error when empty.
	std::function<void(const std::string&)> on_warning;
};

/// Reads one Sample per line. Throws DataError (with line number) on
/// schema violations, invalid samples or duplicate ids.
DatasetSplit load_dataset(const std::filesystem::path& path, std::string split_name,
                          const LoadOptions& options = {});
DatasetSplit parse_dataset(std::istream& in, std::string split_name,
                           const LoadOptions& options = {});

nlohmann::json to_json(const Sample& sample);
nlohmann::json to_json(const RleMask& mask);
nlohmann::json to_json(const BBox& box);
void write_dataset(std::ostream& out, const DatasetSplit& split);

/// Parse helpers shared with the prediction and wire formats. `where` is
/// prefixed to error messages.
BBox bbox_from_json(const nlohmann::json& j, const std::string& where);
RleMask mask_from_json(const nlohmann::json& j, const std::string& where);
Sample sample_from_json(const nlohmann::json& j, const LoadOptions& options,
                        const std::string& where);

struct TypeCounts {
	std::size_t groundable = 0;
	std::size_t ungroundable = 0;

	friend bool operator==(const TypeCounts&, const TypeCounts&) = default;
};

struct DatasetStats {
	std::size_t n_samples = 0;
	std::size_t n_entities = 0;
	std::size_t n_groundable = 0;
	std::size_t n_masks = 0;
	std::map<EntityType, TypeCounts> per_type;
	/// masks per image -> number of images
	std::map<std::size_t, std::size_t> masks_per_image;

	friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats dataset_stats(const DatasetSplit& split);
nlohmann::json to_json(const DatasetStats& stats);

} // namespace gmner
