#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gmner/corpus.hpp"

namespace gmner {

/// Fixed BIO label alphabet over the four entity types:
///   0 O, 1 B-PER, 2 I-PER, 3 B-LOC, 4 I-LOC, 5 B-ORG, 6 I-ORG, 7 B-MISC, 8 I-MISC
namespace bio {

inline constexpr int kOutside = 0;
inline constexpr int kNumLabels = 9;

constexpr int begin_label(EntityType t) { return 1 + 2 * static_cast<int>(t); }
constexpr int inside_label(EntityType t) { return 2 + 2 * static_cast<int>(t); }
constexpr bool is_begin(int label) { return label > 0 && label % 2 == 1; }
constexpr bool is_inside(int label) { return label > 0 && label % 2 == 0; }
constexpr EntityType type_of(int label) { return static_cast<EntityType>((label - 1) / 2); }

std::string label_name(int label);
std::optional<int> parse_label(std::string_view name);
const std::array<std::string, kNumLabels>& label_names();

} // namespace bio

using TagSequence = std::vector<int>;

struct EntitySpan {
	int start = 0;
	int end = 0;
	EntityType etype = EntityType::PER;

	friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
	friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

enum class BioMode { Strict, Lenient };

struct BioViolation {
	int position = 0;
	int label = 0;

	friend bool operator==(const BioViolation&, const BioViolation&) = default;
};

struct BioCheck {
	/// Input in strict mode, repaired sequence in lenient mode.
	TagSequence tags;
	/// Orphan I-T positions (strict mode), plus out-of-alphabet labels in either mode.
	std::vector<BioViolation> violations;

	bool ok() const { return violations.empty(); }
};

/// Strict: an I-T not preceded by B-T or I-T is a violation. Lenient: such an
/// I-T is rewritten to B-T.
BioCheck validate_bio(const TagSequence& tags, BioMode mode);

/// Maximal B-T (I-T)* runs, ordered by start. Throws DataError on a strict
/// BIO violation.
std::vector<EntitySpan> spans_from_bio(const TagSequence& tags);

/// Throws DataError on overlapping or out-of-range spans.
TagSequence bio_from_spans(std::vector<EntitySpan> spans, int length);

} // namespace gmner
