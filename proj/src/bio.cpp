#include "gmner/bio.hpp"

#include <algorithm>

#include "gmner/errors.hpp"

namespace gmner {

namespace bio {

const std::array<std::string, kNumLabels>& label_names()
{
	static const std::array<std::string, kNumLabels> names{
	    "O", "B-PER", "I-PER", "B-LOC", "I-LOC", "B-ORG", "I-ORG", "B-MISC", "I-MISC"};
	return names;
}

std::string label_name(int label)
{
	if (label < 0 || label >= kNumLabels)
		return "<" + std::to_string(label) + ">";
	return label_names()[static_cast<std::size_t>(label)];
}

std::optional<int> parse_label(std::string_view name)
{
	const auto& names = label_names();
	for (int i = 0; i < kNumLabels; ++i)
		if (names[static_cast<std::size_t>(i)] == name)
			return i;
	return std::nullopt;
}

} // namespace bio

BioCheck validate_bio(const TagSequence& tags, BioMode mode)
{
	BioCheck out{tags, {}};
	int prev = bio::kOutside;
	for (std::size_t i = 0; i < out.tags.size(); ++i) {
		int& label = out.tags[i];
		const int pos = static_cast<int>(i);
		if (label < 0 || label >= bio::kNumLabels) {
			out.violations.push_back({pos, label});
			prev = bio::kOutside;
			continue;
		}
		if (bio::is_inside(label)) {
			const EntityType t = bio::type_of(label);
			const bool continues = prev != bio::kOutside && bio::type_of(prev) == t;
			if (!continues) {
				if (mode == BioMode::Strict)
					out.violations.push_back({pos, label});
				else
					label = bio::begin_label(t);
			}
		}
		prev = label;
	}
	return out;
}

std::vector<EntitySpan> spans_from_bio(const TagSequence& tags)
{
	const BioCheck check = validate_bio(tags, BioMode::Strict);
	if (!check.ok()) {
		const BioViolation& v = check.violations.front();
		throw DataError("invalid BIO sequence: label " + bio::label_name(v.label) + " at position " +
		                std::to_string(v.position));
	}
	std::vector<EntitySpan> spans;
	const int n = static_cast<int>(tags.size());
	for (int i = 0; i < n;) {
		if (!bio::is_begin(tags[static_cast<std::size_t>(i)])) {
			++i;
			continue;
		}
		const EntityType t = bio::type_of(tags[static_cast<std::size_t>(i)]);
		int j = i + 1;
		while (j < n && tags[static_cast<std::size_t>(j)] == bio::inside_label(t))
			++j;
		spans.push_back({i, j, t});
		i = j;
	}
	return spans;
}

TagSequence bio_from_spans(std::vector<EntitySpan> spans, int length)
{
	if (length < 0)
		throw DataError("bio_from_spans: negative length");
	std::sort(spans.begin(), spans.end());
	TagSequence tags(static_cast<std::size_t>(length), bio::kOutside);
	int covered_to = 0;
	for (const EntitySpan& s : spans) {
		if (s.start < 0 || s.start >= s.end || s.end > length)
			throw DataError("bio_from_spans: span [" + std::to_string(s.start) + "," +
			                std::to_string(s.end) + ") out of range for length " + std::to_string(length));
		if (s.start < covered_to)
			throw DataError("bio_from_spans: overlapping spans at offset " + std::to_string(s.start));
		tags[static_cast<std::size_t>(s.start)] = bio::begin_label(s.etype);
		for (int i = s.start + 1; i < s.end; ++i)
			tags[static_cast<std::size_t>(i)] = bio::inside_label(s.etype);
		covered_to = s.end;
	}
	return tags;
}

} // namespace gmner
