#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gmner/corpus.hpp"

namespace gmner {

/// A manually annotated in-context example for knowledge generation.
struct AnnotatedExample {
	std::string id;
	std::string sentence;
	std::string image_description;
	std::string annotation;
};

struct PromptQuery {
	std::string sentence;
	std::string image_description;
};

/// Fixed in-context example for the expansion prompt.
struct ExpansionExample {
	std::string background;
	std::string sentence;
	std::string entity;
	std::string expansion;
};

/// Question line of the knowledge-generation block.
inline constexpr std::string_view kKnowledgeQuestion =
    "Comprehensively analyze the Text and the Image, which named entities and their corresponding types "
    "are included in the Text? Explain the reason for your judgment.";

/// `head`, then one Text/Image/Question/Answer block per example with its
/// annotation filled in, then the query block with an empty Answer. Blocks are
/// separated by a blank line.
std::string build_knowledge_prompt(std::string_view head, const std::vector<AnnotatedExample>& examples,
                                   const PromptQuery& query);

/// Background/Text/Question/Answer prompt asking the LLM what `entity` is.
/// The fixed examples are rendered first with their expansions as answers.
/// Throws DataError when `entity` does not occur in `sentence`.
std::string build_expansion_prompt(std::string_view background, std::string_view sentence,
                                   std::string_view entity, const std::vector<ExpansionExample>& fixed_examples = {});

/// Question line of the expansion block for one entity.
std::string expansion_question(std::string_view entity);

struct ReferringExpression {
	std::string entity;
	EntityType etype = EntityType::PER;
	std::string expansion;
	std::string rendered;

	friend bool operator==(const ReferringExpression&, const ReferringExpression&) = default;
};

/// "entity (TYPE) - expansion", or "entity (TYPE)" when the expansion is
/// blank. Whitespace runs in the expansion collapse to single spaces.
/// Throws DataError on an empty entity.
ReferringExpression compose_referring_expression(std::string_view entity, EntityType etype,
                                                 std::string_view expansion);

/// Inverse of compose_referring_expression for entities without ") - ".
std::optional<ReferringExpression> parse_referring_expression(std::string_view rendered);

/// Collapse whitespace runs to one space and trim both ends.
std::string collapse_whitespace(std::string_view text);

// ---------------------------------------------------------------------------
// augmented corpora

/// LLM whose generations form the dev/test sets and the base training set.
inline constexpr std::string_view kCanonicalLlm = "gpt-3.5-turbo";

struct KnowledgeRecord {
	std::string id;
	std::string llm;
	std::string knowledge;

	friend bool operator==(const KnowledgeRecord&, const KnowledgeRecord&) = default;
};

/// LLM name -> sample id -> generated knowledge.
using KnowledgeSets = std::map<std::string, std::map<std::string, std::string>>;

enum class SplitKind { Train, Dev, Test };
std::optional<SplitKind> parse_split_kind(std::string_view s);

/// Train: one record per (sample, LLM) pair available. Dev/test: records from
/// `canonical_llm` only. Ordered by sample order then LLM name. Throws
/// DataError on ids missing from `base`, or when dev/test lacks the canonical LLM.
std::vector<KnowledgeRecord> merge_augmented(const DatasetSplit& base, const KnowledgeSets& knowledge,
                                             SplitKind target, std::string_view canonical_llm = kCanonicalLlm);

/// JSONL `{"id":str,"llm":str,"knowledge":str}`.
KnowledgeSets read_knowledge(std::istream& in);
KnowledgeSets load_knowledge(const std::filesystem::path& path);

/// JSONL `{"id":str,"sentence":str,"image_description":str,"annotation":str}`.
std::vector<AnnotatedExample> load_annotated_examples(const std::filesystem::path& path);
/// JSON array of `{"background","text","entity","expansion"}` objects.
std::vector<ExpansionExample> load_expansion_examples(const std::filesystem::path& path);

} // namespace gmner
