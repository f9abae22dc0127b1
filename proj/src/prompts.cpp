#include "gmner/prompts.hpp"

#include <cctype>
#include <fstream>
#include <istream>

#include <json.hpp>

#include "gmner/errors.hpp"

namespace gmner {

using nlohmann::json;

namespace {

void append_knowledge_block(std::string& out, std::string_view sentence, std::string_view description,
                            std::string_view answer)
{
	out += "Text: ";
	out += sentence;
	out += "\nImage: ";
	out += description;
	out += "\nQuestion: ";
	out += kKnowledgeQuestion;
	out += "\nAnswer:";
	if (!answer.empty()) {
		out += ' ';
		out += answer;
	}
	out += '\n';
}

void append_expansion_block(std::string& out, std::string_view background, std::string_view sentence,
                            std::string_view entity, std::string_view answer)
{
	out += "Background: ";
	out += background;
	out += "\nText: ";
	out += sentence;
	out += "\nQuestion: ";
	out += expansion_question(entity);
	out += "\nAnswer:";
	if (!answer.empty()) {
		out += ' ';
		out += answer;
	}
	out += '\n';
}

} // namespace

std::string build_knowledge_prompt(std::string_view head, const std::vector<AnnotatedExample>& examples,
                                   const PromptQuery& query)
{
	std::string out;
	if (!head.empty()) {
		out += head;
		if (out.back() != '\n')
			out += '\n';
		out += '\n';
	}
	for (const AnnotatedExample& ex : examples) {
		append_knowledge_block(out, ex.sentence, ex.image_description, ex.annotation);
		out += '\n';
	}
	append_knowledge_block(out, query.sentence, query.image_description, {});
	return out;
}

std::string expansion_question(std::string_view entity)
{
	std::string q = "In the context of the provided information, tell me briefly what is the ";
	q += entity;
	q += " in the Text?";
	return q;
}

std::string build_expansion_prompt(std::string_view background, std::string_view sentence,
                                   std::string_view entity, const std::vector<ExpansionExample>& fixed_examples)
{
	if (entity.empty() || sentence.find(entity) == std::string_view::npos)
		throw DataError("expansion prompt: entity '" + std::string(entity) + "' does not occur in the sentence");
	std::string out;
	for (const ExpansionExample& ex : fixed_examples) {
		append_expansion_block(out, ex.background, ex.sentence, ex.entity, ex.expansion);
		out += '\n';
	}
	append_expansion_block(out, background, sentence, entity, {});
	return out;
}

std::string collapse_whitespace(std::string_view text)
{
	std::string out;
	bool pending_space = false;
	for (char c : text) {
		if (std::isspace(static_cast<unsigned char>(c))) {
			pending_space = !out.empty();
			continue;
		}
		if (pending_space)
			out += ' ';
		pending_space = false;
		out += c;
	}
	return out;
}

ReferringExpression compose_referring_expression(std::string_view entity, EntityType etype,
                                                 std::string_view expansion)
{
	if (entity.empty())
		throw DataError("referring expression: empty entity");
	ReferringExpression r;
	r.entity = std::string(entity);
	r.etype = etype;
	r.expansion = collapse_whitespace(expansion);
	r.rendered = r.entity + " (" + std::string(to_string(etype)) + ")";
	if (!r.expansion.empty())
		r.rendered += " - " + r.expansion;
	return r;
}

std::optional<ReferringExpression> parse_referring_expression(std::string_view rendered)
{
	std::string_view head = rendered;
	std::string_view expansion;
	if (auto sep = rendered.find(") - "); sep != std::string_view::npos) {
		head = rendered.substr(0, sep + 1);
		expansion = rendered.substr(sep + 4);
		if (expansion.empty())
			return std::nullopt;
	}
	if (head.empty() || head.back() != ')')
		return std::nullopt;
	const auto open = head.rfind(" (");
	if (open == std::string_view::npos || open == 0)
		return std::nullopt;
	const auto type = parse_entity_type(head.substr(open + 2, head.size() - open - 3));
	if (!type)
		return std::nullopt;
	ReferringExpression r;
	r.entity = std::string(head.substr(0, open));
	r.etype = *type;
	r.expansion = std::string(expansion);
	r.rendered = std::string(rendered);
	return r;
}

// ---------------------------------------------------------------------------

std::optional<SplitKind> parse_split_kind(std::string_view s)
{
	if (s == "train")
		return SplitKind::Train;
	if (s == "dev")
		return SplitKind::Dev;
	if (s == "test")
		return SplitKind::Test;
	return std::nullopt;
}

std::vector<KnowledgeRecord> merge_augmented(const DatasetSplit& base, const KnowledgeSets& knowledge,
                                             SplitKind target, std::string_view canonical_llm)
{
	for (const auto& [llm, by_id] : knowledge)
		for (const auto& [id, text] : by_id)
			if (!base.find(id))
				throw DataError("merge_augmented: knowledge from '" + llm + "' names unknown sample id '" + id + "'");

	const bool train = target == SplitKind::Train;
	if (!train && knowledge.find(std::string(canonical_llm)) == knowledge.end())
		throw DataError("merge_augmented: dev/test splits require knowledge from '" + std::string(canonical_llm) +
		                "'");

	std::vector<KnowledgeRecord> out;
	for (const Sample& s : base.samples) {
		for (const auto& [llm, by_id] : knowledge) {
			if (!train && llm != canonical_llm)
				continue;
			if (auto it = by_id.find(s.id); it != by_id.end())
				out.push_back({s.id, llm, it->second});
		}
	}
	return out;
}

KnowledgeSets read_knowledge(std::istream& in)
{
	KnowledgeSets out;
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
		for (const char* f : {"id", "llm", "knowledge"})
			if (!j.contains(f) || !j[f].is_string())
				throw DataError(where + "field '" + f + "': missing or not a string");
		auto [it, inserted] = out[j["llm"].get<std::string>()].emplace(j["id"].get<std::string>(),
		                                                               j["knowledge"].get<std::string>());
		if (!inserted)
			throw DataError(where + "duplicate (id, llm) knowledge entry");
	}
	return out;
}

KnowledgeSets load_knowledge(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open knowledge file '" + path.string() + "'");
	try {
		return read_knowledge(in);
	} catch (const DataError& e) {
		throw DataError(path.string() + ": " + e.what());
	}
}

std::vector<AnnotatedExample> load_annotated_examples(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open annotated example file '" + path.string() + "'");
	std::vector<AnnotatedExample> out;
	std::string line;
	std::size_t lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		if (line.find_first_not_of(" \t\r") == std::string::npos)
			continue;
		const std::string where = path.string() + ": line " + std::to_string(lineno) + ": ";
		json j;
		try {
			j = json::parse(line);
		} catch (const json::parse_error& e) {
			throw DataError(where + "invalid JSON: " + e.what());
		}
		for (const char* f : {"id", "sentence", "image_description", "annotation"})
			if (!j.contains(f) || !j[f].is_string() || j[f].get<std::string>().empty())
				throw DataError(where + "field '" + f + "': missing, empty or not a string");
		out.push_back({j["id"], j["sentence"], j["image_description"], j["annotation"]});
	}
	return out;
}

std::vector<ExpansionExample> load_expansion_examples(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open expansion example file '" + path.string() + "'");
	json j;
	try {
		j = json::parse(in);
	} catch (const json::parse_error& e) {
		throw DataError(path.string() + ": invalid JSON: " + e.what());
	}
	if (!j.is_array())
		throw DataError(path.string() + ": expected a JSON array of examples");
	std::vector<ExpansionExample> out;
	for (const json& ex : j) {
		for (const char* f : {"background", "text", "entity", "expansion"})
			if (!ex.contains(f) || !ex[f].is_string())
				throw DataError(path.string() + ": example field '" + f + "' missing or not a string");
		out.push_back({ex["background"], ex["text"], ex["entity"], ex["expansion"]});
	}
	return out;
}

} // namespace gmner
