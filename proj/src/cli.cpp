#include "gmner/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmner/agreement.hpp"
#include "gmner/backend.hpp"
#include "gmner/bio.hpp"
#include "gmner/corpus.hpp"
#include "gmner/crf_io.hpp"
#include "gmner/errors.hpp"
#include "gmner/export.hpp"
#include "gmner/pipeline.hpp"
#include "gmner/predictions.hpp"
#include "gmner/prompts.hpp"
#include "gmner/retrieval.hpp"
#include "gmner/scoring.hpp"

namespace gmner::cli {

using nlohmann::json;

namespace {

/// --help was requested; carries the rendered help text.
class HelpRequested : public UsageError {
public:
	using UsageError::UsageError;
};

const std::vector<std::string> kSubcommands{"validate", "stats",    "prompt", "export", "pipeline",
                                            "score",    "sweep",    "topn",   "agree"};

struct App {
	CLI::App app{"Grounded / segmented multimodal NER pipeline and evaluation toolkit", "gmner"};
	Options opt;

	App()
	{
		app.require_subcommand(1, 1);
		app.fallthrough(false);

		const std::string tasks = "mner|gmner|smner|eeg|ees";
		auto task_check = CLI::IsMember({"mner", "gmner", "smner", "eeg", "ees", "all"}, CLI::ignore_case);
		auto rule_check = CLI::IsMember({"gte", "gt"});
		auto format_check = CLI::IsMember({"json", "markdown", "md"});

		auto common = [&](CLI::App* sub) {
			sub->add_option("--config", "JSON file supplying defaults for any flag");
			sub->add_option("--out", opt.out, "Write output here instead of standard output");
		};

		auto* validate = app.add_subcommand("validate", "Check a gold JSONL file against the sample schema");
		common(validate);
		validate->add_option("--gold", opt.gold, "Gold JSONL")->required();
		validate->add_flag("--strict", opt.strict, "Reject unknown fields");

		auto* stats = app.add_subcommand("stats", "Dataset statistics");
		common(stats);
		stats->add_option("--gold", opt.gold, "Gold JSONL")->required();
		stats->add_option("--split", opt.split, "Split name shown in the report");
		stats->add_option("--format", opt.format, "json|markdown")->check(format_check);
		stats->add_flag("--strict", opt.strict, "Reject unknown fields");

		auto* prompt = app.add_subcommand("prompt", "Build LLM prompts");
		common(prompt);
		prompt->add_option("--kind", opt.kind, "knowledge|expansion")
		    ->required()
		    ->check(CLI::IsMember({"knowledge", "expansion"}));
		prompt->add_option("--gold", opt.gold, "Input samples (gold JSONL schema)")->required();
		prompt->add_option("--features", opt.features, "Fusion features of the input samples (JSONL)");
		prompt->add_option("--pool", opt.pool, "Annotated in-context examples (JSONL)");
		prompt->add_option("--pool-features", opt.pool_features, "Fusion features of the annotated examples");
		prompt->add_option("--head", opt.head, "Prompt head text file");
		prompt->add_option("--expansion-examples", opt.expansion_examples, "Fixed expansion examples (JSON)");
		prompt->add_option("--topn", opt.topn, "In-context examples per prompt")->check(CLI::PositiveNumber);

		auto* exp = app.add_subcommand("export", "Export VE / VG training pairs or merged augmented knowledge");
		common(exp);
		exp->add_option("--kind", opt.kind, "ve|vg|augment")->required()->check(CLI::IsMember({"ve", "vg", "augment"}));
		exp->add_option("--gold", opt.gold, "Gold JSONL")->required();
		exp->add_option("--expansions", opt.expansions, "Entity expansions JSONL");
		exp->add_option("--knowledge", opt.knowledge, "Knowledge JSONL (augment)");
		exp->add_option("--split", opt.split, "train|dev|test (augment)")->check(CLI::IsMember({"train", "dev", "test"}));

		auto* pipe = app.add_subcommand("pipeline", "Run VE -> VG -> segmentation over a corpus");
		common(pipe);
		pipe->add_option("--gold", opt.gold, "Input samples (gold JSONL schema)")->required();
		pipe->add_option("--pred", opt.pred, "Predicted entity spans (prediction JSONL); default gold spans");
		pipe->add_option("--emissions", opt.emissions, "Emission JSONL; spans decoded with --crf");
		pipe->add_option("--crf", opt.crf, "CRF parameters JSON");
		pipe->add_option("--expansions", opt.expansions, "Entity expansions JSONL");
		pipe->add_option("--backend", opt.backend, "mock or base URL")->envname("RIVEG_BACKEND_URL");
		pipe->add_option("--mock-lookup", opt.mock_lookup, "Mock lookup JSONL");
		pipe->add_option("--max-inflight", opt.max_inflight, "Concurrent backend requests")->check(CLI::PositiveNumber);
		pipe->add_option("--retries", opt.retries, "Retries per request")->check(CLI::NonNegativeNumber);
		pipe->add_option("--timeout-ms", opt.timeout_ms, "Per-request timeout")->check(CLI::PositiveNumber);
		pipe->add_flag("--fail-fast", opt.fail_fast, "Abort on the first failing entity");

		auto* score = app.add_subcommand("score", "Score predictions (" + tasks + "|all)");
		common(score);
		score->add_option("--gold", opt.gold, "Gold JSONL")->required();
		score->add_option("--pred", opt.pred, "Prediction JSONL")->required();
		score->add_option("--task", opt.task, "Task or 'all'")->check(task_check);
		score->add_option("--iou", opt.iou, "IoU threshold")->check(CLI::Range(0.0, 0.999999999));
		score->add_option("--iou-rule", opt.iou_rule, "gte|gt")->check(rule_check);
		score->add_option("--format", opt.format, "json|markdown")->check(format_check);

		auto* sweep = app.add_subcommand("sweep", "Score over a list of IoU thresholds");
		common(sweep);
		sweep->add_option("--gold", opt.gold, "Gold JSONL")->required();
		sweep->add_option("--pred", opt.pred, "Prediction JSONL")->required();
		sweep->add_option("--task", opt.task, "gmner|smner|eeg|ees")->check(task_check);
		sweep->add_option("--thresholds", opt.thresholds, "Comma-separated thresholds")->delimiter(',');
		sweep->add_option("--iou-rule", opt.iou_rule, "gte|gt")->check(rule_check);
		sweep->add_option("--format", opt.format, "json|markdown")->check(format_check);

		auto* topn = app.add_subcommand("topn", "TopN-Prec@IoU of scored candidate boxes");
		common(topn);
		topn->add_option("--gold", opt.gold, "Gold JSONL")->required();
		topn->add_option("--candidates", opt.candidates, "Candidate JSONL")->required();
		topn->add_option("--topn", opt.topn, "N")->check(CLI::PositiveNumber);
		topn->add_option("--iou", opt.iou, "IoU threshold")->check(CLI::Range(0.0, 0.999999999));
		topn->add_option("--iou-rule", opt.iou_rule, "gte|gt")->check(rule_check);

		auto* agree = app.add_subcommand("agree", "Inter-annotator agreement (Fleiss kappa, Dice)");
		common(agree);
		agree->add_option("--gold", opt.gold, "First annotation (gold JSONL schema)");
		agree->add_option("--second", opt.second, "Second annotation (gold JSONL schema)");
		agree->add_option("--table", opt.table, "Rating-count table JSON {\"counts\":[[..]]}");
	}
};

std::string flag_value(const json& v)
{
	if (v.is_string())
		return v.get<std::string>();
	if (v.is_array()) {
		std::string joined;
		for (const json& x : v) {
			if (!joined.empty())
				joined += ',';
			joined += x.is_string() ? x.get<std::string>() : x.dump();
		}
		return joined;
	}
	return v.dump();
}

bool given_on_command_line(const std::vector<std::string>& argv, const std::string& flag)
{
	for (const std::string& a : argv)
		if (a == flag || a.rfind(flag + "=", 0) == 0)
			return true;
	return false;
}

// Splice config-file flags in after the subcommand for every flag the
// command line does not already set.
std::vector<std::string> apply_config(const std::vector<std::string>& argv, CLI::App& app)
{
	std::string config_path;
	for (std::size_t i = 1; i < argv.size(); ++i) {
		if (argv[i] == "--config" && i + 1 < argv.size())
			config_path = argv[i + 1];
		else if (argv[i].rfind("--config=", 0) == 0)
			config_path = argv[i].substr(9);
	}
	if (config_path.empty())
		return argv;

	std::size_t sub_pos = 0;
	for (std::size_t i = 1; i < argv.size() && sub_pos == 0; ++i)
		for (const std::string& s : kSubcommands)
			if (argv[i] == s)
				sub_pos = i;
	if (sub_pos == 0)
		return argv;
	CLI::App* sub = app.get_subcommand(argv[sub_pos]);

	std::ifstream in(config_path);
	if (!in)
		throw UsageError("cannot open config file '" + config_path + "'");
	json cfg;
	try {
		cfg = json::parse(in);
	} catch (const json::parse_error& e) {
		throw UsageError("config file '" + config_path + "': " + e.what());
	}
	if (!cfg.is_object())
		throw UsageError("config file '" + config_path + "' must hold a JSON object");

	std::vector<std::string> extra;
	for (const auto& [key, value] : cfg.items()) {
		const std::string flag = "--" + key;
		if (key == "config" || given_on_command_line(argv, flag))
			continue;
		const CLI::Option* o = sub->get_option_no_throw(flag);
		if (o == nullptr)
			continue;
		if (value.is_boolean()) {
			if (value.get<bool>())
				extra.push_back(flag);
			continue;
		}
		extra.push_back(flag);
		extra.push_back(flag_value(value));
	}
	std::vector<std::string> out(argv.begin(), argv.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1);
	out.insert(out.end(), extra.begin(), extra.end());
	out.insert(out.end(), argv.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, argv.end());
	return out;
}

} // namespace

Command parse_args(const std::vector<std::string>& argv_in)
{
	App a;
	std::vector<std::string> argv = argv_in.empty() ? std::vector<std::string>{"gmner"} : argv_in;
	argv = apply_config(argv, a.app);

	std::vector<const char*> raw;
	raw.reserve(argv.size());
	for (const std::string& s : argv)
		raw.push_back(s.c_str());
	try {
		a.app.parse(static_cast<int>(raw.size()), raw.data());
	} catch (const CLI::CallForHelp&) {
		CLI::App* sub = a.app.get_subcommands().empty() ? &a.app : a.app.get_subcommands().front();
		throw HelpRequested(sub->help());
	} catch (const CLI::ParseError& e) {
		CLI::App* sub = a.app.get_subcommands().empty() ? &a.app : a.app.get_subcommands().front();
		throw UsageError(std::string(e.what()) + "\n" + sub->help());
	}

	Command c;
	c.subcommand = a.app.get_subcommands().front()->get_name();
	c.options = a.opt;
	Options& o = c.options;
	if (o.task.empty())
		o.task = c.subcommand == "sweep" ? "gmner" : "all";
	if (c.subcommand == "sweep" && o.task == "all")
		throw UsageError("sweep needs a single --task");
	if (c.subcommand == "agree" && o.table.empty() && (o.gold.empty() || o.second.empty()))
		throw UsageError("agree needs --gold and --second, or --table");
	if (c.subcommand == "export" && o.kind == "augment" && o.knowledge.empty())
		throw UsageError("export --kind augment needs --knowledge");
	if (c.subcommand == "prompt" && o.kind == "knowledge" &&
	    (o.features.empty() || o.pool.empty() || o.pool_features.empty()))
		throw UsageError("prompt --kind knowledge needs --features, --pool and --pool-features");
	if (c.subcommand == "pipeline" && (o.emissions.empty() != o.crf.empty()))
		throw UsageError("--emissions and --crf must be given together");
	if (c.subcommand == "pipeline" && !o.emissions.empty() && !o.pred.empty())
		throw UsageError("--pred and --emissions are alternative entity sources");
	return c;
}

// ---------------------------------------------------------------------------
// execution

namespace {

std::string sentence_of(const Sample& s)
{
	return s.span_text(0, static_cast<int>(s.tokens.size()));
}

std::string description_of(const Sample& s)
{
	if (s.description)
		return *s.description;
	if (s.caption)
		return *s.caption;
	return {};
}

std::string read_text_file(const std::string& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw DataError("cannot open '" + path + "'");
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

LoadOptions load_options(const Options& o, std::ostream& err)
{
	LoadOptions lo;
	lo.strict = o.strict;
	lo.on_warning = [&err](const std::string& msg) { err << "warning: " << msg << '\n'; };
	return lo;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err)
{
	std::ifstream in(o.gold);
	if (!in)
		throw DataError("cannot open dataset file '" + o.gold + "'");
	const LoadOptions lo = load_options(o, err);
	std::set<std::string> ids;
	std::size_t lineno = 0, n_samples = 0, n_bad = 0;
	std::string line;
	auto report = [&](std::size_t ln, const std::string& id, const std::string& field, const std::string& rule) {
		out << json{{"line", ln}, {"id", id}, {"field", field}, {"rule", rule}}.dump() << '\n';
		++n_bad;
	};
	while (std::getline(in, line)) {
		++lineno;
		if (line.find_first_not_of(" \t\r") == std::string::npos)
			continue;
		++n_samples;
		try {
			json j = json::parse(line);
			Sample s = sample_from_json(j, lo, "line " + std::to_string(lineno));
			for (const Violation& v : validate_sample(s))
				report(lineno, s.id, v.field, v.rule);
			if (!ids.insert(s.id).second)
				report(lineno, s.id, "id", "duplicate sample id");
		} catch (const json::parse_error& e) {
			report(lineno, "", "", std::string("invalid JSON: ") + e.what());
		} catch (const DataError& e) {
			report(lineno, "", "", e.what());
		}
	}
	err << o.gold << ": " << n_samples << " samples, " << n_bad << " violation(s)\n";
	return n_bad == 0 ? kOk : kDataError;
}

int cmd_stats(const Options& o, std::ostream& out, std::ostream& err)
{
	const DatasetSplit split = load_dataset(o.gold, o.split, load_options(o, err));
	const DatasetStats st = dataset_stats(split);
	if (o.format == "json") {
		json j = to_json(st);
		j["split"] = o.split;
		out << j.dump(2) << '\n';
		return kOk;
	}
	out << "| Split | #Tweet | #Entity | #Groundable Entity | #Mask |\n"
	    << "|-------|-------:|--------:|-------------------:|------:|\n"
	    << "| " << o.split << " | " << st.n_samples << " | " << st.n_entities << " | " << st.n_groundable << " | "
	    << st.n_masks << " |\n\n"
	    << "| Type | Groundable | Ungroundable |\n|------|-----------:|-------------:|\n";
	for (const auto& [t, c] : st.per_type)
		out << "| " << to_string(t) << " | " << c.groundable << " | " << c.ungroundable << " |\n";
	out << "\n| Masks per image | Images |\n|----------------:|-------:|\n";
	for (const auto& [k, v] : st.masks_per_image)
		out << "| " << k << " | " << v << " |\n";
	return kOk;
}

int cmd_prompt(const Options& o, std::ostream& out, std::ostream& err)
{
	const DatasetSplit split = load_dataset(o.gold, "input", load_options(o, err));

	if (o.kind == "expansion") {
		std::vector<ExpansionExample> fixed;
		if (!o.expansion_examples.empty())
			fixed = load_expansion_examples(o.expansion_examples);
		for (const Sample& s : split.samples) {
			const std::string sentence = sentence_of(s);
			for (const GoldEntity& e : s.entities)
				out << json{{"id", s.id},
				            {"start", e.start},
				            {"end", e.end},
				            {"entity", e.surface},
				            {"prompt", build_expansion_prompt(description_of(s), sentence, e.surface, fixed)}}
				           .dump()
				    << '\n';
		}
		return kOk;
	}

	const std::vector<AnnotatedExample> pool = load_annotated_examples(o.pool);
	std::map<std::string, std::size_t> pool_pos;
	for (std::size_t i = 0; i < pool.size(); ++i)
		pool_pos.emplace(pool[i].id, i);
	const auto pool_vectors = load_features(o.pool_features);
	for (const auto& fv : pool_vectors)
		if (!pool_pos.count(fv.id))
			throw DataError(o.pool_features + ": feature for unknown annotated example '" + fv.id + "'");
	const ExampleIndex<double> index = build_index(pool_vectors);

	std::map<std::string, Eigen::VectorXd> queries;
	for (auto& fv : load_features(o.features))
		queries.emplace(fv.id, std::move(fv.vec));

	const std::string head = o.head.empty() ? std::string() : read_text_file(o.head);
	for (const Sample& s : split.samples) {
		auto q = queries.find(s.id);
		if (q == queries.end())
			throw DataError(o.features + ": no feature vector for sample '" + s.id + "'");
		std::vector<AnnotatedExample> chosen;
		json ids = json::array();
		for (const auto& nb : topn_similar(index, q->second, static_cast<std::size_t>(o.topn))) {
			chosen.push_back(pool[pool_pos.at(nb.id)]);
			ids.push_back(nb.id);
		}
		out << json{{"id", s.id},
		            {"examples", ids},
		            {"prompt", build_knowledge_prompt(head, chosen, {sentence_of(s), description_of(s)})}}
		           .dump()
		    << '\n';
	}
	return kOk;
}

int cmd_export(const Options& o, std::ostream& out, std::ostream& err)
{
	const DatasetSplit split = load_dataset(o.gold, o.split, load_options(o, err));
	if (o.kind == "augment") {
		for (const KnowledgeRecord& r : merge_augmented(split, load_knowledge(o.knowledge), *parse_split_kind(o.split)))
			out << json{{"id", r.id}, {"llm", r.llm}, {"knowledge", r.knowledge}}.dump() << '\n';
		return kOk;
	}
	const ExpansionMap expansions = o.expansions.empty() ? ExpansionMap{} : load_expansions(o.expansions);
	if (o.kind == "ve") {
		for (const VeExample& r : export_ve(split, expansions))
			out << to_json(r).dump() << '\n';
	} else {
		for (const VgExample& r : export_vg(split, expansions))
			out << to_json(r).dump() << '\n';
	}
	return kOk;
}

SpanMap spans_from_predictions(const std::vector<PredictionRecord>& preds)
{
	SpanMap spans;
	for (const PredictionRecord& r : preds) {
		auto& v = spans[r.id];
		for (const PredictionTriple& t : r.triples)
			v.push_back({t.start, t.end, t.etype});
	}
	return spans;
}

SpanMap spans_from_emissions(const std::vector<EmissionRecord>& emissions, const CrfParams<double>& crf)
{
	SpanMap spans;
	for (const EmissionRecord& r : emissions) {
		const auto decoded = viterbi_decode(r.emissions, crf);
		spans[r.id] = spans_from_bio(validate_bio(decoded.tags, BioMode::Lenient).tags);
	}
	return spans;
}

int cmd_pipeline(const Options& o, std::ostream& out, std::ostream& err)
{
	const DatasetSplit split = load_dataset(o.gold, "input", load_options(o, err));
	BackendConfig cfg;
	cfg.base_url = o.backend;
	cfg.timeout_ms = o.timeout_ms;
	cfg.max_in_flight = o.max_inflight;
	cfg.retries = o.retries;
	if (!o.mock_lookup.empty())
		cfg.mock_lookup = o.mock_lookup;
	auto backend = make_backend(cfg);

	const ExpansionMap expansions = o.expansions.empty() ? ExpansionMap{} : load_expansions(o.expansions);
	SpanMap predicted;
	EntitySource source = EntitySource::Gold;
	if (!o.pred.empty()) {
		predicted = spans_from_predictions(load_predictions(o.pred));
		source = EntitySource::Predicted;
	} else if (!o.emissions.empty()) {
		predicted = spans_from_emissions(load_emissions(o.emissions), load_crf_params(o.crf));
		source = EntitySource::Predicted;
	}
	for (const auto& [id, spans] : predicted)
		if (!split.find(id))
			throw DataError("entity spans for unknown sample id '" + id + "'");

	const PipelineResult result =
	    run_pipeline(split.samples, source, &predicted, expansions, *backend, {o.max_inflight, o.fail_fast});
	write_predictions(out, result.records);
	for (const SampleError& e : result.errors)
		err << "error: sample '" << e.id << "': " << e.message << '\n';
	return result.errors.empty() ? kOk : kBackendError;
}

MatchPolicy policy_for(const Options& o, Task task, double threshold)
{
	return {task, threshold, *parse_iou_rule(o.iou_rule)};
}

int cmd_score(const Options& o, std::ostream& out, std::ostream& err)
{
	const DatasetSplit gold = load_dataset(o.gold, "gold", load_options(o, err));
	const auto preds = load_predictions(o.pred);
	std::vector<ScoreReport> reports;
	if (o.task == "all") {
		for (Task t : kAllTasks)
			reports.push_back(score_task(gold, preds, policy_for(o, t, o.iou)));
	} else {
		reports.push_back(score_task(gold, preds, policy_for(o, *parse_task(o.task), o.iou)));
	}
	out << emit_report(reports, *parse_report_format(o.format));
	return kOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err)
{
	const DatasetSplit gold = load_dataset(o.gold, "gold", load_options(o, err));
	const auto preds = load_predictions(o.pred);
	const auto reports = iou_sweep(gold, preds, *parse_task(o.task), o.thresholds, *parse_iou_rule(o.iou_rule));
	out << emit_report(reports, *parse_report_format(o.format));
	return kOk;
}

int cmd_topn(const Options& o, std::ostream& out, std::ostream& err)
{
	const DatasetSplit gold = load_dataset(o.gold, "gold", load_options(o, err));
	const double p = topn_prec_at(gold, load_candidates(o.candidates), static_cast<std::size_t>(o.topn), o.iou,
	                              *parse_iou_rule(o.iou_rule));
	out << json{{"topn", o.topn}, {"iou_threshold", o.iou}, {"iou_rule", o.iou_rule}, {"precision", p}}.dump(2)
	    << '\n';
	return kOk;
}

int cmd_agree(const Options& o, std::ostream& out, std::ostream& err)
{
	if (!o.table.empty()) {
		json j;
		try {
			j = json::parse(read_text_file(o.table));
		} catch (const json::parse_error& e) {
			throw DataError(o.table + ": invalid JSON: " + e.what());
		}
		if (!j.contains("counts") || !j["counts"].is_array() || j["counts"].empty() || !j["counts"][0].is_array())
			throw DataError(o.table + ": expected {\"counts\":[[int,...],...]}");
		const json& rows = j["counts"];
		AgreementTable t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
		for (std::size_t r = 0; r < rows.size(); ++r) {
			if (!rows[r].is_array() || rows[r].size() != rows[0].size())
				throw DataError(o.table + ": ragged rating table");
			for (std::size_t c = 0; c < rows[r].size(); ++c) {
				if (!rows[r][c].is_number_integer())
					throw DataError(o.table + ": rating counts must be integers");
				t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<std::int64_t>();
			}
		}
		out << json{{"n_items", rows.size()}, {"fleiss_kappa", fleiss_kappa(t)}}.dump(2) << '\n';
		return kOk;
	}
	const DatasetSplit first = load_dataset(o.gold, "first", load_options(o, err));
	const DatasetSplit second = load_dataset(o.second, "second", load_options(o, err));
	out << to_json(compare_annotations(first, second)).dump(2) << '\n';
	return kOk;
}

} // namespace

int execute(const Command& c, std::ostream& out, std::ostream& err)
{
	std::ofstream file;
	std::ostringstream buffer;
	const bool to_file = !c.options.out.empty();
	std::ostream& sink = to_file ? static_cast<std::ostream&>(buffer) : out;

	int status = kOk;
	const Options& o = c.options;
	if (c.subcommand == "validate")
		status = cmd_validate(o, sink, err);
	else if (c.subcommand == "stats")
		status = cmd_stats(o, sink, err);
	else if (c.subcommand == "prompt")
		status = cmd_prompt(o, sink, err);
	else if (c.subcommand == "export")
		status = cmd_export(o, sink, err);
	else if (c.subcommand == "pipeline")
		status = cmd_pipeline(o, sink, err);
	else if (c.subcommand == "score")
		status = cmd_score(o, sink, err);
	else if (c.subcommand == "sweep")
		status = cmd_sweep(o, sink, err);
	else if (c.subcommand == "topn")
		status = cmd_topn(o, sink, err);
	else if (c.subcommand == "agree")
		status = cmd_agree(o, sink, err);
	else
		throw UsageError("unknown subcommand '" + c.subcommand + "'");

	if (to_file) {
		file.open(c.options.out, std::ios::binary);
		if (!file)
			throw DataError("cannot write '" + c.options.out + "'");
		file << buffer.str();
	}
	return status;
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err)
{
	try {
		return execute(parse_args(argv), out, err);
	} catch (const HelpRequested& h) {
		out << h.what();
		return kOk;
	} catch (const UsageError& e) {
		err << "usage error: " << e.what() << '\n';
		return kUsage;
	} catch (const DataError& e) {
		err << "data error: " << e.what() << '\n';
		return kDataError;
	} catch (const BackendError& e) {
		err << "backend error: " << e.what() << '\n';
		return kBackendError;
	} catch (const std::exception& e) {
		err << "error: " << e.what() << '\n';
		return kDataError;
	}
}

} // namespace gmner::cli
