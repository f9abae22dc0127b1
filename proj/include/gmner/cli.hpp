#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gmner::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kBackendError = 3;

/// Union of the typed options of every subcommand; only those registered for
/// the chosen subcommand are ever set.
struct Options {
	std::string gold;
	std::string pred;
	std::string second;
	std::string task;
	double iou = 0.5;
	std::string iou_rule = "gte";
	std::vector<double> thresholds{0.5, 0.6, 0.7, 0.8, 0.9};
	std::string backend = "mock";
	std::string mock_lookup;
	int max_inflight = 4;
	int retries = 2;
	int timeout_ms = 30000;
	bool fail_fast = false;
	std::string features;
	std::string pool;
	std::string pool_features;
	std::string head;
	std::string expansion_examples;
	std::string expansions;
	std::string emissions;
	std::string crf;
	std::string candidates;
	std::string knowledge;
	std::string table;
	std::string kind;
	std::string split = "train";
	int topn = 5;
	bool strict = false;
	std::string out;
	std::string format = "json";
};

struct Command {
	/// validate | stats | prompt | export | pipeline | score | sweep | topn | agree
	std::string subcommand;
	Options options;
};

/// Parse a full argv (argv[0] is the program name). A `--config file.json`
/// supplies defaults for any flag not given on the command line (keys are
/// flag names without the leading dashes); RIVEG_BACKEND_URL is the fallback
/// for --backend. Throws UsageError with a usage message on bad input.
Command parse_args(const std::vector<std::string>& argv);

/// Run a parsed command. Payloads go to --out when given, else to `out`;
/// diagnostics go to `err`. Returns one of the exit statuses above.
int execute(const Command& command, std::ostream& out, std::ostream& err);

/// parse_args + execute with error-to-status mapping.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

} // namespace gmner::cli
