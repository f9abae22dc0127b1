#include "gmner/crf_io.hpp"

#include <fstream>
#include <istream>

namespace gmner {

using nlohmann::json;

std::vector<EmissionRecord> read_emissions(std::istream& in)
{
	std::vector<EmissionRecord> out;
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
		if (!j.contains("emissions") || !j["emissions"].is_array() || j["emissions"].empty())
			throw DataError(where + "field 'emissions': expected non-empty array of rows");
		const json& rows = j["emissions"];
		const std::size_t labels = rows[0].is_array() ? rows[0].size() : 0;
		EmissionMatrix<double> m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(labels));
		for (std::size_t r = 0; r < rows.size(); ++r) {
			if (!rows[r].is_array() || rows[r].size() != labels || labels == 0)
				throw DataError(where + "field 'emissions': ragged or empty row " + std::to_string(r));
			for (std::size_t c = 0; c < labels; ++c) {
				if (!rows[r][c].is_number())
					throw DataError(where + "field 'emissions': non-numeric score");
				m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
			}
		}
		out.push_back({j["id"].get<std::string>(), std::move(m)});
	}
	return out;
}

std::vector<EmissionRecord> load_emissions(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open emission file '" + path.string() + "'");
	try {
		return read_emissions(in);
	} catch (const DataError& e) {
		throw DataError(path.string() + ": " + e.what());
	}
}

namespace {

std::vector<double> number_array(const json& j, const char* field, std::size_t expected)
{
	if (!j.is_array() || j.size() != expected)
		throw DataError(std::string("crf params: '") + field + "' must have " + std::to_string(expected) +
		                " entries");
	std::vector<double> out;
	for (const json& v : j) {
		if (!v.is_number())
			throw DataError(std::string("crf params: '") + field + "' must be numeric");
		out.push_back(v.get<double>());
	}
	return out;
}

} // namespace

CrfParams<double> crf_params_from_json(const json& j)
{
	if (!j.is_object() || !j.contains("labels") || !j["labels"].is_array())
		throw DataError("crf params: missing 'labels' array");
	const json& labels = j["labels"];
	const std::size_t n = labels.size();
	if (n != static_cast<std::size_t>(bio::kNumLabels))
		throw DataError("crf params: expected " + std::to_string(bio::kNumLabels) + " labels");

	// perm[k] = scheme index of file label k
	std::vector<int> perm(n);
	std::vector<bool> seen(n, false);
	for (std::size_t k = 0; k < n; ++k) {
		auto idx = labels[k].is_string() ? bio::parse_label(labels[k].get<std::string>()) : std::nullopt;
		if (!idx || seen[static_cast<std::size_t>(*idx)])
			throw DataError("crf params: labels must be a permutation of the BIO label set");
		seen[static_cast<std::size_t>(*idx)] = true;
		perm[k] = *idx;
	}

	auto p = CrfParams<double>::zeros(static_cast<Eigen::Index>(n));
	const auto start = number_array(j.value("start", json::array()), "start", n);
	const auto end = number_array(j.value("end", json::array()), "end", n);
	if (!j.contains("transition") || !j["transition"].is_array() || j["transition"].size() != n)
		throw DataError("crf params: 'transition' must be a " + std::to_string(n) + "x" +
		                std::to_string(n) + " matrix");
	for (std::size_t a = 0; a < n; ++a) {
		const auto row = number_array(j["transition"][a], "transition", n);
		for (std::size_t b = 0; b < n; ++b)
			p.transition(perm[a], perm[b]) = row[b];
		p.start(perm[a]) = start[a];
		p.end(perm[a]) = end[a];
	}
	if (!p.transition.allFinite() || !p.start.allFinite() || !p.end.allFinite())
		throw DataError("crf params: non-finite entry");
	return p;
}

json to_json(const CrfParams<double>& p)
{
	json transition = json::array();
	for (Eigen::Index a = 0; a < p.transition.rows(); ++a) {
		json row = json::array();
		for (Eigen::Index b = 0; b < p.transition.cols(); ++b)
			row.push_back(p.transition(a, b));
		transition.push_back(std::move(row));
	}
	return {{"labels", bio::label_names()},
	        {"transition", std::move(transition)},
	        {"start", std::vector<double>(p.start.data(), p.start.data() + p.start.size())},
	        {"end", std::vector<double>(p.end.data(), p.end.data() + p.end.size())}};
}

CrfParams<double> load_crf_params(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open CRF parameter file '" + path.string() + "'");
	try {
		return crf_params_from_json(json::parse(in));
	} catch (const json::parse_error& e) {
		throw DataError(path.string() + ": invalid JSON: " + e.what());
	}
}

} // namespace gmner
