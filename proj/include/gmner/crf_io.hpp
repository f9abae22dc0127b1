#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmner/crf.hpp"

namespace gmner {

struct EmissionRecord {
	std::string id;
	EmissionMatrix<double> emissions;
};

/// JSONL `{"id":str,"emissions":[[float; L]; k1]}`.
std::vector<EmissionRecord> read_emissions(std::istream& in);
std::vector<EmissionRecord> load_emissions(const std::filesystem::path& path);

/// `{"labels":[str;9],"transition":[[..]],"start":[..],"end":[..]}`. Labels may
/// come in any order; the result is permuted into the fixed BIO order.
CrfParams<double> crf_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CrfParams<double>& params);
CrfParams<double> load_crf_params(const std::filesystem::path& path);

} // namespace gmner
