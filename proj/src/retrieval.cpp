#include "gmner/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "gmner/errors.hpp"

namespace gmner {

template <typename Scalar>
ExampleIndex<Scalar> build_index(const std::vector<FeatureVector<Scalar>>& vectors)
{
	using Matrix = typename ExampleIndex<Scalar>::Matrix;
	if (vectors.empty())
		throw DataError("build_index: no vectors");
	const Eigen::Index dim = vectors.front().vec.size();
	if (dim < 1)
		throw DataError("build_index: zero-dimensional vector");

	Matrix normalized(dim, static_cast<Eigen::Index>(vectors.size()));
	std::vector<std::string> ids;
	ids.reserve(vectors.size());
	for (std::size_t i = 0; i < vectors.size(); ++i) {
		const auto& v = vectors[i];
		if (v.vec.size() != dim)
			throw DataError("build_index: vector '" + v.id + "' has dimension " + std::to_string(v.vec.size()) +
			                ", expected " + std::to_string(dim));
		const Scalar norm = v.vec.norm();
		if (!(norm > Scalar(0)) || !std::isfinite(norm))
			throw DataError("build_index: vector '" + v.id + "' has zero or non-finite norm");
		normalized.col(static_cast<Eigen::Index>(i)) = v.vec / norm;
		ids.push_back(v.id);
	}
	return ExampleIndex<Scalar>(std::move(ids), std::move(normalized));
}

template <typename Scalar>
std::vector<Neighbor<Scalar>> topn_similar(const ExampleIndex<Scalar>& index,
                                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& query, std::size_t n)
{
	if (n < 1)
		throw DataError("topn_similar: n must be >= 1");
	if (query.size() != index.dimension())
		throw DataError("topn_similar: query dimension " + std::to_string(query.size()) + " != index dimension " +
		                std::to_string(index.dimension()));
	const Scalar qn = query.norm();
	if (!(qn > Scalar(0)) || !std::isfinite(qn))
		throw DataError("topn_similar: zero-norm query");

	const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> cosines = index.normalized().transpose() * (query / qn);

	std::vector<std::size_t> order(index.size());
	std::iota(order.begin(), order.end(), std::size_t{0});
	auto cos_at = [&](std::size_t i) { return cosines(static_cast<Eigen::Index>(i)); };
	std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cos_at(a) > cos_at(b); });

	// Cosines a few ulps apart are ties; rounding alone must not decide the
	// order, or rescaling a vector could swap two equally similar examples.
	const Scalar tie = Scalar(64) * std::numeric_limits<Scalar>::epsilon();
	for (std::size_t lo = 0; lo < order.size();) {
		std::size_t hi = lo + 1;
		while (hi < order.size() && cos_at(order[hi - 1]) - cos_at(order[hi]) <= tie)
			++hi;
		std::sort(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi));
		lo = hi;
	}
	const std::size_t k = std::min(n, order.size());

	std::vector<Neighbor<Scalar>> out;
	out.reserve(k);
	for (std::size_t i = 0; i < k; ++i)
		out.push_back({index.ids()[order[i]], cosines(static_cast<Eigen::Index>(order[i])), order[i]});
	return out;
}

template ExampleIndex<double> build_index(const std::vector<FeatureVector<double>>&);
template ExampleIndex<float> build_index(const std::vector<FeatureVector<float>>&);
template std::vector<Neighbor<double>> topn_similar(const ExampleIndex<double>&, const Eigen::VectorXd&,
                                                    std::size_t);
template std::vector<Neighbor<float>> topn_similar(const ExampleIndex<float>&, const Eigen::VectorXf&,
                                                   std::size_t);

std::vector<FeatureVector<double>> read_features(std::istream& in)
{
	using nlohmann::json;
	std::vector<FeatureVector<double>> out;
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
		if (!j.contains("vec") || !j["vec"].is_array())
			throw DataError(where + "field 'vec': missing or not an array");
		FeatureVector<double> fv;
		fv.id = j["id"].get<std::string>();
		fv.vec.resize(static_cast<Eigen::Index>(j["vec"].size()));
		for (std::size_t i = 0; i < j["vec"].size(); ++i) {
			if (!j["vec"][i].is_number())
				throw DataError(where + "field 'vec': non-numeric entry");
			fv.vec(static_cast<Eigen::Index>(i)) = j["vec"][i].get<double>();
		}
		out.push_back(std::move(fv));
	}
	return out;
}

std::vector<FeatureVector<double>> load_features(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open feature file '" + path.string() + "'");
	try {
		return read_features(in);
	} catch (const DataError& e) {
		throw DataError(path.string() + ": " + e.what());
	}
}

} // namespace gmner
