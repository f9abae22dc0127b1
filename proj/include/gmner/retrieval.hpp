#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace gmner {

/// Number of in-context examples selected per query unless configured otherwise.
inline constexpr std::size_t kDefaultTopN = 5;

template <typename Scalar>
struct FeatureVector {
	std::string id;
	Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vec;
};

template <typename Scalar>
struct Neighbor {
	std::string id;
	Scalar cosine;
	/// Position in the index.
	std::size_t position;
};

/// Exhaustive cosine-similarity index over fusion feature vectors. Unit-norm
/// copies are stored column-wise so one query is a single matrix-vector
/// product.
template <typename Scalar>
class ExampleIndex {
public:
	using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
	using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

	ExampleIndex(std::vector<std::string> ids, Matrix normalized)
	    : ids_(std::move(ids)), normalized_(std::move(normalized))
	{
	}

	std::size_t size() const { return ids_.size(); }
	Eigen::Index dimension() const { return normalized_.rows(); }
	const std::vector<std::string>& ids() const { return ids_; }
	const Matrix& normalized() const { return normalized_; }

private:
	std::vector<std::string> ids_;
	Matrix normalized_;
};

/// Throws DataError on empty input, mixed dimensions or a zero-norm vector.
template <typename Scalar>
ExampleIndex<Scalar> build_index(const std::vector<FeatureVector<Scalar>>& vectors);

/// The min(n, size) most similar entries by descending cosine; ties keep
/// index order. Throws DataError on n < 1, dimension mismatch or zero query.
template <typename Scalar>
std::vector<Neighbor<Scalar>> topn_similar(const ExampleIndex<Scalar>& index,
                                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& query,
                                           std::size_t n);

extern template ExampleIndex<double> build_index(const std::vector<FeatureVector<double>>&);
extern template ExampleIndex<float> build_index(const std::vector<FeatureVector<float>>&);
extern template std::vector<Neighbor<double>> topn_similar(const ExampleIndex<double>&,
                                                           const Eigen::VectorXd&, std::size_t);
extern template std::vector<Neighbor<float>> topn_similar(const ExampleIndex<float>&,
                                                          const Eigen::VectorXf&, std::size_t);

/// JSONL `{"id":str,"vec":[float]}`.
std::vector<FeatureVector<double>> read_features(std::istream& in);
std::vector<FeatureVector<double>> load_features(const std::filesystem::path& path);

} // namespace gmner
