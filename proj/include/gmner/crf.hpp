#pragma once

// Linear-chain CRF inference over a dense emission matrix.
//
// A label sequence y of length n scores
//
//   score(y) = start[y_0] + sum_i emit(i, y_i) + sum_{i>=1} trans(y_{i-1}, y_i) + end[y_{n-1}]
//
// and P(y) = exp(score(y)) / Z with Z summed over all L^n sequences. All
// routines are templated on the scalar type and accept any Eigen expression
// for the emissions (rows = tokens, cols = labels).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gmner/bio.hpp"
#include "gmner/errors.hpp"

namespace gmner {

template <typename Scalar>
using EmissionMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct CrfParams {
	using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
	using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

	/// transition(from, to)
	Matrix transition;
	Vector start;
	Vector end;

	Eigen::Index num_labels() const { return transition.rows(); }

	static CrfParams zeros(Eigen::Index labels)
	{
		return {Matrix::Zero(labels, labels), Vector::Zero(labels), Vector::Zero(labels)};
	}
};

template <typename Scalar>
struct ViterbiResult {
	TagSequence tags;
	Scalar score;
};

template <typename Scalar>
struct CrfGradient {
	EmissionMatrix<Scalar> emissions;
	CrfParams<Scalar> params;
};

template <typename Scalar>
struct NllResult {
	Scalar nll;
	CrfGradient<Scalar> grad;
};

namespace detail {

template <typename Derived>
void check_crf_inputs(const Eigen::MatrixBase<Derived>& e, const CrfParams<typename Derived::Scalar>& p)
{
	const Eigen::Index labels = p.num_labels();
	if (labels < 1 || p.transition.cols() != labels || p.start.size() != labels || p.end.size() != labels)
		throw DataError("crf: parameter shapes inconsistent with label count");
	if (e.rows() < 1)
		throw DataError("crf: emission matrix has no rows");
	if (e.cols() != labels)
		throw DataError("crf: emission columns (" + std::to_string(e.cols()) + ") != labels (" +
		                std::to_string(labels) + ")");
	if (!e.allFinite() || !p.transition.allFinite() || !p.start.allFinite() || !p.end.allFinite())
		throw DataError("crf: non-finite score");
}

inline void check_tags(const TagSequence& tags, Eigen::Index rows, Eigen::Index labels)
{
	if (static_cast<Eigen::Index>(tags.size()) != rows)
		throw DataError("crf: tag sequence length differs from emission rows");
	for (int t : tags)
		if (t < 0 || t >= labels)
			throw DataError("crf: tag index " + std::to_string(t) + " out of range");
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& x)
{
	using Scalar = typename Derived::Scalar;
	const Scalar m = x.maxCoeff();
	if (!std::isfinite(m))
		return m;
	return m + std::log((x.derived().array() - m).exp().sum());
}

/// Forward log-messages: alpha(i, j) = log-sum of scores of all prefixes ending in j at i,
/// excluding the end potential.
template <typename Derived>
EmissionMatrix<typename Derived::Scalar> forward_messages(const Eigen::MatrixBase<Derived>& e,
                                                          const CrfParams<typename Derived::Scalar>& p)
{
	using Scalar = typename Derived::Scalar;
	const Eigen::Index n = e.rows(), labels = e.cols();
	EmissionMatrix<Scalar> alpha(n, labels);
	alpha.row(0) = p.start.transpose() + e.row(0);
	for (Eigen::Index i = 1; i < n; ++i)
		for (Eigen::Index j = 0; j < labels; ++j)
			alpha(i, j) = e(i, j) + log_sum_exp(alpha.row(i - 1).transpose() + p.transition.col(j));
	return alpha;
}

/// Backward log-messages: beta(i, j) = log-sum of suffix scores after position i given y_i = j,
/// including the end potential.
template <typename Derived>
EmissionMatrix<typename Derived::Scalar> backward_messages(const Eigen::MatrixBase<Derived>& e,
                                                           const CrfParams<typename Derived::Scalar>& p)
{
	using Scalar = typename Derived::Scalar;
	const Eigen::Index n = e.rows(), labels = e.cols();
	EmissionMatrix<Scalar> beta(n, labels);
	beta.row(n - 1) = p.end.transpose();
	for (Eigen::Index i = n - 2; i >= 0; --i)
		for (Eigen::Index j = 0; j < labels; ++j)
			beta(i, j) = log_sum_exp(p.transition.row(j) + e.row(i + 1) + beta.row(i + 1));
	return beta;
}

} // namespace detail

/// Score of one label sequence.
template <typename Derived>
typename Derived::Scalar sequence_score(const Eigen::MatrixBase<Derived>& e,
                                        const CrfParams<typename Derived::Scalar>& p, const TagSequence& tags)
{
	detail::check_crf_inputs(e, p);
	detail::check_tags(tags, e.rows(), p.num_labels());
	typename Derived::Scalar s = p.start(tags.front()) + p.end(tags.back());
	for (std::size_t i = 0; i < tags.size(); ++i) {
		s += e(static_cast<Eigen::Index>(i), tags[i]);
		if (i > 0)
			s += p.transition(tags[i - 1], tags[i]);
	}
	return s;
}

/// Highest-scoring sequence. Ties go to the lower label index, both for the
/// final label and for every back-pointer.
template <typename Derived>
ViterbiResult<typename Derived::Scalar> viterbi_decode(const Eigen::MatrixBase<Derived>& e,
                                                       const CrfParams<typename Derived::Scalar>& p)
{
	using Scalar = typename Derived::Scalar;
	detail::check_crf_inputs(e, p);
	const Eigen::Index n = e.rows(), labels = e.cols();

	EmissionMatrix<Scalar> best(n, labels);
	Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> back(n, labels);
	best.row(0) = p.start.transpose() + e.row(0);
	for (Eigen::Index i = 1; i < n; ++i) {
		for (Eigen::Index j = 0; j < labels; ++j) {
			Eigen::Index arg = 0;
			Scalar top = best(i - 1, 0) + p.transition(0, j);
			for (Eigen::Index k = 1; k < labels; ++k) {
				const Scalar cand = best(i - 1, k) + p.transition(k, j);
				if (cand > top) {
					top = cand;
					arg = k;
				}
			}
			best(i, j) = top + e(i, j);
			back(i, j) = static_cast<int>(arg);
		}
	}

	Eigen::Index last = 0;
	Scalar top = best(n - 1, 0) + p.end(0);
	for (Eigen::Index j = 1; j < labels; ++j) {
		const Scalar cand = best(n - 1, j) + p.end(j);
		if (cand > top) {
			top = cand;
			last = j;
		}
	}

	TagSequence tags(static_cast<std::size_t>(n));
	tags.back() = static_cast<int>(last);
	for (Eigen::Index i = n - 1; i > 0; --i)
		tags[static_cast<std::size_t>(i - 1)] = back(i, tags[static_cast<std::size_t>(i)]);
	return {std::move(tags), top};
}

/// log Z, computed with the stabilized forward recursion.
template <typename Derived>
typename Derived::Scalar log_partition(const Eigen::MatrixBase<Derived>& e,
                                       const CrfParams<typename Derived::Scalar>& p)
{
	detail::check_crf_inputs(e, p);
	const auto alpha = detail::forward_messages(e, p);
	return detail::log_sum_exp(alpha.row(e.rows() - 1).transpose() + p.end);
}

/// Negative log-likelihood of `gold` and its gradient with respect to the
/// emissions and every CRF parameter (expected minus observed feature counts).
template <typename Derived>
NllResult<typename Derived::Scalar> crf_nll_and_grad(const Eigen::MatrixBase<Derived>& e,
                                                     const CrfParams<typename Derived::Scalar>& p,
                                                     const TagSequence& gold)
{
	using Scalar = typename Derived::Scalar;
	detail::check_crf_inputs(e, p);
	detail::check_tags(gold, e.rows(), p.num_labels());
	const Eigen::Index n = e.rows(), labels = e.cols();

	const auto alpha = detail::forward_messages(e, p);
	const auto beta = detail::backward_messages(e, p);
	const Scalar log_z = detail::log_sum_exp(alpha.row(n - 1).transpose() + p.end);

	NllResult<Scalar> out;
	// Clamp tiny negative round-off; the exact value is never below zero.
	out.nll = std::max(Scalar(0), log_z - sequence_score(e, p, gold));

	auto& g = out.grad;
	g.emissions = ((alpha + beta).array() - log_z).exp().matrix();
	g.params = CrfParams<Scalar>::zeros(labels);
	g.params.start = g.emissions.row(0).transpose();
	g.params.end = g.emissions.row(n - 1).transpose();
	for (Eigen::Index i = 1; i < n; ++i)
		for (Eigen::Index k = 0; k < labels; ++k)
			for (Eigen::Index j = 0; j < labels; ++j)
				g.params.transition(k, j) +=
				    std::exp(alpha(i - 1, k) + p.transition(k, j) + e(i, j) + beta(i, j) - log_z);

	for (Eigen::Index i = 0; i < n; ++i)
		g.emissions(i, gold[static_cast<std::size_t>(i)]) -= Scalar(1);
	g.params.start(gold.front()) -= Scalar(1);
	g.params.end(gold.back()) -= Scalar(1);
	for (std::size_t i = 1; i < gold.size(); ++i)
		g.params.transition(gold[i - 1], gold[i]) -= Scalar(1);
	return out;
}

} // namespace gmner
