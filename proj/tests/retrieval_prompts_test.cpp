#include <gtest/gtest.h>

#include <sstream>

#include "gmner/errors.hpp"
#include "gmner/prompts.hpp"
#include "gmner/retrieval.hpp"
#include "support/oracles.hpp"

using namespace gmner;

namespace {

std::vector<FeatureVector<double>> named(const std::vector<Eigen::VectorXd>& vecs)
{
	std::vector<FeatureVector<double>> out;
	for (std::size_t i = 0; i < vecs.size(); ++i)
		out.push_back({"a" + std::to_string(i), vecs[i]});
	return out;
}

std::size_t count_of(const std::string& hay, const std::string& needle)
{
	std::size_t n = 0;
	for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1))
		++n;
	return n;
}

} // namespace

TEST(Retrieval, DefaultNIsFive)
{
	EXPECT_EQ(kDefaultTopN, 5u);
}

TEST(Retrieval, IdentityAndOrthogonalTies)
{
	const std::vector<Eigen::VectorXd> pool{Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0, 0, 2)};
	const auto idx = build_index(named(pool));
	const auto top = topn_similar(idx, Eigen::VectorXd(Eigen::Vector3d(0, 3, 0)), 3);
	ASSERT_EQ(top.size(), 3u);
	EXPECT_EQ(top[0].id, "a1");
	EXPECT_DOUBLE_EQ(top[0].cosine, 1.0);
	EXPECT_EQ(top[1].id, "a0");
	EXPECT_EQ(top[2].id, "a2");

	Eigen::VectorXd q(4);
	q << 0, 0, 0, 1;
	std::vector<Eigen::VectorXd> flat;
	for (int i = 0; i < 3; ++i) {
		Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
		v(i) = 1 + i;
		flat.push_back(v);
	}
	const auto orth = topn_similar(build_index(named(flat)), q, 10);
	ASSERT_EQ(orth.size(), 3u);
	for (std::size_t i = 0; i < 3; ++i) {
		EXPECT_EQ(orth[i].position, i);
		EXPECT_EQ(orth[i].cosine, 0.0);
	}
}

TEST(Retrieval, Errors)
{
	EXPECT_THROW(build_index(std::vector<FeatureVector<double>>{}), DataError);
	EXPECT_THROW(build_index(named({Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(5)})), DataError);
	EXPECT_THROW(build_index(named({Eigen::VectorXd::Zero(4)})), DataError);
	const auto idx = build_index(named({Eigen::VectorXd::Ones(4)}));
	EXPECT_EQ(idx.size(), 1u);
	EXPECT_THROW(topn_similar(idx, Eigen::VectorXd(Eigen::VectorXd::Zero(4)), 1), DataError);
	EXPECT_THROW(topn_similar(idx, Eigen::VectorXd(Eigen::VectorXd::Ones(3)), 1), DataError);
	EXPECT_THROW(topn_similar(idx, Eigen::VectorXd(Eigen::VectorXd::Ones(4)), 0), DataError);
}

TEST(Retrieval, NormalizedColumnsHaveUnitNorm)
{
	oracle::Rng rng(41);
	std::vector<Eigen::VectorXd> pool;
	for (int i = 0; i < 20; ++i)
		pool.push_back(Eigen::VectorXd::NullaryExpr(8, [&] { return oracle::uniform_real(rng, -5, 5); }));
	const auto idx = build_index(named(pool));
	for (Eigen::Index c = 0; c < idx.normalized().cols(); ++c)
		EXPECT_NEAR(idx.normalized().col(c).norm(), 1.0, 1e-9);
}

TEST(Retrieval, MatchesBruteForce)
{
	oracle::Rng rng(43);
	for (int k = 0; k < 300; ++k) {
		const int dim = oracle::uniform_int(rng, 1, 16), size = oracle::uniform_int(rng, 1, 30);
		std::vector<Eigen::VectorXd> pool;
		for (int i = 0; i < size; ++i)
			pool.push_back(Eigen::VectorXd::NullaryExpr(dim, [&] { return oracle::uniform_real(rng, -1, 1); }));
		const Eigen::VectorXd q = Eigen::VectorXd::NullaryExpr(dim, [&] { return oracle::uniform_real(rng, -1, 1); });
		const std::size_t n = std::size_t(oracle::uniform_int(rng, 1, 8));
		const auto got = topn_similar(build_index(named(pool)), q, n);
		const auto ref = oracle::brute_force_rank(pool, q);
		ASSERT_EQ(got.size(), std::min(n, pool.size()));
		for (std::size_t i = 0; i < got.size(); ++i) {
			ASSERT_EQ(got[i].position, ref[i].position);
			ASSERT_NEAR(got[i].cosine, ref[i].cosine, 1e-12);
		}
	}
}

TEST(Retrieval, FloatIndex)
{
	std::vector<FeatureVector<float>> pool{{"x", Eigen::Vector2f(1, 0)}, {"y", Eigen::Vector2f(1, 1)}};
	const auto top = topn_similar(build_index(pool), Eigen::VectorXf(Eigen::Vector2f(0, 1)), 1);
	ASSERT_EQ(top.size(), 1u);
	EXPECT_EQ(top[0].id, "y");
}

TEST(Retrieval, ReadsFeatureFile)
{
	std::istringstream in("{\"id\":\"a\",\"vec\":[1,2]}\n\n{\"id\":\"b\",\"vec\":[0.5,-1]}\n");
	const auto f = read_features(in);
	ASSERT_EQ(f.size(), 2u);
	EXPECT_EQ(f[1].id, "b");
	EXPECT_EQ(f[1].vec(1), -1.0);
	std::istringstream bad("{\"id\":\"a\",\"vec\":[1,\"x\"]}\n");
	EXPECT_THROW(read_features(bad), DataError);
}

TEST(Prompts, KnowledgeQueryOnly)
{
	const std::string p = build_knowledge_prompt("HEAD", {}, {"Messi scores", "A man kicking a ball"});
	EXPECT_EQ(p, "HEAD\n\nText: Messi scores\nImage: A man kicking a ball\nQuestion: " + std::string(kKnowledgeQuestion) +
	                 "\nAnswer:\n");
}

TEST(Prompts, KnowledgeFiveExamples)
{
	std::vector<AnnotatedExample> ex;
	for (int i = 0; i < 5; ++i)
		ex.push_back({"e" + std::to_string(i), "sentence " + std::to_string(i), "image " + std::to_string(i),
		              "ANSWER-" + std::to_string(i)});
	const std::string p = build_knowledge_prompt("HEAD", ex, {"query sentence", "query image"});
	EXPECT_EQ(count_of(p, "Question: " + std::string(kKnowledgeQuestion)), 6u);
	EXPECT_EQ(count_of(p, "Answer:"), 6u);
	for (int i = 0; i < 5; ++i)
		EXPECT_EQ(count_of(p, "Answer: ANSWER-" + std::to_string(i) + "\n"), 1u);
	// examples keep their order and precede the query block
	EXPECT_LT(p.find("ANSWER-0"), p.find("ANSWER-4"));
	EXPECT_LT(p.find("ANSWER-4"), p.find("Text: query sentence"));
	EXPECT_EQ(p.substr(p.size() - 8), "Answer:\n");
	EXPECT_EQ(p, build_knowledge_prompt("HEAD", ex, {"query sentence", "query image"}));
}

TEST(Prompts, KnowledgeQuestionText)
{
	EXPECT_EQ(std::string(kKnowledgeQuestion),
	          "Comprehensively analyze the Text and the Image, which named entities and their corresponding types are "
	          "included in the Text? Explain the reason for your judgment.");
}

TEST(Prompts, Expansion)
{
	const std::string p = build_expansion_prompt("A basketball game", "CP3 and Harden win", "CP3");
	EXPECT_EQ(p, "Background: A basketball game\nText: CP3 and Harden win\nQuestion: In the context of the provided "
	             "information, tell me briefly what is the CP3 in the Text?\nAnswer:\n");
	EXPECT_THROW(build_expansion_prompt("bg", "CP3 and Harden win", "Curry"), DataError);

	const std::string q = build_expansion_prompt("A basketball game", "CP3 and Harden win", "Harden");
	// the two prompts differ only in the entity slot
	std::string r = p;
	r.replace(r.find("the CP3 in"), 10, "the Harden in");
	EXPECT_EQ(r, q);

	const std::vector<ExpansionExample> fixed{{"bg0", "Alice met Bob", "Bob", "A friend of Alice"}};
	const std::string f = build_expansion_prompt("A basketball game", "CP3 and Harden win", "CP3", fixed);
	EXPECT_EQ(f.find("Background: bg0\n"), 0u);
	EXPECT_NE(f.find("Answer: A friend of Alice\n\nBackground: A basketball game"), std::string::npos);
}

TEST(Prompts, ReferringExpressions)
{
	EXPECT_EQ(compose_referring_expression("Hermione", EntityType::PER, "A female character").rendered,
	          "Hermione (PER) - A female character");
	EXPECT_EQ(compose_referring_expression("antonellaRoccuzzo", EntityType::PER, "A woman associated with Lionel Messi")
	              .rendered,
	          "antonellaRoccuzzo (PER) - A woman associated with Lionel Messi");
	EXPECT_EQ(compose_referring_expression("X", EntityType::LOC, "").rendered, "X (LOC)");
	EXPECT_EQ(compose_referring_expression("X", EntityType::LOC, "  a \n\t b ").rendered, "X (LOC) - a b");
	EXPECT_EQ(compose_referring_expression("X", EntityType::LOC, " \t ").rendered, "X (LOC)");
	EXPECT_THROW(compose_referring_expression("", EntityType::ORG, "x"), DataError);
}

TEST(Prompts, ReferringExpressionRoundTrip)
{
	const std::vector<std::string> entities{"Messi", "New York (city)", "A - B", "x(y)"};
	const std::vector<std::string> expansions{"", "A city (in US)", "- dash", "one) - two"};
	for (const auto& e : entities)
		for (const auto& x : expansions)
			for (EntityType t : kEntityTypes) {
				const ReferringExpression r = compose_referring_expression(e, t, x);
				const auto back = parse_referring_expression(r.rendered);
				ASSERT_TRUE(back.has_value()) << r.rendered;
				EXPECT_EQ(*back, r) << r.rendered;
			}
	EXPECT_FALSE(parse_referring_expression("no type here").has_value());
	EXPECT_FALSE(parse_referring_expression("X (FOO)").has_value());
}

TEST(Prompts, MergeAugmented)
{
	DatasetSplit base{"train", {}};
	for (const char* id : {"s1", "s2"})
		base.samples.push_back(Sample{id, {"t"}, {"p", 1, 1}, {}, {}, {}, {}});
	KnowledgeSets k;
	for (const char* llm : {"gpt-3.5-turbo", "vicuna", "llama", "chatglm", "baichuan"})
		for (const char* id : {"s1", "s2"})
			k[llm][id] = std::string(llm) + ":" + id;
	const auto train = merge_augmented(base, k, SplitKind::Train);
	ASSERT_EQ(train.size(), 10u);
	EXPECT_EQ(train[0], (KnowledgeRecord{"s1", "baichuan", "baichuan:s1"}));
	EXPECT_EQ(train[5].id, "s2");
	const auto dev = merge_augmented(base, k, SplitKind::Dev);
	ASSERT_EQ(dev.size(), 2u);
	for (const auto& r : dev)
		EXPECT_EQ(r.llm, "gpt-3.5-turbo");

	KnowledgeSets only_other{{"vicuna", {{"s1", "x"}}}};
	EXPECT_THROW(merge_augmented(base, only_other, SplitKind::Test), DataError);
	EXPECT_EQ(merge_augmented(base, only_other, SplitKind::Train).size(), 1u);
	KnowledgeSets unknown{{"gpt-3.5-turbo", {{"zz", "x"}}}};
	EXPECT_THROW(merge_augmented(base, unknown, SplitKind::Train), DataError);
}

TEST(Prompts, MergeAugmentedScalesToTable)
{
	DatasetSplit base{"train", {}};
	KnowledgeSets k;
	const std::vector<std::string> llms{"gpt-3.5-turbo", "vicuna", "llama", "chatglm", "baichuan"};
	for (int i = 0; i < 7000; ++i) {
		const std::string id = "s" + std::to_string(i);
		base.samples.push_back(Sample{id, {"t"}, {"p", 1, 1}, {}, {}, {}, {}});
		for (const auto& llm : llms)
			k[llm][id] = "k";
	}
	EXPECT_EQ(merge_augmented(base, k, SplitKind::Train).size(), 35000u);
	EXPECT_EQ(merge_augmented(base, k, SplitKind::Test).size(), 7000u);
}

TEST(Prompts, ReadKnowledge)
{
	std::istringstream in("{\"id\":\"a\",\"llm\":\"m\",\"knowledge\":\"k\"}\n");
	const auto k = read_knowledge(in);
	EXPECT_EQ(k.at("m").at("a"), "k");
	std::istringstream dup("{\"id\":\"a\",\"llm\":\"m\",\"knowledge\":\"k\"}\n{\"id\":\"a\",\"llm\":\"m\",\"knowledge\":\"j\"}\n");
	EXPECT_THROW(read_knowledge(dup), DataError);
}
