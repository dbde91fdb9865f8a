#include <gtest/gtest.h>

#include "cantm/topics.hpp"
#include "test_util.hpp"

namespace cantm::topics {
namespace {

using Strings = std::vector<std::string>;

TEST(TopWords, PicksLargestWeights) {
  const corpus::Vocabulary vocab({"w1", "w2", "w3"});
  Eigen::MatrixXd w(1, 3);
  w << 0.1, 0.9, 0.5;
  const auto r = top_words(w, vocab, 2);
  ASSERT_EQ(r.topics.size(), 1u);
  EXPECT_EQ(r.topics[0].words, (Strings{"w2", "w3"}));
  EXPECT_EQ(r.topics[0].weights, (std::vector<double>{0.9, 0.5}));
  EXPECT_EQ(r.topics[0].label, "0");
}

TEST(TopWords, TiesKeepVocabularyOrder) {
  const corpus::Vocabulary vocab({"a", "b", "c", "d"});
  Eigen::MatrixXd w(1, 4);
  w << 0.2, 0.7, 0.2, 0.7;
  EXPECT_EQ(top_words(w, vocab, 3).topics[0].words, (Strings{"b", "d", "a"}));
}

TEST(TopWords, InvariantUnderPositiveScaling) {
  const corpus::Vocabulary vocab({"a", "b", "c", "d", "e"});
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(3, 5);
  const auto a = top_words(w, vocab, 3);
  const auto b = top_words(w * 7.5, vocab, 3);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.topics[i].words, b.topics[i].words);
}

TEST(TopWords, RejectsBadArguments) {
  const corpus::Vocabulary vocab({"a", "b"});
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, 2);
  EXPECT_THROW(top_words(w, vocab, 3), ValidationError);
  EXPECT_THROW(top_words(w, vocab, 0), ValidationError);
  EXPECT_THROW(top_words(Eigen::MatrixXd::Zero(1, 3), vocab, 1), ValidationError);
}

TEST(ModelTopics, ClassAssociatedRowsUseCategoryNames) {
  const auto cfg = testing::toy_config(4, 2, 3);
  auto m = testing::random_model<double>(cfg, 1);
  m.params().class_word << 0, 0, 5, 1,  //
      9, 0, 0, 0;
  const corpus::Vocabulary vocab({"alpha", "beta", "gamma", "delta"});
  const auto r = model_topics(m, vocab, TopicKind::ClassAssociated, 2);
  EXPECT_EQ(r.kind, TopicKind::ClassAssociated);
  ASSERT_EQ(r.topics.size(), 2u);
  EXPECT_EQ(r.topics[0].label, "PubAuth");
  EXPECT_EQ(r.topics[0].words, (Strings{"gamma", "delta"}));
  EXPECT_EQ(r.topics[1].label, "CommSpread");
  EXPECT_EQ(r.topics[1].words[0], "alpha");
  EXPECT_EQ(model_topics(m, vocab, TopicKind::ClassificationAware, 2).topics.size(), 3u);

  const auto text = to_text(r);
  EXPECT_NE(text.find("gamma delta"), std::string::npos);
  EXPECT_EQ(to_json(r).at("topics").size(), 2u);
}

TEST(ModelTopics, NvdmHasOnlyLatentTopics) {
  auto cfg = testing::toy_config(4, 2, 3);
  cfg.variant = model::Variant::Nvdm;
  const model::CantmModel<double> m(cfg);
  const corpus::Vocabulary vocab({"a", "b", "c", "d"});
  EXPECT_EQ(model_topics(m, vocab, TopicKind::Latent, 2).topics.size(), 3u);
  EXPECT_THROW(model_topics(m, vocab, TopicKind::ClassAssociated, 2), ValidationError);
}

TEST(Kinds, ParseNames) {
  EXPECT_EQ(parse_topic_kind("class_associated"), TopicKind::ClassAssociated);
  EXPECT_EQ(to_string(TopicKind::ClassificationAware), "classification_aware");
  EXPECT_FALSE(parse_topic_kind("all"));
}

}  // namespace
}  // namespace cantm::topics
