#include <gtest/gtest.h>

#include "cantm/loss.hpp"
#include "test_util.hpp"

namespace cantm::model {
namespace {

using cantm::testing::check_gradient;
using cantm::testing::random_examples;
using cantm::testing::random_model;
using cantm::testing::toy_config;

TEST(LossGradient, FullModelMatchesFiniteDifferences) {
  auto cfg = toy_config(20, 3, 8);
  auto m = random_model<double>(cfg, 7);
  const auto docs = random_examples(5, 20, 3, 11);
  std::mt19937_64 rng(3);
  const auto noise = draw_noise<double>(cfg, 5, cfg.n_train_samples, rng);
  const auto r = check_gradient(m, docs, noise, LossTerms::full());
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst;
}

TEST(LossGradient, NvdmTermsMatchFiniteDifferences) {
  auto cfg = toy_config(15, 2, 5);
  cfg.variant = Variant::Nvdm;
  auto m = random_model<double>(cfg, 5);
  const auto docs = random_examples(4, 15, 2, 19);
  std::mt19937_64 rng(4);
  const auto noise = draw_noise<double>(cfg, 4, 2, rng);
  const auto r = check_gradient(m, docs, noise, LossTerms::nvdm());
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst;
}

TEST(LossGradient, EmptyBowDocumentKeepsOnlyClassification) {
  auto cfg = toy_config(10, 2, 4);
  auto m = random_model<double>(cfg, 9);
  auto docs = random_examples(3, 10, 2, 2);
  docs[1].bow.entries.clear();
  std::mt19937_64 rng(8);
  const auto noise = draw_noise<double>(cfg, 3, 2, rng);
  const auto r = check_gradient(m, docs, noise, LossTerms::full());
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst;
}

TEST(LossGradient, EmbeddingEncoderMatchesFiniteDifferences) {
  auto cfg = toy_config(12, 3, 6, EncoderKind::Embedding);
  auto m = random_model<double>(cfg, 21);
  auto table = std::make_shared<EmbeddingTable>(6);
  std::mt19937_64 erng(1);
  std::normal_distribution<float> normal;
  for (int d = 0; d < 4; ++d) {
    Vector<float> v(6);
    for (auto& x : v) x = normal(erng);
    table->insert("d" + std::to_string(d), v);
  }
  m.set_embeddings(table);
  const auto docs = random_examples(4, 12, 3, 6);
  std::mt19937_64 rng(5);
  const auto noise = draw_noise<double>(cfg, 4, 2, rng);
  const auto r = check_gradient(m, docs, noise, LossTerms::full());
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst;
}

}  // namespace
}  // namespace cantm::model
