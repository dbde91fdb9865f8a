#ifndef CANTM_MODEL_HPP_
#define CANTM_MODEL_HPP_

#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cantm/category.hpp"
#include "cantm/corpus.hpp"
#include "cantm/embedding.hpp"
#include "cantm/error.hpp"
#include "cantm/numeric.hpp"

namespace cantm::model {

// Cantm is the full stacked model; Nvdm keeps only the M1 VAE (encoder,
// inference network and decoder R).
enum class Variant { Cantm, Nvdm };

// Bow: trainable affine map over log(1 + counts).
// Embedding: frozen lookup of a precomputed vector keyed by document id.
enum class EncoderKind { Bow, Embedding };

struct ModelConfig {
  int d_h = 100;  // encoder output; equals the table dimension for Embedding
  int d_z = 50;
  int d_zs = 50;
  int d_t = 50;
  int d_m = 50;  // width of the M2 merge layer
  int num_classes = 10;
  int vocab_size = 2000;
  double lambda = 200.0;  // classifier loss weight, |V| / C by default
  int n_train_samples = 10;
  int n_test_samples = 1;
  double leaky_slope = 0.01;
  Variant variant = Variant::Cantm;
  EncoderKind encoder = EncoderKind::Bow;
  std::vector<Category> labels;  // classifier class order; size num_classes

  // Throws ValidationError on inconsistent dimensions.
  void validate() const;
};

std::string_view to_string(Variant v);
std::string_view to_string(EncoderKind e);
std::optional<Variant> parse_variant(std::string_view s);
std::optional<EncoderKind> parse_encoder_kind(std::string_view s);

nlohmann::json config_to_json(const ModelConfig& c);
ModelConfig config_from_json(const nlohmann::json& j);

// Parameter groups, used to freeze parts of the model.
enum class ParamGroup { Encoder, M1Inference, M1Decoder, Classifier, ClassDecoder, M2Inference, M2Decoder };

// Every learnable tensor. Topic-word matrices follow the row-per-topic
// layout: topic_word is d_z x |V|, class_word is C x |V|, aware_word is
// d_t x |V|.
template <typename Scalar>
struct Parameters {
  Matrix<Scalar> enc_w;  // d_h x |V| (empty for the embedding encoder)
  Vector<Scalar> enc_b;
  Matrix<Scalar> mu_w;  // M1 inference
  Vector<Scalar> mu_b;
  Matrix<Scalar> logvar_w;
  Vector<Scalar> logvar_b;
  Matrix<Scalar> topic_word;  // M1 decoder R
  Vector<Scalar> word_bias;
  Matrix<Scalar> cls_w;  // M1 classifier
  Vector<Scalar> cls_b;
  Matrix<Scalar> class_word;  // class decoder R_ct
  Vector<Scalar> class_word_bias;
  Matrix<Scalar> merge_w;  // d_m x (d_h + C), input order h then y_hat
  Vector<Scalar> merge_b;
  Matrix<Scalar> mu_s_w;  // M2 inference
  Vector<Scalar> mu_s_b;
  Matrix<Scalar> logvar_s_w;
  Vector<Scalar> logvar_s_b;
  Matrix<Scalar> m2_cls_w;  // M2 classifier
  Vector<Scalar> m2_cls_b;
  Matrix<Scalar> aware_w;  // d_t x (C + d_zs), input order y_hat then z_s
  Vector<Scalar> aware_b;
  Matrix<Scalar> aware_word;  // M2 decoder R_s
  Vector<Scalar> aware_word_bias;

  static Parameters zeros(const ModelConfig& c) {
    Parameters p;
    const int d_in = c.encoder == EncoderKind::Bow ? c.vocab_size : 0;
    const int d_enc = c.encoder == EncoderKind::Bow ? c.d_h : 0;
    p.enc_w.setZero(d_enc, d_in);
    p.enc_b.setZero(d_enc);
    p.mu_w.setZero(c.d_z, c.d_h);
    p.mu_b.setZero(c.d_z);
    p.logvar_w.setZero(c.d_z, c.d_h);
    p.logvar_b.setZero(c.d_z);
    p.topic_word.setZero(c.d_z, c.vocab_size);
    p.word_bias.setZero(c.vocab_size);
    p.cls_w.setZero(c.num_classes, c.d_z);
    p.cls_b.setZero(c.num_classes);
    p.class_word.setZero(c.num_classes, c.vocab_size);
    p.class_word_bias.setZero(c.vocab_size);
    p.merge_w.setZero(c.d_m, c.d_h + c.num_classes);
    p.merge_b.setZero(c.d_m);
    p.mu_s_w.setZero(c.d_zs, c.d_m);
    p.mu_s_b.setZero(c.d_zs);
    p.logvar_s_w.setZero(c.d_zs, c.d_m);
    p.logvar_s_b.setZero(c.d_zs);
    p.m2_cls_w.setZero(c.num_classes, c.d_zs);
    p.m2_cls_b.setZero(c.num_classes);
    p.aware_w.setZero(c.d_t, c.num_classes + c.d_zs);
    p.aware_b.setZero(c.d_t);
    p.aware_word.setZero(c.d_t, c.vocab_size);
    p.aware_word_bias.setZero(c.vocab_size);
    return p;
  }

  // f(name, group, tensor) for every tensor, in a fixed order.
  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  Parameters zeros_like() const {
    Parameters out = *this;
    out.visit([](std::string_view, ParamGroup, auto& t) { t.setZero(); });
    return out;
  }

  Eigen::Index size() const {
    Eigen::Index n = 0;
    visit([&](std::string_view, ParamGroup, const auto& t) { n += t.size(); });
    return n;
  }

  template <typename To>
  Parameters<To> cast() const {
    // Both visitors walk the tensors in the same order.
    std::vector<Matrix<To>> converted;
    visit([&](std::string_view, ParamGroup, const auto& t) { converted.emplace_back(t.template cast<To>()); });
    Parameters<To> out;
    std::size_t i = 0;
    out.visit([&](std::string_view, ParamGroup, auto& t) {
      t = converted[i++];
    });
    return out;
  }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& p, F& f) {
    f("encoder.weight", ParamGroup::Encoder, p.enc_w);
    f("encoder.bias", ParamGroup::Encoder, p.enc_b);
    f("m1.mu.weight", ParamGroup::M1Inference, p.mu_w);
    f("m1.mu.bias", ParamGroup::M1Inference, p.mu_b);
    f("m1.logvar.weight", ParamGroup::M1Inference, p.logvar_w);
    f("m1.logvar.bias", ParamGroup::M1Inference, p.logvar_b);
    f("m1.decoder.R", ParamGroup::M1Decoder, p.topic_word);
    f("m1.decoder.bias", ParamGroup::M1Decoder, p.word_bias);
    f("m1.classifier.weight", ParamGroup::Classifier, p.cls_w);
    f("m1.classifier.bias", ParamGroup::Classifier, p.cls_b);
    f("m1.class_decoder.R_ct", ParamGroup::ClassDecoder, p.class_word);
    f("m1.class_decoder.bias", ParamGroup::ClassDecoder, p.class_word_bias);
    f("m2.merge.weight", ParamGroup::M2Inference, p.merge_w);
    f("m2.merge.bias", ParamGroup::M2Inference, p.merge_b);
    f("m2.mu.weight", ParamGroup::M2Inference, p.mu_s_w);
    f("m2.mu.bias", ParamGroup::M2Inference, p.mu_s_b);
    f("m2.logvar.weight", ParamGroup::M2Inference, p.logvar_s_w);
    f("m2.logvar.bias", ParamGroup::M2Inference, p.logvar_s_b);
    f("m2.classifier.weight", ParamGroup::M2Decoder, p.m2_cls_w);
    f("m2.classifier.bias", ParamGroup::M2Decoder, p.m2_cls_b);
    f("m2.topic.weight", ParamGroup::M2Decoder, p.aware_w);
    f("m2.topic.bias", ParamGroup::M2Decoder, p.aware_b);
    f("m2.decoder.R_s", ParamGroup::M2Decoder, p.aware_word);
    f("m2.decoder.bias", ParamGroup::M2Decoder, p.aware_word_bias);
  }
};

template <typename Scalar>
class CantmModel {
 public:
  explicit CantmModel(ModelConfig config) : config_(std::move(config)) {
    config_.validate();
    params_ = Parameters<Scalar>::zeros(config_);
  }

  // Glorot-uniform weights, zero biases; the two log-variance layers start
  // at zero so every posterior begins at unit variance.
  static CantmModel initialized(ModelConfig config, std::uint64_t seed) {
    CantmModel m(std::move(config));
    std::mt19937_64 rng(seed);
    m.params_.visit([&](std::string_view name, ParamGroup, auto& t) {
      if (t.cols() <= 1 || name.find("logvar") != std::string_view::npos) return;
      const double limit = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = static_cast<Scalar>(u(rng));
    });
    return m;
  }

  const ModelConfig& config() const { return config_; }
  Parameters<Scalar>& params() { return params_; }
  const Parameters<Scalar>& params() const { return params_; }

  void set_embeddings(std::shared_ptr<const EmbeddingTable> table) {
    if (table && table->dim() != config_.d_h)
      throw ValidationError("embedding dimension " + std::to_string(table->dim()) + " does not match d_h " +
                            std::to_string(config_.d_h));
    embeddings_ = std::move(table);
  }
  const std::shared_ptr<const EmbeddingTable>& embeddings() const { return embeddings_; }

  template <typename To>
  CantmModel<To> cast() const {
    CantmModel<To> out(config_);
    out.params() = params_.template cast<To>();
    out.set_embeddings(embeddings_);
    return out;
  }

 private:
  ModelConfig config_;
  Parameters<Scalar> params_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
};

// One model input: bag of words, embedding key and optional class index.
struct Example {
  corpus::BowVector bow;
  std::string key;
  std::optional<int> label;
};

// Maps document labels to class indices of `labels` (unknown labels throw).
std::vector<Example> make_examples(std::span<const corpus::LabeledDocument> docs, std::span<const Category> labels,
                                   bool require_labels);

template <typename Scalar>
struct GaussianParams {
  Vector<Scalar> mu;
  Vector<Scalar> log_var;

  Vector<Scalar> variance() const { return log_var.array().exp().matrix(); }
  Vector<Scalar> stddev() const { return (Scalar(0.5) * log_var.array()).exp().matrix(); }
};

template <typename Scalar>
Vector<Scalar> dense_counts(const corpus::BowVector& bow, int vocab_size) {
  Vector<Scalar> x = Vector<Scalar>::Zero(vocab_size);
  for (const auto& e : bow.entries) x[e.index] = static_cast<Scalar>(e.count);
  return x;
}

// Input features of the BoW encoder.
template <typename Derived>
auto encoder_features(const Eigen::MatrixBase<Derived>& counts) {
  return counts.array().log1p().matrix();
}

template <typename Scalar>
Vector<Scalar> encode_document(const Example& doc, const CantmModel<Scalar>& model) {
  const auto& p = model.params();
  if (model.config().encoder == EncoderKind::Embedding) {
    if (!model.embeddings()) throw LookupError("embedding encoder has no embedding table attached");
    return model.embeddings()->at(doc.key).template cast<Scalar>();
  }
  const Vector<Scalar> x = dense_counts<Scalar>(doc.bow, model.config().vocab_size);
  return p.enc_w * encoder_features(x) + p.enc_b;
}

template <typename Scalar>
GaussianParams<Scalar> m1_infer(const Vector<Scalar>& h, const CantmModel<Scalar>& model) {
  const auto& p = model.params();
  return {p.mu_w * h + p.mu_b, p.logvar_w * h + p.logvar_b};
}

// n reparameterized draws mu + sigma * eps, one per column.
template <typename Scalar, typename Rng>
Matrix<Scalar> sample_latent(const GaussianParams<Scalar>& params, int n, Rng& rng) {
  if (n < 1) throw ValidationError("sample_latent requires n >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<Scalar> eps(params.mu.size(), n);
  for (Eigen::Index k = 0; k < eps.size(); ++k) eps.data()[k] = static_cast<Scalar>(normal(rng));
  return (eps.array().colwise() * params.stddev().array()).matrix().colwise() + params.mu;
}

// sum_w count_w * log softmax(logits)_w
template <typename Scalar>
Scalar bow_loglik(const Vector<Scalar>& logits, const corpus::BowVector& bow) {
  if (bow.empty()) throw NumericError("log-likelihood undefined for an empty bag of words");
  const Vector<Scalar> logp = log_softmax(logits);
  Scalar total = 0;
  for (const auto& e : bow.entries) total += static_cast<Scalar>(e.count) * logp[e.index];
  return total;
}

template <typename Scalar>
Scalar m1_reconstruct_loglik(const Vector<Scalar>& z, const corpus::BowVector& bow, const CantmModel<Scalar>& model) {
  const auto& p = model.params();
  return bow_loglik<Scalar>(p.topic_word.transpose() * z + p.word_bias, bow);
}

template <typename Scalar>
Vector<Scalar> classify(const Vector<Scalar>& z, const CantmModel<Scalar>& model) {
  const auto& p = model.params();
  return softmax(Vector<Scalar>(p.cls_w * z + p.cls_b));
}

template <typename Scalar>
Scalar class_decoder_loglik(const Vector<Scalar>& y_hat, const corpus::BowVector& bow,
                            const CantmModel<Scalar>& model) {
  const auto& p = model.params();
  return bow_loglik<Scalar>(p.class_word.transpose() * y_hat + p.class_word_bias, bow);
}

// Merged M2 feature m = LeakyReLU(W [h; y_hat] + b).
template <typename Scalar>
Vector<Scalar> m2_merge(const Vector<Scalar>& h, const Vector<Scalar>& y_hat, const CantmModel<Scalar>& model) {
  const auto& p = model.params();
  const int d_h = model.config().d_h;
  const Vector<Scalar> pre = p.merge_w.leftCols(d_h) * h + p.merge_w.rightCols(y_hat.size()) * y_hat + p.merge_b;
  return leaky_relu(pre, static_cast<Scalar>(model.config().leaky_slope));
}

template <typename Scalar>
GaussianParams<Scalar> m2_infer(const Vector<Scalar>& h, const Vector<Scalar>& y_hat, const CantmModel<Scalar>& model) {
  const auto& p = model.params();
  const Vector<Scalar> m = m2_merge(h, y_hat, model);
  return {p.mu_s_w * m + p.mu_s_b, p.logvar_s_w * m + p.logvar_s_b};
}

// Classification-aware topic t = LeakyReLU(W [y_hat; z_s] + b).
template <typename Scalar>
Vector<Scalar> aware_topic(const Vector<Scalar>& y_hat, const Vector<Scalar>& z_s, const CantmModel<Scalar>& model) {
  const auto& p = model.params();
  const int c = model.config().num_classes;
  const Vector<Scalar> pre = p.aware_w.leftCols(c) * y_hat + p.aware_w.rightCols(z_s.size()) * z_s + p.aware_b;
  return leaky_relu(pre, static_cast<Scalar>(model.config().leaky_slope));
}

template <typename Scalar>
Scalar m2_reconstruct_loglik(const Vector<Scalar>& y_hat, const Vector<Scalar>& z_s, const corpus::BowVector& bow,
                             const CantmModel<Scalar>& model) {
  const auto& p = model.params();
  const Vector<Scalar> t = aware_topic(y_hat, z_s, model);
  return bow_loglik<Scalar>(p.aware_word.transpose() * t + p.aware_word_bias, bow);
}

// sum_c y_hat_c * log softmax(FC(z_s))_c
template <typename Scalar>
Scalar m2_class_loglik(const Vector<Scalar>& z_s, const Vector<Scalar>& y_hat, const CantmModel<Scalar>& model) {
  const auto& p = model.params();
  const Vector<Scalar> logq = log_softmax(Vector<Scalar>(p.m2_cls_w * z_s + p.m2_cls_b));
  return y_hat.dot(logq);
}

template <typename Scalar>
Scalar gaussian_kl(const GaussianParams<Scalar>& g) {
  return cantm::gaussian_kl(g.mu, g.log_var)(0);
}

// Class distribution at test time (z = mu).
template <typename Scalar>
Vector<Scalar> predict_distribution(const Example& doc, const CantmModel<Scalar>& model) {
  const auto h = encode_document(doc, model);
  return classify<Scalar>(m1_infer(h, model).mu, model);
}

// M1 ELBO with z = mu: log p(x_bow | mu) - KL(q(z|x) || p(z)).
template <typename Scalar>
Scalar document_elbo(const Example& doc, const CantmModel<Scalar>& model) {
  const auto h = encode_document(doc, model);
  const auto q = m1_infer(h, model);
  return m1_reconstruct_loglik<Scalar>(q.mu, doc.bow, model) - gaussian_kl(q);
}

}  // namespace cantm::model

#endif  // CANTM_MODEL_HPP_
