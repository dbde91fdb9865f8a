#ifndef CANTM_LOSS_HPP_
#define CANTM_LOSS_HPP_

#include <cmath>
#include <random>
#include <utility>
#include <span>
#include <string>

#include "cantm/model.hpp"

namespace cantm::model {

// Batch means of each loss component. Likelihood terms are stored as
// expected log-likelihoods (<= 0), KL terms as divergences (>= 0), and
//   total = lambda*cls - m1_recon + m1_kl - class_recon - m2_recon - m2_cls + m2_kl.
struct LossBreakdown {
  double cls = 0;
  double m1_recon = 0;
  double m1_kl = 0;
  double class_recon = 0;
  double m2_recon = 0;
  double m2_cls = 0;
  double m2_kl = 0;
  double total = 0;

  // Name of the first non-finite component, or nullptr.
  const char* first_non_finite() const {
    const std::pair<const char*, double> fields[] = {
        {"cls", cls},       {"m1_recon", m1_recon}, {"m1_kl", m1_kl}, {"class_recon", class_recon},
        {"m2_recon", m2_recon}, {"m2_cls", m2_cls}, {"m2_kl", m2_kl}, {"total", total},
    };
    for (const auto& [name, v] : fields) {
      if (!std::isfinite(v)) return name;
    }
    return nullptr;
  }
};

// Which loss terms are active. Disabled terms are neither computed nor
// differentiated; with only `m1` active the objective is the NVDM loss.
struct LossTerms {
  bool classifier = true;     // lambda * cross-entropy
  bool m1 = true;             // M1 ELBO
  bool class_decoder = true;  // log p(x_bow | y_hat)
  bool m2 = true;             // M2 ELBO

  static LossTerms full() { return {}; }
  static LossTerms nvdm() { return {false, true, false, false}; }
  // Unlabeled data with a frozen M1: no classification loss.
  static LossTerms m2_only() { return {false, true, true, true}; }
  static LossTerms for_variant(Variant v) { return v == Variant::Nvdm ? nvdm() : full(); }
};

// Standard-normal noise for one batch. Column b * samples + s belongs to
// document b, Monte-Carlo sample s; the same draw feeds every loss term that
// depends on it.
template <typename Scalar>
struct BatchNoise {
  int samples = 1;
  Matrix<Scalar> eps_z;   // d_z x (B * samples)
  Matrix<Scalar> eps_zs;  // d_zs x (B * samples)
};

template <typename Scalar, typename Rng>
BatchNoise<Scalar> draw_noise(const ModelConfig& config, Eigen::Index batch_size, int samples, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  BatchNoise<Scalar> noise;
  noise.samples = samples;
  noise.eps_z.resize(config.d_z, batch_size * samples);
  noise.eps_zs.resize(config.d_zs, batch_size * samples);
  for (Eigen::Index k = 0; k < noise.eps_z.size(); ++k) noise.eps_z.data()[k] = static_cast<Scalar>(normal(rng));
  for (Eigen::Index k = 0; k < noise.eps_zs.size(); ++k) noise.eps_zs.data()[k] = static_cast<Scalar>(normal(rng));
  return noise;
}

namespace detail {

// Repeats every column `times` times, consecutively.
template <typename Scalar>
Matrix<Scalar> repeat_cols(const Matrix<Scalar>& m, int times) {
  Matrix<Scalar> out(m.rows(), m.cols() * times);
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.middleCols(c * times, times) = m.col(c).replicate(1, times);
  return out;
}

// Inverse of repeat_cols for gradients: sums each run of `times` columns.
template <typename Scalar>
Matrix<Scalar> sum_runs(const Matrix<Scalar>& m, int times) {
  Matrix<Scalar> out(m.rows(), m.cols() / times);
  for (Eigen::Index c = 0; c < out.cols(); ++c) out.col(c) = m.middleCols(c * times, times).rowwise().sum();
  return out;
}

// Gradient of -(count-weighted log softmax) w.r.t. the logits, with a
// per-column weight: weight_j * (N_j * softmax_j - x_j).
template <typename Scalar>
Matrix<Scalar> neg_loglik_grad(const Matrix<Scalar>& logp, const Matrix<Scalar>& counts,
                               const RowVector<Scalar>& totals, const RowVector<Scalar>& weight) {
  Matrix<Scalar> g = logp.array().exp().matrix();
  g.array().rowwise() *= totals.array();
  g -= counts;
  g.array().rowwise() *= weight.array();
  return g;
}

}  // namespace detail

// Loss over a batch with the given noise, and optionally its gradient with
// respect to every parameter (accumulated into a zero-initialized `grad`).
//
// Documents with an empty bag of words contribute only the classification
// term. Every active classifier term requires a label.
template <typename Scalar>
LossBreakdown loss_and_gradient(const CantmModel<Scalar>& model, std::span<const Example> batch,
                                const BatchNoise<Scalar>& noise, const LossTerms& terms,
                                Parameters<Scalar>* grad = nullptr) {
  using Mat = Matrix<Scalar>;
  using Row = RowVector<Scalar>;
  const ModelConfig& cfg = model.config();
  const Parameters<Scalar>& p = model.params();
  const auto B = static_cast<Eigen::Index>(batch.size());
  const int S = noise.samples;
  const Eigen::Index n = B * S;
  if (B == 0) throw ValidationError("loss over an empty batch");
  if (noise.eps_z.cols() != n || noise.eps_zs.cols() != n) throw ValidationError("noise does not match batch size");
  const Scalar slope = static_cast<Scalar>(cfg.leaky_slope);
  const Scalar lambda = static_cast<Scalar>(cfg.lambda);
  const bool need_yhat = terms.classifier || terms.class_decoder || terms.m2;

  // Inputs.
  Mat X = Mat::Zero(cfg.vocab_size, B);
  Row totals(B), topic_mask(B);
  for (Eigen::Index b = 0; b < B; ++b) {
    for (const auto& e : batch[b].bow.entries) X(e.index, b) = static_cast<Scalar>(e.count);
    totals(b) = static_cast<Scalar>(batch[b].bow.total());
    topic_mask(b) = batch[b].bow.empty() ? Scalar(0) : Scalar(1);
    if (terms.classifier && !batch[b].label)
      throw ValidationError("document \"" + batch[b].bow.doc_id + "\" has no label");
  }
  Mat X_in, H;
  if (cfg.encoder == EncoderKind::Bow) {
    X_in = encoder_features(X);
    H = (p.enc_w * X_in).colwise() + p.enc_b;
  } else {
    H.resize(cfg.d_h, B);
    for (Eigen::Index b = 0; b < B; ++b) H.col(b) = encode_document(batch[b], model);
  }

  // M1 inference and sampling.
  const Mat Mu = (p.mu_w * H).colwise() + p.mu_b;
  const Mat LogVar = (p.logvar_w * H).colwise() + p.logvar_b;
  const Mat Sigma = (Scalar(0.5) * LogVar.array()).exp().matrix();
  const Row kl1 = cantm::gaussian_kl(Mu, LogVar);
  const Mat SigmaRep = detail::repeat_cols(Sigma, S);
  const Mat Z = detail::repeat_cols(Mu, S) + (SigmaRep.array() * noise.eps_z.array()).matrix();

  const Mat Xrep = detail::repeat_cols(X, S);
  const Row totals_rep = detail::repeat_cols(Mat(totals), S);
  const Row col_weight = Row::Constant(n, Scalar(1) / static_cast<Scalar>(n));
  const Row topic_weight = (detail::repeat_cols(Mat(topic_mask), S).array() * col_weight.array()).matrix();

  LossBreakdown out;
  Scalar total = 0;

  Mat logP1, Yhat, logYhat, logPct, U, M, MuS, LogVarS, SigmaS, Zs, logQ, Vt, T, logPs, Hrep;
  Row kl2;
  if (terms.m1) {
    logP1 = log_softmax(Mat((p.topic_word.transpose() * Z).colwise() + p.word_bias));
    const Scalar recon = (Xrep.array() * logP1.array()).colwise().sum().matrix().dot(topic_weight);
    const Scalar kl = kl1.dot(topic_mask) / static_cast<Scalar>(B);
    out.m1_recon = recon;
    out.m1_kl = kl;
    total += -recon + kl;
  }
  if (need_yhat) {
    logYhat = log_softmax(Mat((p.cls_w * Z).colwise() + p.cls_b));
    Yhat = logYhat.array().exp().matrix();
  }
  if (terms.classifier) {
    Scalar ce = 0;
    for (Eigen::Index j = 0; j < n; ++j) ce -= logYhat(*batch[j / S].label, j);
    ce /= static_cast<Scalar>(n);
    out.cls = ce;
    total += lambda * ce;
  }
  if (terms.class_decoder) {
    logPct = log_softmax(Mat((p.class_word.transpose() * Yhat).colwise() + p.class_word_bias));
    const Scalar recon = (Xrep.array() * logPct.array()).colwise().sum().matrix().dot(topic_weight);
    out.class_recon = recon;
    total += -recon;
  }
  if (terms.m2) {
    Hrep = detail::repeat_cols(H, S);
    U = ((p.merge_w.leftCols(cfg.d_h) * Hrep + p.merge_w.rightCols(cfg.num_classes) * Yhat).colwise() + p.merge_b);
    M = leaky_relu(U, slope);
    MuS = (p.mu_s_w * M).colwise() + p.mu_s_b;
    LogVarS = (p.logvar_s_w * M).colwise() + p.logvar_s_b;
    SigmaS = (Scalar(0.5) * LogVarS.array()).exp().matrix();
    kl2 = cantm::gaussian_kl(MuS, LogVarS);
    Zs = MuS + (SigmaS.array() * noise.eps_zs.array()).matrix();
    logQ = log_softmax(Mat((p.m2_cls_w * Zs).colwise() + p.m2_cls_b));
    Vt = ((p.aware_w.leftCols(cfg.num_classes) * Yhat + p.aware_w.rightCols(cfg.d_zs) * Zs).colwise() + p.aware_b);
    T = leaky_relu(Vt, slope);
    logPs = log_softmax(Mat((p.aware_word.transpose() * T).colwise() + p.aware_word_bias));

    const Scalar recon = (Xrep.array() * logPs.array()).colwise().sum().matrix().dot(topic_weight);
    const Scalar cls_ll = (Yhat.array() * logQ.array()).colwise().sum().matrix().dot(topic_weight);
    const Scalar kl = kl2.dot(topic_weight);
    out.m2_recon = recon;
    out.m2_cls = cls_ll;
    out.m2_kl = kl;
    total += -recon - cls_ll + kl;
  }
  out.total = total;

  if (!grad) return out;
  Parameters<Scalar>& g = *grad;

  Mat G_Z = Mat::Zero(cfg.d_z, n);
  Mat G_Yhat;
  if (need_yhat) G_Yhat = Mat::Zero(cfg.num_classes, n);
  Mat G_Hrep;

  if (terms.m1) {
    const Mat G_A = detail::neg_loglik_grad(logP1, Xrep, totals_rep, topic_weight);
    g.topic_word.noalias() += Z * G_A.transpose();
    g.word_bias += G_A.rowwise().sum();
    G_Z.noalias() += p.topic_word * G_A;
  }
  if (terms.class_decoder) {
    const Mat G_A = detail::neg_loglik_grad(logPct, Xrep, totals_rep, topic_weight);
    g.class_word.noalias() += Yhat * G_A.transpose();
    g.class_word_bias += G_A.rowwise().sum();
    G_Yhat.noalias() += p.class_word * G_A;
  }
  if (terms.m2) {
    const Eigen::Index C = cfg.num_classes;
    // M2 decoder.
    const Mat G_As = detail::neg_loglik_grad(logPs, Xrep, totals_rep, topic_weight);
    g.aware_word.noalias() += T * G_As.transpose();
    g.aware_word_bias += G_As.rowwise().sum();
    const Mat G_Vt = ((p.aware_word * G_As).array() * leaky_relu_grad(Vt, slope).array()).matrix();
    g.aware_w.leftCols(C).noalias() += G_Vt * Yhat.transpose();
    g.aware_w.rightCols(cfg.d_zs).noalias() += G_Vt * Zs.transpose();
    g.aware_b += G_Vt.rowwise().sum();
    G_Yhat.noalias() += p.aware_w.leftCols(C).transpose() * G_Vt;
    Mat G_Zs = p.aware_w.rightCols(cfg.d_zs).transpose() * G_Vt;

    // M2 classifier, soft target y_hat: d/dlogits of -sum y log q is
    // (sum y) q - y.
    Mat G_Ql = logQ.array().exp().matrix();
    G_Ql.array().rowwise() *= Yhat.colwise().sum().array();
    G_Ql -= Yhat;
    G_Ql.array().rowwise() *= topic_weight.array();
    g.m2_cls_w.noalias() += G_Ql * Zs.transpose();
    g.m2_cls_b += G_Ql.rowwise().sum();
    G_Zs.noalias() += p.m2_cls_w.transpose() * G_Ql;
    G_Yhat -= (logQ.array().rowwise() * topic_weight.array()).matrix();

    // Reparameterization and KL of M2.
    Mat G_MuS = G_Zs + (MuS.array().rowwise() * topic_weight.array()).matrix();
    Mat G_LvS = (G_Zs.array() * SigmaS.array() * noise.eps_zs.array() * Scalar(0.5)).matrix();
    G_LvS += ((Scalar(0.5) * (LogVarS.array().exp() - Scalar(1))).rowwise() * topic_weight.array()).matrix();
    g.mu_s_w.noalias() += G_MuS * M.transpose();
    g.mu_s_b += G_MuS.rowwise().sum();
    g.logvar_s_w.noalias() += G_LvS * M.transpose();
    g.logvar_s_b += G_LvS.rowwise().sum();

    // Merge layer.
    const Mat G_M = p.mu_s_w.transpose() * G_MuS + p.logvar_s_w.transpose() * G_LvS;
    const Mat G_U = (G_M.array() * leaky_relu_grad(U, slope).array()).matrix();
    g.merge_w.leftCols(cfg.d_h).noalias() += G_U * Hrep.transpose();
    g.merge_w.rightCols(C).noalias() += G_U * Yhat.transpose();
    g.merge_b += G_U.rowwise().sum();
    G_Hrep = p.merge_w.leftCols(cfg.d_h).transpose() * G_U;
    G_Yhat.noalias() += p.merge_w.rightCols(C).transpose() * G_U;
  }
  if (need_yhat) {
    // Back through y_hat = softmax(c): y * (g - <y, g>).
    const Row inner = (Yhat.array() * G_Yhat.array()).colwise().sum().matrix();
    Mat G_C = (Yhat.array() * (G_Yhat.rowwise() - inner).array()).matrix();
    if (terms.classifier) {
      Mat ce = Yhat;
      for (Eigen::Index j = 0; j < n; ++j) ce(*batch[j / S].label, j) -= Scalar(1);
      G_C += (lambda / static_cast<Scalar>(n)) * ce;
    }
    g.cls_w.noalias() += G_C * Z.transpose();
    g.cls_b += G_C.rowwise().sum();
    G_Z.noalias() += p.cls_w.transpose() * G_C;
  }

  // Reparameterization of M1, then its KL (once per document).
  Mat G_Mu = detail::sum_runs(G_Z, S);
  Mat G_LogVar = detail::sum_runs(Mat((G_Z.array() * SigmaRep.array() * noise.eps_z.array() * Scalar(0.5)).matrix()), S);
  if (terms.m1) {
    const Row doc_weight = topic_mask / static_cast<Scalar>(B);
    G_Mu += (Mu.array().rowwise() * doc_weight.array()).matrix();
    G_LogVar += ((Scalar(0.5) * (LogVar.array().exp() - Scalar(1))).rowwise() * doc_weight.array()).matrix();
  }
  g.mu_w.noalias() += G_Mu * H.transpose();
  g.mu_b += G_Mu.rowwise().sum();
  g.logvar_w.noalias() += G_LogVar * H.transpose();
  g.logvar_b += G_LogVar.rowwise().sum();

  if (cfg.encoder == EncoderKind::Bow) {
    Mat G_H = p.mu_w.transpose() * G_Mu + p.logvar_w.transpose() * G_LogVar;
    if (terms.m2) G_H += detail::sum_runs(G_Hrep, S);
    g.enc_w.noalias() += G_H * X_in.transpose();
    g.enc_b += G_H.rowwise().sum();
  }
  return out;
}

// Draws fresh noise (n_train_samples per document) and evaluates the loss.
template <typename Scalar, typename Rng>
LossBreakdown total_loss(std::span<const Example> batch, const CantmModel<Scalar>& model, Rng& rng,
                         const LossTerms& terms) {
  const auto noise = draw_noise<Scalar>(model.config(), static_cast<Eigen::Index>(batch.size()),
                                        model.config().n_train_samples, rng);
  return loss_and_gradient(model, batch, noise, terms);
}

template <typename Scalar, typename Rng>
LossBreakdown total_loss(std::span<const Example> batch, const CantmModel<Scalar>& model, Rng& rng) {
  return total_loss(batch, model, rng, LossTerms::for_variant(model.config().variant));
}

}  // namespace cantm::model

#endif  // CANTM_LOSS_HPP_
