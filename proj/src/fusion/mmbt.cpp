#include "mmfnd/fusion/mmbt.hpp"

#include <cmath>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/hash.hpp"

namespace mmfnd::fusion {

namespace {

constexpr double kLnEps = 1e-5;

// Column-wise layer normalization; returns y and fills xhat for backward.
Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::VectorXd& gamma,
                           const Eigen::VectorXd& beta, Eigen::MatrixXd* xhat_out) {
  Eigen::MatrixXd y(x.rows(), x.cols());
  Eigen::MatrixXd xhat(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    double mu = x.col(c).mean();
    Eigen::VectorXd centered = (x.col(c).array() - mu).matrix();
    double var = centered.squaredNorm() / static_cast<double>(x.rows());
    Eigen::VectorXd xh = centered / std::sqrt(var + kLnEps);
    xhat.col(c) = xh;
    y.col(c) = gamma.cwiseProduct(xh) + beta;
  }
  if (xhat_out != nullptr) *xhat_out = xhat;
  return y;
}

// Backward of the column-wise layer norm above. Accumulates dgamma/dbeta.
Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& xhat,
                                    const Eigen::VectorXd& gamma, const Eigen::MatrixXd& dy,
                                    Eigen::MatrixXd& dgamma, Eigen::MatrixXd& dbeta) {
  auto n = static_cast<double>(x.rows());
  Eigen::MatrixXd dx(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    dgamma.col(0).noalias() += dy.col(c).cwiseProduct(xhat.col(c));
    dbeta.col(0).noalias() += dy.col(c);
    double mu = x.col(c).mean();
    Eigen::VectorXd centered = (x.col(c).array() - mu).matrix();
    double var = centered.squaredNorm() / n;
    double inv_std = 1.0 / std::sqrt(var + kLnEps);
    Eigen::VectorXd dxh = dy.col(c).cwiseProduct(gamma);
    double sum_dxh = dxh.sum();
    double sum_dxh_xh = dxh.dot(xhat.col(c));
    dx.col(c) =
        inv_std * (dxh.array() - sum_dxh / n - xhat.col(c).array() * (sum_dxh_xh / n)).matrix();
  }
  return dx;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& s) {
  Eigen::MatrixXd p(s.rows(), s.cols());
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    Eigen::RowVectorXd row = (s.row(r).array() - s.row(r).maxCoeff()).matrix();
    Eigen::RowVectorXd e = row.array().exp().matrix();
    p.row(r) = e / e.sum();
  }
  return p;
}

Eigen::MatrixXd softmax_rows_backward(const Eigen::MatrixXd& p, const Eigen::MatrixXd& dp) {
  Eigen::MatrixXd ds(p.rows(), p.cols());
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    double dot = dp.row(r).dot(p.row(r));
    ds.row(r) = p.row(r).cwiseProduct((dp.row(r).array() - dot).matrix());
  }
  return ds;
}

void init_embedding(Eigen::MatrixXd& table, Rng& rng) {
  for (Eigen::Index c = 0; c < table.cols(); ++c)
    for (Eigen::Index r = 0; r < table.rows(); ++r) table(r, c) = rng.uniform(-0.05, 0.05);
}

}  // namespace

MmbtSequence build_mmbt_sequence(const Eigen::VectorXd& image_vec,
                                 const std::vector<int>& text_tokens,
                                 const FusionModelConfig& config) {
  if (image_vec.size() != config.image_dim)
    throw DimMismatchError("image vector size " + std::to_string(image_vec.size()) +
                           " does not match configured dim " + std::to_string(config.image_dim));
  const MmbtConfig& m = config.mmbt;
  int overhead = m.image_prefix_tokens + 2;  // prefix + two separators
  if (overhead > m.max_seq)
    throw SequenceTooLongError("max_seq " + std::to_string(m.max_seq) +
                               " cannot hold the image prefix and separators");
  std::size_t text_budget = static_cast<std::size_t>(m.max_seq - overhead);
  std::size_t n_text = std::min(text_tokens.size(), text_budget);

  MmbtSequence seq;
  seq.image_tokens = m.image_prefix_tokens;
  seq.token_ids.push_back(HashTokenizer::kSep);
  seq.token_ids.insert(seq.token_ids.end(), text_tokens.begin(),
                       text_tokens.begin() + static_cast<std::ptrdiff_t>(n_text));
  seq.token_ids.push_back(HashTokenizer::kSep);
  seq.segment_ids.assign(seq.length(), 1);
  for (int i = 0; i < seq.image_tokens; ++i) seq.segment_ids[static_cast<std::size_t>(i)] = 0;
  return seq;
}

MmbtModel::MmbtModel(FusionModelConfig config, std::uint64_t seed)
    : FusionModel(std::move(config)), tokenizer_(this->config().mmbt.vocab_size) {
  const auto& cfg = this->config();
  const MmbtConfig& m = cfg.mmbt;
  if (m.d_model % m.num_heads != 0)
    throw ConfigInvalidError("d_model must be divisible by num_heads");
  Rng rng(derive_seed(seed, "init:" + to_string(cfg.architecture)));

  tok_emb_ = Tensor("tok_emb", m.d_model, tokenizer_.table_size());
  pos_emb_ = Tensor("pos_emb", m.d_model, m.max_seq);
  seg_emb_ = Tensor("seg_emb", m.d_model, 2);
  init_embedding(tok_emb_.value, rng);
  init_embedding(pos_emb_.value, rng);
  init_embedding(seg_emb_.value, rng);

  img_proj_ = Dense("img_proj", cfg.image_dim, m.image_prefix_tokens * m.d_model, Act::NONE, rng);

  for (int l = 0; l < m.num_layers; ++l) {
    std::string p = "layer" + std::to_string(l) + ".";
    LayerParams lp;
    auto attn = [&](const std::string& n, Tensor& w, Tensor& b) {
      w = Tensor(p + n, m.d_model, m.d_model);
      init_fan_in(w.value, m.d_model, rng);
      b = Tensor(p + n + "_b", m.d_model, 1);
    };
    attn("Wq", lp.Wq, lp.bq);
    attn("Wk", lp.Wk, lp.bk);
    attn("Wv", lp.Wv, lp.bv);
    attn("Wo", lp.Wo, lp.bo);
    lp.ln1_g = Tensor(p + "ln1_g", m.d_model, 1);
    lp.ln1_g.value.setOnes();
    lp.ln1_b = Tensor(p + "ln1_b", m.d_model, 1);
    lp.W1 = Tensor(p + "W1", m.ff_dim, m.d_model);
    init_fan_in(lp.W1.value, m.d_model, rng);
    lp.b1 = Tensor(p + "b1", m.ff_dim, 1);
    lp.W2 = Tensor(p + "W2", m.d_model, m.ff_dim);
    init_fan_in(lp.W2.value, m.ff_dim, rng);
    lp.b2 = Tensor(p + "b2", m.d_model, 1);
    lp.ln2_g = Tensor(p + "ln2_g", m.d_model, 1);
    lp.ln2_g.value.setOnes();
    lp.ln2_b = Tensor(p + "ln2_b", m.d_model, 1);
    layers_.push_back(std::move(lp));
  }
  out_ = Dense("out", m.d_model, 1, Act::NONE, rng);
}

std::vector<Tensor*> MmbtModel::parameters() {
  std::vector<Tensor*> out{&tok_emb_, &pos_emb_, &seg_emb_, &img_proj_.W, &img_proj_.b};
  for (LayerParams& lp : layers_) {
    for (Tensor* t : {&lp.Wq, &lp.bq, &lp.Wk, &lp.bk, &lp.Wv, &lp.bv, &lp.Wo, &lp.bo, &lp.ln1_g,
                      &lp.ln1_b, &lp.W1, &lp.b1, &lp.W2, &lp.b2, &lp.ln2_g, &lp.ln2_b})
      out.push_back(t);
  }
  out.push_back(&out_.W);
  out.push_back(&out_.b);
  return out;
}

Eigen::MatrixXd MmbtModel::embed(const MmbtSequence& seq, const Eigen::VectorXd& image_vec) {
  const MmbtConfig& m = config().mmbt;
  auto len = static_cast<Eigen::Index>(seq.length());
  Eigen::MatrixXd x(m.d_model, len);
  Eigen::MatrixXd prefix = img_proj_.forward(image_vec);  // (N*d) x 1
  for (int i = 0; i < seq.image_tokens; ++i)
    x.col(i) = prefix.col(0).segment(static_cast<Eigen::Index>(i) * m.d_model, m.d_model);
  for (std::size_t t = 0; t < seq.token_ids.size(); ++t) {
    auto pos = static_cast<Eigen::Index>(seq.image_tokens + static_cast<int>(t));
    x.col(pos) = tok_emb_.value.col(seq.token_ids[t]);
  }
  for (Eigen::Index pos = 0; pos < len; ++pos) {
    x.col(pos) += pos_emb_.value.col(pos);
    x.col(pos) += seg_emb_.value.col(seq.segment_ids[static_cast<std::size_t>(pos)]);
  }
  return x;
}

Eigen::MatrixXd MmbtModel::layer_forward(std::size_t l, const Eigen::MatrixXd& x) {
  const MmbtConfig& m = config().mmbt;
  LayerParams& lp = layers_[l];
  LayerCache& cache = caches_[l];
  cache.x = x;

  cache.q = (lp.Wq.value * x).colwise() + Eigen::VectorXd(lp.bq.value.col(0));
  cache.k = (lp.Wk.value * x).colwise() + Eigen::VectorXd(lp.bk.value.col(0));
  cache.v = (lp.Wv.value * x).colwise() + Eigen::VectorXd(lp.bv.value.col(0));

  Eigen::Index dk = m.d_model / m.num_heads;
  double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  cache.o.resize(m.d_model, x.cols());
  cache.probs.assign(static_cast<std::size_t>(m.num_heads), {});
  for (int h = 0; h < m.num_heads; ++h) {
    auto qh = cache.q.middleRows(h * dk, dk);
    auto kh = cache.k.middleRows(h * dk, dk);
    auto vh = cache.v.middleRows(h * dk, dk);
    Eigen::MatrixXd scores = qh.transpose() * kh * scale;
    Eigen::MatrixXd p = softmax_rows(scores);
    cache.probs[static_cast<std::size_t>(h)] = p;
    cache.o.middleRows(h * dk, dk) = vh * p.transpose();
  }
  Eigen::MatrixXd attn = (lp.Wo.value * cache.o).colwise() + Eigen::VectorXd(lp.bo.value.col(0));

  cache.r1 = x + attn;
  Eigen::MatrixXd xhat1;
  Eigen::MatrixXd x1 = layer_norm(cache.r1, lp.ln1_g.value.col(0), lp.ln1_b.value.col(0), &xhat1);
  cache.x1 = xhat1;  // keep the normalized values; raw r1 kept separately

  cache.f1 = (lp.W1.value * x1).colwise() + Eigen::VectorXd(lp.b1.value.col(0));
  cache.g = apply_act(Act::GELU, cache.f1);
  Eigen::MatrixXd f2 = (lp.W2.value * cache.g).colwise() + Eigen::VectorXd(lp.b2.value.col(0));

  cache.r2 = x1 + f2;
  Eigen::MatrixXd xhat2;
  Eigen::MatrixXd x2 = layer_norm(cache.r2, lp.ln2_g.value.col(0), lp.ln2_b.value.col(0), &xhat2);
  cache.x2 = xhat2;
  return x2;
}

Eigen::MatrixXd MmbtModel::layer_backward(std::size_t l, const Eigen::MatrixXd& dout) {
  const MmbtConfig& m = config().mmbt;
  LayerParams& lp = layers_[l];
  LayerCache& cache = caches_[l];

  // x1 must be rebuilt from its cached normalized form for the ff input grad.
  Eigen::MatrixXd x1 =
      (cache.x1.array().colwise() * lp.ln1_g.value.col(0).array()).matrix().colwise() +
      Eigen::VectorXd(lp.ln1_b.value.col(0));

  Eigen::MatrixXd dr2 =
      layer_norm_backward(cache.r2, cache.x2, lp.ln2_g.value.col(0), dout, lp.ln2_g.grad,
                          lp.ln2_b.grad);
  // r2 = x1 + W2 g + b2
  Eigen::MatrixXd dx1 = dr2;
  lp.W2.grad.noalias() += dr2 * cache.g.transpose();
  lp.b2.grad.col(0).noalias() += dr2.rowwise().sum();
  Eigen::MatrixXd dg = lp.W2.value.transpose() * dr2;
  Eigen::MatrixXd df1 = act_backward(Act::GELU, cache.f1, dg);
  lp.W1.grad.noalias() += df1 * x1.transpose();
  lp.b1.grad.col(0).noalias() += df1.rowwise().sum();
  dx1.noalias() += lp.W1.value.transpose() * df1;

  Eigen::MatrixXd dr1 =
      layer_norm_backward(cache.r1, cache.x1, lp.ln1_g.value.col(0), dx1, lp.ln1_g.grad,
                          lp.ln1_b.grad);
  // r1 = x + Wo o + bo
  Eigen::MatrixXd dx = dr1;
  lp.Wo.grad.noalias() += dr1 * cache.o.transpose();
  lp.bo.grad.col(0).noalias() += dr1.rowwise().sum();
  Eigen::MatrixXd do_ = lp.Wo.value.transpose() * dr1;

  Eigen::Index dk = m.d_model / m.num_heads;
  double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(m.d_model, cache.x.cols());
  Eigen::MatrixXd dkm = Eigen::MatrixXd::Zero(m.d_model, cache.x.cols());
  Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(m.d_model, cache.x.cols());
  for (int h = 0; h < m.num_heads; ++h) {
    auto qh = cache.q.middleRows(h * dk, dk);
    auto kh = cache.k.middleRows(h * dk, dk);
    auto vh = cache.v.middleRows(h * dk, dk);
    const Eigen::MatrixXd& p = cache.probs[static_cast<std::size_t>(h)];
    Eigen::MatrixXd doh = do_.middleRows(h * dk, dk);
    // o_h = v_h p^T
    dv.middleRows(h * dk, dk) = doh * p;
    Eigen::MatrixXd dp = doh.transpose() * vh;  // L x L, same orientation as p
    Eigen::MatrixXd ds = softmax_rows_backward(p, dp);
    dq.middleRows(h * dk, dk) = kh * ds.transpose() * scale;
    dkm.middleRows(h * dk, dk) = qh * ds * scale;
  }
  lp.Wq.grad.noalias() += dq * cache.x.transpose();
  lp.bq.grad.col(0).noalias() += dq.rowwise().sum();
  lp.Wk.grad.noalias() += dkm * cache.x.transpose();
  lp.bk.grad.col(0).noalias() += dkm.rowwise().sum();
  lp.Wv.grad.noalias() += dv * cache.x.transpose();
  lp.bv.grad.col(0).noalias() += dv.rowwise().sum();
  dx.noalias() += lp.Wq.value.transpose() * dq;
  dx.noalias() += lp.Wk.value.transpose() * dkm;
  dx.noalias() += lp.Wv.value.transpose() * dv;
  return dx;
}

double MmbtModel::forward_logit(const Eigen::VectorXd& image_vec, const std::string& text) {
  const MmbtConfig& m = config().mmbt;
  std::vector<int> tokens =
      tokenizer_.tokenize(text, static_cast<std::size_t>(m.max_seq));  // budget applied below
  last_seq_ = build_mmbt_sequence(image_vec, tokens, config());
  caches_.assign(layers_.size(), LayerCache{});
  last_x0_ = embed(last_seq_, image_vec);
  Eigen::MatrixXd x = last_x0_;
  for (std::size_t l = 0; l < layers_.size(); ++l) x = layer_forward(l, x);
  Eigen::MatrixXd pooled = x.col(0);
  return out_.forward(pooled)(0, 0);
}

void MmbtModel::backward(double dlogit) {
  Eigen::MatrixXd dl(1, 1);
  dl(0, 0) = dlogit;
  Eigen::MatrixXd dpooled = out_.backward(dl);  // d_model x 1

  auto len = static_cast<Eigen::Index>(last_seq_.length());
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(config().mmbt.d_model, len);
  dx.col(0) = dpooled.col(0);
  for (std::size_t l = layers_.size(); l-- > 0;) dx = layer_backward(l, dx);

  const MmbtConfig& m = config().mmbt;
  Eigen::MatrixXd dprefix(static_cast<Eigen::Index>(m.image_prefix_tokens) * m.d_model, 1);
  for (int i = 0; i < last_seq_.image_tokens; ++i)
    dprefix.col(0).segment(static_cast<Eigen::Index>(i) * m.d_model, m.d_model) = dx.col(i);
  img_proj_.backward(dprefix);
  for (std::size_t t = 0; t < last_seq_.token_ids.size(); ++t) {
    auto pos = static_cast<Eigen::Index>(last_seq_.image_tokens + static_cast<int>(t));
    tok_emb_.grad.col(last_seq_.token_ids[t]) += dx.col(pos);
  }
  for (Eigen::Index pos = 0; pos < len; ++pos) {
    pos_emb_.grad.col(pos) += dx.col(pos);
    seg_emb_.grad.col(last_seq_.segment_ids[static_cast<std::size_t>(pos)]) += dx.col(pos);
  }
}

Eigen::VectorXd MmbtModel::score_batch(const EncodedDataset& ds,
                                       const std::vector<std::size_t>& idx) {
  Eigen::VectorXd scores(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    auto col = static_cast<Eigen::Index>(idx[j]);
    double logit = forward_logit(ds.image.col(col), ds.texts[idx[j]]);
    scores(static_cast<Eigen::Index>(j)) = sigmoid(Eigen::MatrixXd::Constant(1, 1, logit))(0, 0);
  }
  return scores;
}

double MmbtModel::compute_loss(const EncodedDataset& ds, const std::vector<std::size_t>& idx,
                               const Eigen::VectorXd& weights, bool with_grad) {
  double total = 0.0;
  auto batch = static_cast<double>(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    auto col = static_cast<Eigen::Index>(idx[j]);
    double logit = forward_logit(ds.image.col(col), ds.texts[idx[j]]);
    Eigen::MatrixXd lg = Eigen::MatrixXd::Constant(1, 1, logit);
    Eigen::MatrixXd target =
        Eigen::MatrixXd::Constant(1, 1, ds.labels[idx[j]] == Label::REAL ? 1.0 : 0.0);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(1, weights(static_cast<Eigen::Index>(j)));
    Eigen::MatrixXd dlg;
    total += bce_with_logits(lg, target, w, with_grad ? &dlg : nullptr);
    if (with_grad) backward(dlg(0, 0) / batch);
  }
  return total / batch;
}

}  // namespace mmfnd::fusion
