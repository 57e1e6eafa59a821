#pragma once

// In-context solution regressor. Context triples (x,t,u) and query pairs (x,t)
// are embedded into a shared width; each layer runs self-attention plus FFN
// over the context tokens, then cross-attention from the queries into the
// updated context plus FFN, with pre-normalization and residuals. The
// attention/FFN/norm parameters of a layer are shared between its context and
// query passes, which keeps the model in its intended size band. A linear
// readout maps query tokens to predictions.
//
// Gradients are hand-rolled reverse mode over the flat parameter vector.

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "icpde/adam.hpp"
#include "icpde/core.hpp"
#include "icpde/prior.hpp"
#include "icpde/rng.hpp"

namespace icpde {

struct ModelConfig {
  std::size_t layers = 3;
  std::size_t hidden = 32;
  std::size_t heads = 1;
  std::size_t ffn_width = 64;
  double lr = 1e-5;
  std::size_t epochs = 20000;       // alpha draws
  std::size_t patience = 2000;      // plateau window for early stopping; 0 disables
  double min_rel_improvement = 0.01;
  std::uint64_t seed = 0;

  void validate() const {
    if (layers < 1) throw Error("config", "model needs at least one layer");
    if (hidden < 1 || heads < 1 || hidden % heads != 0)
      throw Error("config", "hidden width must be a positive multiple of the head count");
    if (ffn_width < 1) throw Error("config", "ffn width must be positive");
    if (!(lr > 0.0)) throw Error("config", "learning rate must be positive");
  }
};

inline std::size_t context_embedder_parameter_count(const ModelConfig& c) {
  return 3 * c.hidden + c.hidden;
}
inline std::size_t query_embedder_parameter_count(const ModelConfig& c) {
  return 2 * c.hidden + c.hidden;
}
inline std::size_t readout_parameter_count(const ModelConfig& c) { return c.hidden + 1; }

// Offsets into the flat parameter vector. Order is the serialization contract.
struct ModelLayout {
  struct Layer {
    std::size_t wq, bq, wk, bk, wv, bv, wo, bo;  // attention
    std::size_t w1, b1, w2, b2;                  // ffn
    std::size_t g1, be1, g2, be2;                // norms (attention, ffn)
  };
  std::size_t ctx_w = 0, ctx_b = 0, qry_w = 0, qry_b = 0;
  std::vector<Layer> layer;
  std::size_t ro_w = 0, ro_b = 0, total = 0;
};

inline ModelLayout make_layout(const ModelConfig& c) {
  const std::size_t h = c.hidden, f = c.ffn_width;
  ModelLayout lo;
  std::size_t at = 0;
  auto take = [&](std::size_t n) {
    const std::size_t off = at;
    at += n;
    return off;
  };
  lo.ctx_w = take(3 * h);
  lo.ctx_b = take(h);
  lo.qry_w = take(2 * h);
  lo.qry_b = take(h);
  for (std::size_t l = 0; l < c.layers; ++l) {
    ModelLayout::Layer L;
    L.wq = take(h * h);
    L.bq = take(h);
    L.wk = take(h * h);
    L.bk = take(h);
    L.wv = take(h * h);
    L.bv = take(h);
    L.wo = take(h * h);
    L.bo = take(h);
    L.w1 = take(f * h);
    L.b1 = take(f);
    L.w2 = take(h * f);
    L.b2 = take(h);
    L.g1 = take(h);
    L.be1 = take(h);
    L.g2 = take(h);
    L.be2 = take(h);
    lo.layer.push_back(L);
  }
  lo.ro_w = take(h);
  lo.ro_b = take(1);
  lo.total = at;
  return lo;
}

struct IclModel {
  ModelConfig cfg;
  ModelLayout layout;
  Eigen::VectorXd theta;

  static IclModel random(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    IclModel m;
    m.cfg = cfg;
    m.layout = make_layout(cfg);
    m.theta.setZero(Eigen::Index(m.layout.total));
    Rng rng(seed);
    auto fill = [&](std::size_t off, std::size_t n, double scale) {
      for (std::size_t i = 0; i < n; ++i) m.theta[Eigen::Index(off + i)] = rng.uniform(-scale, scale);
    };
    const std::size_t h = cfg.hidden, f = cfg.ffn_width;
    const double s3 = 1.0 / std::sqrt(3.0), s2 = 1.0 / std::sqrt(2.0);
    const double sh = 1.0 / std::sqrt(double(h)), sf = 1.0 / std::sqrt(double(f));
    fill(m.layout.ctx_w, 3 * h, s3);
    fill(m.layout.ctx_b, h, s3);
    fill(m.layout.qry_w, 2 * h, s2);
    fill(m.layout.qry_b, h, s2);
    for (const auto& L : m.layout.layer) {
      for (auto off : {L.wq, L.wk, L.wv, L.wo}) fill(off, h * h, sh);
      for (auto off : {L.bq, L.bk, L.bv, L.bo}) fill(off, h, sh);
      fill(L.w1, f * h, sh);
      fill(L.b1, f, sh);
      fill(L.w2, h * f, sf);
      fill(L.b2, h, sf);
      for (std::size_t i = 0; i < h; ++i) m.theta[Eigen::Index(L.g1 + i)] = 1.0;
      for (std::size_t i = 0; i < h; ++i) m.theta[Eigen::Index(L.g2 + i)] = 1.0;
    }
    // readout stays zero so a fresh model predicts exactly zero
    return m;
  }
};

inline std::size_t count_parameters(const IclModel& m) { return std::size_t(m.theta.size()); }

// Raw coordinates map to [-1,1]^2; a tagged wrapper makes re-normalizing a no-op.
struct Coords {
  Eigen::MatrixXd xt;  // 2 x n
  bool normalized = false;
};

inline Coords normalize_coords(Coords c) {
  if (c.normalized) return c;
  if (c.xt.rows() != 2) throw Error("shape_mismatch", "coordinates must be 2 x n");
  c.xt.row(0) = c.xt.row(0).array() / std::numbers::pi - 1.0;
  c.xt.row(1) = 2.0 * c.xt.row(1).array() - 1.0;
  c.normalized = true;
  return c;
}

namespace detail {

using CMat = Eigen::Map<const Eigen::MatrixXd>;
using MMat = Eigen::Map<Eigen::MatrixXd>;
using CVecM = Eigen::Map<const Eigen::VectorXd>;
using MVecM = Eigen::Map<Eigen::VectorXd>;
using RowArr = Eigen::Array<double, 1, Eigen::Dynamic>;

inline constexpr double kLnEps = 1e-5;

struct LayerView {
  CMat wq, wk, wv, wo, w1, w2;
  CVecM bq, bk, bv, bo, b1, b2, g1, be1, g2, be2;
};

struct LayerGrad {
  MMat wq, wk, wv, wo, w1, w2;
  MVecM bq, bk, bv, bo, b1, b2, g1, be1, g2, be2;
};

inline LayerView layer_view(const Eigen::VectorXd& s, const ModelLayout::Layer& o,
                            Eigen::Index h, Eigen::Index f) {
  const double* p = s.data();
  return {CMat(p + o.wq, h, h),  CMat(p + o.wk, h, h), CMat(p + o.wv, h, h),
          CMat(p + o.wo, h, h),  CMat(p + o.w1, f, h), CMat(p + o.w2, h, f),
          CVecM(p + o.bq, h),    CVecM(p + o.bk, h),   CVecM(p + o.bv, h),
          CVecM(p + o.bo, h),    CVecM(p + o.b1, f),   CVecM(p + o.b2, h),
          CVecM(p + o.g1, h),    CVecM(p + o.be1, h),  CVecM(p + o.g2, h),
          CVecM(p + o.be2, h)};
}

inline LayerGrad layer_grad(Eigen::VectorXd& s, const ModelLayout::Layer& o, Eigen::Index h,
                            Eigen::Index f) {
  double* p = s.data();
  return {MMat(p + o.wq, h, h),  MMat(p + o.wk, h, h), MMat(p + o.wv, h, h),
          MMat(p + o.wo, h, h),  MMat(p + o.w1, f, h), MMat(p + o.w2, h, f),
          MVecM(p + o.bq, h),    MVecM(p + o.bk, h),   MVecM(p + o.bv, h),
          MVecM(p + o.bo, h),    MVecM(p + o.b1, f),   MVecM(p + o.b2, h),
          MVecM(p + o.g1, h),    MVecM(p + o.be1, h),  MVecM(p + o.g2, h),
          MVecM(p + o.be2, h)};
}

struct LnCache {
  Eigen::ArrayXXd xhat;
  RowArr inv_sd;
  Eigen::MatrixXd y;
};

inline const Eigen::MatrixXd& ln_forward(const Eigen::MatrixXd& x, CVecM g, CVecM b, LnCache& c) {
  const Eigen::RowVectorXd mu = x.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - mu;
  const RowArr var = xc.array().square().colwise().mean();
  c.inv_sd = (var + kLnEps).rsqrt();
  c.xhat = xc.array().rowwise() * c.inv_sd;
  c.y = ((c.xhat.colwise() * g.array()).colwise() + b.array()).matrix();
  return c.y;
}

inline Eigen::MatrixXd ln_backward(const LnCache& c, CVecM g, const Eigen::MatrixXd& dy,
                                   MVecM dg, MVecM db) {
  const Eigen::ArrayXXd u = dy.array().colwise() * g.array();
  const RowArr m1 = u.colwise().mean();
  const RowArr m2 = (u * c.xhat).colwise().mean();
  dg += (dy.array() * c.xhat).rowwise().sum().matrix();
  db += dy.rowwise().sum();
  return (((u.rowwise() - m1) - c.xhat.rowwise() * m2).rowwise() * c.inv_sd).matrix();
}

inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * 0.70710678118654752));
}
inline double gelu_du(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * 0.70710678118654752));
  return cdf + x * 0.39894228040143268 * std::exp(-0.5 * x * x);
}

struct FfnCache {
  Eigen::MatrixXd pre, act;
};

inline Eigen::MatrixXd ffn_forward(const LayerView& lv, const Eigen::MatrixXd& y, FfnCache& c) {
  c.pre = (lv.w1 * y).colwise() + lv.b1;
  c.act = c.pre.unaryExpr([](double v) { return gelu(v); });
  return (lv.w2 * c.act).colwise() + lv.b2;
}

inline Eigen::MatrixXd ffn_backward(const LayerView& lv, LayerGrad& lg, const FfnCache& c,
                                    const Eigen::MatrixXd& y_in, const Eigen::MatrixXd& dout) {
  lg.w2 += dout * c.act.transpose();
  lg.b2 += dout.rowwise().sum();
  const Eigen::MatrixXd dact = lv.w2.transpose() * dout;
  const Eigen::MatrixXd dpre =
      dact.cwiseProduct(c.pre.unaryExpr([](double v) { return gelu_du(v); }));
  lg.w1 += dpre * y_in.transpose();
  lg.b1 += dpre.rowwise().sum();
  return lv.w1.transpose() * dpre;
}

struct AttnCache {
  Eigen::MatrixXd yq, ykv;             // projection inputs
  Eigen::MatrixXd q, k, v;             // h x nq, h x nk, h x nk
  std::vector<Eigen::MatrixXd> p;      // per head: nq x nk attention rows
  Eigen::MatrixXd concat;              // h x nq, pre output projection
};

inline Eigen::MatrixXd attn_forward(const LayerView& lv, std::size_t heads,
                                    const Eigen::MatrixXd& yq, const Eigen::MatrixXd& ykv,
                                    AttnCache& c) {
  const Eigen::Index h = yq.rows(), nq = yq.cols();
  const Eigen::Index dh = h / Eigen::Index(heads);
  const double scale = 1.0 / std::sqrt(double(dh));
  c.yq = yq;
  c.ykv = ykv;
  c.q = (lv.wq * yq).colwise() + lv.bq;
  c.k = (lv.wk * ykv).colwise() + lv.bk;
  c.v = (lv.wv * ykv).colwise() + lv.bv;
  c.p.assign(heads, {});
  c.concat.resize(h, nq);
  for (std::size_t hd = 0; hd < heads; ++hd) {
    const auto qh = c.q.middleRows(Eigen::Index(hd) * dh, dh);
    const auto kh = c.k.middleRows(Eigen::Index(hd) * dh, dh);
    const auto vh = c.v.middleRows(Eigen::Index(hd) * dh, dh);
    Eigen::MatrixXd s = (qh.transpose() * kh) * scale;
    const Eigen::VectorXd rmax = s.rowwise().maxCoeff();
    const Eigen::ArrayXXd e = (s.colwise() - rmax).array().exp();
    const Eigen::VectorXd rsum = e.rowwise().sum();
    c.p[hd] = (e.colwise() / rsum.array()).matrix();
    c.concat.middleRows(Eigen::Index(hd) * dh, dh) = vh * c.p[hd].transpose();
  }
  return (lv.wo * c.concat).colwise() + lv.bo;
}

// Returns gradients with respect to the two projection inputs.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> attn_backward(const LayerView& lv,
                                                                 LayerGrad& lg,
                                                                 const AttnCache& c,
                                                                 std::size_t heads,
                                                                 const Eigen::MatrixXd& dout) {
  const Eigen::Index h = c.yq.rows(), nq = c.yq.cols(), nk = c.ykv.cols();
  const Eigen::Index dh = h / Eigen::Index(heads);
  const double scale = 1.0 / std::sqrt(double(dh));

  lg.wo += dout * c.concat.transpose();
  lg.bo += dout.rowwise().sum();
  const Eigen::MatrixXd dconcat = lv.wo.transpose() * dout;

  Eigen::MatrixXd dq(h, nq), dk(h, nk), dv(h, nk);
  for (std::size_t hd = 0; hd < heads; ++hd) {
    const Eigen::Index r0 = Eigen::Index(hd) * dh;
    const auto qh = c.q.middleRows(r0, dh);
    const auto kh = c.k.middleRows(r0, dh);
    const auto vh = c.v.middleRows(r0, dh);
    const Eigen::MatrixXd& p = c.p[hd];
    const auto dout_h = dconcat.middleRows(r0, dh);
    dv.middleRows(r0, dh) = dout_h * p;
    const Eigen::MatrixXd dp = dout_h.transpose() * vh;
    const Eigen::VectorXd rs = dp.cwiseProduct(p).rowwise().sum();
    const Eigen::MatrixXd ds = ((dp.colwise() - rs).cwiseProduct(p)) * scale;
    dq.middleRows(r0, dh) = kh * ds.transpose();
    dk.middleRows(r0, dh) = qh * ds;
  }
  lg.wq += dq * c.yq.transpose();
  lg.bq += dq.rowwise().sum();
  lg.wk += dk * c.ykv.transpose();
  lg.bk += dk.rowwise().sum();
  lg.wv += dv * c.ykv.transpose();
  lg.bv += dv.rowwise().sum();
  return {lv.wq.transpose() * dq, lv.wk.transpose() * dk + lv.wv.transpose() * dv};
}

struct LayerCache {
  LnCache ln_a, ln_f;    // context attention/ffn norms
  AttnCache at_c;
  FfnCache ff_c;
  LnCache ln_qs, ln_kv;  // query-side and key/value-side norms of cross attention
  AttnCache at_q;
  LnCache ln_qf;
  FfnCache ff_q;
};

struct ForwardCache {
  Eigen::MatrixXd ctx_tokens;  // 3 x nc
  Eigen::MatrixXd qry_tokens;  // 2 x nq
  std::vector<LayerCache> layer;
  Eigen::MatrixXd q_final;     // h x nq
};

inline Eigen::RowVectorXd forward_cached(const IclModel& m, const Eigen::MatrixXd& ctx_tokens,
                                         const Eigen::MatrixXd& qry_tokens, ForwardCache& fc) {
  const Eigen::Index h = Eigen::Index(m.cfg.hidden), f = Eigen::Index(m.cfg.ffn_width);
  const double* p = m.theta.data();
  fc.ctx_tokens = ctx_tokens;
  fc.qry_tokens = qry_tokens;
  fc.layer.assign(m.cfg.layers, {});

  Eigen::MatrixXd c =
      (CMat(p + m.layout.ctx_w, h, 3) * ctx_tokens).colwise() + CVecM(p + m.layout.ctx_b, h);
  Eigen::MatrixXd q =
      (CMat(p + m.layout.qry_w, h, 2) * qry_tokens).colwise() + CVecM(p + m.layout.qry_b, h);

  for (std::size_t l = 0; l < m.cfg.layers; ++l) {
    const LayerView lv = layer_view(m.theta, m.layout.layer[l], h, f);
    LayerCache& lc = fc.layer[l];
    c += attn_forward(lv, m.cfg.heads, ln_forward(c, lv.g1, lv.be1, lc.ln_a),
                      lc.ln_a.y, lc.at_c);
    c += ffn_forward(lv, ln_forward(c, lv.g2, lv.be2, lc.ln_f), lc.ff_c);
    ln_forward(q, lv.g1, lv.be1, lc.ln_qs);
    ln_forward(c, lv.g1, lv.be1, lc.ln_kv);
    q += attn_forward(lv, m.cfg.heads, lc.ln_qs.y, lc.ln_kv.y, lc.at_q);
    q += ffn_forward(lv, ln_forward(q, lv.g2, lv.be2, lc.ln_qf), lc.ff_q);
  }
  fc.q_final = q;
  return (CVecM(p + m.layout.ro_w, h).transpose() * q).array() + m.theta[Eigen::Index(m.layout.ro_b)];
}

// Accumulates parameter gradients for a given readout-level adjoint.
inline void backward_cached(const IclModel& m, const ForwardCache& fc,
                            const Eigen::RowVectorXd& dpred, Eigen::VectorXd& grad) {
  const Eigen::Index h = Eigen::Index(m.cfg.hidden), f = Eigen::Index(m.cfg.ffn_width);
  const double* p = m.theta.data();
  double* g = grad.data();

  MVecM(g + m.layout.ro_w, h) += fc.q_final * dpred.transpose();
  grad[Eigen::Index(m.layout.ro_b)] += dpred.sum();

  Eigen::MatrixXd dq = CVecM(p + m.layout.ro_w, h) * dpred;
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(h, fc.ctx_tokens.cols());

  for (std::size_t l = m.cfg.layers; l-- > 0;) {
    const LayerView lv = layer_view(m.theta, m.layout.layer[l], h, f);
    LayerGrad lg = layer_grad(grad, m.layout.layer[l], h, f);
    const LayerCache& lc = fc.layer[l];

    dq += ln_backward(lc.ln_qf, lv.g2, ffn_backward(lv, lg, lc.ff_q, lc.ln_qf.y, dq), lg.g2,
                      lg.be2);
    {
      auto [dyq, dykv] = attn_backward(lv, lg, lc.at_q, m.cfg.heads, dq);
      dc += ln_backward(lc.ln_kv, lv.g1, dykv, lg.g1, lg.be1);
      dq += ln_backward(lc.ln_qs, lv.g1, dyq, lg.g1, lg.be1);
    }
    dc += ln_backward(lc.ln_f, lv.g2, ffn_backward(lv, lg, lc.ff_c, lc.ln_f.y, dc), lg.g2,
                      lg.be2);
    {
      auto [dyq, dykv] = attn_backward(lv, lg, lc.at_c, m.cfg.heads, dc);
      dc += ln_backward(lc.ln_a, lv.g1, dyq + dykv, lg.g1, lg.be1);
    }
  }

  MMat(g + m.layout.ctx_w, h, 3) += dc * fc.ctx_tokens.transpose();
  MVecM(g + m.layout.ctx_b, h) += dc.rowwise().sum();
  MMat(g + m.layout.qry_w, h, 2) += dq * fc.qry_tokens.transpose();
  MVecM(g + m.layout.qry_b, h) += dq.rowwise().sum();
}

inline Eigen::MatrixXd context_tokens(const Eigen::MatrixXd& ctx_xt,
                                      const Eigen::RowVectorXd& ctx_u) {
  if (ctx_xt.cols() == 0) throw Error("empty_context", "context must contain at least one point");
  if (ctx_xt.rows() != 2 || ctx_u.size() != ctx_xt.cols())
    throw Error("shape_mismatch", "context coordinates must be 2 x n with one value per point");
  const Coords nc = normalize_coords({ctx_xt, false});
  Eigen::MatrixXd tokens(3, ctx_xt.cols());
  tokens.topRows(2) = nc.xt;
  tokens.row(2) = ctx_u;
  return tokens;
}

inline Eigen::MatrixXd query_tokens(const Eigen::MatrixXd& qry_xt) {
  if (qry_xt.rows() != 2) throw Error("shape_mismatch", "query coordinates must be 2 x n");
  return normalize_coords({qry_xt, false}).xt;
}

}  // namespace detail

// Context and query coordinates arrive in the raw domain; normalization is internal.
inline Eigen::RowVectorXd model_forward(const IclModel& m, const Eigen::MatrixXd& ctx_xt,
                                        const Eigen::RowVectorXd& ctx_u,
                                        const Eigen::MatrixXd& qry_xt) {
  detail::ForwardCache fc;
  return detail::forward_cached(m, detail::context_tokens(ctx_xt, ctx_u),
                                detail::query_tokens(qry_xt), fc);
}

inline double model_loss_grad(const IclModel& m, const Eigen::MatrixXd& ctx_xt,
                              const Eigen::RowVectorXd& ctx_u, const Eigen::MatrixXd& qry_xt,
                              const Eigen::RowVectorXd& targets, Eigen::VectorXd& grad) {
  if (targets.size() != qry_xt.cols())
    throw Error("shape_mismatch", "one target per query required");
  detail::ForwardCache fc;
  const Eigen::RowVectorXd pred = detail::forward_cached(
      m, detail::context_tokens(ctx_xt, ctx_u), detail::query_tokens(qry_xt), fc);
  const Eigen::RowVectorXd r = pred - targets;
  const double n = double(r.size());
  grad.setZero(m.theta.size());
  detail::backward_cached(m, fc, Eigen::RowVectorXd(2.0 * r / n), grad);
  return r.squaredNorm() / n;
}

inline double model_loss(const IclModel& m, const Eigen::MatrixXd& ctx_xt,
                         const Eigen::RowVectorXd& ctx_u, const Eigen::MatrixXd& qry_xt,
                         const Eigen::RowVectorXd& targets) {
  const Eigen::RowVectorXd pred = model_forward(m, ctx_xt, ctx_u, qry_xt);
  return (pred - targets).squaredNorm() / double(targets.size());
}

inline Eigen::RowVectorXd predict_zero_shot(const IclModel& m, const PointSet& test_context,
                                            const PointSet& test_query) {
  return model_forward(m, test_context.xt, test_context.u, test_query.xt);
}

struct TrainModelResult {
  IclModel model;
  std::vector<double> epoch_loss;  // one mse per alpha draw
};

// One alpha draw per epoch: its context feeds the model, its train queries
// supply regression targets (both carry prior values). Stops early once the
// trailing-window mean loss stops improving.
inline TrainModelResult train_model(IclModel model, const PriorStore& store,
                                    const std::vector<SampleSet>& sets, const ModelConfig& cfg) {
  cfg.validate();
  if (store.size() == 0) throw Error("config", "training needs a non-empty prior store");
  if (sets.size() != store.size())
    throw Error("config", "one sample set per stored parameter vector required");
  for (std::size_t i = 0; i < sets.size(); ++i)
    if (sets[i].params != store.params[i])
      throw Error("config", "sample sets do not line up with the store");

  TrainModelResult out{std::move(model), {}};
  out.epoch_loss.reserve(cfg.epochs);
  Rng rng(derive_seed(cfg.seed, 40, 0));
  AdamState adam(out.model.theta.size(), cfg.lr);
  Eigen::VectorXd grad;

  double best = std::numeric_limits<double>::infinity();
  std::size_t last_improved = 0;
  constexpr std::size_t kWindow = 100;
  double window_sum = 0.0;

  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const std::size_t i = rng.uniform_index(store.size());
    const SampleSet& s = sets[i];
    const double loss = model_loss_grad(out.model, s.context.xt, s.context.u, s.train_query.xt,
                                        s.train_query.u, grad);
    if (!std::isfinite(loss))
      throw Error("non_finite_loss", "training diverged at epoch " + std::to_string(e) +
                                         " on " + describe(s.params));
    adam.update(out.model.theta, grad);
    out.epoch_loss.push_back(loss);

    window_sum += loss;
    if (out.epoch_loss.size() > kWindow) window_sum -= out.epoch_loss[out.epoch_loss.size() - kWindow - 1];
    const double trailing = window_sum / double(std::min(out.epoch_loss.size(), kWindow));
    if (trailing < best * (1.0 - cfg.min_rel_improvement)) {
      best = trailing;
      last_improved = e;
    }
    if (cfg.patience > 0 && e - last_improved >= cfg.patience) break;
  }
  return out;
}

inline constexpr std::uint32_t kModelFormatVersion = 1;

inline void save_model(const IclModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("missing_file", "cannot write " + path.string());
  const char magic[8] = {'I', 'C', 'L', 'M', 'O', 'D', 'E', 'L'};
  out.write(magic, 8);
  auto put = [&](const void* p, std::size_t n) { out.write(static_cast<const char*>(p), std::streamsize(n)); };
  const std::uint32_t version = kModelFormatVersion;
  put(&version, 4);
  const std::uint64_t dims[5] = {m.cfg.layers, m.cfg.hidden, m.cfg.heads, m.cfg.ffn_width,
                                 m.cfg.epochs};
  put(dims, sizeof dims);
  const std::uint64_t extra[2] = {m.cfg.patience, m.cfg.seed};
  put(extra, sizeof extra);
  const double reals[2] = {m.cfg.lr, m.cfg.min_rel_improvement};
  put(reals, sizeof reals);
  const std::uint64_t n = std::uint64_t(m.theta.size());
  put(&n, 8);
  put(m.theta.data(), n * sizeof(double));
  if (!out) throw Error("data_format", "short write to " + path.string());
}

inline IclModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing_file", "cannot open " + path.string());
  auto get = [&](void* p, std::size_t n) {
    in.read(static_cast<char*>(p), std::streamsize(n));
    if (std::size_t(in.gcount()) != n)
      throw Error("data_format", path.string() + " is truncated");
  };
  char magic[8];
  get(magic, 8);
  if (std::memcmp(magic, "ICLMODEL", 8) != 0)
    throw Error("data_format", path.string() + " is not a model checkpoint");
  std::uint32_t version = 0;
  get(&version, 4);
  if (version != kModelFormatVersion)
    throw Error("version_mismatch", "checkpoint format version " + std::to_string(version) +
                                        ", expected " + std::to_string(kModelFormatVersion));
  std::uint64_t dims[5], extra[2];
  double reals[2];
  get(dims, sizeof dims);
  get(extra, sizeof extra);
  get(reals, sizeof reals);
  IclModel m;
  m.cfg.layers = dims[0];
  m.cfg.hidden = dims[1];
  m.cfg.heads = dims[2];
  m.cfg.ffn_width = dims[3];
  m.cfg.epochs = dims[4];
  m.cfg.patience = extra[0];
  m.cfg.seed = extra[1];
  m.cfg.lr = reals[0];
  m.cfg.min_rel_improvement = reals[1];
  m.cfg.validate();
  m.layout = make_layout(m.cfg);
  std::uint64_t n = 0;
  get(&n, 8);
  if (n != m.layout.total)
    throw Error("data_format", path.string() + " parameter count does not match its header");
  m.theta.resize(Eigen::Index(n));
  get(m.theta.data(), n * sizeof(double));
  return m;
}

}  // namespace icpde
