#include "citerec/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "citerec/error.hpp"
#include "citerec/kernels.hpp"

namespace citerec::nd {

void relu(std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(std::span<const double> x, std::span<const double> dy, std::span<double> dx) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0) dx[i] += dy[i];
}

void softmax(std::span<const double> v, std::span<double> s) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorKind::numeric, "softmax input is not finite");
    mx = std::max(mx, x);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s[i] = std::exp(v[i] - mx);
    sum += s[i];
  }
  for (std::size_t i = 0; i < v.size(); ++i) s[i] /= sum;
}

void softmax_backward(std::span<const double> s, std::span<const double> ds,
                      std::span<double> dv) {
  double dot = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) dot += ds[i] * s[i];
  for (std::size_t i = 0; i < s.size(); ++i) dv[i] += s[i] * (ds[i] - dot);
}

double cross_entropy(std::span<const double> p, std::span<const double> p_hat) {
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    loss -= p[i] * std::log(std::max(p_hat[i], kProbFloor));
  return loss;
}

void cross_entropy_backward(std::span<const double> p, std::span<const double> p_hat,
                            double dloss, std::span<double> dp_hat) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p_hat[i] > kProbFloor) dp_hat[i] -= dloss * p[i] / p_hat[i];
}

// ---- affine ----------------------------------------------------------------

namespace {

double fan_in_scale(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

}  // namespace

void Affine::init(std::size_t rows, std::size_t cols, Rng& rng) {
  W = Tensor::zeros({rows, cols});
  b = Tensor::zeros({rows});
  double r = fan_in_scale(cols);
  W.fill_uniform(rng, -r, r);
  W.alloc_grad();
  b.alloc_grad();
}

void affine_forward(const Affine& p, std::span<const double> x, std::span<double> y) {
  matvec_add(y.data(), p.W.v.data(), x.data(), p.b.v.data(), p.W.rows(), p.W.cols());
}

void affine_backward(Affine& p, std::span<const double> x, std::span<const double> dy,
                     std::span<double> dx) {
  outer_acc(p.W.g.data(), p.b.g.data(), dy.data(), x.data(), p.W.rows(), p.W.cols());
  if (!dx.empty()) matvec_t_acc(dx.data(), p.W.v.data(), dy.data(), p.W.rows(), p.W.cols());
}

// ---- lstm ------------------------------------------------------------------

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void LstmDir::init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  input = input_dim;
  hidden = hidden_dim;
  Wx = Tensor::zeros({4 * hidden, input});
  Wh = Tensor::zeros({4 * hidden, hidden});
  b = Tensor::zeros({4 * hidden});
  double rx = fan_in_scale(input);
  double rh = fan_in_scale(hidden);
  Wx.fill_uniform(rng, -rx, rx);
  Wh.fill_uniform(rng, -rh, rh);
  Wx.alloc_grad();
  Wh.alloc_grad();
  b.alloc_grad();
}

void LstmTrace::resize(std::size_t steps_, std::size_t hidden_) {
  steps = steps_;
  hidden = hidden_;
  std::size_t n = steps * hidden;
  i.assign(n, 0.0);
  f.assign(n, 0.0);
  o.assign(n, 0.0);
  g.assign(n, 0.0);
  c.assign(n, 0.0);
  tc.assign(n, 0.0);
  h.assign(n, 0.0);
}

void lstm_forward(const LstmDir& p, const double* xs, std::size_t steps, LstmTrace& trace) {
  const std::size_t H = p.hidden;
  trace.resize(steps, H);
  std::vector<double> pre(4 * H);
  std::vector<double> rec(4 * H);
  std::vector<double> zero(H, 0.0);
  const double* h_prev = zero.data();
  const double* c_prev = zero.data();
  for (std::size_t t = 0; t < steps; ++t) {
    matvec_add(pre.data(), p.Wx.v.data(), xs + t * p.input, p.b.v.data(), 4 * H, p.input);
    matvec_add(rec.data(), p.Wh.v.data(), h_prev, nullptr, 4 * H, H);
    for (std::size_t k = 0; k < 4 * H; ++k) pre[k] += rec[k];
    double* it = trace.i.data() + t * H;
    double* ft = trace.f.data() + t * H;
    double* ot = trace.o.data() + t * H;
    double* gt = trace.g.data() + t * H;
    double* ct = trace.c.data() + t * H;
    double* tct = trace.tc.data() + t * H;
    double* ht = trace.h.data() + t * H;
    for (std::size_t k = 0; k < H; ++k) {
      it[k] = sigmoid(pre[k]);
      ft[k] = sigmoid(pre[H + k]);
      ot[k] = sigmoid(pre[2 * H + k]);
      gt[k] = std::tanh(pre[3 * H + k]);
      ct[k] = ft[k] * c_prev[k] + it[k] * gt[k];
      tct[k] = std::tanh(ct[k]);
      ht[k] = ot[k] * tct[k];
    }
    h_prev = ht;
    c_prev = ct;
  }
}

void lstm_backward(LstmDir& p, const double* xs, const LstmTrace& trace, const double* dh_steps,
                   double* dxs) {
  const std::size_t H = p.hidden;
  const std::size_t T = trace.steps;
  std::vector<double> dh_rec(H, 0.0);
  std::vector<double> dc(H, 0.0);
  std::vector<double> dpre(4 * H);
  std::vector<double> zero(H, 0.0);
  for (std::size_t tt = T; tt-- > 0;) {
    const double* it = trace.i.data() + tt * H;
    const double* ft = trace.f.data() + tt * H;
    const double* ot = trace.o.data() + tt * H;
    const double* gt = trace.g.data() + tt * H;
    const double* tct = trace.tc.data() + tt * H;
    const double* c_prev = tt == 0 ? zero.data() : trace.c.data() + (tt - 1) * H;
    const double* h_prev = tt == 0 ? zero.data() : trace.h.data() + (tt - 1) * H;
    for (std::size_t k = 0; k < H; ++k) {
      double dh = dh_steps[tt * H + k] + dh_rec[k];
      double do_ = dh * tct[k];
      dc[k] += dh * ot[k] * (1.0 - tct[k] * tct[k]);
      double di = dc[k] * gt[k];
      double dg = dc[k] * it[k];
      double df = dc[k] * c_prev[k];
      dpre[k] = di * it[k] * (1.0 - it[k]);
      dpre[H + k] = df * ft[k] * (1.0 - ft[k]);
      dpre[2 * H + k] = do_ * ot[k] * (1.0 - ot[k]);
      dpre[3 * H + k] = dg * (1.0 - gt[k] * gt[k]);
      dc[k] *= ft[k];
    }
    outer_acc(p.Wx.g.data(), p.b.g.data(), dpre.data(), xs + tt * p.input, 4 * H, p.input);
    outer_acc(p.Wh.g.data(), nullptr, dpre.data(), h_prev, 4 * H, H);
    if (dxs) matvec_t_acc(dxs + tt * p.input, p.Wx.v.data(), dpre.data(), 4 * H, p.input);
    std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
    matvec_t_acc(dh_rec.data(), p.Wh.v.data(), dpre.data(), 4 * H, H);
  }
}

void BiLstm::init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  fwd.init(input_dim, hidden_dim, rng);
  bwd.init(input_dim, hidden_dim, rng);
}

void bilstm_encode(const BiLstm& p, const double* xs, std::size_t padded_len,
                   std::size_t true_len, BiLstmTrace& trace) {
  const std::size_t H = p.fwd.hidden;
  const std::size_t S = p.state_dim();
  const std::size_t D = p.fwd.input;
  trace.true_len = true_len;
  trace.padded_len = padded_len;
  trace.states.assign(padded_len * S, 0.0);
  lstm_forward(p.fwd, xs, true_len, trace.fwd);
  // The backward direction consumes the sequence reversed; step t of
  // that pass corresponds to source position true_len - 1 - t.
  std::vector<double> rev(true_len * D);
  for (std::size_t t = 0; t < true_len; ++t)
    std::copy(xs + (true_len - 1 - t) * D, xs + (true_len - t) * D, rev.begin() + t * D);
  lstm_forward(p.bwd, rev.data(), true_len, trace.bwd);
  for (std::size_t t = 0; t < true_len; ++t) {
    std::copy(trace.fwd.h.begin() + t * H, trace.fwd.h.begin() + (t + 1) * H,
              trace.states.begin() + t * S);
    std::size_t rt = true_len - 1 - t;
    std::copy(trace.bwd.h.begin() + rt * H, trace.bwd.h.begin() + (rt + 1) * H,
              trace.states.begin() + t * S + H);
  }
}

void bilstm_backward(BiLstm& p, const double* xs, const BiLstmTrace& trace,
                     const double* dstates, double* dxs) {
  const std::size_t H = p.fwd.hidden;
  const std::size_t S = p.state_dim();
  const std::size_t D = p.fwd.input;
  const std::size_t L = trace.true_len;
  if (L == 0) return;
  std::vector<double> dh_fwd(L * H), dh_bwd(L * H);
  for (std::size_t t = 0; t < L; ++t) {
    std::copy(dstates + t * S, dstates + t * S + H, dh_fwd.begin() + t * H);
    std::size_t rt = L - 1 - t;
    std::copy(dstates + t * S + H, dstates + t * S + 2 * H, dh_bwd.begin() + rt * H);
  }
  lstm_backward(p.fwd, xs, trace.fwd, dh_fwd.data(), dxs);
  std::vector<double> rev(L * D);
  for (std::size_t t = 0; t < L; ++t)
    std::copy(xs + (L - 1 - t) * D, xs + (L - t) * D, rev.begin() + t * D);
  std::vector<double> drev(L * D, 0.0);
  lstm_backward(p.bwd, rev.data(), trace.bwd, dh_bwd.data(), drev.data());
  if (dxs)
    for (std::size_t t = 0; t < L; ++t)
      for (std::size_t k = 0; k < D; ++k) dxs[(L - 1 - t) * D + k] += drev[t * D + k];
}

// ---- attention pooling -----------------------------------------------------

void AttentionPool::init(std::size_t state_dim, std::size_t attn_dim, std::size_t out_dim,
                         Rng& rng) {
  Wa = Tensor::zeros({attn_dim, state_dim});
  ba = Tensor::zeros({attn_dim});
  u = Tensor::zeros({attn_dim});
  Wp = Tensor::zeros({out_dim, state_dim});
  bp = Tensor::zeros({out_dim});
  double rs = fan_in_scale(state_dim);
  double ra = fan_in_scale(attn_dim);
  Wa.fill_uniform(rng, -rs, rs);
  u.fill_uniform(rng, -ra, ra);
  Wp.fill_uniform(rng, -rs, rs);
  for (Tensor* t : {&Wa, &ba, &u, &Wp, &bp}) t->alloc_grad();
}

void attention_forward(const AttentionPool& p, const double* states, std::size_t true_len,
                       AttentionTrace& trace, std::span<double> out) {
  const std::size_t A = p.Wa.rows();
  const std::size_t S = p.Wa.cols();
  trace.true_len = true_len;
  trace.state_dim = S;
  std::fill(out.begin(), out.end(), 0.0);
  if (true_len == 0) {
    // An empty input has nothing to attend over; the sentence vector
    // is defined as zero rather than an error.
    trace.act.clear();
    trace.weights.clear();
    trace.pooled.assign(S, 0.0);
    return;
  }
  trace.act.assign(true_len * A, 0.0);
  std::vector<double> scores(true_len);
  for (std::size_t t = 0; t < true_len; ++t) {
    double* a = trace.act.data() + t * A;
    matvec_add(a, p.Wa.v.data(), states + t * S, p.ba.v.data(), A, S);
    double sc = 0.0;
    for (std::size_t k = 0; k < A; ++k) {
      a[k] = std::tanh(a[k]);
      sc += p.u.v[k] * a[k];
    }
    scores[t] = sc;
  }
  trace.weights.assign(true_len, 0.0);
  softmax(scores, trace.weights);
  trace.pooled.assign(S, 0.0);
  for (std::size_t t = 0; t < true_len; ++t)
    for (std::size_t k = 0; k < S; ++k) trace.pooled[k] += trace.weights[t] * states[t * S + k];
  matvec_add(out.data(), p.Wp.v.data(), trace.pooled.data(), p.bp.v.data(), p.Wp.rows(), S);
}

void attention_backward(AttentionPool& p, const double* states, const AttentionTrace& trace,
                        std::span<const double> dout, double* dstates) {
  const std::size_t A = p.Wa.rows();
  const std::size_t S = trace.state_dim;
  const std::size_t L = trace.true_len;
  if (L == 0) return;
  outer_acc(p.Wp.g.data(), p.bp.g.data(), dout.data(), trace.pooled.data(), p.Wp.rows(), S);
  std::vector<double> dpooled(S, 0.0);
  matvec_t_acc(dpooled.data(), p.Wp.v.data(), dout.data(), p.Wp.rows(), S);
  std::vector<double> dw(L, 0.0);
  for (std::size_t t = 0; t < L; ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < S; ++k) {
      acc += dpooled[k] * states[t * S + k];
      dstates[t * S + k] += trace.weights[t] * dpooled[k];
    }
    dw[t] = acc;
  }
  std::vector<double> dscores(L, 0.0);
  softmax_backward(trace.weights, dw, dscores);
  std::vector<double> da(A);
  for (std::size_t t = 0; t < L; ++t) {
    const double* a = trace.act.data() + t * A;
    for (std::size_t k = 0; k < A; ++k) {
      p.u.g[k] += dscores[t] * a[k];
      da[k] = dscores[t] * p.u.v[k] * (1.0 - a[k] * a[k]);
    }
    outer_acc(p.Wa.g.data(), p.ba.g.data(), da.data(), states + t * S, A, S);
    matvec_t_acc(dstates + t * S, p.Wa.v.data(), da.data(), A, S);
  }
}

}  // namespace citerec::nd
