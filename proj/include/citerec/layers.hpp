#ifndef CITEREC_LAYERS_HPP
#define CITEREC_LAYERS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "citerec/tensor.hpp"

namespace citerec::nd {

// Hand-written forward/backward pairs for each layer. Backward passes
// accumulate into the .g buffers of the parameter tensors and into the
// caller-provided input gradients, so a full example graph is just the
// forward calls replayed in reverse. There is no tape; the traces
// below cache exactly what each backward pass needs.

// ---- activations ----------------------------------------------------------

void relu(std::span<const double> x, std::span<double> y);
// dx += dy where x > 0. The subgradient at exactly 0 is taken as 0.
void relu_backward(std::span<const double> x, std::span<const double> dy, std::span<double> dx);

// Max-shifted, so large logits do not overflow. Throws ErrorKind::numeric
// if the input contains a non-finite value.
void softmax(std::span<const double> v, std::span<double> s);
// dv += s * (ds - dot(ds, s)).
void softmax_backward(std::span<const double> s, std::span<const double> ds,
                      std::span<double> dv);

inline constexpr double kProbFloor = 1e-12;

// -sum_i p[i] * log(max(p_hat[i], kProbFloor)).
double cross_entropy(std::span<const double> p, std::span<const double> p_hat);
// dp_hat[i] += dloss * (-p[i] / p_hat[i]) outside the floored region, 0 inside.
void cross_entropy_backward(std::span<const double> p, std::span<const double> p_hat,
                            double dloss, std::span<double> dp_hat);

// ---- affine ----------------------------------------------------------------

// All layers draw weights uniform in (-r, r) with r = 1/sqrt(fan_in)
// and start biases at zero; one Rng threads through the whole model so
// a seed pins every initial value.
struct Affine {
  Tensor W;  // rows x cols
  Tensor b;  // rows

  void init(std::size_t rows, std::size_t cols, Rng& rng);
  std::size_t in_dim() const { return W.cols(); }
  std::size_t out_dim() const { return W.rows(); }
};

// y = W x + b.
void affine_forward(const Affine& p, std::span<const double> x, std::span<double> y);
// Accumulates dW, db into p's grad buffers; dx (if nonempty) += W^T dy.
void affine_backward(Affine& p, std::span<const double> x, std::span<const double> dy,
                     std::span<double> dx);

// ---- lstm ------------------------------------------------------------------

// One direction. Gate blocks are stacked in the order i, f, o, g inside
// the 4H rows of Wx, Wh and b.
struct LstmDir {
  Tensor Wx;  // 4H x D
  Tensor Wh;  // 4H x H
  Tensor b;   // 4H

  std::size_t hidden = 0;
  std::size_t input = 0;

  void init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
};

// Per-step activations cached for the backward pass. Buffers hold
// steps * hidden values each.
struct LstmTrace {
  std::size_t steps = 0;
  std::size_t hidden = 0;
  std::vector<double> i, f, o, g, c, tc, h;
  void resize(std::size_t steps_, std::size_t hidden_);
};

// Runs over xs[0..steps), reading D contiguous doubles per step.
// Initial h and c are zero vectors.
void lstm_forward(const LstmDir& p, const double* xs, std::size_t steps, LstmTrace& trace);
// dh_steps gives the externally supplied dL/dh_t (steps * hidden).
// Parameter grads accumulate into p; per-step input grads into dxs.
void lstm_backward(LstmDir& p, const double* xs, const LstmTrace& trace, const double* dh_steps,
                   double* dxs);

// Both directions plus the concatenated per-step state sequence.
struct BiLstm {
  LstmDir fwd;
  LstmDir bwd;
  void init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
  std::size_t state_dim() const { return fwd.hidden + bwd.hidden; }
};

struct BiLstmTrace {
  LstmTrace fwd;
  LstmTrace bwd;
  std::size_t true_len = 0;
  std::size_t padded_len = 0;
  // padded_len x state_dim; rows at and beyond true_len are zero.
  std::vector<double> states;
};

// Encodes xs (padded_len * D); positions at and beyond true_len are
// ignored by both directions and their state rows stay zero. The
// backward direction reads positions true_len-1 .. 0, and its step-t
// output lands in the second half of states row t.
void bilstm_encode(const BiLstm& p, const double* xs, std::size_t padded_len,
                   std::size_t true_len, BiLstmTrace& trace);
void bilstm_backward(BiLstm& p, const double* xs, const BiLstmTrace& trace,
                     const double* dstates, double* dxs);

// ---- attention pooling -----------------------------------------------------

// Additive attention over per-step states followed by a linear
// projection of the pooled vector down to the sentence width:
//   a_t = tanh(Wa h_t + ba), score_t = u . a_t, w = softmax(scores),
//   pooled = sum_t w_t h_t, out = Wp pooled + bp.
struct AttentionPool {
  Tensor Wa;  // A x S
  Tensor ba;  // A
  Tensor u;   // A
  Tensor Wp;  // P x S
  Tensor bp;  // P

  void init(std::size_t state_dim, std::size_t attn_dim, std::size_t out_dim, Rng& rng);
  std::size_t out_dim() const { return Wp.rows(); }
};

struct AttentionTrace {
  std::size_t true_len = 0;
  std::size_t state_dim = 0;
  std::vector<double> act;      // true_len x A, post-tanh
  std::vector<double> weights;  // true_len, post-softmax
  std::vector<double> pooled;   // S
};

// Pools states[0..true_len). true_len == 0 yields a zero output
// vector, and the matching backward pass is a no-op.
void attention_forward(const AttentionPool& p, const double* states, std::size_t true_len,
                       AttentionTrace& trace, std::span<double> out);
void attention_backward(AttentionPool& p, const double* states, const AttentionTrace& trace,
                        std::span<const double> dout, double* dstates);

}  // namespace citerec::nd

#endif
