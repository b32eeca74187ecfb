#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hpnn/hyperdual.hpp"

namespace hpnn {

// Reverse-mode tape whose node values are HyperDual. Running a network
// forward on the tape with seeded inputs makes every node carry
// (val, du/dt, du/dx, d2u/dx2) as exact functions of the leaves; the
// reverse sweep then propagates a 4-component adjoint per node, so the
// gradient of a loss that mixes component extractions (e.g. a PDE
// residual) with ordinary arithmetic is exact with respect to the leaves.
//
// Nodes whose whole upstream subgraph is unseeded carry identically-zero
// derivative components; ops on them run plain real arithmetic.

enum class OpKind : std::uint8_t {
  kAdd,
  kSub,
  kMul,
  kDiv,   // recorded as reciprocal + multiply
  kNeg,
  kTanh,
  kSin,
  kCos,
  kExp,
  kSquare,
  kRecip,
  kScale,  // c * a, c constant
  kShift,  // a + c, c constant
  kValPart,
  kDtPart,
  kDxPart,
  kDxxPart,
  kAffine,  // fused dense layer, see Tape::affine
};

// Scalar loss value plus its gradient over the trainable parameters.
struct GradResult {
  double loss_value = 0.0;
  std::vector<double> gradient;
  // Loss decomposition for history reporting; physics_loss is zero for
  // purely data-driven losses.
  double data_loss = 0.0;
  double physics_loss = 0.0;
};

class Tape {
 public:
  using Id = std::uint32_t;
  static constexpr Id kNone = 0xffffffffu;

  // --- leaves and inputs -------------------------------------------------
  Id constant(double v);
  Id leaf(double v);
  Id leaf_block(std::span<const double> values);  // contiguous ids, returns first
  Id input(const HyperDual& seeded);
  Id input_t(double t) { return input(HyperDual::seed_t(t)); }
  Id input_x(double x) { return input(HyperDual::seed_x(x)); }

  // --- recording ---------------------------------------------------------
  // Generic primitive-op surface; binary ops take (a, b), unary ops take a.
  Id record(OpKind op, Id a, Id b = kNone);
  Id record(OpKind op, Id a, double c);  // kScale / kShift

  Id add(Id a, Id b) { return record(OpKind::kAdd, a, b); }
  Id sub(Id a, Id b) { return record(OpKind::kSub, a, b); }
  Id mul(Id a, Id b) { return record(OpKind::kMul, a, b); }
  Id div(Id a, Id b) { return record(OpKind::kDiv, a, b); }
  Id neg(Id a) { return record(OpKind::kNeg, a); }
  Id tanh(Id a) { return record(OpKind::kTanh, a); }
  Id sin(Id a) { return record(OpKind::kSin, a); }
  Id cos(Id a) { return record(OpKind::kCos, a); }
  Id exp(Id a) { return record(OpKind::kExp, a); }
  Id square(Id a) { return record(OpKind::kSquare, a); }
  Id scale(Id a, double c) { return record(OpKind::kScale, a, c); }
  Id shift(Id a, double c) { return record(OpKind::kShift, a, c); }
  Id val_part(Id a) { return record(OpKind::kValPart, a); }
  Id dt_part(Id a) { return record(OpKind::kDtPart, a); }
  Id dx_part(Id a) { return record(OpKind::kDxPart, a); }
  Id dxx_part(Id a) { return record(OpKind::kDxxPart, a); }

  // Fused dense layer: out[i] = act(sum_j W[i,j]*in[j] + b[i]) for
  // i < fan_out, with W row-major starting at node w, biases at node b,
  // inputs at node in. Weights, biases and inputs must each be contiguous
  // node ranges (leaf blocks or outputs of a previous layer). Returns the
  // first of fan_out contiguous output ids.
  Id affine(Id in, int fan_in, Id w, Id b, int fan_out, bool tanh_act);

  // --- access ------------------------------------------------------------
  HyperDual value(Id id) const { return {v_[id], t_[id], x_[id], s_[id]}; }
  std::size_t num_nodes() const { return v_.size(); }

  // Reverse sweep from a scalar root: seeds the root's value-component
  // adjoint with 1 and accumulates exact partials into every node.
  void backward(Id root);

  // Adjoint of a node after backward(); components are dLoss/d(val),
  // dLoss/d(dt), dLoss/d(dx), dLoss/d(dxx) of that node.
  HyperDual adjoint(Id id) const { return {av_[id], at_[id], ax_[id], as_[id]}; }
  // For (unseeded) leaves the gradient is the value-component adjoint.
  double adjoint_val(Id id) const { return av_[id]; }
  void leaf_gradient(Id block_start, std::size_t n, std::span<double> out) const;

  void reset();  // drop all nodes, keep capacity

 private:
  struct OpRec {
    OpKind kind;
    Id a;
    Id b;    // second operand, kNone for unary; affine record index for kAffine
    Id out;  // first output node
    double c = 0.0;
  };
  struct AffineRec {
    Id in, w, bias, out;
    std::int32_t fan_in, fan_out;
    bool tanh_act;
    bool in_seeded, w_seeded;
    std::uint32_t z_cache;  // index into z_cache_ (pre-activations), or ~0u
  };

  Id new_node(const HyperDual& v, bool seeded);
  Id new_plain_node(double v);
  void check_id(Id id) const;

  // Node storage is struct-of-arrays: unseeded subgraphs (e.g. an entire
  // hypernetwork pass) then touch only the value stream, which keeps the
  // weight reads dense in cache.
  std::vector<double> v_, t_, x_, s_;      // values per Taylor component
  std::vector<double> av_, at_, ax_, as_;  // adjoints per component
  std::vector<std::uint8_t> seeded_;
  std::vector<OpRec> ops_;
  std::vector<AffineRec> affine_;
  std::vector<HyperDual> z_cache_;
};

}  // namespace hpnn
