#include "hpnn/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace hpnn {

namespace {

// f, f', f'', f''' for the unary primitives, evaluated at a.val. The third
// derivative shows up in the reverse sweep because the dxx component of a
// downstream value depends on f'' of upstream values.
struct UnaryDerivs {
  double f, f1, f2, f3;
};

UnaryDerivs unary_derivs(OpKind kind, double v) {
  switch (kind) {
    case OpKind::kNeg:
      return {-v, -1.0, 0.0, 0.0};
    case OpKind::kTanh: {
      const double u = std::tanh(v);
      const double f1 = 1.0 - u * u;
      const double f2 = -2.0 * u * f1;
      return {u, f1, f2, -2.0 * f1 * f1 - 2.0 * u * f2};
    }
    case OpKind::kSin: {
      const double s = std::sin(v), c = std::cos(v);
      return {s, c, -s, -c};
    }
    case OpKind::kCos: {
      const double s = std::sin(v), c = std::cos(v);
      return {c, -s, -c, s};
    }
    case OpKind::kExp: {
      const double e = std::exp(v);
      return {e, e, e, e};
    }
    case OpKind::kSquare:
      return {v * v, 2.0 * v, 2.0, 0.0};
    case OpKind::kRecip: {
      if (v == 0.0) throw std::domain_error("tape division by value zero");
      const double r = 1.0 / v;
      return {r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r};
    }
    default:
      throw std::logic_error("not a unary op");
  }
}

// Adjoint of c = f(a): abar += J^T cbar with J the 4x4 Jacobian of the
// component map (a.val,a.dt,a.dx,a.dxx) -> (c.val,c.dt,c.dx,c.dxx).
void unary_backward(const UnaryDerivs& d, const HyperDual& a, const HyperDual& cbar,
                    HyperDual& abar) {
  abar.val += cbar.val * d.f1 + cbar.dt * d.f2 * a.dt + cbar.dx * d.f2 * a.dx +
              cbar.dxx * (d.f2 * a.dxx + d.f3 * a.dx * a.dx);
  abar.dt += cbar.dt * d.f1;
  abar.dx += cbar.dx * d.f1 + 2.0 * cbar.dxx * d.f2 * a.dx;
  abar.dxx += cbar.dxx * d.f1;
}

}  // namespace

Tape::Id Tape::new_node(const HyperDual& v, bool seeded) {
  v_.push_back(v.val);
  t_.push_back(v.dt);
  x_.push_back(v.dx);
  s_.push_back(v.dxx);
  seeded_.push_back(seeded ? 1 : 0);
  return static_cast<Id>(v_.size() - 1);
}

Tape::Id Tape::new_plain_node(double v) {
  v_.push_back(v);
  t_.push_back(0.0);
  x_.push_back(0.0);
  s_.push_back(0.0);
  seeded_.push_back(0);
  return static_cast<Id>(v_.size() - 1);
}

void Tape::check_id(Id id) const {
  if (id >= v_.size()) throw std::logic_error("tape operand id out of range");
}

Tape::Id Tape::constant(double v) { return new_plain_node(v); }

Tape::Id Tape::leaf(double v) { return new_plain_node(v); }

Tape::Id Tape::leaf_block(std::span<const double> values) {
  const Id first = static_cast<Id>(v_.size());
  const std::size_t n = v_.size() + values.size();
  v_.reserve(n);
  t_.reserve(n);
  x_.reserve(n);
  s_.reserve(n);
  seeded_.reserve(n);
  for (double v : values) new_plain_node(v);
  return first;
}

Tape::Id Tape::input(const HyperDual& seeded) {
  return new_node(seeded, seeded.dt != 0.0 || seeded.dx != 0.0 || seeded.dxx != 0.0);
}

Tape::Id Tape::record(OpKind op, Id a, Id b) {
  check_id(a);
  switch (op) {
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul: {
      check_id(b);
      const bool s = seeded_[a] || seeded_[b];
      Id id;
      if (!s) {
        const double va = v_[a], vb = v_[b];
        id = new_plain_node(op == OpKind::kAdd   ? va + vb
                            : op == OpKind::kSub ? va - vb
                                                 : va * vb);
      } else {
        const HyperDual va = value(a), vb = value(b);
        HyperDual out;
        if (op == OpKind::kAdd) out = va + vb;
        else if (op == OpKind::kSub) out = va - vb;
        else out = va * vb;
        id = new_node(out, true);
      }
      ops_.push_back({op, a, b, id, 0.0});
      return id;
    }
    case OpKind::kDiv: {
      check_id(b);
      const Id r = record(OpKind::kRecip, b);
      return record(OpKind::kMul, a, r);
    }
    case OpKind::kNeg:
    case OpKind::kTanh:
    case OpKind::kSin:
    case OpKind::kCos:
    case OpKind::kExp:
    case OpKind::kSquare:
    case OpKind::kRecip: {
      const UnaryDerivs d = unary_derivs(op, v_[a]);
      const bool s = seeded_[a];
      const Id id = s ? new_node(unary_chain(value(a), d.f, d.f1, d.f2), true)
                      : new_plain_node(d.f);
      ops_.push_back({op, a, kNone, id, 0.0});
      return id;
    }
    case OpKind::kValPart:
    case OpKind::kDtPart:
    case OpKind::kDxPart:
    case OpKind::kDxxPart: {
      double v = v_[a];
      if (op == OpKind::kDtPart) v = t_[a];
      else if (op == OpKind::kDxPart) v = x_[a];
      else if (op == OpKind::kDxxPart) v = s_[a];
      const Id id = new_plain_node(v);
      ops_.push_back({op, a, kNone, id, 0.0});
      return id;
    }
    default:
      throw std::logic_error("record(): op needs a dedicated entry point");
  }
}

Tape::Id Tape::record(OpKind op, Id a, double c) {
  check_id(a);
  if (op != OpKind::kScale && op != OpKind::kShift)
    throw std::logic_error("record(op, a, c): op is not kScale/kShift");
  Id id;
  if (!seeded_[a]) {
    id = new_plain_node(op == OpKind::kScale ? v_[a] * c : v_[a] + c);
  } else {
    const HyperDual va = value(a);
    id = new_node(op == OpKind::kScale ? va * c : va + c, true);
  }
  ops_.push_back({op, a, kNone, id, c});
  return id;
}

Tape::Id Tape::affine(Id in, int fan_in, Id w, Id b, int fan_out, bool tanh_act) {
  check_id(in + fan_in - 1);
  check_id(w + static_cast<Id>(fan_in) * fan_out - 1);
  check_id(b + fan_out - 1);

  bool in_seeded = false, w_seeded = false;
  for (int j = 0; j < fan_in; ++j) in_seeded |= (seeded_[in + j] != 0);
  for (Id k = w; k < w + static_cast<Id>(fan_in) * fan_out; ++k) w_seeded |= (seeded_[k] != 0);
  for (int i = 0; i < fan_out; ++i) w_seeded |= (seeded_[b + i] != 0);
  const bool out_seeded = in_seeded || w_seeded;

  AffineRec rec;
  rec.in = in;
  rec.w = w;
  rec.bias = b;
  rec.fan_in = fan_in;
  rec.fan_out = fan_out;
  rec.tanh_act = tanh_act;
  rec.in_seeded = in_seeded;
  rec.w_seeded = w_seeded;
  rec.z_cache = 0xffffffffu;
  if (tanh_act && out_seeded) {
    rec.z_cache = static_cast<std::uint32_t>(z_cache_.size());
    z_cache_.resize(z_cache_.size() + fan_out);
  }

  const Id out = static_cast<Id>(v_.size());
  const std::size_t total = v_.size() + static_cast<std::size_t>(fan_out);
  v_.resize(total);
  t_.resize(total, 0.0);
  x_.resize(total, 0.0);
  s_.resize(total, 0.0);
  seeded_.resize(total, out_seeded ? 1 : 0);

  if (!out_seeded) {
    // Hot path: plain real matvec over dense value streams.
    const double* wv = v_.data() + w;
    const double* iv = v_.data() + in;
    const double* bv = v_.data() + b;
    double* ov = v_.data() + out;
    for (int i = 0; i < fan_out; ++i) {
      double z = bv[i];
      const double* row = wv + static_cast<std::size_t>(i) * fan_in;
      for (int j = 0; j < fan_in; ++j) z += row[j] * iv[j];
      ov[i] = tanh_act ? std::tanh(z) : z;
    }
  } else if (!w_seeded) {
    // Weights carry no seeds: every component of z is a W.val-weighted
    // sum of the matching input component.
    for (int i = 0; i < fan_out; ++i) {
      HyperDual z{v_[b + i], t_[b + i], x_[b + i], s_[b + i]};
      const double* row = v_.data() + w + static_cast<std::size_t>(i) * fan_in;
      for (int j = 0; j < fan_in; ++j) {
        const double wv = row[j];
        z.val += wv * v_[in + j];
        z.dt += wv * t_[in + j];
        z.dx += wv * x_[in + j];
        z.dxx += wv * s_[in + j];
      }
      if (rec.z_cache != 0xffffffffu) z_cache_[rec.z_cache + i] = z;
      const HyperDual o = tanh_act ? hpnn::tanh(z) : z;
      v_[out + i] = o.val;
      t_[out + i] = o.dt;
      x_[out + i] = o.dx;
      s_[out + i] = o.dxx;
    }
  } else {
    for (int i = 0; i < fan_out; ++i) {
      HyperDual z = value(b + i);
      for (int j = 0; j < fan_in; ++j)
        z += value(w + static_cast<Id>(i) * fan_in + j) * value(in + j);
      if (rec.z_cache != 0xffffffffu) z_cache_[rec.z_cache + i] = z;
      const HyperDual o = tanh_act ? hpnn::tanh(z) : z;
      v_[out + i] = o.val;
      t_[out + i] = o.dt;
      x_[out + i] = o.dx;
      s_[out + i] = o.dxx;
    }
  }
  rec.out = out;
  affine_.push_back(rec);
  ops_.push_back({OpKind::kAffine, in, static_cast<Id>(affine_.size() - 1), out, 0.0});
  return out;
}

void Tape::backward(Id root) {
  check_id(root);
  av_.assign(v_.size(), 0.0);
  at_.assign(v_.size(), 0.0);
  ax_.assign(v_.size(), 0.0);
  as_.assign(v_.size(), 0.0);
  av_[root] = 1.0;

  // Adjoint of c = a*b folded into abar, with b's value components given.
  auto mul_backward = [this](Id a_id, const HyperDual& b, const HyperDual& cbar) {
    av_[a_id] += cbar.val * b.val + cbar.dt * b.dt + cbar.dx * b.dx + cbar.dxx * b.dxx;
    at_[a_id] += cbar.dt * b.val;
    ax_[a_id] += cbar.dx * b.val + 2.0 * cbar.dxx * b.dx;
    as_[a_id] += cbar.dxx * b.val;
  };

  for (std::size_t k = ops_.size(); k-- > 0;) {
    const OpRec& op = ops_[k];
    switch (op.kind) {
      case OpKind::kAdd:
        av_[op.a] += av_[op.out];
        at_[op.a] += at_[op.out];
        ax_[op.a] += ax_[op.out];
        as_[op.a] += as_[op.out];
        av_[op.b] += av_[op.out];
        at_[op.b] += at_[op.out];
        ax_[op.b] += ax_[op.out];
        as_[op.b] += as_[op.out];
        break;
      case OpKind::kSub:
        av_[op.a] += av_[op.out];
        at_[op.a] += at_[op.out];
        ax_[op.a] += ax_[op.out];
        as_[op.a] += as_[op.out];
        av_[op.b] -= av_[op.out];
        at_[op.b] -= at_[op.out];
        ax_[op.b] -= ax_[op.out];
        as_[op.b] -= as_[op.out];
        break;
      case OpKind::kMul: {
        const HyperDual cbar = adjoint(op.out);
        mul_backward(op.a, value(op.b), cbar);
        mul_backward(op.b, value(op.a), cbar);
        break;
      }
      case OpKind::kNeg:
      case OpKind::kTanh:
      case OpKind::kSin:
      case OpKind::kCos:
      case OpKind::kExp:
      case OpKind::kSquare:
      case OpKind::kRecip: {
        if (!seeded_[op.a]) {
          // real chain rule only; derivative-component adjoints of an
          // unseeded operand never reach a leaf
          const UnaryDerivs d = unary_derivs(op.kind, v_[op.a]);
          av_[op.a] += av_[op.out] * d.f1;
        } else {
          const UnaryDerivs d = unary_derivs(op.kind, v_[op.a]);
          HyperDual abar = adjoint(op.a);
          unary_backward(d, value(op.a), adjoint(op.out), abar);
          av_[op.a] = abar.val;
          at_[op.a] = abar.dt;
          ax_[op.a] = abar.dx;
          as_[op.a] = abar.dxx;
        }
        break;
      }
      case OpKind::kScale:
        av_[op.a] += av_[op.out] * op.c;
        at_[op.a] += at_[op.out] * op.c;
        ax_[op.a] += ax_[op.out] * op.c;
        as_[op.a] += as_[op.out] * op.c;
        break;
      case OpKind::kShift:
        av_[op.a] += av_[op.out];
        at_[op.a] += at_[op.out];
        ax_[op.a] += ax_[op.out];
        as_[op.a] += as_[op.out];
        break;
      case OpKind::kValPart:
        av_[op.a] += av_[op.out];
        break;
      case OpKind::kDtPart:
        at_[op.a] += av_[op.out];
        break;
      case OpKind::kDxPart:
        ax_[op.a] += av_[op.out];
        break;
      case OpKind::kDxxPart:
        as_[op.a] += av_[op.out];
        break;
      case OpKind::kAffine: {
        const AffineRec& rec = affine_[op.b];
        if (!rec.in_seeded && !rec.w_seeded) {
          const double* iv = v_.data() + rec.in;
          const double* ov = v_.data() + rec.out;
          for (int i = 0; i < rec.fan_out; ++i) {
            double zbar = av_[rec.out + i];
            if (zbar == 0.0) continue;
            if (rec.tanh_act) {
              const double u = ov[i];
              zbar *= 1.0 - u * u;
            }
            av_[rec.bias + i] += zbar;
            const double* row = v_.data() + rec.w + static_cast<std::size_t>(i) * rec.fan_in;
            double* wbar = av_.data() + rec.w + static_cast<std::size_t>(i) * rec.fan_in;
            double* ibar = av_.data() + rec.in;
            for (int j = 0; j < rec.fan_in; ++j) {
              wbar[j] += zbar * iv[j];
              ibar[j] += zbar * row[j];
            }
          }
        } else if (!rec.w_seeded) {
          for (int i = 0; i < rec.fan_out; ++i) {
            HyperDual zbar = adjoint(rec.out + i);
            if (rec.tanh_act) {
              const HyperDual& z = z_cache_[rec.z_cache + i];
              const double u = v_[rec.out + i];
              const double f1 = 1.0 - u * u;
              const double f2 = -2.0 * u * f1;
              const UnaryDerivs d{u, f1, f2, -2.0 * f1 * f1 - 2.0 * u * f2};
              HyperDual tmp;
              unary_backward(d, z, zbar, tmp);
              zbar = tmp;
            }
            av_[rec.bias + i] += zbar.val;
            at_[rec.bias + i] += zbar.dt;
            ax_[rec.bias + i] += zbar.dx;
            as_[rec.bias + i] += zbar.dxx;
            const double* row = v_.data() + rec.w + static_cast<std::size_t>(i) * rec.fan_in;
            double* wbar = av_.data() + rec.w + static_cast<std::size_t>(i) * rec.fan_in;
            for (int j = 0; j < rec.fan_in; ++j) {
              // W is unseeded: only its value adjoint can reach leaves
              wbar[j] += zbar.val * v_[rec.in + j] + zbar.dt * t_[rec.in + j] +
                         zbar.dx * x_[rec.in + j] + zbar.dxx * s_[rec.in + j];
              const double wv = row[j];
              av_[rec.in + j] += zbar.val * wv;
              at_[rec.in + j] += zbar.dt * wv;
              ax_[rec.in + j] += zbar.dx * wv;
              as_[rec.in + j] += zbar.dxx * wv;
            }
          }
        } else {
          for (int i = 0; i < rec.fan_out; ++i) {
            HyperDual zbar = adjoint(rec.out + i);
            if (rec.tanh_act) {
              const HyperDual& z = z_cache_[rec.z_cache + i];
              const double u = v_[rec.out + i];
              const double f1 = 1.0 - u * u;
              const double f2 = -2.0 * u * f1;
              const UnaryDerivs d{u, f1, f2, -2.0 * f1 * f1 - 2.0 * u * f2};
              HyperDual tmp;
              unary_backward(d, z, zbar, tmp);
              zbar = tmp;
            }
            av_[rec.bias + i] += zbar.val;
            at_[rec.bias + i] += zbar.dt;
            ax_[rec.bias + i] += zbar.dx;
            as_[rec.bias + i] += zbar.dxx;
            for (int j = 0; j < rec.fan_in; ++j) {
              const Id wi = rec.w + static_cast<Id>(i) * rec.fan_in + j;
              mul_backward(wi, value(rec.in + j), zbar);
              mul_backward(rec.in + j, value(wi), zbar);
            }
          }
        }
        break;
      }
      case OpKind::kDiv:
        throw std::logic_error("kDiv is rewritten at record time");
    }
  }
}

void Tape::leaf_gradient(Id block_start, std::size_t n, std::span<double> out) const {
  for (std::size_t i = 0; i < n; ++i) out[i] = av_[block_start + i];
}

void Tape::reset() {
  v_.clear();
  t_.clear();
  x_.clear();
  s_.clear();
  av_.clear();
  at_.clear();
  ax_.clear();
  as_.clear();
  seeded_.clear();
  ops_.clear();
  affine_.clear();
  z_cache_.clear();
}

}  // namespace hpnn
