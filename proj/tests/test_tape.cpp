#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "hpnn/hyperdual.hpp"
#include "hpnn/mlp.hpp"
#include "hpnn/rng.hpp"
#include "hpnn/tape.hpp"
#include "test_util.hpp"

using hpnn::HyperDual;
using hpnn::OpKind;
using hpnn::Rng;
using hpnn::Tape;

using hpnn::test::Program;

TEST_CASE("record computes values eagerly") {
  Tape tape;
  const Tape::Id a = tape.leaf(2.0);
  const Tape::Id b = tape.leaf(3.0);
  CHECK(tape.value(tape.record(OpKind::kMul, a, b)).val == doctest::Approx(6.0));

  const Tape::Id z = tape.leaf(0.0);
  CHECK(tape.value(tape.record(OpKind::kTanh, z)).val == doctest::Approx(0.0));

  const Tape::Id s = tape.leaf(1.5);
  const Tape::Id sum = tape.record(OpKind::kAdd, s, s);
  CHECK(tape.value(sum).val == doctest::Approx(3.0));
  tape.backward(sum);
  CHECK(tape.adjoint_val(s) == doctest::Approx(2.0));
}

TEST_CASE("operand id out of range is an internal error") {
  Tape tape;
  const Tape::Id a = tape.leaf(1.0);
  CHECK_THROWS_AS(tape.record(OpKind::kAdd, a, Tape::Id{999}), std::logic_error);
}

TEST_CASE("backward on w*x + b") {
  Tape tape;
  const Tape::Id w = tape.leaf(2.0);
  const Tape::Id x = tape.leaf(3.0);
  const Tape::Id b = tape.leaf(1.0);
  const Tape::Id root = tape.add(tape.mul(w, x), b);
  tape.backward(root);
  CHECK(tape.adjoint_val(w) == doctest::Approx(3.0));
  CHECK(tape.adjoint_val(x) == doctest::Approx(2.0));
  CHECK(tape.adjoint_val(b) == doctest::Approx(1.0));
}

TEST_CASE("backward through tanh at zero") {
  Tape tape;
  const Tape::Id w = tape.leaf(0.0);
  const Tape::Id root = tape.tanh(w);
  tape.backward(root);
  CHECK(tape.adjoint_val(w) == doctest::Approx(1.0));
}

TEST_CASE("gradients of random composite expressions match finite differences") {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n_leaves = 3 + static_cast<int>(rng.index(5));
    const Program prog = Program::random(rng, n_leaves, 6 + static_cast<int>(rng.index(8)));
    std::vector<double> leaves(n_leaves);
    for (double& v : leaves) v = rng.uniform(-1.2, 1.2);

    Tape tape;
    const auto [root, first] = prog.record(tape, leaves);
    CHECK(tape.value(root).val ==
          doctest::Approx(prog.eval(leaves)).epsilon(1e-12));
    tape.backward(root);

    auto f = [&prog](const std::vector<double>& x) { return prog.eval(x); };
    for (int i = 0; i < n_leaves; ++i) {
      const double fd = hpnn::test::central_diff(f, leaves, i);
      const double ad = tape.adjoint_val(first + i);
      if (std::abs(fd) > 1e-4) {  // below that, FD noise dominates the comparison
        CHECK(hpnn::test::rel_err(ad, fd) < 1e-6);
        ++checked;
      }
    }
  }
  CHECK(checked > 150);
}

TEST_CASE("gradient of a sum is the sum of gradients") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Program pf = Program::random(rng, 4, 6);
    const Program pg = Program::random(rng, 4, 6);
    std::vector<double> leaves(4);
    for (double& v : leaves) v = rng.uniform(-1.0, 1.0);

    auto grad_of = [&leaves](const Program& p) {
      Tape tape;
      const auto [root, first] = p.record(tape, leaves);
      tape.backward(root);
      std::vector<double> g(4);
      tape.leaf_gradient(first, 4, g);
      return g;
    };
    const std::vector<double> gf = grad_of(pf), gg = grad_of(pg);

    // f and g recorded on one tape, rooted at their sum
    Tape tape;
    const auto [rf, ff] = pf.record(tape, leaves);
    const auto [rg, fg] = pg.record(tape, leaves);
    tape.backward(tape.add(rf, rg));
    for (int i = 0; i < 4; ++i) {
      const double want = gf[i] + gg[i];
      CHECK(tape.adjoint_val(ff + i) + tape.adjoint_val(fg + i) ==
            doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("fused affine layers agree with scalar-op composition") {
  Rng rng(17);
  const int fan_in = 5, fan_out = 4;
  std::vector<double> weights(fan_in * fan_out + fan_out);
  for (double& v : weights) v = rng.uniform(-0.8, 0.8);
  std::vector<double> input(fan_in);
  for (double& v : input) v = rng.uniform(-1.0, 1.0);

  auto build_scalar = [&](Tape& tape, Tape::Id w, Tape::Id in) {
    // out_i = tanh(sum_j W_ij in_j + b_i), then root = sum_i out_i^2
    Tape::Id root = Tape::kNone;
    for (int i = 0; i < fan_out; ++i) {
      Tape::Id z = w + fan_in * fan_out + i;  // bias node
      for (int j = 0; j < fan_in; ++j)
        z = tape.add(z, tape.mul(w + i * fan_in + j, in + j));
      const Tape::Id sq = tape.square(tape.tanh(z));
      root = root == Tape::kNone ? sq : tape.add(root, sq);
    }
    return root;
  };

  for (const bool seeded : {false, true}) {
    Tape t1, t2;
    const Tape::Id w1 = t1.leaf_block(weights);
    const Tape::Id w2 = t2.leaf_block(weights);
    Tape::Id in1, in2;
    if (seeded) {
      in1 = t1.input_x(input[0]);
      in2 = t2.input_x(input[0]);
    } else {
      in1 = t1.constant(input[0]);
      in2 = t2.constant(input[0]);
    }
    for (int j = 1; j < fan_in; ++j) {
      t1.constant(input[j]);
      t2.constant(input[j]);
    }

    const Tape::Id out = t1.affine(in1, fan_in, w1, w1 + fan_in * fan_out, fan_out, true);
    Tape::Id root1 = Tape::kNone;
    for (int i = 0; i < fan_out; ++i) {
      const Tape::Id sq = t1.square(out + i);
      root1 = root1 == Tape::kNone ? sq : t1.add(root1, sq);
    }
    const Tape::Id root2 = build_scalar(t2, w2, in2);

    CHECK(t1.value(root1).val == doctest::Approx(t2.value(root2).val).epsilon(1e-13));
    t1.backward(root1);
    t2.backward(root2);
    for (std::size_t i = 0; i < weights.size(); ++i)
      CHECK(t1.adjoint_val(w1 + i) == doctest::Approx(t2.adjoint_val(w2 + i)).epsilon(1e-11));
  }
}

TEST_CASE("forward-over-reverse: d/dtheta of (du/dx)^2 matches finite differences") {
  // Tiny net u(x) = w2 . tanh(w1 x + b1) + b2 built from scalar ops on the
  // tape with x seeded; the loss extracts du/dx and squares it. The FD
  // oracle recomputes (du/dx)^2 with plain HyperDual forward evaluation.
  Rng rng(99);
  const int hidden = 4;
  std::vector<double> theta(hidden * 3 + 1);
  for (double& v : theta) v = rng.uniform(-0.9, 0.9);
  const double xv = 0.37;

  auto loss_of = [&](const std::vector<double>& th) {
    // plain HyperDual evaluation, no tape
    const HyperDual x = HyperDual::seed_x(xv);
    HyperDual u(th[hidden * 3]);
    for (int i = 0; i < hidden; ++i) {
      const HyperDual h = tanh(x * th[i] + th[hidden + i]);
      u += h * th[2 * hidden + i];
    }
    return u.dx * u.dx;
  };

  Tape tape;
  const Tape::Id th = tape.leaf_block(theta);
  const Tape::Id x = tape.input_x(xv);
  Tape::Id u = th + hidden * 3;  // output bias
  for (int i = 0; i < hidden; ++i) {
    const Tape::Id h = tape.tanh(tape.add(tape.mul(x, th + i), th + hidden + i));
    u = tape.add(u, tape.mul(h, th + 2 * hidden + i));
  }
  const Tape::Id root = tape.square(tape.dx_part(u));
  CHECK(tape.value(root).val == doctest::Approx(loss_of(theta)).epsilon(1e-12));
  tape.backward(root);

  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double fd = hpnn::test::central_diff(loss_of, theta, i);
    const double ad = tape.adjoint_val(th + i);
    if (std::abs(fd) > 1e-5) CHECK(hpnn::test::rel_err(ad, fd) < 1e-5);
  }
}

TEST_CASE("component extraction and seeded division against HyperDual forward") {
  // loss = val(u)*dt(u) + dxx(u/v) with u, v built from seeded inputs and
  // leaf parameters; FD over the leaves using plain HyperDual evaluation.
  Rng rng(123);
  std::vector<double> theta(3);
  for (double& v : theta) v = rng.uniform(0.4, 1.2);
  const double tv = 0.6, xv = -0.4;

  auto loss_of = [&](const std::vector<double>& th) {
    const HyperDual t = HyperDual::seed_t(tv), x = HyperDual::seed_x(xv);
    const HyperDual u = sin(t * th[0]) * x + x * x * th[1];
    const HyperDual w = u / (x * x + th[2]);
    return u.val * u.dt + w.dxx;
  };

  Tape tape;
  const Tape::Id th = tape.leaf_block(theta);
  const Tape::Id t = tape.input_t(tv);
  const Tape::Id x = tape.input_x(xv);
  const Tape::Id u =
      tape.add(tape.mul(tape.sin(tape.mul(t, th + 0)), x), tape.mul(tape.square(x), th + 1));
  const Tape::Id w = tape.div(u, tape.add(tape.square(x), th + 2));
  const Tape::Id root =
      tape.add(tape.mul(tape.val_part(u), tape.dt_part(u)), tape.dxx_part(w));

  CHECK(tape.value(root).val == doctest::Approx(loss_of(theta)).epsilon(1e-12));
  tape.backward(root);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double fd = hpnn::test::central_diff(loss_of, theta, i);
    CHECK(hpnn::test::rel_err(tape.adjoint_val(th + i), fd) < 1e-6);
  }
}

TEST_CASE("mlp_on_tape with hyperdual inputs matches mlp_forward exactly") {
  Rng rng(31);
  const hpnn::ArchSpec spec{2, {5, 4}, 1};
  std::vector<double> theta(hpnn::param_count(spec));
  for (double& v : theta) v = rng.uniform(-0.7, 0.7);
  const double tv = 0.25, xv = 0.6;

  Tape tape;
  const Tape::Id th = tape.leaf_block(theta);
  const Tape::Id in = tape.input_t(tv);
  tape.input_x(xv);
  const Tape::Id out = hpnn::mlp_on_tape(tape, spec, th, in);

  const std::array<HyperDual, 2> hd_in{HyperDual::seed_t(tv), HyperDual::seed_x(xv)};
  const HyperDual want = hpnn::mlp_forward<HyperDual>(spec, theta, hd_in)[0];
  const HyperDual& got = tape.value(out);
  CHECK(got.val == doctest::Approx(want.val).epsilon(1e-14));
  CHECK(got.dt == doctest::Approx(want.dt).epsilon(1e-13));
  CHECK(got.dx == doctest::Approx(want.dx).epsilon(1e-13));
  CHECK(got.dxx == doctest::Approx(want.dxx).epsilon(1e-13));
}

TEST_CASE("tape reset drops nodes but keeps working") {
  Tape tape;
  tape.leaf(1.0);
  CHECK(tape.num_nodes() == 1);
  tape.reset();
  CHECK(tape.num_nodes() == 0);
  const Tape::Id a = tape.leaf(4.0);
  const Tape::Id r = tape.square(a);
  tape.backward(r);
  CHECK(tape.adjoint_val(a) == doctest::Approx(8.0));
}
