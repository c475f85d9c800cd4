#include "doctest.h"
#include "test_util.hpp"

#include <cmath>
#include <cstring>

#include "jacprop/errors.hpp"
#include "jacprop/gradcheck.hpp"
#include "jacprop/network.hpp"

using namespace jacprop;
using jacprop::testing::check_near;
using jacprop::testing::kink_free_input;
using jacprop::testing::random_matrix;
using jacprop::testing::random_shape;
using jacprop::testing::random_vector;

namespace {

constexpr HeadKind kHeads[] = {HeadKind::SigmoidBCE, HeadKind::SoftmaxCE, HeadKind::IdentitySE};

NetworkShape shape_of(std::vector<std::size_t> widths, std::vector<ActivationKind> hidden,
                      HeadKind head) {
  NetworkShape s;
  s.widths = std::move(widths);
  s.hidden_activations = std::move(hidden);
  s.head = head;
  return s;
}

// Dense transpose of a local Jacobian block, for the hand-assembled factorizations.
DenseMatrix local_t(const DenseVector& a_prev, std::size_t out) {
  return transpose(materialize_local_jacobian(local_param_jacobian(a_prev, out)));
}

DenseVector slice(const DenseVector& v, std::size_t begin, std::size_t count) {
  DenseVector out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = v[begin + i];
  return out;
}

}  // namespace

TEST_CASE("parameter counts and layout") {
  CHECK(shape_of({4, 3}, {}, HeadKind::SoftmaxCE).param_count() == 15);
  CHECK(shape_of({4, 5, 3}, {ActivationKind::ReLU}, HeadKind::SoftmaxCE).param_count() == 43);

  Rng rng(1);
  const Network net = init_network(shape_of({4, 3}, {}, HeadKind::SoftmaxCE), rng);
  CHECK(param_pack(net).theta.size() == 15);

  const std::vector<std::size_t> widths{4, 5, 3, 2};
  const ParamLayout layout(widths);
  std::size_t next = 0;
  for (const LayerSlot& slot : layout.slots()) {
    CHECK(slot.offset_w == next);
    CHECK(slot.offset_b == slot.offset_w + slot.n_in * slot.n_out);
    next = slot.offset_b + slot.n_out;
  }
  CHECK(layout.total() == next);
  CHECK(layout.total() == 25 + 18 + 8);
}

TEST_CASE("pack and unpack round trip") {
  Rng rng(2);
  const NetworkShape shape =
      shape_of({3, 4, 5, 2}, {ActivationKind::Sigmoid, ActivationKind::ReLU}, HeadKind::SoftmaxCE);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseVector theta = random_vector(shape.param_count(), rng);
    const Network net = param_unpack(shape, theta);
    CHECK(param_pack(net).theta == theta);
    CHECK(net.shape() == shape);
  }
  // W blocks are column-stacked
  const Network net = param_unpack(shape_of({2, 2}, {}, HeadKind::IdentitySE),
                                   DenseVector{1, 2, 3, 4, 5, 6});
  CHECK(net.layer(0).weights() == DenseMatrix::from_rows({{1, 3}, {2, 4}}));
  CHECK(net.layer(0).bias() == DenseVector{5, 6});

  CHECK_THROWS_AS(param_unpack(shape, DenseVector(3)), DimensionError);
  ParamVector wrong{DenseVector(shape.param_count()), ParamLayout(std::vector<std::size_t>{3, 4, 5, 3})};
  CHECK_THROWS(param_unpack(shape, wrong));
}

TEST_CASE("network structure is validated") {
  const DenseLayer hidden(DenseMatrix(3, 4), DenseVector(4), ActivationKind::ReLU);
  const DenseLayer last(DenseMatrix(4, 2), DenseVector(2), std::nullopt);
  CHECK_NOTHROW(Network({hidden, last}, HeadKind::SoftmaxCE));
  CHECK_THROWS_AS(Network({last, hidden}, HeadKind::SoftmaxCE), Error);
  CHECK_THROWS_AS(Network({hidden, hidden}, HeadKind::SoftmaxCE), Error);
  CHECK_THROWS_AS(Network({hidden, last}, HeadKind::SigmoidBCE), Error);
  CHECK_THROWS_AS(Network({DenseLayer(DenseMatrix(3, 1), DenseVector(1), std::nullopt)},
                          HeadKind::SoftmaxCE),
                  Error);
}

TEST_CASE("forward examples") {
  const Network zero = param_unpack(shape_of({4, 3}, {}, HeadKind::SoftmaxCE), DenseVector(15));
  for (double p : forward(zero, DenseVector{1, -2, 3, 0.5}).yhat) {
    CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }

  const Network ident({DenseLayer(DenseMatrix::identity(3), DenseVector(3), std::nullopt)},
                      HeadKind::IdentitySE);
  CHECK(forward(ident, DenseVector{0.5, -1, 2}).yhat == DenseVector{0.5, -1, 2});

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const NetworkShape shape = random_shape(rng, kHeads[trial % 3]);
    const Network net = init_network(shape, rng);
    const ForwardTrace trace = forward(net, random_input(shape.widths[0], rng));
    REQUIRE(trace.z.size() == shape.layer_count());
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
      CHECK(trace.z[l].size() == shape.widths[l + 1]);
      CHECK(trace.a[l].size() == shape.widths[l + 1]);
    }
    CHECK(trace.yhat.size() == shape.widths.back());
  }
  CHECK_THROWS_AS(forward(ident, DenseVector{1, 2}), DimensionError);
}

TEST_CASE("one-layer softmax gradient matches the frozen finite-difference values") {
  const DenseMatrix w = DenseMatrix::from_rows(
      {{0.1, -0.2, 0.3}, {0.4, 0.5, -0.6}, {-0.7, 0.8, 0.9}, {1.0, -1.1, 0.2}});
  const Network net({DenseLayer(w, DenseVector{0.05, -0.05, 0.1}, std::nullopt)},
                    HeadKind::SoftmaxCE);
  const DenseVector x{1, -2, 0.5, 3};
  const Target y = Target::one_hot(1, 3);

  // central differences of an extended-precision loss at h = 1e-6
  const DenseVector frozen{0.34273873417058759,  -0.68547746834139202, 0.17136936708551063,
                           1.0282162025119796,   -0.99926877315890256, 1.9985375463178051,
                           -0.49963438657945128, -2.997806319476274,   0.65653003898831497,
                           -1.3130600779766299,  0.32826501949415748,  1.9695901169642944,
                           0.34273873417058759,  -0.99926877315890256, 0.65653003898831497};
  const GradResult g = backprop(net, x, y);
  check_near(g.grad, frozen, 1e-9);
  CHECK(g.loss == doctest::Approx(7.2207868300206995).epsilon(1e-13));

  // the same gradient written as -[blockdiag(x); I](y - yhat)
  const DenseVector residual = subtract(y.values(), g.yhat);
  const DenseVector closed = scale(matvec(local_t(x, 3), residual), -1.0);
  check_near(g.grad, closed, 1e-15);
}

TEST_CASE("exact fit gives a zero gradient") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const NetworkShape shape = random_shape(rng, HeadKind::IdentitySE);
    const Network net = init_network(shape, rng);
    const DenseVector x = random_input(shape.widths[0], rng);
    const Target y = Target::real(forward(net, x).yhat);
    const GradResult g = backprop(net, x, y);
    CHECK(g.loss == 0.0);
    for (double v : g.grad) CHECK(v == 0.0);
  }
}

TEST_CASE("all-negative ReLU layer receives a zero gradient block") {
  Rng rng(5);
  const NetworkShape shape = shape_of({3, 4, 2}, {ActivationKind::ReLU}, HeadKind::SoftmaxCE);
  DenseVector theta = random_vector(shape.param_count(), rng);
  const ParamLayout layout(shape.widths);
  const LayerSlot first = layout.slots()[0];
  for (std::size_t k = 0; k < first.n_out; ++k) theta[first.offset_b + k] = -10.0;
  const Network net = param_unpack(shape, theta);
  const GradResult g = backprop(net, random_input(3, rng), Target::one_hot(0, 2));
  for (std::size_t i = first.offset_w; i < first.offset_b + first.n_out; ++i) CHECK(g.grad[i] == 0.0);
  bool any_nonzero = false;
  for (std::size_t i = layout.slots()[1].offset_w; i < layout.total(); ++i) any_nonzero |= g.grad[i] != 0.0;
  CHECK(any_nonzero);
}

TEST_CASE("dense reference agrees with structured backprop on 4-5-3 nets") {
  Rng rng(6);
  for (HeadKind head : {HeadKind::SoftmaxCE, HeadKind::IdentitySE}) {
    for (ActivationKind act :
         {ActivationKind::ReLU, ActivationKind::Sigmoid, ActivationKind::Identity}) {
      const Network net = init_network(shape_of({4, 5, 3}, {act}, head), rng);
      const DenseVector x = kink_free_input(net, rng);
      const Target y = random_target(head, 3, rng);
      const GradResult s = backprop(net, x, y);
      const GradResult d = backprop_dense_reference(net, x, y);
      CHECK(compare_gradients(s.grad, d.grad, 1e-12).pass);
      CHECK(s.loss == d.loss);
    }
  }
  const Network bce = init_network(shape_of({4, 5, 1}, {ActivationKind::Sigmoid}, HeadKind::SigmoidBCE), rng);
  const DenseVector x = random_input(4, rng);
  CHECK(compare_gradients(backprop(bce, x, Target::binary(1)).grad,
                          backprop_dense_reference(bce, x, Target::binary(1)).grad, 1e-12)
            .pass);
}

TEST_CASE("one-layer dense reference is the transposed local Jacobian applied to the fused gradient") {
  Rng rng(7);
  const Network net = init_network(shape_of({4, 3}, {}, HeadKind::IdentitySE), rng);
  const DenseVector x = random_input(4, rng);
  const Target y = Target::real(random_vector(3, rng));
  const ForwardTrace trace = forward(net, x);
  const DenseVector expected = apply_local_jacobian_transpose(
      local_param_jacobian(x, 3), grad_z_last(HeadKind::IdentitySE, y, trace.yhat));
  CHECK(backprop_dense_reference(net, x, y).grad == expected);
}

TEST_CASE("dense parameter Jacobian shape") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const NetworkShape shape = random_shape(rng, kHeads[trial % 3]);
    const Network net = init_network(shape, rng);
    const DenseMatrix j = param_jacobian_dense(net, forward(net, random_input(shape.widths[0], rng)));
    CHECK(j.rows() == shape.widths.back());
    CHECK(j.cols() == shape.param_count());
  }
}

TEST_CASE("dense reference refuses networks over the cap") {
  Rng rng(9);
  const Network net = init_network(shape_of({30, 20, 2}, {ActivationKind::ReLU}, HeadKind::SoftmaxCE), rng);
  const DenseVector x = random_input(30, rng);
  CHECK_THROWS_AS(backprop_dense_reference(net, x, Target::one_hot(0, 2), 100), ReferenceTooLargeError);
  CHECK_NOTHROW(backprop_dense_reference(net, x, Target::one_hot(0, 2)));
}

TEST_CASE("loss_of_params examples") {
  const NetworkShape ce = shape_of({4, 3}, {}, HeadKind::SoftmaxCE);
  CHECK(loss_of_params(ce, DenseVector(15), DenseVector{1, 2, 3, 4}, Target::one_hot(2, 3)) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-15));

  // W = I, b = 0 interpolates y = x
  const NetworkShape se = shape_of({2, 2}, {}, HeadKind::IdentitySE);
  CHECK(loss_of_params(se, DenseVector{1, 0, 0, 1, 0, 0}, DenseVector{0.3, -0.7},
                       Target::real({0.3, -0.7})) == 0.0);

  Rng rng(10);
  const NetworkShape shape = shape_of({3, 4, 2}, {ActivationKind::Sigmoid}, HeadKind::SoftmaxCE);
  const DenseVector theta = random_vector(shape.param_count(), rng);
  const DenseVector x = random_input(3, rng);
  const double first = loss_of_params(shape, theta, x, Target::one_hot(1, 2));
  const double second = loss_of_params(shape, theta, x, Target::one_hot(1, 2));
  CHECK(std::memcmp(&first, &second, sizeof(double)) == 0);
  CHECK(first == backprop(param_unpack(shape, theta), x, Target::one_hot(1, 2)).loss);
}

TEST_CASE("oracle triangle on random networks") {
  Rng rng(11);
  std::size_t checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const HeadKind head = kHeads[trial % 3];
    const NetworkShape shape = random_shape(rng, head);
    const Network net = init_network(shape, rng);
    const DenseVector x = kink_free_input(net, rng);
    const Target y = random_target(head, shape.widths.back(), rng);
    const TriangleReport report = oracle_triangle(net, x, y);
    INFO("trial " << trial << " ref " << report.structured_vs_reference.max_rel_error << " fd "
                  << report.structured_vs_fd.max_rel_error);
    CHECK(report.pass);
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("gradient of a one-layer net is the transposed Jacobian times the loss gradient") {
  Rng rng(12);
  for (HeadKind head : kHeads) {
    const std::size_t out = head == HeadKind::SigmoidBCE ? 1 : 3;
    const Network net = init_network(shape_of({5, out}, {}, head), rng);
    const DenseVector x = random_input(5, rng);
    const Target y = random_target(head, out, rng);
    const ForwardTrace trace = forward(net, x);
    const DenseMatrix jac = param_jacobian_dense(net, trace);
    const DenseVector via_jacobian = transpose_matvec(jac, grad_z_last(head, y, trace.yhat));
    check_near(backprop(net, x, y).grad, via_jacobian, 1e-15);
    // and both are the finite-difference gradient of the scalar loss
    CHECK(compare_gradients(via_jacobian, network_fd_gradient(net, x, y), 1e-6).pass);
  }
}

TEST_CASE("zeroing all but one backward vector isolates that layer's block") {
  Rng rng(13);
  const NetworkShape shape = shape_of({3, 4, 5, 2}, {ActivationKind::Sigmoid, ActivationKind::ReLU},
                                      HeadKind::SoftmaxCE);
  const Network net = init_network(shape, rng);
  const DenseVector x = kink_free_input(net, rng);
  const ForwardTrace trace = forward(net, x);
  const Target y = Target::one_hot(1, 2);
  const std::vector<DenseVector> deltas =
      backward_deltas(net, trace, grad_z_last(shape.head, y, trace.yhat));
  const ParamLayout layout(shape.widths);
  const DenseVector full = assemble_gradient(net, trace, deltas);
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    std::vector<DenseVector> only(deltas.size());
    for (std::size_t l = 0; l < deltas.size(); ++l) {
      only[l] = l == k ? deltas[l] : DenseVector(deltas[l].size());
    }
    const DenseVector g = assemble_gradient(net, trace, only);
    for (std::size_t l = 0; l < layout.slots().size(); ++l) {
      const LayerSlot& s = layout.slots()[l];
      for (std::size_t i = s.offset_w; i < s.offset_b + s.n_out; ++i) {
        CHECK(g[i] == (l == k ? full[i] : 0.0));
      }
    }
  }
}

TEST_CASE("three-layer gradient blocks match the explicit factorizations at proxy scale") {
  // 784-300-100-10 in structure, 20-8-6-4 in size
  Rng rng(14);
  for (ActivationKind act : {ActivationKind::ReLU, ActivationKind::Sigmoid}) {
    const NetworkShape shape = shape_of({20, 8, 6, 4}, {act, act}, HeadKind::SoftmaxCE);
    const Network net = init_network(shape, rng);
    const DenseVector x = kink_free_input(net, rng);
    const Target y = Target::one_hot(2, 4);
    const ForwardTrace t = forward(net, x);
    const DenseVector g3 = grad_z_last(shape.head, y, t.yhat);

    const DenseMatrix d1 = diag(activation_jacobian_diag(act, t.z[0]));
    const DenseMatrix d2 = diag(activation_jacobian_diag(act, t.z[1]));
    const DenseMatrix& w2 = net.layer(1).weights();
    const DenseMatrix& w3 = net.layer(2).weights();

    const DenseVector block3 = matvec(local_t(t.a[1], 4), g3);
    const DenseVector block2 = matvec(matmul(matmul(local_t(t.a[0], 6), d2), w3), g3);
    const DenseVector block1 =
        matvec(matmul(matmul(matmul(matmul(local_t(x, 8), d1), w2), d2), w3), g3);

    const GradResult g = backprop(net, x, y);
    const ParamLayout layout(shape.widths);
    const auto& s = layout.slots();
    CHECK(compare_gradients(slice(g.grad, s[0].offset_w, block1.size()), block1, 1e-12).pass);
    CHECK(compare_gradients(slice(g.grad, s[1].offset_w, block2.size()), block2, 1e-12).pass);
    CHECK(compare_gradients(slice(g.grad, s[2].offset_w, block3.size()), block3, 1e-12).pass);
  }
}

TEST_CASE("backprop is deterministic") {
  Rng rng(15);
  const Network net = init_network(
      shape_of({6, 5, 4, 3}, {ActivationKind::ReLU, ActivationKind::Sigmoid}, HeadKind::SoftmaxCE), rng);
  const DenseVector x = random_input(6, rng);
  const GradResult a = backprop(net, x, Target::one_hot(0, 3));
  const GradResult b = backprop(net, x, Target::one_hot(0, 3));
  CHECK(a.grad == b.grad);
  CHECK(a.loss == b.loss);
}

TEST_CASE("init_network draws within the documented bounds") {
  Rng rng(16);
  const NetworkShape shape = shape_of({16, 9, 2}, {ActivationKind::ReLU}, HeadKind::SoftmaxCE);
  const Network net = init_network(shape, rng);
  for (const DenseLayer& layer : net.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.n_in()));
    for (double w : layer.weights().span()) CHECK(std::abs(w) <= bound);
    for (double b : layer.bias()) CHECK(std::abs(b) <= bound);
  }
  Rng again(16);
  CHECK(param_pack(init_network(shape, again)).theta == param_pack(net).theta);
}
