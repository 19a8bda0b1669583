// Copyright 2026 The unitts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "test_util.hpp"
#include "unitts/nn/autograd.hpp"
#include "unitts/nn/checkpoint.hpp"
#include "unitts/nn/optim.hpp"

namespace unitts::nn {
namespace {

using Fn = std::function<Var(std::vector<Var>&)>;

// Max relative error between backward() and central differences.
double gradient_error(const std::vector<Matrix>& init, const Fn& f) {
  std::vector<Var> params;
  for (const auto& m : init) params.emplace_back(m, true);
  backward(f(params));
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix analytic = params[i].grad();
    for (Eigen::Index k = 0; k < analytic.size(); ++k) {
      std::vector<Var> probe;
      for (const auto& p : params) probe.emplace_back(p.value(), false);
      const double h = 1e-5;
      probe[i].mutable_value().data()[k] += h;
      const double up = f(probe).item();
      probe[i].mutable_value().data()[k] -= 2 * h;
      const double down = f(probe).item();
      const double numeric = (up - down) / (2 * h);
      const double a = analytic.data()[k];
      worst = std::max(worst, std::abs(numeric - a) / std::max({std::abs(numeric), std::abs(a), 1e-6}));
    }
  }
  return worst;
}

class OpGradient : public ::testing::Test {
 protected:
  Matrix R(Eigen::Index r, Eigen::Index c) { return testing::random_matrix(r, c, rng_); }
  Rng rng_{1};
};

TEST_F(OpGradient, DenseOps) {
  const Matrix t = R(6, 5);
  EXPECT_LT(gradient_error({R(6, 4), R(4, 5)}, [&](auto& p) { return mse(matmul(p[0], p[1]), t); }), 1e-6);
  EXPECT_LT(gradient_error({R(6, 4), R(5, 4)}, [&](auto& p) { return mse(matmul_nt(p[0], p[1]), t); }), 1e-6);
  EXPECT_LT(gradient_error({R(6, 5), R(6, 5)}, [&](auto& p) { return mse(add(p[0], p[1]), t); }), 1e-6);
  EXPECT_LT(gradient_error({R(6, 5), R(1, 5)}, [&](auto& p) { return mse(tanh(add_row(p[0], p[1])), t); }), 1e-6);
  EXPECT_LT(gradient_error({R(6, 5)}, [&](auto& p) { return mse(softmax_rows(scale(p[0], 1.5)), t); }), 1e-6);
  EXPECT_LT(gradient_error({R(6, 5), R(1, 5), R(1, 5)},
                           [&](auto& p) { return mse(layer_norm(p[0], p[1], p[2]), t); }),
            1e-5);
  EXPECT_LT(gradient_error({R(6, 5)}, [&](auto& p) { return mse(leaky_relu(p[0], 0.1), t); }), 1e-6);
  EXPECT_LT(gradient_error({R(6, 5)}, [&](auto& p) { return mse(relu(p[0]), t); }), 1e-6);
  EXPECT_LT(gradient_error({R(6, 5)}, [&](auto& p) { return l1(p[0], t); }), 1e-6);
}

TEST_F(OpGradient, ShapeOps) {
  const Matrix t = R(6, 5);
  EXPECT_LT(gradient_error({R(6, 2), R(6, 3)}, [&](auto& p) { return mse(concat_cols({p[0], p[1]}), t); }), 1e-6);
  EXPECT_LT(gradient_error({R(6, 8)}, [&](auto& p) { return mse(slice_cols(p[0], 2, 5), t); }), 1e-6);
  const std::vector<int> ids = {0, 2, 2, 1, 0, 1};
  EXPECT_LT(gradient_error({R(3, 5)}, [&](auto& p) { return mse(gather_rows(p[0], ids), t); }), 1e-6);
  const std::vector<int> counts = {1, 3, 2};
  EXPECT_LT(gradient_error({R(3, 5)}, [&](auto& p) { return mse(repeat_rows(p[0], counts), t); }), 1e-6);
  const std::vector<int> y = {0, 1, 4, 3, 2, 2};
  EXPECT_LT(gradient_error({R(6, 5)}, [&](auto& p) { return cross_entropy(p[0], y); }), 1e-6);
}

TEST_F(OpGradient, Convolutions) {
  const Matrix t = R(6, 5);
  EXPECT_LT(gradient_error({R(6, 3), R(9, 5), R(1, 5)},
                           [&](auto& p) { return mse(conv1d(p[0], p[1], p[2], 3, 1), t); }),
            1e-6);
  EXPECT_LT(gradient_error({R(6, 3), R(15, 5), R(1, 5)},
                           [&](auto& p) { return mse(conv1d(p[0], p[1], p[2], 5, 3), t); }),
            1e-6);
  const Matrix t2 = R(12, 5);
  EXPECT_LT(gradient_error({R(3, 4), R(4, 40), R(1, 5)},
                           [&](auto& p) { return mse(conv_transpose1d(p[0], p[1], p[2], 8, 4), t2); }),
            1e-6);
}

TEST_F(OpGradient, SharedSubexpression) {
  const Matrix t = R(4, 4);
  EXPECT_LT(gradient_error({R(4, 4)},
                           [&](auto& p) {
                             Var h = tanh(p[0]);
                             return mse(add(matmul(h, h), h), t);
                           }),
            1e-6);
}

TEST_F(OpGradient, LeafGradientsAccumulate) {
  Var x(R(3, 2), true);
  backward(mse(x, Matrix::Zero(3, 2)));
  const Matrix once = x.grad();
  backward(mse(x, Matrix::Zero(3, 2)));
  EXPECT_TRUE(x.grad().isApprox(2.0 * once));
}

TEST_F(OpGradient, ConvForwardMatchesDirectSum) {
  const Matrix x = R(7, 2), w = R(3 * 2, 4), b = R(1, 4);
  const int dilation = 2;
  const Matrix y = conv1d(Var(x), Var(w), Var(b), 3, dilation).value();
  for (int t = 0; t < 7; ++t) {
    for (int o = 0; o < 4; ++o) {
      double s = b(0, o);
      for (int k = 0; k < 3; ++k) {
        const int src = t + (k - 1) * dilation;
        if (src < 0 || src >= 7) continue;
        for (int c = 0; c < 2; ++c) s += x(src, c) * w(k * 2 + c, o);
      }
      EXPECT_NEAR(y(t, o), s, 1e-12);
    }
  }
}

TEST_F(OpGradient, ConvTransposeForwardMatchesScatter) {
  const int kernel = 8, stride = 4, cin = 3, cout = 2, len = 5;
  const Matrix x = R(len, cin), w = R(cin, kernel * cout), b = R(1, cout);
  const Matrix y = conv_transpose1d(Var(x), Var(w), Var(b), kernel, stride).value();
  ASSERT_EQ(y.rows(), len * stride);
  Matrix ref = b.replicate(len * stride, 1);
  for (int t = 0; t < len; ++t) {
    for (int j = 0; j < kernel; ++j) {
      const int out = t * stride + j - (kernel - stride) / 2;
      if (out < 0 || out >= len * stride) continue;
      for (int c = 0; c < cin; ++c) {
        for (int o = 0; o < cout; ++o) ref(out, o) += x(t, c) * w(c, j * cout + o);
      }
    }
  }
  EXPECT_LT((y - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ops, SoftmaxAndCrossEntropyValues) {
  const Matrix logits = Matrix::Zero(3, 16);
  const std::vector<int> y = {0, 5, 15};
  EXPECT_NEAR(cross_entropy(Var(logits), y).item(), std::log(16.0), 1e-12);
  Rng rng(2);
  const Matrix z = testing::random_matrix(3, 16, rng);
  Matrix shifted = z;
  shifted.row(1).array() += 100.0;
  EXPECT_NEAR(cross_entropy(Var(z), y).item(), cross_entropy(Var(shifted), y).item(), 1e-9);
  const Matrix s = softmax_rows(Var(z)).value();
  for (int r = 0; r < 3; ++r) EXPECT_NEAR(s.row(r).sum(), 1.0, 1e-12);
}

TEST(Ops, ShapeErrors) {
  EXPECT_THROW(matmul(Var(Matrix::Zero(2, 3)), Var(Matrix::Zero(2, 3))), InvalidInput);
  EXPECT_THROW(add(Var(Matrix::Zero(2, 3)), Var(Matrix::Zero(3, 2))), InvalidInput);
  const std::vector<int> bad = {0, 3};
  EXPECT_THROW(gather_rows(Var(Matrix::Zero(3, 2)), bad), InvalidInput);
  EXPECT_THROW(backward(Var(Matrix::Zero(2, 2), true)), InvalidInput);
}

TEST(Ops, DropoutIdentityWithoutRng) {
  Rng rng(3);
  const Matrix x = testing::random_matrix(4, 4, rng);
  EXPECT_EQ(dropout(Var(x), 0.5, nullptr).value(), x);
  const Matrix d = dropout(Var(x), 0.5, &rng).value();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    EXPECT_TRUE(d.data()[i] == 0.0 || std::abs(d.data()[i] - 2.0 * x.data()[i]) < 1e-12);
  }
}

TEST(ParamStore, DeepCopyAndLookup) {
  ParamStore a;
  a.add("w", Matrix::Ones(2, 2));
  EXPECT_THROW(a.add("w", Matrix::Ones(1, 1)), InvalidInput);
  ParamStore b = a;
  b[0].mutable_value()(0, 0) = 7.0;
  EXPECT_EQ(a[0].value()(0, 0), 1.0);
  EXPECT_EQ(a.index("w"), 0u);
  EXPECT_THROW(a.index("v"), InvalidInput);
  EXPECT_EQ(a.element_count(), 4u);
  a[0].mutable_value()(1, 1) = 1.0 / 3.0;
  a.snap_to_f32();
  EXPECT_EQ(a[0].value()(1, 1), static_cast<double>(1.0f / 3.0f));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamStore p;
  p.add("w", Matrix::Constant(1, 2, 1.0));
  p[0].grad() << 0.5, -2.0;
  AdamOptions o;
  o.lr = 0.1;
  o.clip_norm = 0.0;
  Adam opt(p, o);
  EXPECT_NEAR(opt.step(p), std::sqrt(0.25 + 4.0), 1e-12);
  EXPECT_NEAR(p[0].value()(0, 0), 0.9, 1e-6);
  EXPECT_NEAR(p[0].value()(0, 1), 1.1, 1e-6);
  EXPECT_EQ(opt.steps(), 1u);
}

TEST(Adam, ClipReportsPreClipNorm) {
  ParamStore p;
  p.add("w", Matrix::Zero(1, 1));
  p[0].grad()(0, 0) = 5.0;
  Adam opt(p, AdamOptions{});
  EXPECT_NEAR(opt.step(p), 5.0, 1e-12);
  EXPECT_THROW(Adam(p, AdamOptions{0.0}), InvalidInput);
}

TEST(Adam, MinimizesQuadratic) {
  ParamStore p;
  p.add("w", Matrix::Constant(1, 3, 4.0));
  AdamOptions o;
  o.lr = 0.05;
  Adam opt(p, o);
  const Matrix target = (Matrix(1, 3) << 1.0, -2.0, 0.5).finished();
  for (int i = 0; i < 2000; ++i) {
    p.zero_grad();
    backward(mse(p[0], target));
    opt.step(p);
  }
  EXPECT_LT((p[0].value() - target).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(4);
  Checkpoint ck;
  ck.kind = "test";
  ck.config_json = R"({"a":1})";
  ck.params.add("w1", testing::random_matrix(3, 4, rng));
  ck.params.add("w2", testing::random_matrix(1, 5, rng));
  ck.params.snap_to_f32();
  const std::string bytes = encode_checkpoint(ck);
  EXPECT_EQ(bytes.substr(0, 4), "UTCK");
  const Checkpoint back = decode_checkpoint(bytes);
  EXPECT_EQ(back.kind, "test");
  EXPECT_EQ(back.config_json, ck.config_json);
  ASSERT_EQ(back.params.size(), 2u);
  EXPECT_EQ(back.params.name(1), "w2");
  EXPECT_EQ(back.params[0].value(), ck.params[0].value());
  EXPECT_EQ(encode_checkpoint(back), bytes);

  testing::TempDir dir("ckpt");
  save_checkpoint(dir.file("c.ckpt"), ck);
  EXPECT_EQ(encode_checkpoint(load_checkpoint(dir.file("c.ckpt"))), bytes);
  EXPECT_THROW(load_checkpoint(dir.file("missing.ckpt")), ArtifactError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), InvalidInput);
  write_text_file(dir.file("short.ckpt"), bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_checkpoint(dir.file("short.ckpt")), ArtifactError);
}

TEST(Checkpoint, AssignParamsChecksNamesAndShapes) {
  ParamStore dst, src;
  dst.add("w", Matrix::Zero(2, 2));
  src.add("w", Matrix::Ones(2, 2));
  assign_params(dst, src);
  EXPECT_EQ(dst[0].value(), Matrix::Ones(2, 2));
  ParamStore wrong_shape;
  wrong_shape.add("w", Matrix::Ones(2, 3));
  EXPECT_THROW(assign_params(dst, wrong_shape), ArtifactError);
  ParamStore wrong_name;
  wrong_name.add("v", Matrix::Ones(2, 2));
  EXPECT_THROW(assign_params(dst, wrong_name), ArtifactError);
}

}  // namespace
}  // namespace unitts::nn
