#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "simuda/adapt/objective.hpp"
#include "simuda/core/errors.hpp"

using namespace simuda;
using nn::Matrix;

TEST_CASE("mcc matches the straight-line oracle") {
  const auto r = oracle::check_mcc_values();
  INFO(r.detail);
  CHECK(r.ok);
}

TEST_CASE("mcc fixed instance B=8 C=5 seed 0") {
  Rng rng(0);
  const auto z = oracle::random_table(rng, 8, 5, 1.0);
  const double loss = adapt::mcc_loss<double>(oracle::to_matrix(z), {}, false).loss;
  CHECK(std::abs(loss - oracle::mcc_reference(z, 1.0)) < 1e-6);
}

TEST_CASE("mcc float path agrees with double") {
  Rng rng(4);
  const auto z = oracle::random_matrix(rng, 6, 4, 2.0);
  const double d = adapt::mcc_loss<double>(z, {}, false).loss;
  const float f = adapt::mcc_loss<float>(z.cast<float>(), {}, false).loss;
  CHECK(std::abs(d - f) < 1e-5);
}

TEST_CASE("mcc rejects a single-sample batch") {
  CHECK_THROWS_AS(adapt::mcc_loss<double>(Matrix<double>::Zero(1, 3), {}), ConfigError);
}

TEST_CASE("gradient checks") {
  const auto m = oracle::check_mcc_gradients(24);
  INFO(m.detail);
  CHECK(m.ok);
  const auto c = oracle::check_cdan_gradients(20);
  INFO(c.detail);
  CHECK(c.ok);
}

TEST_CASE("cdan analytic cases") {
  const auto r = oracle::check_cdan_analytics();
  INFO(r.detail);
  CHECK(r.ok);
}

TEST_CASE("perfect discriminator drives the loss to zero") {
  Matrix<double> ds = Matrix<double>::Constant(3, 1, 1.0 - 1e-9);
  Matrix<double> dt = Matrix<double>::Constant(3, 1, 1e-9);
  const nn::ColVector<double> w = nn::ColVector<double>::Ones(3);
  const auto bce = adapt::domain_bce<double>(ds, dt, w, w);
  CHECK(bce.loss < 1e-6);
  CHECK(bce.dlogit.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("entropy weights normalize to mean one") {
  Rng rng(8);
  const auto p = oracle::softmax(oracle::random_matrix(rng, 7, 5, 2.0));
  const auto w = adapt::entropy_weights<double>(p);
  CHECK(w.mean() == doctest::Approx(1.0).epsilon(1e-12));
  Matrix<double> mixed(2, 12);
  mixed.row(0).setConstant(1.0 / 12);
  mixed.row(1).setZero();
  mixed(1, 0) = 1.0;
  const auto wm = adapt::entropy_weights<double>(mixed);
  const double raw0 = 1.0 + 1.0 / 12, raw1 = 2.0;
  CHECK(wm(0) == doctest::Approx(2 * raw0 / (raw0 + raw1)));
  CHECK(wm(1) == doctest::Approx(2 * raw1 / (raw0 + raw1)));
}

TEST_CASE("grl lambda schedule") {
  adapt::GrlSchedule s;
  s.max_steps = 1000;
  CHECK(adapt::grl_lambda(s) == 0.0);
  s.step = 500;
  CHECK(adapt::grl_lambda(s) == doctest::Approx(0.98661).epsilon(1e-5));
  s.step = 1000;
  CHECK(adapt::grl_lambda(s) == doctest::Approx(0.99991).epsilon(1e-5));
  s.advance();
  CHECK(s.step == 1000);
  CHECK_THROWS_AS(adapt::grl_backward<double>(Matrix<double>::Ones(1, 1), -1.0), ContractError);
  CHECK(adapt::grl_backward<double>(Matrix<double>::Ones(2, 2), 0.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("embedding contracts") {
  adapt::JointEmbedder<double> exact(64, 64, 0);
  CHECK(exact.mode() == adapt::EmbedMode::exact);
  adapt::JointEmbedder<double> randomized(64, 65, 0);
  CHECK(randomized.mode() == adapt::EmbedMode::randomized);
  CHECK(randomized.output_dim() == adapt::kDefaultRandomDim);
  adapt::JointEmbedder<double> small(3, 2, 0);
  Matrix<double> f(1, 3), p(1, 2);
  f << 1, 2, 2;
  p << 0.6, 0.4;
  CHECK(small.embed(f, p).norm() == doctest::Approx(f.norm() * p.norm()));
  p << 0.6, 0.5;
  CHECK_THROWS_AS(small.embed(f, p), ContractError);
}

TEST_CASE("uda objective masks and bookkeeping") {
  Rng rng(21);
  const int b = 4, df = 3, c = 3;
  const auto fs = oracle::random_matrix(rng, b, df), ft = oracle::random_matrix(rng, b, df);
  const auto zs = oracle::random_matrix(rng, b, c);
  Matrix<double> zt = Matrix<double>::Zero(b, c);
  for (int i = 0; i < b; ++i) zt(i, i % c) = 30.0;
  const std::vector<int> ys{0, 1, 2, 0};
  adapt::JointEmbedder<double> emb(df, c, 3);
  adapt::DomainDiscriminator<double> disc(emb.output_dim(), 8);
  for (auto* p : disc.parameters()) p->value.setZero();
  adapt::AdversarialHead<double> head{&disc, &emb, 1.0, false};

  for (auto* p : disc.parameters()) p->zero_grad();
  const auto mcc_only = adapt::uda_objective<double>(fs, zs, ys, ft, zt, adapt::UdaMethod::mcc, head, {}, {});
  CHECK(mcc_only.terms.cdan == 0.0);
  for (const auto* p : disc.parameters()) CHECK_FALSE(p->has_grad);

  const auto both = adapt::uda_objective<double>(fs, zs, ys, ft, zt, adapt::UdaMethod::cdan_mcc, head, {}, {});
  CHECK(both.terms.total == doctest::Approx(both.terms.ce + both.terms.cdan + both.terms.mcc).epsilon(1e-12));
  CHECK(std::abs(both.terms.total - (both.terms.ce + std::log(2.0))) < 1e-5);
}

TEST_CASE("cdan rejects unequal batches") {
  adapt::JointEmbedder<double> emb(2, 2, 0);
  adapt::DomainDiscriminator<double> disc(emb.output_dim(), 4);
  const Matrix<double> f2 = Matrix<double>::Ones(2, 2), f3 = Matrix<double>::Ones(3, 2);
  const Matrix<double> p2 = Matrix<double>::Constant(2, 2, 0.5), p3 = Matrix<double>::Constant(3, 2, 0.5);
  CHECK_THROWS_AS(adapt::cdan_loss<double>(f2, p2, f3, p3, disc, emb, 1.0, false), ContractError);
}

TEST_CASE("mcc invariants") {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const auto b = uniform_int(rng, 2, 10), c = uniform_int(rng, 2, 8);
    const Matrix<double> z = oracle::random_matrix(rng, b, c, 2.0);
    const double loss = adapt::mcc_loss<double>(z, {}, false).loss;
    CHECK(loss >= 0.0);
    CHECK(loss <= static_cast<double>(c - 1) / c + 1e-12);
    const Matrix<double> rows = z.colwise().reverse();
    const Matrix<double> cols = z.rowwise().reverse();
    Matrix<double> shifted = z;
    for (Eigen::Index i = 0; i < b; ++i) shifted.row(i).array() += normal(rng) * 5;
    CHECK(adapt::mcc_loss<double>(rows, {}, false).loss == doctest::Approx(loss).epsilon(1e-12));
    CHECK(adapt::mcc_loss<double>(cols, {}, false).loss == doctest::Approx(loss).epsilon(1e-12));
    CHECK(adapt::mcc_loss<double>(shifted, {}, false).loss == doctest::Approx(loss).epsilon(1e-10));
  }
}

TEST_CASE("cdan with lambda zero trains only the discriminator") {
  Rng rng(41);
  adapt::JointEmbedder<double> emb(4, 3, 2);
  adapt::DomainDiscriminator<double> disc(emb.output_dim(), 8);
  Rng init(1);
  disc.reset(init);
  const auto fs = oracle::random_matrix(rng, 3, 4), ft = oracle::random_matrix(rng, 3, 4);
  const auto ps = oracle::softmax(oracle::random_matrix(rng, 3, 3)), pt = oracle::softmax(oracle::random_matrix(rng, 3, 3));
  for (auto* p : disc.parameters()) p->zero_grad();
  const auto r0 = adapt::cdan_loss<double>(fs, ps, ft, pt, disc, emb, 0.0, false);
  CHECK(r0.grad_source.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r0.grad_target.cwiseAbs().maxCoeff() == 0.0);
  double total = 0;
  for (auto* p : disc.parameters()) total += p->grad.cwiseAbs().sum();
  CHECK(total > 0.0);
  const auto r1 = adapt::cdan_loss<double>(fs, ps, ft, pt, disc, emb, 0.8, false, false);
  CHECK(r1.loss == r0.loss);
  CHECK((emb.embed(3.0 * fs, ps) - 3.0 * emb.embed(fs, ps)).cwiseAbs().maxCoeff() < 1e-12);
}
