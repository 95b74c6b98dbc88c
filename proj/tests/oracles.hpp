#pragma once

// Independent reference computations and randomized checks shared by the
// unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "simuda/adapt/cdan.hpp"
#include "simuda/adapt/grl.hpp"
#include "simuda/adapt/mcc.hpp"
#include "simuda/core/random.hpp"

namespace simuda::oracle {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

inline std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

using Table = std::vector<std::vector<double>>;

/// Minimum class confusion, written out step by step with plain loops.
inline double mcc_reference(const Table& z, double temperature) {
  const std::size_t b = z.size();
  const std::size_t c = z[0].size();
  Table y(b, std::vector<double>(c));
  for (std::size_t i = 0; i < b; ++i) {
    double mx = z[i][0] / temperature;
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, z[i][j] / temperature);
    double s = 0;
    for (std::size_t j = 0; j < c; ++j) s += std::exp(z[i][j] / temperature - mx);
    for (std::size_t j = 0; j < c; ++j) y[i][j] = std::exp(z[i][j] / temperature - mx) / s;
  }
  std::vector<double> h(b, 0.0);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (y[i][j] > 0) h[i] -= y[i][j] * std::log(y[i][j]);
  double denom = 0;
  for (std::size_t i = 0; i < b; ++i) denom += 1 + std::exp(-h[i]);
  std::vector<double> w(b);
  for (std::size_t i = 0; i < b; ++i) w[i] = static_cast<double>(b) * (1 + std::exp(-h[i])) / denom;
  Table conf(c, std::vector<double>(c, 0.0));
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t i = 0; i < b; ++i) conf[j][k] += w[i] * y[i][j] * y[i][k];
  for (std::size_t j = 0; j < c; ++j) {
    double row = 0;
    for (std::size_t k = 0; k < c; ++k) row += conf[j][k];
    for (std::size_t k = 0; k < c; ++k) conf[j][k] /= row;
  }
  double off = 0;
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t k = 0; k < c; ++k)
      if (j != k) off += conf[j][k];
  return off / static_cast<double>(c);
}

inline nn::Matrix<double> to_matrix(const Table& t) {
  nn::Matrix<double> m(t.size(), t[0].size());
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t[0].size(); ++j) m(i, j) = t[i][j];
  return m;
}

inline Table random_table(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Table t(rows, std::vector<double>(cols));
  for (auto& r : t)
    for (auto& v : r) v = scale * normal(rng);
  return t;
}

inline nn::Matrix<double> random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  nn::Matrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * normal(rng);
  return m;
}

inline Outcome check_mcc_values() {
  Outcome out;
  adapt::MccConfig cfg;
  Rng rng(2024);
  // One-hot rows whose labels cover every class. A class that no row
  // predicts has a confusion row made of softmax tails only, which row
  // normalization spreads off the diagonal; the oracle agrees on that case.
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t c = 2 + trial % 11, b = c + static_cast<std::size_t>(trial % 5);
    Table z(b, std::vector<double>(c, 0.0));
    for (std::size_t i = 0; i < b; ++i) {
      const auto label = i < c ? (i + static_cast<std::size_t>(trial)) % c : static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(c) - 1));
      z[i][label] = 25.0;
    }
    const double loss = adapt::mcc_loss<double>(to_matrix(z), cfg, false).loss;
    if (!(loss < 1e-6)) out.fail(fmt("one-hot loss %.3g", loss));
  }
  {
    Table z(2, std::vector<double>(3, 0.0));
    z[0][0] = z[1][1] = 25.0;
    const double loss = adapt::mcc_loss<double>(to_matrix(z), cfg, false).loss;
    if (std::abs(loss - mcc_reference(z, 1.0)) > 1e-9) out.fail("absent-class one-hot case differs from the oracle");
  }
  for (int c : {2, 5, 12}) {
    const double expected = static_cast<double>(c - 1) / c;
    for (std::size_t b : {2u, 7u, 16u}) {
      const Table z(b, std::vector<double>(c, 0.3));
      const double loss = adapt::mcc_loss<double>(to_matrix(z), cfg, false).loss;
      const double ref = mcc_reference(z, 1.0);
      if (std::abs(loss - expected) > 1e-12) out.fail(fmt("uniform C=%g loss %.12g", c, loss));
      if (std::abs(ref - expected) > 1e-12) out.fail(fmt("oracle uniform C=%g gives %.12g", c, ref));
    }
  }
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t b = static_cast<std::size_t>(uniform_int(rng, 2, 16));
    const std::size_t c = static_cast<std::size_t>(uniform_int(rng, 2, 12));
    const double temperature = trial % 5 == 0 ? uniform(rng, 0.5, 3.0) : 1.0;
    const Table z = random_table(rng, b, c, uniform(rng, 0.5, 4.0));
    cfg.temperature = temperature;
    const double loss = adapt::mcc_loss<double>(to_matrix(z), cfg, false).loss;
    worst = std::max(worst, std::abs(loss - mcc_reference(z, temperature)));
  }
  if (worst > 1e-6) out.fail(fmt("random instances differ from the oracle by %.3g", worst));
  if (out.ok) out.detail = fmt("max |loss - oracle| over 50 random instances %.2e", worst);
  return out;
}

/// Norm-wise relative error between an analytic and a numeric gradient.
inline double relative_error(const nn::Matrix<double>& analytic, const nn::Matrix<double>& numeric) {
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-10});
  return (analytic - numeric).norm() / scale;
}

template <typename F>
nn::Matrix<double> numeric_gradient(nn::Matrix<double>& x, F&& loss, double h = 1e-6) {
  nn::Matrix<double> g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double lp = loss();
    x.data()[i] = keep - h;
    const double lm = loss();
    x.data()[i] = keep;
    g.data()[i] = (lp - lm) / (2 * h);
  }
  return g;
}

inline Outcome check_mcc_gradients(int instances) {
  Outcome out;
  Rng rng(77);
  double worst = 0;
  for (int t = 0; t < instances; ++t) {
    adapt::MccConfig cfg;
    cfg.temperature = t % 4 == 3 ? 2.0 : 1.0;
    const auto b = uniform_int(rng, 2, 8), c = uniform_int(rng, 2, 6);
    nn::Matrix<double> z = random_matrix(rng, b, c, 1.5);
    const auto analytic = adapt::mcc_loss<double>(z, cfg, true).grad;
    const auto numeric = numeric_gradient(z, [&] { return adapt::mcc_loss<double>(z, cfg, false).loss; });
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  if (worst > 1e-4) out.fail(fmt("mcc gradient relative error %.3g", worst));
  out.detail = fmt("mcc worst rel err %.2e", worst);
  return out;
}

inline nn::Matrix<double> softmax(const nn::Matrix<double>& z) { return nn::softmax_rows<double>(z); }

inline Outcome check_cdan_gradients(int instances) {
  Outcome out;
  Rng rng(91);
  double worst_f = 0, worst_w = 0;
  for (int t = 0; t < instances; ++t) {
    const bool randomized = t % 5 == 4;
    const int df = randomized ? 1100 : static_cast<int>(uniform_int(rng, 2, 6));
    const int c = randomized ? 4 : static_cast<int>(uniform_int(rng, 2, 5));
    const int b = static_cast<int>(uniform_int(rng, 2, 4));
    const bool cond = t % 2 == 1;
    const double lambda = uniform(rng, 0.2, 1.0);
    adapt::JointEmbedder<double> emb(df, c, 1000 + t, 12);
    adapt::DomainDiscriminator<double> disc(emb.output_dim(), 6);
    Rng init(500 + t);
    disc.reset(init);
    nn::Matrix<double> fs = random_matrix(rng, b, df, randomized ? 0.05 : 1.0);
    nn::Matrix<double> ft = random_matrix(rng, b, df, randomized ? 0.05 : 1.0);
    const nn::Matrix<double> ps = softmax(random_matrix(rng, b, c));
    const nn::Matrix<double> pt = softmax(random_matrix(rng, b, c));
    auto loss = [&] { return adapt::cdan_loss<double>(fs, ps, ft, pt, disc, emb, lambda, cond, false).loss; };

    for (auto* p : disc.parameters()) p->zero_grad();
    const auto res = adapt::cdan_loss<double>(fs, ps, ft, pt, disc, emb, lambda, cond, true);

    // Feature gradients arrive reversed: grad = -lambda * dL/dF.
    if (randomized) {
      // Spot-check a band of coordinates to keep the run short.
      nn::Matrix<double> fs_band = fs.leftCols(24);
      auto band_loss = [&] {
        nn::Matrix<double> keep = fs.leftCols(24);
        fs.leftCols(24) = fs_band;
        const double v = loss();
        fs.leftCols(24) = keep;
        return v;
      };
      const auto numeric = numeric_gradient(fs_band, band_loss);
      worst_f = std::max(worst_f, relative_error(res.grad_source.leftCols(24), -lambda * numeric));
    } else {
      worst_f = std::max(worst_f, relative_error(res.grad_source, -lambda * numeric_gradient(fs, loss)));
      worst_f = std::max(worst_f, relative_error(res.grad_target, -lambda * numeric_gradient(ft, loss)));
    }
    for (auto* p : disc.parameters()) {
      const auto numeric = numeric_gradient(p->value, loss);
      worst_w = std::max(worst_w, relative_error(p->grad, numeric));
    }
  }
  if (worst_f > 1e-4) out.fail(fmt("cdan feature gradient relative error %.3g", worst_f));
  if (worst_w > 1e-4) out.fail(fmt("cdan discriminator gradient relative error %.3g", worst_w));
  out.detail = fmt("cdan worst rel err features %.2e, discriminator %.2e", worst_f, worst_w);
  return out;
}

inline Outcome check_cdan_analytics() {
  Outcome out;
  Rng rng(13);
  // Chance discriminator: all weights zero gives sigmoid(0) = 1/2 everywhere.
  for (bool cond : {false, true}) {
    adapt::JointEmbedder<double> emb(5, 3, 1);
    adapt::DomainDiscriminator<double> disc(emb.output_dim(), 16);
    for (auto* p : disc.parameters()) p->value.setZero();
    const auto fs = random_matrix(rng, 4, 5), ft = random_matrix(rng, 4, 5);
    const auto ps = softmax(random_matrix(rng, 4, 3)), pt = softmax(random_matrix(rng, 4, 3));
    const double loss = adapt::cdan_loss<double>(fs, ps, ft, pt, disc, emb, 1.0, cond, false).loss;
    if (std::abs(loss - std::log(2.0)) > 1e-6) out.fail(fmt("chance loss %.9f", loss));
  }
  // Gradient reversal.
  const nn::Matrix<double> x = random_matrix(rng, 5, 7);
  const nn::Matrix<double> fwd = adapt::grl_forward(x);
  if (std::memcmp(fwd.data(), x.data(), sizeof(double) * x.size()) != 0) out.fail("grl forward is not bitwise identity");
  for (double lambda : {0.0, 0.3, 1.0, 2.5}) {
    const auto back = adapt::grl_backward<double>(x, lambda);
    if ((back + lambda * x).cwiseAbs().maxCoeff() > 1e-12) out.fail(fmt("grl backward wrong at lambda %g", lambda));
  }
  // Exact embedding index rule on basis vectors.
  for (int df : {1, 3, 6}) {
    for (int c : {2, 4}) {
      adapt::JointEmbedder<double> emb(df, c, 0);
      for (int k = 0; k < df; ++k) {
        for (int j = 0; j < c; ++j) {
          nn::Matrix<double> f = nn::Matrix<double>::Zero(1, df), p = nn::Matrix<double>::Zero(1, c);
          f(0, k) = 1;
          p(0, j) = 1;
          const auto joint = emb.embed(f, p);
          for (Eigen::Index idx = 0; idx < joint.cols(); ++idx) {
            const double want = idx == static_cast<Eigen::Index>(k) * c + j ? 1.0 : 0.0;
            if (joint(0, idx) != want) out.fail(fmt("exact embedding index rule broken (df=%g, C=%g)", df, c));
          }
        }
      }
    }
  }
  // Randomized embedding: each of the d_r output coordinates is one draw of
  // (r.f)(r.f')(g.p)(g.p'), whose expectation is <f,f'><p,p'>.
  const int df = 1030, c = 4, draws = 10000;
  adapt::JointEmbedder<double> emb(df, c, 99, draws);
  if (emb.mode() != adapt::EmbedMode::randomized) out.fail("expected randomized embedding for d_f*C > 4096");
  nn::Matrix<double> f(2, df), p(2, c);
  const nn::Matrix<double> base = random_matrix(rng, 1, df);
  f.row(0) = base;
  f.row(1) = 0.8 * base + 0.6 * random_matrix(rng, 1, df);
  p.row(0) << 0.7, 0.1, 0.1, 0.1;
  p.row(1) << 0.5, 0.3, 0.1, 0.1;
  const auto joint = emb.embed(f, p);
  const double estimate = joint.row(0).dot(joint.row(1));
  const double expected = f.row(0).dot(f.row(1)) * p.row(0).dot(p.row(1));
  const double rel = std::abs(estimate - expected) / std::abs(expected);
  if (rel > 0.05) out.fail(fmt("randomized inner product off by %.2f%%", 100 * rel));
  // Entropy weights: uniform rows give 1 + 1/C before normalization.
  const nn::Matrix<double> uniform12 = nn::Matrix<double>::Constant(3, 12, 1.0 / 12);
  const double raw = 1.0 + std::exp(-std::log(12.0));
  if (std::abs(raw - 1.083333333) > 1e-8) out.fail("entropy weight arithmetic");
  const auto w = adapt::entropy_weights<double>(uniform12);
  if ((w.array() - 1.0).abs().maxCoeff() > 1e-12) out.fail("uniform rows should normalize to weight 1");
  if (out.ok) out.detail = fmt("chance ln2, grl exact, randomized MC rel err %.2f%%", 100 * rel);
  return out;
}

}  // namespace simuda::oracle
