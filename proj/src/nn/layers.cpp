#include "gazenet/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "gazenet/error.hpp"
#include "gazenet/kernels.hpp"

namespace gazenet::nn {

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(std::size_t in_channels, std::size_t filters, std::size_t kernel, std::size_t stride)
    : in_(in_channels), out_(filters), k_(kernel), s_(stride) {
  if (in_ == 0 || out_ == 0 || k_ == 0 || s_ == 0) fail(ErrorCategory::Config, "conv1d dimensions must be positive");
  w_.assign(out_ * in_ * k_, 0.0);
  b_.assign(out_, 0.0);
  dw_.assign(w_.size(), 0.0);
  db_.assign(b_.size(), 0.0);
}

Batch Conv1d::forward(const Batch& x, Mode, Rng*) {
  if (x.c != in_) fail(ErrorCategory::Shape, "conv1d: expected " + std::to_string(in_) + " input channels");
  if (x.t < k_) {
    fail(ErrorCategory::Shape, "conv1d: input length " + std::to_string(x.t) + " shorter than kernel " +
                                   std::to_string(k_));
  }
  const std::size_t t_out = (x.t - k_) / s_ + 1;
  const auto& kern = kernels::active();
  Batch y(x.n, out_, t_out);
  for (std::size_t n = 0; n < x.n; ++n) {
    for (std::size_t o = 0; o < out_; ++o) {
      double* yrow = y.row(n, o);
      std::fill_n(yrow, t_out, b_[o]);
      for (std::size_t c = 0; c < in_; ++c) {
        const double* xrow = x.row(n, c);
        const double* w = &w_[(o * in_ + c) * k_];
        for (std::size_t j = 0; j < k_; ++j) kern.axpy_gather(w[j], xrow + j, s_, yrow, t_out);
      }
    }
  }
  x_ = x;
  return y;
}

Batch Conv1d::backward(const Batch& dy) {
  const std::size_t t_out = dy.t;
  const auto& kern = kernels::active();
  Batch dx(x_.n, in_, x_.t);
  for (std::size_t n = 0; n < dy.n; ++n) {
    for (std::size_t o = 0; o < out_; ++o) {
      const double* grow = dy.row(n, o);
      db_[o] += kern.sum(grow, t_out);
      for (std::size_t c = 0; c < in_; ++c) {
        const double* xrow = x_.row(n, c);
        double* dxrow = dx.row(n, c);
        const double* w = &w_[(o * in_ + c) * k_];
        double* dw = &dw_[(o * in_ + c) * k_];
        for (std::size_t j = 0; j < k_; ++j) {
          dw[j] += kern.dot_strided(grow, xrow + j, s_, t_out);
          kern.axpy_scatter(w[j], grow, dxrow + j, s_, t_out);
        }
      }
    }
  }
  return dx;
}

std::vector<ParamSlot> Conv1d::params() {
  return {{"weight", {out_, in_, k_}, &w_, &dw_, true}, {"bias", {out_}, &b_, &db_, true}};
}

// ---------------------------------------------------------------- ReLU

Batch ReLU::forward(const Batch& x, Mode, Rng*) {
  Batch y = x;
  for (double& v : y.v) v = v > 0.0 ? v : 0.0;
  x_ = x;
  return y;
}

Batch ReLU::backward(const Batch& dy) {
  Batch dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i) {
    if (!(x_.v[i] > 0.0)) dx.v[i] = 0.0;
  }
  return dx;
}

// ---------------------------------------------------------------- BatchNorm1d

BatchNorm1d::BatchNorm1d(std::size_t channels, double momentum, double eps)
    : c_(channels),
      momentum_(momentum),
      eps_(eps),
      gamma_(channels, 1.0),
      beta_(channels, 0.0),
      rmean_(channels, 0.0),
      rvar_(channels, 1.0),
      dgamma_(channels, 0.0),
      dbeta_(channels, 0.0),
      drmean_(channels, 0.0),
      drvar_(channels, 0.0) {}

Batch BatchNorm1d::forward(const Batch& x, Mode mode, Rng*) {
  if (x.c != c_) fail(ErrorCategory::Shape, "batchnorm: channel count mismatch");
  if (mode == Mode::Train && x.n < 2) {
    fail(ErrorCategory::Shape, "batchnorm: training mode needs a batch of at least two samples");
  }
  mode_ = mode;
  Batch y(x.n, x.c, x.t);
  xhat_ = Batch(x.n, x.c, x.t);
  inv_std_.assign(c_, 0.0);
  const double count = static_cast<double>(x.n * x.t);
  for (std::size_t ch = 0; ch < c_; ++ch) {
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::Train) {
      for (std::size_t n = 0; n < x.n; ++n) {
        const double* r = x.row(n, ch);
        for (std::size_t t = 0; t < x.t; ++t) mean += r[t];
      }
      mean /= count;
      for (std::size_t n = 0; n < x.n; ++n) {
        const double* r = x.row(n, ch);
        for (std::size_t t = 0; t < x.t; ++t) var += (r[t] - mean) * (r[t] - mean);
      }
      var /= count;
      rmean_[ch] = momentum_ * rmean_[ch] + (1.0 - momentum_) * mean;
      rvar_[ch] = momentum_ * rvar_[ch] + (1.0 - momentum_) * var;
    } else {
      mean = rmean_[ch];
      var = rvar_[ch];
    }
    const double inv = 1.0 / std::sqrt(var + eps_);
    inv_std_[ch] = inv;
    for (std::size_t n = 0; n < x.n; ++n) {
      const double* r = x.row(n, ch);
      double* h = xhat_.row(n, ch);
      double* o = y.row(n, ch);
      for (std::size_t t = 0; t < x.t; ++t) {
        h[t] = (r[t] - mean) * inv;
        o[t] = gamma_[ch] * h[t] + beta_[ch];
      }
    }
  }
  return y;
}

Batch BatchNorm1d::backward(const Batch& dy) {
  Batch dx(dy.n, dy.c, dy.t);
  const double count = static_cast<double>(dy.n * dy.t);
  for (std::size_t ch = 0; ch < c_; ++ch) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < dy.n; ++n) {
      const double* g = dy.row(n, ch);
      const double* h = xhat_.row(n, ch);
      for (std::size_t t = 0; t < dy.t; ++t) {
        sum_dy += g[t];
        sum_dy_xhat += g[t] * h[t];
      }
    }
    dbeta_[ch] += sum_dy;
    dgamma_[ch] += sum_dy_xhat;
    const double scale = gamma_[ch] * inv_std_[ch];
    for (std::size_t n = 0; n < dy.n; ++n) {
      const double* g = dy.row(n, ch);
      const double* h = xhat_.row(n, ch);
      double* d = dx.row(n, ch);
      if (mode_ == Mode::Train) {
        for (std::size_t t = 0; t < dy.t; ++t) {
          d[t] = scale * (g[t] - sum_dy / count - h[t] * sum_dy_xhat / count);
        }
      } else {
        for (std::size_t t = 0; t < dy.t; ++t) d[t] = scale * g[t];
      }
    }
  }
  return dx;
}

std::vector<ParamSlot> BatchNorm1d::params() {
  return {{"gamma", {c_}, &gamma_, &dgamma_, true},
          {"beta", {c_}, &beta_, &dbeta_, true},
          {"running_mean", {c_}, &rmean_, &drmean_, false},
          {"running_var", {c_}, &rvar_, &drvar_, false}};
}

// ---------------------------------------------------------------- Pool1d

Batch Pool1d::forward(const Batch& x, Mode, Rng*) {
  const std::size_t t_out = x.t / 2;
  if (t_out == 0) fail(ErrorCategory::Shape, "pool1d: input length below pool size 2");
  in_t_ = x.t;
  Batch y(x.n, x.c, t_out);
  if (kind_ == PoolKind::Max) argmax_.assign(x.n * x.c * t_out, 0);
  for (std::size_t n = 0; n < x.n; ++n) {
    for (std::size_t ch = 0; ch < x.c; ++ch) {
      const double* r = x.row(n, ch);
      double* o = y.row(n, ch);
      for (std::size_t t = 0; t < t_out; ++t) {
        const double a = r[2 * t];
        const double b = r[2 * t + 1];
        if (kind_ == PoolKind::Average) {
          o[t] = 0.5 * (a + b);
        } else {
          const bool second = b > a;
          o[t] = second ? b : a;
          argmax_[(n * x.c + ch) * t_out + t] = second ? 1 : 0;
        }
      }
    }
  }
  return y;
}

Batch Pool1d::backward(const Batch& dy) {
  Batch dx(dy.n, dy.c, in_t_);
  for (std::size_t n = 0; n < dy.n; ++n) {
    for (std::size_t ch = 0; ch < dy.c; ++ch) {
      const double* g = dy.row(n, ch);
      double* d = dx.row(n, ch);
      for (std::size_t t = 0; t < dy.t; ++t) {
        if (kind_ == PoolKind::Average) {
          d[2 * t] = 0.5 * g[t];
          d[2 * t + 1] = 0.5 * g[t];
        } else {
          d[2 * t + argmax_[(n * dy.c + ch) * dy.t + t]] = g[t];
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) fail(ErrorCategory::Config, "dropout rate must lie in [0, 1)");
}

Batch Dropout::forward(const Batch& x, Mode mode, Rng* rng) {
  if (mode == Mode::Infer || rate_ == 0.0) {
    mask_.assign(x.v.size(), 1.0);
    return x;
  }
  if (rng == nullptr) fail(ErrorCategory::InvalidArgument, "dropout in training mode needs an RNG");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate_);
  mask_.resize(x.v.size());
  Batch y = x;
  for (std::size_t i = 0; i < y.v.size(); ++i) {
    mask_[i] = u(*rng) >= rate_ ? keep_scale : 0.0;
    y.v[i] *= mask_[i];
  }
  return y;
}

Batch Dropout::backward(const Batch& dy) {
  Batch dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i) dx.v[i] *= mask_[i];
  return dx;
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t inputs, std::size_t units) : in_(inputs), out_(units) {
  if (in_ == 0 || out_ == 0) fail(ErrorCategory::Config, "dense dimensions must be positive");
  w_.assign(out_ * in_, 0.0);
  b_.assign(out_, 0.0);
  dw_.assign(w_.size(), 0.0);
  db_.assign(b_.size(), 0.0);
}

Batch Dense::forward(const Batch& x, Mode, Rng*) {
  if (x.sample_size() != in_) {
    fail(ErrorCategory::Shape, "dense: expected " + std::to_string(in_) + " inputs, got " +
                                   std::to_string(x.sample_size()));
  }
  const auto& kern = kernels::active();
  Batch y(x.n, out_, 1);
  for (std::size_t n = 0; n < x.n; ++n) {
    const double* xs = x.sample(n);
    double* ys = y.sample(n);
    for (std::size_t o = 0; o < out_; ++o) ys[o] = b_[o] + kern.dot(&w_[o * in_], xs, in_);
  }
  x_ = x;
  return y;
}

Batch Dense::backward(const Batch& dy) {
  const auto& kern = kernels::active();
  Batch dx(x_.n, x_.c, x_.t);
  for (std::size_t n = 0; n < dy.n; ++n) {
    const double* g = dy.sample(n);
    const double* xs = x_.sample(n);
    double* dxs = dx.sample(n);
    for (std::size_t o = 0; o < out_; ++o) {
      db_[o] += g[o];
      kern.axpy(g[o], xs, &dw_[o * in_], in_);
      kern.axpy(g[o], &w_[o * in_], dxs, in_);
    }
  }
  return dx;
}

std::vector<ParamSlot> Dense::params() {
  return {{"weight", {out_, in_}, &w_, &dw_, true}, {"bias", {out_}, &b_, &db_, true}};
}

}  // namespace gazenet::nn
