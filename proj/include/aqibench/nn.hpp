#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "aqibench/errors.hpp"
#include "aqibench/matrix.hpp"
#include "aqibench/rng.hpp"

namespace aqibench {

/// Trainable tensor: a value and an accumulated gradient of the same shape.
struct Parameter {
    Matrix value;
    Matrix grad;

    Parameter() = default;
    explicit Parameter(Matrix v) : value(std::move(v)), grad(value.rows(), value.cols()) {}
    Parameter(std::size_t rows, std::size_t cols) : value(rows, cols), grad(rows, cols) {}

    void zero_grad() { grad.fill(0.0); }
};

/// Seeded uniform init in ±1/sqrt(fan_in).
inline void init_uniform_fan_in(Parameter& p, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t r = 0; r < p.value.rows(); ++r) {
        for (std::size_t c = 0; c < p.value.cols(); ++c) {
            p.value(r, c) = rng.uniform(-bound, bound);
        }
    }
}

/// Sigmoid with a branch on the sign of the argument so exp never overflows.
inline double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// Affine layer y = x Wᵀ + b over batches of row vectors.
class DenseLayer {
  public:
    DenseLayer(std::size_t in_features, std::size_t out_features)
        : in_(in_features), out_(out_features), W(out_features, in_features), b(1, out_features) {}

    void init(Rng& rng) {
        init_uniform_fan_in(W, in_, rng);
        init_uniform_fan_in(b, in_, rng);
    }

    Matrix forward(const Matrix& x) {
        if (x.cols() != in_) {
            throw ValidationError("DenseLayer: expected " + std::to_string(in_) +
                                  " input features, got " + std::to_string(x.cols()));
        }
        x_cache_ = x;
        Matrix y = matmul_nt(x, W.value);
        add_row_vector(y, b.value);
        return y;
    }

    Matrix backward(const Matrix& dy) {
        W.grad += matmul_tn(dy, x_cache_);
        b.grad += column_sums(dy);
        return matmul(dy, W.value);
    }

    /// Cache-free forward for inference; safe on shared const models.
    Matrix apply(const Matrix& x) const {
        Matrix y = matmul_nt(x, W.value);
        add_row_vector(y, b.value);
        return y;
    }

    std::size_t in_features() const { return in_; }
    std::size_t out_features() const { return out_; }

    Parameter W;
    Parameter b;

  private:
    std::size_t in_;
    std::size_t out_;
    Matrix x_cache_;
};

class ReluLayer {
  public:
    Matrix forward(const Matrix& x) {
        mask_ = x;
        Matrix y = x;
        for (std::size_t i = 0; i < y.rows(); ++i) {
            for (std::size_t j = 0; j < y.cols(); ++j) {
                if (y(i, j) > 0.0) {
                    mask_(i, j) = 1.0;
                } else {
                    mask_(i, j) = 0.0;
                    y(i, j) = 0.0;
                }
            }
        }
        return y;
    }

    Matrix backward(const Matrix& dy) { return hadamard(dy, mask_); }

    static Matrix apply(const Matrix& x) {
        Matrix y = x;
        for (std::size_t i = 0; i < y.rows(); ++i) {
            for (std::size_t j = 0; j < y.cols(); ++j) {
                if (y(i, j) < 0.0) y(i, j) = 0.0;
            }
        }
        return y;
    }

  private:
    Matrix mask_;
};

/// Inverted dropout: surviving activations are scaled by 1/(1-rate) during
/// training so evaluation mode is the exact identity.
class DropoutLayer {
  public:
    explicit DropoutLayer(double rate) : rate_(rate) {
        if (rate < 0.0 || rate >= 1.0) {
            throw ValidationError("DropoutLayer: rate must be in [0,1)");
        }
    }

    Matrix forward(const Matrix& x, bool training, Rng& rng) {
        if (!training || rate_ == 0.0) {
            mask_ = Matrix(x.rows(), x.cols(), 1.0);
            return x;
        }
        const double scale = 1.0 / (1.0 - rate_);
        mask_ = Matrix(x.rows(), x.cols());
        Matrix y = x;
        for (std::size_t i = 0; i < y.rows(); ++i) {
            for (std::size_t j = 0; j < y.cols(); ++j) {
                if (rng.uniform() >= rate_) {
                    mask_(i, j) = scale;
                    y(i, j) *= scale;
                } else {
                    mask_(i, j) = 0.0;
                    y(i, j) = 0.0;
                }
            }
        }
        return y;
    }

    Matrix backward(const Matrix& dy) { return hadamard(dy, mask_); }

    double rate() const { return rate_; }

  private:
    double rate_;
    Matrix mask_;
};

struct LstmState {
    Matrix h;  // batch × hidden
    Matrix c;  // batch × hidden
};

struct LstmGrads {
    Matrix dx;
    Matrix dh_prev;
    Matrix dc_prev;
};

/// Single LSTM cell over a batch, standard gated formulation:
///   i = σ(W_i x + U_i h + b_i), f = σ(...), o = σ(...), c̃ = tanh(...),
///   c = f ⊙ c_prev + i ⊙ c̃, h = o ⊙ tanh(c).
/// Gate parameters are stacked row-wise in the order i, f, c̃, o.
class LstmCell {
  public:
    LstmCell(std::size_t input_size, std::size_t hidden_size)
        : in_(input_size),
          hidden_(hidden_size),
          Wx(4 * hidden_size, input_size),
          Wh(4 * hidden_size, hidden_size),
          b(1, 4 * hidden_size) {}

    void init(Rng& rng) {
        init_uniform_fan_in(Wx, in_, rng);
        init_uniform_fan_in(Wh, hidden_, rng);
        init_uniform_fan_in(b, hidden_, rng);
    }

    LstmState forward(const Matrix& x, const LstmState& prev) {
        if (x.cols() != in_) {
            throw ValidationError("LstmCell: expected " + std::to_string(in_) +
                                  " input features, got " + std::to_string(x.cols()));
        }
        if (prev.h.rows() != x.rows() || prev.h.cols() != hidden_ ||
            !prev.h.same_shape(prev.c)) {
            throw ValidationError("LstmCell: previous state shape mismatch");
        }
        const std::size_t n = x.rows();
        Matrix pre = matmul_nt(x, Wx.value);
        pre += matmul_nt(prev.h, Wh.value);
        add_row_vector(pre, b.value);

        x_cache_ = x;
        h_prev_cache_ = prev.h;
        c_prev_cache_ = prev.c;
        gate_i_ = Matrix(n, hidden_);
        gate_f_ = Matrix(n, hidden_);
        gate_g_ = Matrix(n, hidden_);
        gate_o_ = Matrix(n, hidden_);
        LstmState out;
        out.c = Matrix(n, hidden_);
        out.h = Matrix(n, hidden_);
        tanh_c_ = Matrix(n, hidden_);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t j = 0; j < hidden_; ++j) {
                const double zi = pre(r, j);
                const double zf = pre(r, hidden_ + j);
                const double zg = pre(r, 2 * hidden_ + j);
                const double zo = pre(r, 3 * hidden_ + j);
                const double i = stable_sigmoid(zi);
                const double f = stable_sigmoid(zf);
                const double g = std::tanh(zg);
                const double o = stable_sigmoid(zo);
                gate_i_(r, j) = i;
                gate_f_(r, j) = f;
                gate_g_(r, j) = g;
                gate_o_(r, j) = o;
                const double c = f * prev.c(r, j) + i * g;
                const double tc = std::tanh(c);
                out.c(r, j) = c;
                tanh_c_(r, j) = tc;
                out.h(r, j) = o * tc;
            }
        }
        return out;
    }

    /// dh/dc are gradients w.r.t. this step's outputs; returns gradients for
    /// the inputs and accumulates parameter gradients.
    LstmGrads backward(const Matrix& dh, const Matrix& dc_in) {
        const std::size_t n = dh.rows();
        if (dh.cols() != hidden_ || !dh.same_shape(dc_in)) {
            throw ValidationError("LstmCell::backward: gradient shape mismatch");
        }
        Matrix dpre(n, 4 * hidden_);
        LstmGrads out;
        out.dc_prev = Matrix(n, hidden_);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t j = 0; j < hidden_; ++j) {
                const double i = gate_i_(r, j);
                const double f = gate_f_(r, j);
                const double g = gate_g_(r, j);
                const double o = gate_o_(r, j);
                const double tc = tanh_c_(r, j);
                const double dho = dh(r, j);
                const double dc = dc_in(r, j) + dho * o * (1.0 - tc * tc);
                const double do_ = dho * tc;
                const double di = dc * g;
                const double df = dc * c_prev_cache_(r, j);
                const double dg = dc * i;
                out.dc_prev(r, j) = dc * f;
                dpre(r, j) = di * i * (1.0 - i);
                dpre(r, hidden_ + j) = df * f * (1.0 - f);
                dpre(r, 2 * hidden_ + j) = dg * (1.0 - g * g);
                dpre(r, 3 * hidden_ + j) = do_ * o * (1.0 - o);
            }
        }
        Wx.grad += matmul_tn(dpre, x_cache_);
        Wh.grad += matmul_tn(dpre, h_prev_cache_);
        b.grad += column_sums(dpre);
        out.dx = matmul(dpre, Wx.value);
        out.dh_prev = matmul(dpre, Wh.value);
        return out;
    }

    /// Cache-free forward for inference; safe on shared const models.
    LstmState apply(const Matrix& x, const LstmState& prev) const {
        const std::size_t n = x.rows();
        Matrix pre = matmul_nt(x, Wx.value);
        pre += matmul_nt(prev.h, Wh.value);
        add_row_vector(pre, b.value);
        LstmState out;
        out.c = Matrix(n, hidden_);
        out.h = Matrix(n, hidden_);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t j = 0; j < hidden_; ++j) {
                const double i = stable_sigmoid(pre(r, j));
                const double f = stable_sigmoid(pre(r, hidden_ + j));
                const double g = std::tanh(pre(r, 2 * hidden_ + j));
                const double o = stable_sigmoid(pre(r, 3 * hidden_ + j));
                const double c = f * prev.c(r, j) + i * g;
                out.c(r, j) = c;
                out.h(r, j) = o * std::tanh(c);
            }
        }
        return out;
    }

    LstmState zero_state(std::size_t batch) const {
        return LstmState{Matrix(batch, hidden_), Matrix(batch, hidden_)};
    }

    std::size_t input_size() const { return in_; }
    std::size_t hidden_size() const { return hidden_; }

    Parameter Wx;
    Parameter Wh;
    Parameter b;

  private:
    std::size_t in_;
    std::size_t hidden_;
    Matrix x_cache_, h_prev_cache_, c_prev_cache_;
    Matrix gate_i_, gate_f_, gate_g_, gate_o_, tanh_c_;
};

}  // namespace aqibench
