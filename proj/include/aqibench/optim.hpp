#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aqibench/errors.hpp"
#include "aqibench/matrix.hpp"
#include "aqibench/nn.hpp"

namespace aqibench {

enum class OptimizerKind { Adam, AdamW };

inline std::string_view optimizer_kind_name(OptimizerKind k) {
    return k == OptimizerKind::Adam ? "adam" : "adamw";
}

inline std::optional<OptimizerKind> optimizer_kind_from_string(std::string_view s) {
    if (s == "adam" || s == "Adam") return OptimizerKind::Adam;
    if (s == "adamw" || s == "AdamW") return OptimizerKind::AdamW;
    return std::nullopt;
}

/// Bias-corrected Adam over a set of registered parameters. AdamW applies
/// decoupled weight decay directly to the values (never to the gradients);
/// with weight_decay = 0 the two variants perform the identical update.
class Optimizer {
  public:
    Optimizer(OptimizerKind kind, std::vector<Parameter*> params, double lr,
              double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
              double weight_decay = 0.0)
        : kind_(kind),
          params_(std::move(params)),
          lr_(lr),
          beta1_(beta1),
          beta2_(beta2),
          eps_(eps),
          weight_decay_(weight_decay) {
        if (lr_ <= 0.0) throw ValidationError("Optimizer: learning rate must be positive");
        for (const Parameter* p : params_) {
            m_.emplace_back(p->value.rows(), p->value.cols());
            v_.emplace_back(p->value.rows(), p->value.cols());
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t p = 0; p < params_.size(); ++p) {
            Matrix& w = params_[p]->value;
            const Matrix& g = params_[p]->grad;
            Matrix& m = m_[p];
            Matrix& v = v_[p];
            for (std::size_t i = 0; i < w.rows(); ++i) {
                for (std::size_t j = 0; j < w.cols(); ++j) {
                    const double grad = g(i, j);
                    m(i, j) = beta1_ * m(i, j) + (1.0 - beta1_) * grad;
                    v(i, j) = beta2_ * v(i, j) + (1.0 - beta2_) * grad * grad;
                    if (kind_ == OptimizerKind::AdamW && weight_decay_ != 0.0) {
                        w(i, j) -= lr_ * weight_decay_ * w(i, j);
                    }
                    const double mhat = m(i, j) / bc1;
                    const double vhat = v(i, j) / bc2;
                    w(i, j) -= lr_ * mhat / (std::sqrt(vhat) + eps_);
                }
            }
        }
    }

    void zero_grad() {
        for (Parameter* p : params_) p->zero_grad();
    }

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }
    OptimizerKind kind() const { return kind_; }
    long step_count() const { return t_; }

  private:
    OptimizerKind kind_;
    std::vector<Parameter*> params_;
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    double weight_decay_;
    long t_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

/// Halves the learning rate once the validation loss has failed to improve
/// by more than min_delta for strictly more than `patience` epochs
/// (the reduce-on-plateau convention: the counter must exceed patience).
class PlateauScheduler {
  public:
    explicit PlateauScheduler(double factor = 0.5, int patience = 10, double min_delta = 1e-6,
                              double min_lr = 0.0)
        : factor_(factor), patience_(patience), min_delta_(min_delta), min_lr_(min_lr) {
        if (factor_ <= 0.0 || factor_ >= 1.0) {
            throw ValidationError("PlateauScheduler: factor must be in (0,1)");
        }
    }

    /// Feed one epoch's validation loss; returns the learning rate to use next.
    double observe(double val_loss, double current_lr) {
        if (val_loss < best_ - min_delta_) {
            best_ = val_loss;
            bad_ = 0;
            return current_lr;
        }
        ++bad_;
        if (bad_ > patience_) {
            bad_ = 0;
            const double reduced = current_lr * factor_;
            return reduced < min_lr_ ? min_lr_ : reduced;
        }
        return current_lr;
    }

    int bad_epochs() const { return bad_; }

  private:
    double factor_;
    int patience_;
    double min_delta_;
    double min_lr_;
    double best_ = std::numeric_limits<double>::infinity();
    int bad_ = 0;
};

/// Signals a halt after `patience` consecutive epochs without improvement.
/// The caller snapshots weights on improving epochs and restores the best
/// snapshot when stopping.
class EarlyStopper {
  public:
    explicit EarlyStopper(int patience = 20, double min_delta = 0.0)
        : patience_(patience), min_delta_(min_delta) {}

    /// Returns true if this epoch improved on the best seen so far.
    bool observe(double val_loss) {
        if (val_loss < best_ - min_delta_) {
            best_ = val_loss;
            bad_ = 0;
            return true;
        }
        ++bad_;
        return false;
    }

    bool should_stop() const { return bad_ >= patience_; }
    double best() const { return best_; }
    int bad_epochs() const { return bad_; }

  private:
    int patience_;
    double min_delta_;
    double best_ = std::numeric_limits<double>::infinity();
    int bad_ = 0;
};

inline std::vector<Matrix> snapshot_values(const std::vector<Parameter*>& params) {
    std::vector<Matrix> snap;
    snap.reserve(params.size());
    for (const Parameter* p : params) snap.push_back(p->value);
    return snap;
}

inline void restore_values(const std::vector<Parameter*>& params,
                           const std::vector<Matrix>& snap) {
    if (params.size() != snap.size()) {
        throw ValidationError("restore_values: snapshot size mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

}  // namespace aqibench
