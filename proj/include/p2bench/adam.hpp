#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "p2bench/tensor.hpp"

namespace p2bench::ad {

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are kept per parameter slot, in
// the order the state was initialized with.
class AdamState {
public:
    AdamState() = default;
    explicit AdamState(AdamConfig cfg) : cfg_(cfg) {}

    void init(const std::vector<Tensor*>& params) {
        m_.clear();
        v_.clear();
        for (const Tensor* p : params) {
            m_.push_back(Tensor::zeros_like(*p));
            v_.push_back(Tensor::zeros_like(*p));
        }
        step_ = 0;
    }

    long step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<Tensor>& first_moments() const { return m_; }
    const std::vector<Tensor>& second_moments() const { return v_; }

    void apply(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
        if (params.size() != m_.size() || grads.size() != m_.size())
            throw std::invalid_argument("adam: parameter/gradient count mismatch");
        ++step_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        for (std::size_t p = 0; p < params.size(); ++p) {
            Tensor& x = *params[p];
            const Tensor& g = grads[p];
            if (!x.same_shape(g) || !x.same_shape(m_[p]))
                throw std::invalid_argument("adam: shape mismatch");
            for (std::size_t i = 0; i < x.size(); ++i) {
                m_[p].data[i] = cfg_.beta1 * m_[p].data[i] + (1.0 - cfg_.beta1) * g.data[i];
                v_[p].data[i] =
                    cfg_.beta2 * v_[p].data[i] + (1.0 - cfg_.beta2) * g.data[i] * g.data[i];
                const double mhat = m_[p].data[i] / c1;
                const double vhat = v_[p].data[i] / c2;
                x.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

private:
    AdamConfig cfg_;
    long step_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace p2bench::ad
