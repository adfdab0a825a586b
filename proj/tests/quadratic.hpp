#pragma once

#include "antgen/tuner.hpp"

#include <atomic>
#include <vector>

namespace testing {

/// Backend whose score is a closed-form quadratic in the model's free
/// parameters: score = floor + sum (p_i - center_i)^2 against a -100 dB band.
class QuadraticSimulator final : public antgen::Simulator {
public:
    QuadraticSimulator(std::vector<double> center, double floor, bool freeze_dims)
        : center_(std::move(center)), floor_(floor), freeze_(freeze_dims) {}

    static antgen::TargetSpec target() { return {{{2.0, 8.0, -100.0}}}; }

    double value(const std::vector<double>& p) const
    {
        double q = floor_;
        for (std::size_t i = 0; i < p.size(); ++i)
            q += (p[i] - center_[i]) * (p[i] - center_[i]);
        return q;
    }

    antgen::FrequencyResponse simulate(const antgen::SimRequest& req) const override
    {
        ++calls;
        const antgen::ParamVector pv(req.model, freeze_);
        const double q = value(pv.values);
        return {req.freqs, std::vector<double>(req.freqs.size(), std::min(0.5, -100.0 + q))};
    }
    std::string name() const override { return "quadratic"; }

    mutable std::atomic<std::size_t> calls{0};

private:
    std::vector<double> center_;
    double floor_;
    bool freeze_;
};

}  // namespace testing
