#include "antgen/tuner.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

namespace antgen {

ParamVector::ParamVector(const AntennaModel& model, bool freeze_dims) : base_(model), freeze_(freeze_dims)
{
    const Rect ext = model.space.extended_bounds();
    for (std::size_t i = 0; i < model.dims.size(); ++i) {
        const std::string tag = "c" + std::to_string(i + 1) + ".";
        const auto add = [&](char field, double value, double lo, double hi) {
            slots_.push_back({i, field});
            values.push_back(value);
            lower.push_back(lo);
            upper.push_back(hi);
            names.push_back(tag + field);
        };
        const ComponentDims& d = model.dims.dims[i];
        if (!freeze_dims) {
            add('w', d.width, kMinComponentSize, ext.w);
            add('h', d.height, kMinComponentSize, ext.h);
        }
        add('x', model.positions[i].x, ext.x, ext.right() - kMinComponentSize);
        if (i > 0)
            add('y', model.positions[i].y, ext.y, ext.top() - kMinComponentSize);
    }
}

std::vector<double> ParamVector::project(std::vector<double> p) const
{
    if (p.size() != values.size())
        throw Error("parameter vector has " + std::to_string(p.size()) + " entries, expected " +
                    std::to_string(values.size()));
    for (std::size_t j = 0; j < p.size(); ++j)
        p[j] = std::clamp(p[j], lower[j], upper[j]);

    const Rect ext = base_.space.extended_bounds();
    std::vector<ComponentDims> dims = base_.dims.dims;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (slots_[j].field == 'w')
            dims[slots_[j].component].width = p[j];
        else if (slots_[j].field == 'h')
            dims[slots_[j].component].height = p[j];
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
        const auto& d = dims[slots_[j].component];
        if (slots_[j].field == 'x')
            p[j] = std::min(p[j], ext.right() - d.width);
        else if (slots_[j].field == 'y')
            p[j] = std::min(p[j], ext.top() - d.height);
    }
    return p;
}

AntennaModel ParamVector::to_model(const std::vector<double>& p) const
{
    if (p.size() != values.size())
        throw Error("parameter vector has " + std::to_string(p.size()) + " entries, expected " +
                    std::to_string(values.size()));
    DimensionSet dims = base_.dims;
    std::vector<ComponentPos> pos = base_.positions;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const Slot& s = slots_[j];
        switch (s.field) {
        case 'w': dims.dims[s.component].width = p[j]; break;
        case 'h': dims.dims[s.component].height = p[j]; break;
        case 'x': pos[s.component].x = p[j]; break;
        default: pos[s.component].y = p[j]; break;
        }
    }
    return assemble_model(base_.space, dims, pos);
}

void validate(const TrustRegionConfig& cfg)
{
    if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0 && cfg.grow > 1.0))
        throw Error("trust region needs 0 < shrink < 1 < grow");
    if (!(cfg.eta_low >= 0.0 && cfg.eta_low <= cfg.eta_high))
        throw Error("trust region acceptance thresholds out of order");
    if (cfg.budget < 1)
        throw Error("simulation budget must be at least 1");
    if (!(cfg.initial_radius > 0.0 && cfg.min_radius > 0.0 && cfg.max_radius >= cfg.initial_radius))
        throw Error("trust region radii must be positive with max >= initial");
    if (!(cfg.fd_fraction > 0.0 && cfg.fd_fraction <= 1.0))
        throw Error("finite-difference fraction must lie in (0, 1]");
}

std::string to_string(StopReason r)
{
    switch (r) {
    case StopReason::TargetMet: return "target-met";
    case StopReason::Budget: return "budget";
    case StopReason::Converged: return "converged";
    }
    return "?";
}

namespace {

/// Damped BFGS update; skipped when the curvature condition fails.
void bfgs_update(Eigen::MatrixXd& B, const Eigen::VectorXd& s, const Eigen::VectorXd& y, bool& first)
{
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm()))
        return;
    if (first) {
        B = Eigen::MatrixXd::Identity(B.rows(), B.cols()) * (y.dot(y) / sy);
        first = false;
    }
    const Eigen::VectorXd Bs = B * s;
    B += y * y.transpose() / sy - Bs * Bs.transpose() / s.dot(Bs);
}

/// Minimizer of g.s + s.B.s/2 within |s| <= radius along the dogleg path.
Eigen::VectorXd dogleg(const Eigen::MatrixXd& B, const Eigen::VectorXd& g, double radius)
{
    const double gBg = g.dot(B * g);
    const Eigen::VectorXd steepest = -g * (radius / g.norm());
    if (!(gBg > 0.0))
        return steepest;
    const Eigen::VectorXd pu = -g * (g.dot(g) / gBg);
    if (pu.norm() >= radius)
        return steepest;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(B);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        return pu;
    const Eigen::VectorXd pb = -ldlt.solve(g);
    if (!pb.allFinite())
        return pu;
    if (pb.norm() <= radius)
        return pb;
    // |pu + tau (pb - pu)| = radius
    const Eigen::VectorXd d = pb - pu;
    const double a = d.dot(d), b = 2.0 * pu.dot(d), c = pu.dot(pu) - radius * radius;
    const double tau = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
    return pu + tau * d;
}

}  // namespace

BoxResult minimize_box(const std::function<double(const std::vector<double>&)>& objective,
                       std::vector<double> start, const std::vector<double>& lower,
                       const std::vector<double>& upper, const TrustRegionConfig& cfg,
                       const std::function<std::vector<double>(std::vector<double>)>& project)
{
    validate(cfg);
    const std::size_t n = start.size();
    if (lower.size() != n || upper.size() != n)
        throw Error("bounds do not match the parameter count");
    if (cfg.budget < n + 1)
        throw Error("budget " + std::to_string(cfg.budget) + " cannot fit one model of " + std::to_string(n) +
                    " parameters (needs " + std::to_string(n + 1) + ")");
    std::vector<double> range(n);
    for (std::size_t j = 0; j < n; ++j) {
        range[j] = upper[j] - lower[j];
        if (!(range[j] > 0.0))
            throw Error("empty bound range for parameter " + std::to_string(j));
    }
    const auto feasible = [&](std::vector<double> p) {
        for (std::size_t j = 0; j < n; ++j)
            p[j] = std::clamp(p[j], lower[j], upper[j]);
        return project ? project(std::move(p)) : p;
    };
    const auto check_bounds = [&](const std::vector<double>& p) {
        for (std::size_t j = 0; j < n; ++j)
            if (p[j] < lower[j] || p[j] > upper[j])
                throw Error("trust region evaluated an out-of-bounds point");
    };

    BoxResult res;
    double radius = cfg.initial_radius;
    const auto x_scaled = [&](const std::vector<double>& p) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j)
            v[static_cast<Eigen::Index>(j)] = p[j] / range[j];
        return v;
    };
    // Quasi-Newton curvature of the local model, in scaled coordinates.
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    bool first_update = true;
    bool have_prev = false;
    Eigen::VectorXd prev_x, prev_g;
    const auto record = [&](const std::vector<double>& p, double v, const char* kind) {
        ++res.evaluations;
        if (res.trace.empty() || v < res.best_value) {
            res.best_value = v;
            res.best = p;
        }
        res.trace.push_back({res.evaluations, kind, v, res.best_value, radius, false, p});
    };

    std::vector<double> x = feasible(std::move(start));
    check_bounds(x);
    double fx = objective(x);
    record(x, fx, "start");
    res.trace.back().accepted = true;
    if (fx <= 0.0) {
        res.reason = StopReason::TargetMet;
        return res;
    }

    while (true) {
        if (radius < cfg.min_radius * cfg.initial_radius) {
            res.reason = StopReason::Converged;
            break;
        }
        if (cfg.budget - res.evaluations < n + 1) {
            res.reason = StopReason::Budget;
            break;
        }

        // Forward differences in scaled coordinates; backward at the upper bound.
        std::vector<std::vector<double>> probes(n);
        std::vector<double> step(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            double h = cfg.fd_fraction * radius * range[j];
            if (x[j] + h > upper[j])
                h = -h;
            std::vector<double> p = x;
            p[j] += h;
            probes[j] = feasible(std::move(p));
            step[j] = (probes[j][j] - x[j]) / range[j];
        }
        std::vector<double> fp(n);
        parallel_for(n, cfg.workers, [&](std::size_t j) {
            check_bounds(probes[j]);
            fp[j] = objective(probes[j]);
        });
        const std::size_t probe_row = res.trace.size();
        std::size_t best_probe = 0;
        for (std::size_t j = 0; j < n; ++j) {
            record(probes[j], fp[j], "probe");
            if (fp[j] < fp[best_probe])
                best_probe = j;
        }

        Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j)
            if (step[j] != 0.0 && std::isfinite(fp[j]))
                g[static_cast<Eigen::Index>(j)] = (fp[j] - fx) / step[j];

        if (have_prev) {
            bfgs_update(B, x_scaled(x) - prev_x, g - prev_g, first_update);
            have_prev = false;
        }

        bool moved = false;
        if (g.norm() > 0.0) {
            const Eigen::VectorXd s_model = dogleg(B, g, radius);
            std::vector<double> t = x;
            for (std::size_t j = 0; j < n; ++j)
                t[j] += s_model[static_cast<Eigen::Index>(j)] * range[j];
            t = feasible(std::move(t));
            const Eigen::VectorXd s_taken = x_scaled(t) - x_scaled(x);
            const double predicted = -(g.dot(s_taken) + 0.5 * s_taken.dot(B * s_taken));
            if (predicted > 0.0) {
                check_bounds(t);
                const double ft = objective(t);
                record(t, ft, "trial");
                const double rho = (fx - ft) / predicted;
                if (rho > 0.0) {
                    prev_x = x_scaled(x);
                    prev_g = g;
                    have_prev = true;
                    x = t;
                    fx = ft;
                    moved = true;
                    res.trace.back().accepted = true;
                }
                if (rho > cfg.eta_high && s_taken.norm() > 0.8 * radius)
                    radius = std::min(radius * cfg.grow, cfg.max_radius);
                else if (rho < cfg.eta_low)
                    radius *= cfg.shrink;
            } else {
                radius *= cfg.shrink;
            }
        } else {
            radius *= cfg.shrink;
        }
        // A probe that beats the center is a free improvement.
        if (!moved && fp[best_probe] < fx) {
            prev_x = x_scaled(x);
            prev_g = g;
            have_prev = true;
            x = probes[best_probe];
            fx = fp[best_probe];
            res.trace[probe_row + best_probe].accepted = true;
        }
        if (fx <= 0.0) {
            res.reason = StopReason::TargetMet;
            break;
        }
    }
    return res;
}

OptimizeResult optimize(const AntennaModel& start, const TrustRegionConfig& cfg, const Simulator& backend,
                        const TargetSpec& target, const std::vector<double>& freqs)
{
    validate(target);
    const ParamVector pv(start, cfg.freeze_dims);
    std::mutex mu;
    std::map<std::vector<double>, FrequencyResponse> responses;
    bool first = true;

    const auto objective = [&](const std::vector<double>& p) {
        const AntennaModel m = pv.to_model(p);
        FrequencyResponse r;
        try {
            r = backend.simulate({m, freqs});
        } catch (const SimulationError& e) {
            {
                std::lock_guard lock(mu);
                if (first)
                    throw;
            }
            std::cerr << "optimize: simulation failed, scoring as +inf: " << e.what() << '\n';
            return std::numeric_limits<double>::infinity();
        }
        const double v = score(r, target).value;
        std::lock_guard lock(mu);
        first = false;
        responses.emplace(p, std::move(r));
        return v;
    };

    BoxResult box = minimize_box(objective, pv.values, pv.lower, pv.upper, cfg,
                                 [&pv](std::vector<double> p) { return pv.project(std::move(p)); });
    OptimizeResult out;
    out.best = pv.to_model(box.best);
    out.best_response = responses.at(box.best);
    out.best_score = {box.best_value};
    out.simulations = box.evaluations;
    out.reason = box.reason;
    out.trace = std::move(box.trace);
    out.param_names = pv.names;
    return out;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::vector<std::string>& names,
                     const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << "eval,kind,score,best,radius,accepted";
    for (const auto& n : names)
        out << ',' << n;
    out << '\n';
    for (const auto& r : trace) {
        out << r.eval << ',' << r.kind << ',' << format_double(r.score) << ',' << format_double(r.best) << ','
            << format_double(r.radius) << ',' << r.accepted;
        for (double v : r.params)
            out << ',' << format_double(v);
        out << '\n';
    }
}

PerturbMode perturb_mode_from_string(const std::string& s)
{
    if (s == "multiplicative")
        return PerturbMode::Multiplicative;
    if (s == "additive")
        return PerturbMode::Additive;
    throw Error("unknown perturbation mode '" + s + "'");
}

std::string to_string(PerturbMode mode)
{
    return mode == PerturbMode::Multiplicative ? "multiplicative" : "additive";
}

ToleranceResult tolerance_study(const AntennaModel& model, const ToleranceConfig& cfg, const Simulator& backend,
                                const TargetSpec& target, const std::vector<double>& freqs)
{
    if (!(cfg.perturb_fraction >= 0.0 && cfg.perturb_fraction < 1.0))
        throw Error("perturbation fraction must lie in [0, 1)");
    if (cfg.max_attempts < 1)
        throw Error("max_attempts must be at least 1");
    validate(target);
    const ParamVector pv(model, cfg.freeze_dims);

    ToleranceResult res;
    res.baseline = backend.simulate({model, freqs});
    res.baseline_score = score(res.baseline, target);

    const double p = cfg.perturb_fraction;
    for (std::size_t run = 0; run < cfg.n_runs; ++run) {
        Rng rng(derive_seed(cfg.seed, "tolerance/run/" + std::to_string(run)));
        std::optional<AntennaModel> perturbed;
        for (std::size_t attempt = 0; attempt < cfg.max_attempts && !perturbed; ++attempt) {
            std::vector<double> v = pv.values;
            for (std::size_t j = 0; j < v.size(); ++j) {
                const double u = p == 0.0 ? 0.0 : rng.uniform(-p, p);
                v[j] = cfg.mode == PerturbMode::Multiplicative ? v[j] * (1.0 + u)
                                                               : v[j] + u * (pv.upper[j] - pv.lower[j]);
            }
            try {
                perturbed = pv.to_model(v);
            } catch (const Error& e) {
                ++res.resamples;
                std::cerr << "tolerance: run " << run << " attempt " << attempt << " unplaceable, redrawing: "
                          << e.what() << '\n';
            }
        }
        if (!perturbed)
            throw Error("tolerance run " + std::to_string(run) + ": no placeable perturbation in " +
                        std::to_string(cfg.max_attempts) + " attempts");
        FrequencyResponse r = backend.simulate({*perturbed, freqs});
        const Score s = score(r, target);
        if (meets_target(s))
            ++res.passed;
        res.models.push_back(std::move(*perturbed));
        res.responses.push_back(std::move(r));
        res.scores.push_back(s);
    }
    return res;
}

void write_tolerance_csv(const ToleranceResult& result, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << "run,freq_ghz,s11_db\n";
    const auto emit = [&](std::size_t run, const FrequencyResponse& r) {
        for (std::size_t i = 0; i < r.freqs.size(); ++i)
            out << run << ',' << format_double(r.freqs[i]) << ',' << format_double(r.s11_db[i]) << '\n';
    };
    emit(0, result.baseline);
    for (std::size_t i = 0; i < result.responses.size(); ++i)
        emit(i + 1, result.responses[i]);
}

}  // namespace antgen
