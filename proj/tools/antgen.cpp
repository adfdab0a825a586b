// Command-line front end: one subcommand per pipeline stage plus the full pipeline.

#include "antgen/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace antgen;

namespace {

struct Common {
    std::string config;
    std::string backend;
    std::string exchange_dir;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* app, bool config_required)
    {
        auto* opt = app->add_option("--config", config, "experiment config (JSON)")->check(CLI::ExistingFile);
        if (config_required)
            opt->required();
        app->add_option("--backend", backend, "surrogate | file-exchange (overrides the config)");
        app->add_option("--exchange-dir", exchange_dir, "directory shared with an external solver");
        app->add_option("--seed", seed, "top-level seed (overrides the config)");
    }

    /// Config with command-line overrides applied. Without --config only the
    /// stage-independent defaults are meaningful.
    ExperimentConfig load() const
    {
        ExperimentConfig cfg;
        if (!config.empty()) {
            nlohmann::json j;
            std::ifstream in(config);
            in >> j;
            if (seed)
                j["seed"] = *seed;
            cfg = config_from_json(j);
        } else if (seed) {
            cfg.seed = *seed;
            cfg.tolerance.seed = derive_seed(cfg.seed, "tolerance");
        }
        if (!backend.empty())
            cfg.backend.kind = backend;
        if (!exchange_dir.empty())
            cfg.backend.exchange_dir = exchange_dir;
        cfg.tuner.workers = worker_count();
        return cfg;
    }
};

DimensionSet find_dims(const ExperimentConfig& cfg, const std::string& which)
{
    if (fs::exists(which) && fs::is_regular_file(which)) {
        std::ifstream in(which);
        nlohmann::json j;
        in >> j;
        return dims_from_json(j);
    }
    for (const auto& d : cfg.candidates)
        if (d.id == which)
            return d;
    throw Error("no candidate set '" + which + "' in the config");
}

void write_json_file(const nlohmann::json& j, const fs::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Antenna layout generation from rectangular components"};
    app.require_subcommand(1);

    // select-dims
    Common sel_c;
    std::string sel_out, sel_store;
    std::optional<std::size_t> sel_np;
    auto* sel = app.add_subcommand("select-dims", "score candidate dimension sets by random placement");
    sel_c.attach(sel, true);
    sel->add_option("--out", sel_out, "output directory")->required();
    sel->add_option("--n-p", sel_np, "random placements per candidate");
    sel->add_option("--store", sel_store, "dataset directory to append the samples to");

    // generate
    Common gen_c;
    std::string gen_out, gen_dims;
    std::optional<std::size_t> gen_batch;
    std::optional<int> gen_iter;
    auto* gen = app.add_subcommand("generate", "classifier-filtered random placement loop");
    gen_c.attach(gen, true);
    gen->add_option("--dims", gen_dims, "candidate id from the config, or a dimension-set JSON file")->required();
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--batch", gen_batch, "simulations per iteration");
    gen->add_option("--iters", gen_iter, "iterations");

    // optimize
    Common opt_c;
    std::string opt_start, opt_trace, opt_out;
    std::optional<std::size_t> opt_budget;
    bool opt_freeze = false;
    auto* opt = app.add_subcommand("optimize", "trust-region refinement of a model");
    opt_c.attach(opt, false);
    opt->add_option("--start", opt_start, "starting model (JSON)")->required()->check(CLI::ExistingFile);
    opt->add_option("--budget", opt_budget, "simulation budget");
    opt->add_option("--trace", opt_trace, "trace CSV path");
    opt->add_option("--out", opt_out, "best model path")->required();
    opt->add_flag("--freeze-dims", opt_freeze, "tune positions only");

    // tolerance
    Common tol_c;
    std::string tol_model, tol_out;
    std::optional<std::size_t> tol_runs;
    std::optional<double> tol_fraction;
    auto* tol = app.add_subcommand("tolerance", "random-perturbation tolerance study");
    tol_c.attach(tol, false);
    tol->add_option("--model", tol_model, "model (JSON)")->required()->check(CLI::ExistingFile);
    tol->add_option("--runs", tol_runs, "perturbed copies");
    tol->add_option("--fraction", tol_fraction, "relative perturbation bound");
    tol->add_option("--out", tol_out, "output directory")->required();

    // pipeline
    Common pipe_c;
    std::string pipe_out;
    auto* pipe = app.add_subcommand("pipeline", "select, generate, optimize and tolerance study");
    pipe_c.attach(pipe, true);
    pipe->add_option("--out", pipe_out, "run directory (overrides the config)");

    // render
    std::string render_dir;
    auto* render = app.add_subcommand("render", "write plot-ready CSV/PGM files for a run directory");
    render->add_option("--run", render_dir, "run directory")->required();

    // dataset-stats
    std::string ds_store, ds_out;
    double ds_bin = 0.5;
    auto* ds = app.add_subcommand("dataset-stats", "per-iteration score summary of a dataset");
    ds->add_option("--store", ds_store, "dataset directory")->required();
    ds->add_option("--out", ds_out, "output directory")->required();
    ds->add_option("--bin-width", ds_bin, "histogram bin width in dB");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sel) {
            ExperimentConfig cfg = sel_c.load();
            if (sel_np)
                cfg.selector.n_p = *sel_np;
            const auto backend = make_backend(cfg.backend);
            std::optional<DatasetStore> store;
            if (!sel_store.empty())
                store.emplace(sel_store);
            const Selection s = select(cfg.space, cfg.candidates, cfg.selector, *backend, store ? &*store : nullptr);
            fs::create_directories(sel_out);
            write_stats_csv(s.stats, (fs::path(sel_out) / "scores.csv").string());
            write_medians_csv(s.stats, (fs::path(sel_out) / "medians.csv").string());
            write_json_file(dims_to_json(s.chosen), fs::path(sel_out) / "chosen.json");
            for (const auto& st : s.stats)
                std::cout << st.candidate_id << " median " << format_double(st.median.value) << " dB\n";
            std::cout << "chosen: " << s.chosen.id << '\n';
        } else if (*gen) {
            ExperimentConfig cfg = gen_c.load();
            if (gen_batch)
                cfg.generator.n_batch = *gen_batch;
            if (gen_iter)
                cfg.generator.n_iter = *gen_iter;
            const DimensionSet dims = find_dims(cfg, gen_dims);
            const auto backend = make_backend(cfg.backend);
            const fs::path out = gen_out;
            cfg.generator.artifacts_dir = (out / "classifier").string();
            GenerationResult r = run_generation(cfg.space, dims, cfg.generator, *backend, cfg.target,
                                                DatasetStore((out / "dataset").string()));
            const BatchStats bs = batch_stats(r.store);
            write_batch_stats_csv(bs, (out / "batch_stats.csv").string());
            write_histograms_csv(bs, (out / "histograms.csv").string());
            write_iteration_report_csv(r.iterations, (out / "iterations.csv").string());
            for (std::size_t i = 0; i < r.best.size(); ++i)
                save_model(r.best[i].model, (out / ("best_" + std::to_string(i + 1) + ".json")).string());
            for (const auto& it : bs.iterations)
                std::cout << "iteration " << it.iteration << ": median " << format_double(it.median) << " dB, min "
                          << format_double(it.min) << " dB\n";
            return meets_target(r.best.front().score) ? 0 : 1;
        } else if (*opt) {
            ExperimentConfig cfg = opt_c.load();
            if (opt_budget)
                cfg.tuner.budget = *opt_budget;
            if (opt_freeze)
                cfg.tuner.freeze_dims = true;
            const auto backend = make_backend(cfg.backend);
            const OptimizeResult r = optimize(load_model(opt_start), cfg.tuner, *backend, cfg.target, cfg.freqs);
            save_model(r.best, opt_out);
            if (!opt_trace.empty())
                write_trace_csv(r.trace, r.param_names, opt_trace);
            std::cout << "best " << format_double(r.best_score.value) << " dB after " << r.simulations
                      << " simulations (" << to_string(r.reason) << ")\n";
            return meets_target(r.best_score) ? 0 : 1;
        } else if (*tol) {
            ExperimentConfig cfg = tol_c.load();
            if (tol_runs)
                cfg.tolerance.n_runs = *tol_runs;
            if (tol_fraction)
                cfg.tolerance.perturb_fraction = *tol_fraction;
            const auto backend = make_backend(cfg.backend);
            const ToleranceResult r = tolerance_study(load_model(tol_model), cfg.tolerance, *backend, cfg.target,
                                                      cfg.freqs);
            fs::create_directories(tol_out);
            write_tolerance_csv(r, (fs::path(tol_out) / "curves.csv").string());
            std::cout << r.passed << " of " << r.models.size() << " perturbed models meet the target\n";
        } else if (*pipe) {
            ExperimentConfig cfg = pipe_c.load();
            if (!pipe_out.empty())
                cfg.out_dir = pipe_out;
            const PipelineResult r = run_pipeline(cfg);
            std::cout << "dimensions " << r.chosen_dims << ", final score " << format_double(r.final_score.value)
                      << " dB, manifest " << r.manifest_digest << '\n';
            return r.meets() ? 0 : 1;
        } else if (*render) {
            render_report(render_dir);
        } else if (*ds) {
            dataset_report(ds_store, ds_out, ds_bin);
        }
    } catch (const std::exception& e) {
        std::cerr << "antgen: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
