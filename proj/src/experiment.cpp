#include "antgen/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using nlohmann::json;

namespace antgen {

std::unique_ptr<Simulator> make_backend(const BackendConfig& cfg)
{
    if (cfg.kind == "surrogate")
        return std::make_unique<SurrogateSimulator>(cfg.oracle);
    if (cfg.kind == "file-exchange") {
        if (cfg.exchange_dir.empty())
            throw Error("file-exchange backend needs an exchange directory");
        return std::make_unique<FileExchangeSimulator>(cfg.exchange_dir);
    }
    throw Error("unknown backend '" + cfg.kind + "' (expected surrogate or file-exchange)");
}

// ---------------------------------------------------------------------------
// Config serialization

namespace {

json oracle_to_json(const OracleConfig& c)
{
    return {{"eps_eff", c.eps_eff},
            {"q_factor", c.q_factor},
            {"depth_db", c.depth_db},
            {"n_harmonics", c.n_harmonics},
            {"resolution", c.resolution}};
}

OracleConfig oracle_from_json(const json& j)
{
    OracleConfig c;
    c.eps_eff = j.value("eps_eff", c.eps_eff);
    c.q_factor = j.value("q_factor", c.q_factor);
    c.depth_db = j.value("depth_db", c.depth_db);
    c.n_harmonics = j.value("n_harmonics", c.n_harmonics);
    c.resolution = j.value("resolution", c.resolution);
    validate(c);
    return c;
}

json grid_to_json(const std::vector<double>& f)
{
    const auto g = linear_grid(f.front(), f.back(), f.size());
    if (g == f)
        return {{"lo", f.front()}, {"hi", f.back()}, {"n", f.size()}};
    return f;
}

std::vector<double> grid_from_json(const json& j)
{
    if (j.is_array())
        return j.get<std::vector<double>>();
    return linear_grid(j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("n").get<std::size_t>());
}

}  // namespace

json train_config_to_json(const TrainConfig& c)
{
    return {{"conv_channels", c.conv_channels},
            {"hidden", c.hidden},
            {"max_epochs", c.max_epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"weight_decay", c.weight_decay},
            {"dropout", c.dropout},
            {"plateau_patience", c.plateau_patience},
            {"plateau_factor", c.plateau_factor},
            {"min_learning_rate", c.min_learning_rate},
            {"early_stop_patience", c.early_stop_patience},
            {"validation_fraction", c.validation_fraction},
            {"response_head", c.response_head},
            {"response_weight", c.response_weight},
            {"min_records", c.min_records}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c)
{
    c.conv_channels = j.value("conv_channels", c.conv_channels);
    c.hidden = j.value("hidden", c.hidden);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.dropout = j.value("dropout", c.dropout);
    c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
    c.plateau_factor = j.value("plateau_factor", c.plateau_factor);
    c.min_learning_rate = j.value("min_learning_rate", c.min_learning_rate);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.response_head = j.value("response_head", c.response_head);
    c.response_weight = j.value("response_weight", c.response_weight);
    c.min_records = j.value("min_records", c.min_records);
    return c;
}

ExperimentConfig config_from_json(const json& j)
{
    ExperimentConfig c;
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", std::string());
    c.space = space_from_json(j.at("space"));
    if (j.contains("target"))
        c.target = target_from_json(j.at("target"));
    if (j.contains("freqs"))
        c.freqs = grid_from_json(j.at("freqs"));
    c.resolution = j.value("resolution", c.resolution);
    for (const auto& d : j.at("candidates"))
        c.candidates.push_back(dims_from_json(d));

    const json sel = j.value("selector", json::object());
    c.selector.n_p = sel.value("n_p", c.selector.n_p);
    c.selector.persist_all_candidates = sel.value("persist_all_candidates", c.selector.persist_all_candidates);

    const json gen = j.value("generator", json::object());
    c.generator.n_batch = gen.value("n_batch", c.generator.n_batch);
    c.generator.n_iter = gen.value("n_iter", c.generator.n_iter);
    c.generator.initial_threshold = gen.value("initial_threshold", c.generator.initial_threshold);
    c.generator.threshold_mode =
        threshold_mode_from_string(gen.value("threshold_mode", to_string(c.generator.threshold_mode)));
    c.generator.max_proposals_per_accept = gen.value("max_proposals_per_accept", c.generator.max_proposals_per_accept);
    c.generator.top_n = gen.value("top_n", c.generator.top_n);
    if (gen.contains("train"))
        c.generator.train = train_config_from_json(gen.at("train"));

    const json tun = j.value("tuner", json::object());
    c.run_optimize = tun.value("enabled", c.run_optimize);
    c.rescore = tun.value("rescore", c.rescore);
    c.tuner.initial_radius = tun.value("initial_radius", c.tuner.initial_radius);
    c.tuner.shrink = tun.value("shrink", c.tuner.shrink);
    c.tuner.grow = tun.value("grow", c.tuner.grow);
    c.tuner.eta_low = tun.value("eta_low", c.tuner.eta_low);
    c.tuner.eta_high = tun.value("eta_high", c.tuner.eta_high);
    c.tuner.budget = tun.value("budget", c.tuner.budget);
    c.tuner.min_radius = tun.value("min_radius", c.tuner.min_radius);
    c.tuner.fd_fraction = tun.value("fd_fraction", c.tuner.fd_fraction);
    c.tuner.max_radius = tun.value("max_radius", c.tuner.max_radius);
    c.tuner.freeze_dims = tun.value("freeze_dims", c.tuner.freeze_dims);

    const json tol = j.value("tolerance", json::object());
    c.run_tolerance = tol.value("enabled", c.run_tolerance);
    c.tolerance.perturb_fraction = tol.value("perturb_fraction", c.tolerance.perturb_fraction);
    c.tolerance.n_runs = tol.value("n_runs", c.tolerance.n_runs);
    c.tolerance.mode = perturb_mode_from_string(tol.value("mode", to_string(c.tolerance.mode)));
    c.tolerance.max_attempts = tol.value("max_attempts", c.tolerance.max_attempts);
    c.tolerance.freeze_dims = tol.value("freeze_dims", c.tolerance.freeze_dims);

    const json be = j.value("backend", json::object());
    c.backend.kind = be.value("kind", c.backend.kind);
    c.backend.oracle = oracle_from_json(be.value("oracle", json::object()));
    c.backend.exchange_dir = be.value("exchange_dir", std::string());

    // Fan the shared values out to the stages.
    c.selector.seed = derive_seed(c.seed, "select");
    c.selector.freqs = c.freqs;
    c.selector.target = c.target;
    c.selector.resolution = c.resolution;
    c.generator.seed = derive_seed(c.seed, "generate");
    c.generator.freqs = c.freqs;
    c.generator.resolution = c.resolution;
    c.tolerance.seed = derive_seed(c.seed, "tolerance");
    c.selector.workers = c.tuner.workers = worker_count();
    validate(c);
    return c;
}

json config_to_json(const ExperimentConfig& c)
{
    json cands = json::array();
    for (const auto& d : c.candidates)
        cands.push_back(dims_to_json(d));
    json j{
        {"seed", c.seed},
        {"space", space_to_json(c.space)},
        {"target", target_to_json(c.target)},
        {"freqs", grid_to_json(c.freqs)},
        {"resolution", c.resolution},
        {"candidates", cands},
        {"selector", {{"n_p", c.selector.n_p}, {"persist_all_candidates", c.selector.persist_all_candidates}}},
        {"generator",
         {{"n_batch", c.generator.n_batch},
          {"n_iter", c.generator.n_iter},
          {"initial_threshold", c.generator.initial_threshold},
          {"threshold_mode", to_string(c.generator.threshold_mode)},
          {"max_proposals_per_accept", c.generator.max_proposals_per_accept},
          {"top_n", c.generator.top_n},
          {"train", train_config_to_json(c.generator.train)}}},
        {"tuner",
         {{"enabled", c.run_optimize},
          {"rescore", c.rescore},
          {"initial_radius", c.tuner.initial_radius},
          {"shrink", c.tuner.shrink},
          {"grow", c.tuner.grow},
          {"eta_low", c.tuner.eta_low},
          {"eta_high", c.tuner.eta_high},
          {"budget", c.tuner.budget},
          {"min_radius", c.tuner.min_radius},
          {"fd_fraction", c.tuner.fd_fraction},
          {"max_radius", c.tuner.max_radius},
          {"freeze_dims", c.tuner.freeze_dims}}},
        {"tolerance",
         {{"enabled", c.run_tolerance},
          {"perturb_fraction", c.tolerance.perturb_fraction},
          {"n_runs", c.tolerance.n_runs},
          {"mode", to_string(c.tolerance.mode)},
          {"max_attempts", c.tolerance.max_attempts},
          {"freeze_dims", c.tolerance.freeze_dims}}},
        {"backend", {{"kind", c.backend.kind}, {"oracle", oracle_to_json(c.backend.oracle)}}},
    };
    if (!c.backend.exchange_dir.empty())
        j["backend"]["exchange_dir"] = c.backend.exchange_dir;
    return j;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
}

void validate(const ExperimentConfig& cfg)
{
    validate(cfg.space);
    validate(cfg.target);
    if (cfg.candidates.empty())
        throw Error("config lists no candidate dimension sets");
    const std::size_t n = cfg.candidates.front().size();
    std::map<std::string, int> seen;
    for (const auto& d : cfg.candidates) {
        if (d.size() != n)
            throw Error("candidate set '" + d.id + "' has " + std::to_string(d.size()) + " components, expected " +
                        std::to_string(n) + " like '" + cfg.candidates.front().id + "'");
        if (seen[d.id]++)
            throw Error("duplicate candidate set id '" + d.id + "'");
        validate(cfg.space, d);
    }
    if (cfg.freqs.size() < 2 || !std::is_sorted(cfg.freqs.begin(), cfg.freqs.end()))
        throw Error("frequency grid needs at least two increasing points");
    pixel_count(cfg.space.width, cfg.resolution);
    pixel_count(cfg.space.height, cfg.resolution);
    if (cfg.selector.n_p < 1)
        throw Error("selector n_p must be at least 1");
    if (cfg.generator.n_batch < 1 || cfg.generator.n_iter < 1)
        throw Error("generator n_batch and n_iter must be at least 1");
    validate(cfg.tuner);
    if (!(cfg.tolerance.perturb_fraction >= 0.0 && cfg.tolerance.perturb_fraction < 1.0))
        throw Error("tolerance perturb_fraction must lie in [0, 1)");
    if (cfg.backend.kind != "surrogate" && cfg.backend.kind != "file-exchange")
        throw Error("unknown backend '" + cfg.backend.kind + "'");
}

// ---------------------------------------------------------------------------
// Run directory

RunLock::RunLock(const std::string& run_dir) : path_((fs::path(run_dir) / ".lock").string())
{
    fs::create_directories(run_dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f)
        throw Error("run directory " + run_dir + " is locked by another process (" + path_ + ")");
    std::fclose(f);
}

RunLock::~RunLock()
{
    std::error_code ec;
    fs::remove(path_, ec);
}

StageError::StageError(std::string stage, const std::string& what)
    : Error("stage " + stage + ": " + what), stage_(std::move(stage))
{
}

namespace {

void write_json(const json& j, const fs::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot read " + path.string());
    json j;
    in >> j;
    return j;
}

/// Digest of every regular file under `root` except the lock and manifest,
/// keyed by relative path in sorted order.
json artifact_digests(const fs::path& root)
{
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file())
            continue;
        const std::string rel = fs::relative(e.path(), root).generic_string();
        if (rel == ".lock" || rel == "manifest.json" || rel.rfind("report/", 0) == 0)
            continue;
        files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    json out = json::object();
    for (const auto& f : files)
        out[f] = file_digest((root / f).string());
    return out;
}

void write_manifest(const fs::path& root, const json& stages, const std::optional<json>& result)
{
    json m{{"stages", stages}, {"artifacts", artifact_digests(root)}};
    if (result)
        m["result"] = *result;
    write_json(m, root / "manifest.json");
}

json stage_entry(const std::string& name, const std::string& status, const json& extra = json::object())
{
    json e{{"name", name}, {"status", status}};
    e.update(extra);
    return e;
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg)
{
    validate(cfg);
    if (cfg.out_dir.empty())
        throw Error("pipeline needs an output directory");
    const fs::path root = cfg.out_dir;
    RunLock lock(cfg.out_dir);
    if (fs::exists(root / "dataset"))
        throw Error("run directory " + cfg.out_dir + " already holds a dataset; use a fresh directory");

    write_json(config_to_json(cfg), root / "config.json");
    const auto backend = make_backend(cfg.backend);
    DatasetStore store((root / "dataset").string());
    json stages = json::array();
    PipelineResult res;

    const auto stage = [&](const std::string& name, auto&& body) {
        std::cerr << "pipeline: " << name << '\n';
        try {
            json extra = body();
            stages.push_back(stage_entry(name, "done", extra));
        } catch (const std::exception& e) {
            stages.push_back(stage_entry(name, "failed", {{"error", e.what()}}));
            write_manifest(root, stages, std::nullopt);
            throw StageError(name, e.what());
        }
    };

    Selection sel;
    stage("select", [&] {
        fs::create_directories(root / "select");
        sel = select(cfg.space, cfg.candidates, cfg.selector, *backend, &store);
        write_stats_csv(sel.stats, (root / "select" / "scores.csv").string());
        write_medians_csv(sel.stats, (root / "select" / "medians.csv").string());
        write_json(dims_to_json(sel.chosen), root / "select" / "chosen.json");
        res.chosen_dims = sel.chosen.id;
        return json{{"chosen", sel.chosen.id}, {"median", sel.stats[sel.chosen_index].median.value}};
    });

    GenerationResult gen;
    stage("generate", [&] {
        const fs::path dir = root / "generate";
        fs::create_directories(dir);
        GeneratorConfig gc = cfg.generator;
        gc.artifacts_dir = (dir / "classifier").string();
        gen = run_generation(cfg.space, sel.chosen, gc, *backend, cfg.target, std::move(store));
        const BatchStats bs = batch_stats(gen.store);
        write_batch_stats_csv(bs, (dir / "batch_stats.csv").string());
        write_histograms_csv(bs, (dir / "histograms.csv").string());
        write_iteration_report_csv(gen.iterations, (dir / "iterations.csv").string());
        for (std::size_t i = 0; i < gen.best.size(); ++i)
            save_model(gen.best[i].model, (dir / ("best_" + std::to_string(i + 1) + ".json")).string());
        return json{{"records", gen.store.size()}, {"best_score", gen.best.front().score.value}};
    });

    const DatasetRecord& best = gen.best.front();
    res.final_model = best.model;
    res.final_response = best.response;
    res.final_score = best.score;

    if (cfg.run_optimize && !meets_target(res.final_score)) {
        stage("optimize", [&] {
            const fs::path dir = root / "optimize";
            fs::create_directories(dir);
            const OptimizeResult opt = optimize(best.model, cfg.tuner, *backend, cfg.target, cfg.freqs);
            write_trace_csv(opt.trace, opt.param_names, (dir / "trace.csv").string());
            save_model(opt.best, (dir / "best.json").string());
            write_response_csv(opt.best_response, (dir / "best_s11.csv").string());
            res.final_model = opt.best;
            res.final_response = opt.best_response;
            res.final_score = opt.best_score;
            return json{{"simulations", opt.simulations},
                        {"stop", to_string(opt.reason)},
                        {"best_score", opt.best_score.value}};
        });
        if (cfg.rescore) {
            stage("rescore", [&] {
                const fs::path dir = root / "rescore";
                fs::create_directories(dir);
                DimensionSet tuned = res.final_model.dims;
                tuned.id = sel.chosen.id + "-tuned";
                SelectorConfig sc = cfg.selector;
                sc.seed = derive_seed(cfg.seed, "rescore");
                const std::vector<DimensionStats> stats{sel.stats[sel.chosen_index],
                                                        sample_candidate(cfg.space, tuned, sc, *backend).stats};
                write_stats_csv(stats, (dir / "scores.csv").string());
                write_medians_csv(stats, (dir / "medians.csv").string());
                return json{{"original_median", stats[0].median.value}, {"tuned_median", stats[1].median.value}};
            });
        }
    }

    if (cfg.run_tolerance) {
        stage("tolerance", [&] {
            const fs::path dir = root / "tolerance";
            fs::create_directories(dir);
            const ToleranceResult tol =
                tolerance_study(res.final_model, cfg.tolerance, *backend, cfg.target, cfg.freqs);
            write_tolerance_csv(tol, (dir / "curves.csv").string());
            json scores = json::array();
            for (const auto& s : tol.scores)
                scores.push_back(s.value);
            write_json({{"baseline_score", tol.baseline_score.value},
                        {"scores", scores},
                        {"passed", tol.passed},
                        {"runs", tol.models.size()},
                        {"resamples", tol.resamples}},
                       dir / "summary.json");
            return json{{"passed", tol.passed}, {"runs", tol.models.size()}};
        });
    }

    save_model(res.final_model, (root / "final.json").string());
    write_response_csv(res.final_response, (root / "final_s11.csv").string());
    write_manifest(root, stages,
                   json{{"chosen_dims", res.chosen_dims},
                        {"final_score", res.final_score.value},
                        {"meets_target", res.meets()}});
    res.manifest_digest = file_digest((root / "manifest.json").string());
    return res;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

void copy_if_exists(const fs::path& from, const fs::path& to)
{
    if (fs::exists(from))
        fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

void write_record_files(const DatasetRecord& r, const fs::path& stem)
{
    write_pgm(r.image.to_image(), stem.string() + ".pgm");
    write_response_csv(r.response, stem.string() + "_s11.csv");
}

}  // namespace

void render_report(const std::string& run_dir)
{
    const fs::path root = run_dir;
    if (!fs::exists(root / "manifest.json"))
        throw Error("no manifest.json in " + run_dir + "; not a run directory");
    const json manifest = read_json(root / "manifest.json");
    const fs::path out = root / "report";
    fs::create_directories(out);

    copy_if_exists(root / "select" / "scores.csv", out / "select_scores.csv");
    copy_if_exists(root / "select" / "medians.csv", out / "select_medians.csv");
    copy_if_exists(root / "rescore" / "medians.csv", out / "rescore_medians.csv");
    copy_if_exists(root / "optimize" / "trace.csv", out / "optimize_trace.csv");
    copy_if_exists(root / "tolerance" / "curves.csv", out / "tolerance_curves.csv");

    double resolution = 0.1;
    if (fs::exists(root / "config.json"))
        resolution = read_json(root / "config.json").value("resolution", resolution);

    if (fs::exists(root / "dataset" / "manifest.jsonl")) {
        const DatasetStore store = DatasetStore::load((root / "dataset").string());
        if (!store.empty()) {
            const BatchStats bs = batch_stats(store);
            write_batch_stats_csv(bs, (out / "batch_stats.csv").string());
            write_histograms_csv(bs, (out / "histograms.csv").string());

            std::ofstream curve(out / "score_curve.csv");
            curve << "index,iteration,score,best_so_far\n";
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < store.records().size(); ++i) {
                const auto& r = store.records()[i];
                best = std::min(best, r.score.value);
                curve << i << ',' << r.iteration << ',' << format_double(r.score.value) << ','
                      << format_double(best) << '\n';
            }

            std::vector<const DatasetRecord*> ranked;
            for (const auto& r : store.records())
                if (r.iteration > 0)
                    ranked.push_back(&r);
            std::stable_sort(ranked.begin(), ranked.end(),
                             [](const auto* a, const auto* b) { return a->score.value < b->score.value; });
            for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i)
                write_record_files(*ranked[i], out / ("best_" + std::to_string(i + 1)));
        }
    }

    if (fs::exists(root / "final.json")) {
        const AntennaModel m = load_model((root / "final.json").string());
        write_pgm(rasterize(m, resolution), (out / "final.pgm").string());
        copy_if_exists(root / "final_s11.csv", out / "final_s11.csv");
    }
    write_json({{"stages", manifest.at("stages")}, {"result", manifest.value("result", json())}},
               out / "summary.json");
}

void dataset_report(const std::string& store_dir, const std::string& out_dir, double bin_width)
{
    if (!fs::exists(fs::path(store_dir) / "manifest.jsonl"))
        throw Error("no dataset manifest in " + store_dir);
    const DatasetStore store = DatasetStore::load(store_dir);
    if (store.empty())
        throw Error("dataset " + store_dir + " is empty");
    fs::create_directories(out_dir);
    const BatchStats bs = batch_stats(store, bin_width);
    write_batch_stats_csv(bs, (fs::path(out_dir) / "batch_stats.csv").string());
    write_histograms_csv(bs, (fs::path(out_dir) / "histograms.csv").string());
}

}  // namespace antgen
