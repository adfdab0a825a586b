#include "antgen/em_sim.hpp"

#include "antgen/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace antgen {

void validate(const SimRequest& req)
{
    if (req.freqs.size() < 2)
        throw Error("simulation grid needs at least two frequencies");
    for (std::size_t i = 1; i < req.freqs.size(); ++i)
        if (!(req.freqs[i] > req.freqs[i - 1]))
            throw Error("simulation grid must be strictly increasing");
}

void validate(const OracleConfig& cfg)
{
    if (!(cfg.eps_eff >= 1.0))
        throw Error("eps_eff must be >= 1");
    if (!(cfg.q_factor > 0.0) || !(cfg.depth_db > 0.0) || cfg.n_harmonics < 1 || !(cfg.resolution > 0.0))
        throw Error("surrogate parameters must be positive");
}

double longest_path_mm(const MetalLayout& layout, double resolution)
{
    const GeometryImage img = rasterize(layout, resolution);
    const int w = img.width_px;
    const int h = img.height_px;
    if (w == 0 || h == 0)
        throw Error("zero-size connectivity raster");
    const float* g = img.plane(0);

    std::vector<int> dist(static_cast<std::size_t>(w) * h, -1);
    std::deque<int> queue;
    // Ground contact: port pixels on the bottom row.
    for (int c = 0; c < w; ++c) {
        const int i = (h - 1) * w + c;
        if (g[i] == kPort) {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    int far = -1;
    bool touches_metal = false;
    while (!queue.empty()) {
        const int i = queue.front();
        queue.pop_front();
        far = std::max(far, dist[i]);
        touches_metal = touches_metal || g[i] == kMetal;
        const int r = i / w;
        const int c = i % w;
        const int next[4] = {r > 0 ? i - w : -1, r + 1 < h ? i + w : -1, c > 0 ? i - 1 : -1,
                             c + 1 < w ? i + 1 : -1};
        for (int j : next) {
            if (j < 0 || dist[j] >= 0 || g[j] == kSubstrate)
                continue;
            dist[j] = dist[i] + 1;
            queue.push_back(j);
        }
    }
    if (!touches_metal)
        return 0.0;
    // Steps between pixel centers plus half a pixel at either end.
    return (far + 1) * resolution;
}

std::vector<double> resonances(double path_mm, const OracleConfig& cfg)
{
    std::vector<double> f;
    if (!(path_mm > 0.0))
        return f;
    const double base = kSpeedOfLight / (4.0 * path_mm * std::sqrt(cfg.eps_eff));
    for (int k = 1; k <= cfg.n_harmonics; ++k)
        f.push_back((2 * k - 1) * base);
    return f;
}

FrequencyResponse surrogate_response(double path_mm, const std::vector<double>& freqs,
                                     const OracleConfig& cfg)
{
    FrequencyResponse resp{freqs, std::vector<double>(freqs.size(), 0.0)};
    const auto fk = resonances(path_mm, cfg);
    const double q2 = cfg.q_factor * cfg.q_factor;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double f = freqs[i];
        double sum = 0.0;
        for (double r : fk) {
            const double detune = f / r - r / f;
            sum += 1.0 / (1.0 + q2 * detune * detune);
        }
        resp.s11_db[i] = std::max(-40.0, -cfg.depth_db * sum);
    }
    return resp;
}

FrequencyResponse surrogate_simulate(const SimRequest& req, const OracleConfig& cfg)
{
    validate(req);
    validate(cfg);
    const double path = longest_path_mm(clip_to_space(req.model), cfg.resolution);
    return surrogate_response(path, req.freqs, cfg);
}

SurrogateSimulator::SurrogateSimulator(OracleConfig cfg) : cfg_(cfg) { validate(cfg_); }

FrequencyResponse SurrogateSimulator::simulate(const SimRequest& req) const
{
    try {
        return surrogate_simulate(req, cfg_);
    } catch (const SimulationError&) {
        throw;
    } catch (const Error& e) {
        throw SimulationError(geometry_digest(req.model), e.what());
    }
}

// ---------------------------------------------------------------------------
// Touchstone

std::string geometry_digest(const AntennaModel& model)
{
    return to_hex64(fnv1a64(model_to_json(model).dump()));
}

void export_geometry(const AntennaModel& model, const std::string& path) { save_model(model, path); }

namespace {

std::string upper(std::string s)
{
    for (auto& c : s)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

enum class DataFormat { DB, MA, RI };

}  // namespace

FrequencyResponse parse_touchstone(const std::string& text, const std::string& source)
{
    double freq_scale = 1.0;  // to GHz; Touchstone's default unit is GHz
    DataFormat fmt = DataFormat::MA;
    bool have_options = false;
    FrequencyResponse resp;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        if (auto bang = line.find('!'); bang != std::string::npos)
            line.erase(bang);
        std::istringstream tokens(line);
        std::string first;
        if (!(tokens >> first))
            continue;

        if (first[0] == '#') {
            if (have_options)
                throw Error(where + ": repeated option line");
            have_options = true;
            std::vector<std::string> opts;
            if (first.size() > 1)
                opts.push_back(upper(first.substr(1)));
            for (std::string t; tokens >> t;)
                opts.push_back(upper(t));
            for (std::size_t i = 0; i < opts.size(); ++i) {
                const std::string& t = opts[i];
                if (t == "HZ") freq_scale = 1e-9;
                else if (t == "KHZ") freq_scale = 1e-6;
                else if (t == "MHZ") freq_scale = 1e-3;
                else if (t == "GHZ") freq_scale = 1.0;
                else if (t == "DB") fmt = DataFormat::DB;
                else if (t == "MA") fmt = DataFormat::MA;
                else if (t == "RI") fmt = DataFormat::RI;
                else if (t == "S") continue;
                else if (t == "Y" || t == "Z" || t == "H" || t == "G")
                    throw Error(where + ": only S-parameters are supported, got " + t);
                else if (t == "R") {
                    if (i + 1 >= opts.size())
                        throw Error(where + ": option line 'R' without reference impedance");
                    const double r = parse_double(opts[++i]);
                    if (!(r > 0.0))
                        throw Error(where + ": reference impedance must be positive");
                } else
                    throw Error(where + ": malformed option line token '" + t + "'");
            }
            continue;
        }

        if (!have_options)
            throw Error(where + ": data before the '#' option line");
        std::vector<double> nums{parse_double(first)};
        for (std::string t; tokens >> t;)
            nums.push_back(parse_double(t));
        if (nums.size() != 3)
            throw Error(where + ": expected 3 values for a one-port row, got " + std::to_string(nums.size()) +
                        " (wrong port count?)");
        const double f = nums[0] * freq_scale;
        if (!resp.freqs.empty() && !(f > resp.freqs.back()))
            throw Error(where + ": frequencies are not strictly increasing");
        double db = 0.0;
        switch (fmt) {
        case DataFormat::DB: db = nums[1]; break;
        case DataFormat::MA: db = 20.0 * std::log10(nums[1]); break;
        case DataFormat::RI: db = 20.0 * std::log10(std::hypot(nums[1], nums[2])); break;
        }
        resp.freqs.push_back(f);
        resp.s11_db.push_back(db);
    }
    if (!have_options)
        throw Error(source + ": missing '#' option line");
    if (resp.freqs.empty())
        throw Error(source + ": no data rows");
    validate(resp);
    return resp;
}

FrequencyResponse import_touchstone(const std::string& path)
{
    const auto ext = upper(std::filesystem::path(path).extension().string());
    if (ext.size() >= 3 && ext.front() == '.' && ext[1] == 'S' && ext.back() == 'P' && ext != ".S1P")
        throw Error(path + ": wrong port count, only .s1p files are supported");
    std::ifstream in(path);
    if (!in)
        throw Error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_touchstone(ss.str(), path);
}

void write_touchstone(const FrequencyResponse& resp, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << "! one-port reflection, dB/angle\n# GHZ S DB R 50\n";
    for (std::size_t i = 0; i < resp.size(); ++i)
        out << format_double(resp.freqs[i]) << ' ' << format_double(resp.s11_db[i]) << " 0\n";
}

FrequencyResponse resample(const FrequencyResponse& resp, const std::vector<double>& freqs)
{
    if (resp.size() == 0)
        throw Error("cannot resample an empty response");
    FrequencyResponse out{freqs, std::vector<double>(freqs.size())};
    constexpr double tol = 1e-9;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double f = freqs[i];
        if (f < resp.freqs.front() - tol || f > resp.freqs.back() + tol)
            throw Error("frequency " + format_double(f) + " GHz outside the solver's range");
        auto it = std::lower_bound(resp.freqs.begin(), resp.freqs.end(), f);
        std::size_t j = static_cast<std::size_t>(it - resp.freqs.begin());
        if (j < resp.size() && std::abs(resp.freqs[j] - f) <= tol) {
            out.s11_db[i] = resp.s11_db[j];
        } else if (j == 0 || j == resp.size()) {
            out.s11_db[i] = resp.s11_db[j == 0 ? 0 : resp.size() - 1];
        } else {
            const double t = (f - resp.freqs[j - 1]) / (resp.freqs[j] - resp.freqs[j - 1]);
            out.s11_db[i] = resp.s11_db[j - 1] + t * (resp.s11_db[j] - resp.s11_db[j - 1]);
        }
    }
    return out;
}

FileExchangeSimulator::FileExchangeSimulator(std::string directory) : dir_(std::move(directory))
{
    std::filesystem::create_directories(dir_);
}

FrequencyResponse FileExchangeSimulator::simulate(const SimRequest& req) const
{
    validate(req);
    const std::string digest = geometry_digest(req.model);
    const std::filesystem::path base = std::filesystem::path(dir_) / digest;
    const std::string geometry = base.string() + ".json";
    const std::string result = base.string() + ".s1p";
    try {
        if (!std::filesystem::exists(geometry)) {
            const std::string tmp = geometry + ".tmp";
            export_geometry(req.model, tmp);
            std::filesystem::rename(tmp, geometry);
        }
        if (!std::filesystem::exists(result))
            throw SimulationError(digest, "no solver result at " + result + "; geometry exported to " + geometry);
        return resample(import_touchstone(result), req.freqs);
    } catch (const SimulationError&) {
        throw;
    } catch (const std::exception& e) {
        throw SimulationError(digest, e.what());
    }
}

}  // namespace antgen
