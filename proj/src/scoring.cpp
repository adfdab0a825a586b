#include "antgen/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace antgen {

namespace {

std::string band_name(const Band& b)
{
    return "[" + format_double(b.f_lo) + ", " + format_double(b.f_hi) + "] GHz";
}

}  // namespace

void validate(const TargetSpec& target)
{
    if (target.bands.empty())
        throw Error("target spec has no bands");
    for (std::size_t i = 0; i < target.bands.size(); ++i) {
        const Band& b = target.bands[i];
        if (!(b.f_lo > 0.0) || !(b.f_hi > b.f_lo))
            throw Error("band " + band_name(b) + " must satisfy 0 < lo < hi");
        if (!std::isfinite(b.threshold_db))
            throw Error("band " + band_name(b) + " has a non-finite threshold");
        if (i > 0 && !(b.f_lo > target.bands[i - 1].f_hi))
            throw Error("bands must be sorted and non-overlapping");
    }
}

void validate(const FrequencyResponse& resp)
{
    if (resp.freqs.size() != resp.s11_db.size())
        throw Error("frequency response has mismatched lengths");
    for (std::size_t i = 0; i < resp.size(); ++i) {
        if (!std::isfinite(resp.freqs[i]) || !std::isfinite(resp.s11_db[i]))
            throw Error("frequency response contains non-finite values");
        if (i > 0 && !(resp.freqs[i] > resp.freqs[i - 1]))
            throw Error("frequencies must be strictly increasing");
        if (resp.s11_db[i] > kMaxS11Db)
            throw Error("S11 of " + format_double(resp.s11_db[i]) + " dB exceeds 0 dB");
    }
}

Score score(const FrequencyResponse& resp, const TargetSpec& target)
{
    double worst = -std::numeric_limits<double>::infinity();
    for (const Band& b : target.bands) {
        bool any = false;
        for (std::size_t i = 0; i < resp.size(); ++i) {
            const double f = resp.freqs[i];
            if (f < b.f_lo || f > b.f_hi)
                continue;
            any = true;
            worst = std::max(worst, resp.s11_db[i] - b.threshold_db);
        }
        if (!any)
            throw Error("band " + band_name(b) + " contains no frequency samples");
    }
    return {worst};
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n)
{
    if (n < 2 || !(hi > lo))
        throw Error("frequency grid needs at least two points over a positive span");
    std::vector<double> out(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

std::vector<double> default_grid() { return linear_grid(2.0, 8.0, 201); }

TargetSpec wifi_dual_band_target() { return {{{2.4, 2.5, -6.0}, {5.1, 7.0, -6.0}}}; }

nlohmann::json target_to_json(const TargetSpec& target)
{
    nlohmann::json j{{"bands", nlohmann::json::array()}};
    for (const auto& b : target.bands)
        j["bands"].push_back({{"lo", b.f_lo}, {"hi", b.f_hi}, {"db", b.threshold_db}});
    return j;
}

TargetSpec target_from_json(const nlohmann::json& j)
{
    TargetSpec t;
    for (const auto& b : j.at("bands"))
        t.bands.push_back({b.at("lo").get<double>(), b.at("hi").get<double>(), b.at("db").get<double>()});
    validate(t);
    return t;
}

void write_response_csv(const FrequencyResponse& resp, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << "freq_ghz,s11_db\n";
    for (std::size_t i = 0; i < resp.size(); ++i)
        out << format_double(resp.freqs[i]) << ',' << format_double(resp.s11_db[i]) << '\n';
}

FrequencyResponse read_response_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot read " + path);
    FrequencyResponse resp;
    std::string line;
    std::getline(in, line);
    if (line.rfind("freq_ghz,s11_db", 0) != 0)
        throw Error(path + ": missing 'freq_ghz,s11_db' header");
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw Error(path + ": malformed row '" + line + "'");
        resp.freqs.push_back(parse_double(std::string_view(line).substr(0, comma)));
        resp.s11_db.push_back(parse_double(std::string_view(line).substr(comma + 1)));
    }
    validate(resp);
    return resp;
}

}  // namespace antgen
