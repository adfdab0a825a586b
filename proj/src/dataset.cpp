#include "antgen/dataset.hpp"

#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace antgen {

GeometryPlane GeometryPlane::from_image(const GeometryImage& img)
{
    GeometryPlane p{img.width_px, img.height_px, img.resolution, {}};
    p.pixels.resize(img.plane_size());
    const float* g = img.plane(0);
    for (std::size_t i = 0; i < p.pixels.size(); ++i)
        p.pixels[i] = g[i] == kMetal ? 255 : (g[i] == kPort ? 128 : 0);
    return p;
}

GeometryImage GeometryPlane::to_image() const
{
    GeometryImage img = blank_image(width_px, height_px, resolution);
    float* g = img.plane(0);
    for (std::size_t i = 0; i < pixels.size(); ++i)
        g[i] = pixels[i] == 255 ? kMetal : (pixels[i] == 128 ? kPort : kSubstrate);
    return img;
}

DatasetRecord make_record(const AntennaModel& model, const GeometryImage& image,
                          FrequencyResponse response, const TargetSpec& target, int iteration,
                          std::string stage)
{
    DatasetRecord r;
    r.id = image_digest(image);
    r.iteration = iteration;
    r.stage = std::move(stage);
    r.image = GeometryPlane::from_image(image);
    r.score = score(response, target);
    r.response = std::move(response);
    r.model = model;
    return r;
}

nlohmann::json record_manifest_entry(const DatasetRecord& r)
{
    nlohmann::json j{{"id", r.id},
                     {"iteration", r.iteration},
                     {"stage", r.stage},
                     {"score", r.score.value},
                     {"resolution", r.image.resolution},
                     {"model", model_to_json(r.model)}};
    j["predicted_score"] = r.predicted_score ? nlohmann::json(*r.predicted_score) : nlohmann::json(nullptr);
    j["threshold"] = r.threshold ? nlohmann::json(*r.threshold) : nlohmann::json(nullptr);
    return j;
}

DatasetStore::DatasetStore(std::string directory) : dir_(std::move(directory))
{
    fs::create_directories(fs::path(dir_) / "images");
    fs::create_directories(fs::path(dir_) / "responses");
    if (fs::exists(fs::path(dir_) / "manifest.jsonl")) {
        DatasetStore existing = load(dir_);
        records_ = std::move(existing.records_);
        ids_ = std::move(existing.ids_);
    }
}

void DatasetStore::append(DatasetRecord record)
{
    if (contains(record.id))
        throw Error("record " + record.id + " already in the store");
    if (!records_.empty() && record.iteration < records_.back().iteration)
        throw Error("iteration tags must be nondecreasing");
    if (!dir_.empty())
        persist(record);
    ids_.insert(record.id);
    records_.push_back(std::move(record));
}

void DatasetStore::persist(const DatasetRecord& r) const
{
    const fs::path root(dir_);
    write_pgm(r.image.to_image(), (root / "images" / (r.id + ".pgm")).string());
    write_response_csv(r.response, (root / "responses" / (r.id + ".csv")).string());
    std::ofstream out(root / "manifest.jsonl", std::ios::app);
    if (!out)
        throw Error("cannot append to " + (root / "manifest.jsonl").string());
    out << record_manifest_entry(r).dump() << '\n';
}

std::vector<double> DatasetStore::scores() const
{
    std::vector<double> s;
    s.reserve(records_.size());
    for (const auto& r : records_)
        s.push_back(r.score.value);
    return s;
}

std::vector<double> DatasetStore::scores_for_iteration(int iteration) const
{
    std::vector<double> s;
    for (const auto& r : records_)
        if (r.iteration == iteration)
            s.push_back(r.score.value);
    return s;
}

DatasetStore DatasetStore::load(const std::string& directory)
{
    const fs::path root(directory);
    std::ifstream in(root / "manifest.jsonl");
    if (!in)
        throw Error("no manifest.jsonl in " + directory);
    DatasetStore store;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto j = nlohmann::json::parse(line);
        DatasetRecord r;
        r.id = j.at("id").get<std::string>();
        r.iteration = j.at("iteration").get<int>();
        r.stage = j.value("stage", std::string());
        r.score = {j.at("score").get<double>()};
        r.model = model_from_json(j.at("model"));
        if (!j.at("predicted_score").is_null())
            r.predicted_score = j.at("predicted_score").get<double>();
        if (!j.at("threshold").is_null())
            r.threshold = j.at("threshold").get<double>();
        const double res = j.at("resolution").get<double>();
        r.image = GeometryPlane::from_image(read_pgm((root / "images" / (r.id + ".pgm")).string(), res));
        r.response = read_response_csv((root / "responses" / (r.id + ".csv")).string());
        store.append(std::move(r));
    }
    return store;
}

}  // namespace antgen
