#pragma once

#include "antgen/geometry.hpp"
#include "antgen/raster.hpp"
#include "antgen/scoring.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace antgen {

/// Geometry plane of a GeometryImage stored as gray levels (0/128/255).
/// The coordinate planes are regenerated on demand.
struct GeometryPlane {
    int width_px = 0;
    int height_px = 0;
    double resolution = 0.0;
    std::vector<unsigned char> pixels;

    static GeometryPlane from_image(const GeometryImage& img);
    GeometryImage to_image() const;
};

/// One simulated design: image, response, score and the parameters that produced it.
struct DatasetRecord {
    std::string id;  ///< image digest
    int iteration = 0;
    std::string stage;  ///< e.g. "select/<candidate id>" or "generate"
    GeometryPlane image;
    FrequencyResponse response;
    Score score;
    AntennaModel model;
    std::optional<double> predicted_score;
    std::optional<double> threshold;
};

/// Builds a record from a simulated model. The score is computed here so it
/// always matches the stored response.
DatasetRecord make_record(const AntennaModel& model, const GeometryImage& image,
                          FrequencyResponse response, const TargetSpec& target, int iteration,
                          std::string stage);

/// Append-only record sequence, optionally mirrored to a directory:
///   manifest.jsonl      one JSON object per record, in append order
///   images/<id>.pgm     geometry plane
///   responses/<id>.csv  "freq_ghz,s11_db"
class DatasetStore {
public:
    DatasetStore() = default;
    /// Opens (creating if needed) a store directory, loading existing records.
    explicit DatasetStore(std::string directory);

    /// Throws if the id is already present or the iteration tag decreases.
    void append(DatasetRecord record);
    bool contains(const std::string& id) const { return ids_.count(id) != 0; }

    const std::vector<DatasetRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const std::string& directory() const { return dir_; }

    std::vector<double> scores() const;
    std::vector<double> scores_for_iteration(int iteration) const;

    /// Reads a store directory written by a previous run.
    static DatasetStore load(const std::string& directory);

private:
    void persist(const DatasetRecord& record) const;

    std::string dir_;
    std::vector<DatasetRecord> records_;
    std::set<std::string> ids_;
};

nlohmann::json record_manifest_entry(const DatasetRecord& record);

}  // namespace antgen
