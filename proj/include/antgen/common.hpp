#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace antgen {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a backend cannot produce a response; carries the digest of the
/// geometry that failed so the caller can correlate it with dataset records.
class SimulationError : public Error {
public:
    SimulationError(std::string digest, const std::string& what)
        : Error(what + " [model " + digest + "]"), digest_(std::move(digest)) {}
    const std::string& digest() const noexcept { return digest_; }

private:
    std::string digest_;
};

// ---------------------------------------------------------------------------
// Hashing and seeding

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string to_hex64(std::uint64_t v);

/// Hex FNV-1a digest of a file's contents. Throws if the file cannot be read.
std::string file_digest(const std::string& path);

std::uint64_t splitmix64(std::uint64_t x);

/// Child seed for a named substream. Stages derive their own seeds from the
/// experiment seed so each stage is reproducible in isolation.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view stream);

/// mt19937_64-backed generator with a platform-independent uniform draw.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi]; returns lo when the interval is degenerate.
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Small statistics helpers

/// Sample median; even-length samples use the mean of the two middle values.
double median(std::span<const double> values);

// ---------------------------------------------------------------------------
// Text helpers

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

/// Number of simulation workers from ANTGEN_WORKERS (default 1).
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
/// keyed by index by the caller; the first exception (lowest index) is rethrown.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace antgen
