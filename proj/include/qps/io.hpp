#pragma once

#include "qps/arithmetic.hpp"
#include "qps/spectrum.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qps {

inline constexpr std::string_view tool_version = "1.0.0";

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t h);

/// Shortest round-trip decimal form; "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double v);
/// Exact hexadecimal form (no 0x prefix) and its inverse.
std::string hex_double(double v);
double parse_hex_double(std::string_view s);

/// Flat `key = value` text with `#` comments. Later keys override earlier ones.
std::map<std::string, std::string> parse_config(std::string_view text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Hash of a canonical key=value listing (keys sorted) prefixed with the command name and tool version.
std::uint64_t config_hash(std::string_view command, const std::map<std::string, std::string>& canonical);

/// `golden`, `sqrt2m1`, `liouville:beta=<x>:seed=<s>[:levels=<n>]` or a decimal in (0, 1).
frequency frequency_from_alias(std::string_view alias);

/// `cos` (2 cos 2 pi x) or comma-separated real coefficients c0,c1,... of sum c_k e^{2 pi i k x} + c.c.
scalar_map potential_from_text(std::string_view text);

/// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

std::string serialize_bands(const band_structure& bs, std::uint64_t key);
/// Throws cache_corruption on any structural or checksum failure.
band_structure deserialize_bands(std::string_view text, std::uint64_t expected_key);

std::uint64_t bands_key(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q,
                        const spectrum_options& opt);

/// Memoizes approximant band structures in memory and, when a directory is given, on disk.
/// Advisory only: a corrupt entry is recomputed and overwritten.
class stage_cache {
public:
    stage_cache() = default;
    explicit stage_cache(std::filesystem::path dir);

    band_structure bands(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q,
                         const spectrum_options& opt);

    int hits() const { return hits_; }
    int misses() const { return misses_; }
    /// Corrupt disk entries that were recomputed.
    const std::vector<std::string>& recovered() const { return recovered_; }

private:
    std::filesystem::path dir_;
    std::mutex mutex_;
    std::unordered_map<std::uint64_t, band_structure> memory_;
    int hits_ = 0, misses_ = 0;
    std::vector<std::string> recovered_;
};

struct cache_check {
    int entries = 0;
    std::vector<std::string> corrupt;
};

cache_check verify_cache(const std::filesystem::path& dir);
int clear_cache(const std::filesystem::path& dir);

} // namespace qps
