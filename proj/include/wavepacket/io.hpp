#pragma once

// Output plumbing: CSV serialisation, atomic file writes, range syntax and
// the run manifest.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wavepacket/model.hpp"

namespace wavepacket::io {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Comma-separated, LF line endings, header first.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void row(std::span<const double> values);
    void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

    std::size_t columns() const { return columns_; }
    const std::string& str() const { return buffer_; }

private:
    std::size_t columns_;
    std::string buffer_;
};

/// "a:b:n" -> GridSpec(a, b, n).
GridSpec parse_grid(std::string_view text);

struct Range {
    double min;
    double max;
    std::size_t n;
};

/// "a:b:n" with n >= 1.
Range parse_range(std::string_view text);

/// "0,0.5,1" -> {0, 0.5, 1}.
std::vector<double> parse_list(std::string_view text);

/// FNV-1a 64-bit, lowercase hex.
std::string fnv1a_hex(std::string_view data);

/// UTC, ISO 8601 to the second.
std::string utc_timestamp();

struct RunManifest {
    std::string command;
    nlohmann::json parameters;  ///< full parameter set; hashed for config_hash
    std::string timestamp;

    std::string config_hash() const { return fnv1a_hex(parameters.dump()); }
    nlohmann::json to_json() const;
};

nlohmann::json to_json(const ModelParams& params);
nlohmann::json to_json(const GridSpec& grid);

}  // namespace wavepacket::io
