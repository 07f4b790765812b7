#include "wavepacket/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <system_error>

#include "wavepacket/errors.hpp"

namespace wavepacket::io {

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw std::runtime_error("write to " + tmp.string() + " failed");
        }
    }
    std::filesystem::rename(tmp, path);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) {
            buffer_ += ',';
        }
        buffer_ += header[i];
    }
    buffer_ += '\n';
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != columns_) {
        throw ParameterError("CSV row has " + std::to_string(values.size()) + " values, header has " +
                             std::to_string(columns_));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            buffer_ += ',';
        }
        buffer_ += format_double(values[i]);
    }
    buffer_ += '\n';
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return parts;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_number(std::string_view s) {
    s = trim(s);
    // strtod handles every form from_chars does and is available everywhere
    const std::string owned(s);
    char* end = nullptr;
    const double v = std::strtod(owned.c_str(), &end);
    if (owned.empty() || end != owned.c_str() + owned.size() || !std::isfinite(v)) {
        throw ParameterError("not a finite number: '" + owned + "'");
    }
    return v;
}

std::size_t parse_count(std::string_view s) {
    s = trim(s);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParameterError("not a sample count: '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

Range parse_range(std::string_view text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
        throw ParameterError("range must look like a:b:n, got '" + std::string(text) + "'");
    }
    Range r{parse_number(parts[0]), parse_number(parts[1]), parse_count(parts[2])};
    if (r.n < 1) {
        throw ParameterError("range needs at least one sample");
    }
    if (r.n > 1 && !(r.min < r.max)) {
        throw ParameterError("range bounds must satisfy a < b");
    }
    return r;
}

GridSpec parse_grid(std::string_view text) {
    const Range r = parse_range(text);
    return GridSpec::make(r.min, r.max, r.n);
}

std::vector<double> parse_list(std::string_view text) {
    std::vector<double> values;
    for (auto part : split(text, ',')) {
        values.push_back(parse_number(part));
    }
    return values;
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json RunManifest::to_json() const {
    return {
        {"schema_version", kSchemaVersion},
        {"tool", "wavepacket"},
        {"tool_version", std::string(kToolVersion)},
        {"command", command},
        {"parameters", parameters},
        {"config_hash", config_hash()},
        {"timestamp", timestamp},
    };
}

nlohmann::json to_json(const ModelParams& params) {
    nlohmann::json j = {
        {"hbar", params.hbar()},
        {"mass", params.mass()},
        {"coupling_C", params.coupling()},
        {"k", params.k()},
        {"units", "dimensionless x and t; hbar, mass, C explicit"},
    };
    j["branch"] = params.branch() ? nlohmann::json(std::string(to_string(*params.branch()))) : nlohmann::json();
    j["lambda"] = params.lambda() ? nlohmann::json(*params.lambda()) : nlohmann::json();
    return j;
}

nlohmann::json to_json(const GridSpec& grid) {
    return {{"x_min", grid.x_min()}, {"x_max", grid.x_max()}, {"nx", grid.nx()}, {"dx", grid.dx()}};
}

}  // namespace wavepacket::io
