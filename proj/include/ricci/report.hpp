#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ricci/geometry.hpp"
#include "ricci/heat.hpp"

namespace ricci {

using Manifest = nlohmann::ordered_json;

/// 17 significant digits: enough to round-trip an IEEE double exactly.
std::string format_g17(double v);

struct Csv {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::filesystem::path& path, const Csv& table);
Csv read_csv(const std::filesystem::path& path);

/// Aligned fixed-width text rendering of a CSV table.
std::string render_table(const Csv& table);

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

/// FNV-1a 64-bit hash of the raw config text, hex encoded.
std::string config_hash(const std::string& text);

/// Trajectory dump format: bytes 0..3 magic "RCFD", then little-endian
/// u32 version (1), u32 cell count, u32 time count, followed by the time
/// nodes (f64 each) and the field values as row-major f64 (time x cell).
void write_field_dump(const std::filesystem::path& path,
                      const SpaceTimeField& field);
SpaceTimeField read_field_dump(const std::filesystem::path& path);

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ricci
