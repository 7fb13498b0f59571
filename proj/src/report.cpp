#include "ricci/report.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ricci {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const Csv& table) {
    std::ofstream out(path, std::ios::binary);  // LF line ends everywhere
    if (!out) throw ReportError("cannot write " + path.string());
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? "," : "") << table.columns[c];
    out << "\n";
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw ReportError("csv row width mismatch in " + path.string());
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << row[c];
        out << "\n";
    }
}

Csv read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError("cannot read " + path.string());
    Csv table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (first) {
            table.columns = std::move(cells);
            first = false;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    if (first) throw ReportError("empty csv " + path.string());
    return table;
}

std::string render_table(const Csv& table) {
    std::vector<std::size_t> width(table.columns.size());
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        width[c] = table.columns[c].size();
    for (const auto& row : table.rows)
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c)
            width[c] = std::max(width[c], row[c].size());
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out << "  ";
            out << cells[c]
                << std::string(width[c] - cells[c].size(), ' ');
        }
        out << "\n";
    };
    emit(table.columns);
    for (std::size_t c = 0; c < width.size(); ++c) {
        if (c) out << "  ";
        out << std::string(width[c], '-');
    }
    out << "\n";
    for (const auto& row : table.rows) emit(row);
    return out.str();
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ReportError("cannot write " + path.string());
    out << m.dump(2) << "\n";
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError("cannot read " + path.string());
    Manifest m;
    try {
        in >> m;
    } catch (const std::exception& e) {
        throw ReportError("corrupt manifest " + path.string() + ": " +
                          e.what());
    }
    return m;
}

std::string config_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ofstream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void write_field_dump(const std::filesystem::path& path,
                      const SpaceTimeField& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ReportError("cannot write " + path.string());
    out.write("RCFD", 4);
    put_u32(out, 1);
    const std::uint32_t cells =
        field.values.empty() ? 0
                             : static_cast<std::uint32_t>(field.values[0].size());
    put_u32(out, cells);
    put_u32(out, static_cast<std::uint32_t>(field.times.size()));
    for (double t : field.times) put_f64(out, t);
    for (const auto& row : field.values) {
        if (row.size() != cells)
            throw ReportError("ragged field rows in " + path.string());
        for (double v : row) put_f64(out, v);
    }
}

SpaceTimeField read_field_dump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError("cannot read " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "RCFD", 4) != 0)
        throw ReportError("bad dump magic in " + path.string());
    if (get_u32(in) != 1)
        throw ReportError("unsupported dump version in " + path.string());
    const std::uint32_t cells = get_u32(in);
    const std::uint32_t times = get_u32(in);
    SpaceTimeField field;
    field.times.resize(times);
    for (auto& t : field.times) t = get_f64(in);
    field.values.assign(times, std::vector<double>(cells));
    for (auto& row : field.values)
        for (double& v : row) v = get_f64(in);
    if (!in) throw ReportError("truncated dump " + path.string());
    return field;
}

}  // namespace ricci
