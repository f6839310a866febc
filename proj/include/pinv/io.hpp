#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "pinv/field.hpp"

namespace pinv {

/// Round-trip decimal (17 significant digits).
std::string format_real(double v);

/// Minimal CSV writer; numbers go through format_real so output is byte-stable.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(long long v);
    CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
    CsvWriter& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
    CsvWriter& operator<<(std::string_view s);
    void end_row();
    void close();

private:
    void sep();

    std::ofstream out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

/// Field as long-format CSV: level, t, node, x[, y], value. Levels are
/// subsampled by `level_stride` (the last level is always written).
void write_field_csv(const std::filesystem::path& path, const Field& f, int level_stride = 1);

/// Compact binary dump: "PINV1", uint32 levels, uint64 nodes, then
/// little-endian doubles row-major by time level.
void write_field_binary(const std::filesystem::path& path, const Field& f);
Field read_field_binary(const std::filesystem::path& path, GridPtr grid);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Parsed numeric CSV (header + rows of cells kept as text).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace pinv
