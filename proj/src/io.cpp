#include "pinv/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "pinv/error.hpp"

namespace pinv {

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
    for (const auto& h : header) *this << std::string_view(h);
    end_row();
}

void CsvWriter::sep() {
    if (in_row_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
    sep();
    out_ << format_real(v);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
    sep();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view s) {
    sep();
    out_ << s;
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) throw Error(fmt::format("CSV row has {} cells, header has {}", in_row_, columns_));
    out_ << '\n';
    in_row_ = 0;
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw Error("CSV write failed");
}

void write_field_csv(const std::filesystem::path& path, const Field& f, int level_stride) {
    const auto& grid = f.grid();
    std::vector<std::string> header{"level", "t", "node", "x"};
    if (grid.dim() == 2) header.push_back("y");
    header.push_back("value");
    CsvWriter csv(path, header);
    const int stride = std::max(1, level_stride);
    for (int n = 0; n < f.levels(); ++n) {
        if (n % stride != 0 && n != f.levels() - 1) continue;
        for (std::size_t id = 0; id < f.nodes(); ++id) {
            const auto& x = grid.coord(id);
            csv << n << grid.time(n) << id << x[0];
            if (grid.dim() == 2) csv << x[1];
            csv << f(n, id);
            csv.end_row();
        }
    }
    csv.close();
}

namespace {

template <typename T>
void put_le(std::ostream& os, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
    unsigned char b[sizeof(T)];
    is.read(reinterpret_cast<char*>(b), sizeof(T));
    if (!is) throw Error("truncated binary field");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

constexpr char kMagic[5] = {'P', 'I', 'N', 'V', '1'};

}  // namespace

void write_field_binary(const std::filesystem::path& path, const Field& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
    os.write(kMagic, sizeof kMagic);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.levels()));
    put_le<std::uint64_t>(os, f.nodes());
    for (double v : f.values()) put_le<double>(os, v);
    if (!os) throw Error("binary field write failed");
}

Field read_field_binary(const std::filesystem::path& path, GridPtr grid) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(fmt::format("cannot open '{}'", path.string()));
    char magic[5];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error("not a PINV1 field dump");
    const auto levels = get_le<std::uint32_t>(is);
    const auto nodes = get_le<std::uint64_t>(is);
    if (nodes != grid->node_count()) throw InvalidArgument("binary field does not match the grid");
    Field f(std::move(grid), static_cast<int>(levels));
    for (double& v : f.values()) v = get_le<double>(is);
    return f;
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << is.rdbuf();
    return sha256_hex(ss.str());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(fmt::format("cannot open '{}'", path.string()));
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const auto pos = line.find(',', start);
            cells.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

}  // namespace pinv
