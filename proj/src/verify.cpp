#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "pinv/cli.hpp"
#include "pinv/io.hpp"

namespace pinv {

namespace fs = std::filesystem;
using nlohmann::json;

bool VerifyReport::passed() const {
    for (const auto& e : entries) {
        if (e.status == "fail" || e.status == "missing") return false;
    }
    return true;
}

namespace {

struct Tol {
    double rtol = 1e-9;
    double atol = 1e-12;
};

bool close(double a, double b, const Tol& t) {
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= t.atol + t.rtol * std::abs(b);
}

bool parse_number(const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

std::set<std::string> files_under(const fs::path& dir) {
    std::set<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out.insert(fs::relative(e.path(), dir).generic_string());
    }
    return out;
}

std::string compare_csv(const fs::path& g, const fs::path& o, const Tol& tol) {
    const auto a = read_csv(g), b = read_csv(o);
    if (a.header != b.header) return "header differs";
    if (a.rows.size() != b.rows.size()) return fmt::format("row count {} vs {}", a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        if (a.rows[i].size() != b.rows[i].size()) return fmt::format("row {}: cell count differs", i + 1);
        for (std::size_t c = 0; c < a.rows[i].size(); ++c) {
            const auto& x = a.rows[i][c];
            const auto& y = b.rows[i][c];
            double vx, vy;
            const bool nx = parse_number(x, vx), ny = parse_number(y, vy);
            const bool ok = (nx && ny) ? close(vy, vx, tol) : x == y;
            if (!ok) {
                const std::string col = c < a.header.size() ? a.header[c] : std::to_string(c);
                return fmt::format("row {} column '{}': golden {} output {}", i + 1, col, x, y);
            }
        }
    }
    return "";
}

std::string compare_json(const json& a, const json& b, const std::string& path, const Tol& tol) {
    if (a.is_number() && b.is_number()) {
        return close(b.get<double>(), a.get<double>(), tol) ? ""
               : fmt::format("{}: golden {} output {}", path, a.dump(), b.dump());
    }
    if (a.type() != b.type()) return fmt::format("{}: type differs", path);
    if (a.is_object()) {
        for (const auto& [k, v] : a.items()) {
            if (!b.contains(k)) return fmt::format("{}.{}: missing", path, k);
            auto d = compare_json(v, b[k], path + "." + k, tol);
            if (!d.empty()) return d;
        }
        for (const auto& [k, v] : b.items()) {
            if (!a.contains(k)) return fmt::format("{}.{}: unexpected", path, k);
        }
        return "";
    }
    if (a.is_array()) {
        if (a.size() != b.size()) return fmt::format("{}: length {} vs {}", path, a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            auto d = compare_json(a[i], b[i], fmt::format("{}[{}]", path, i), tol);
            if (!d.empty()) return d;
        }
        return "";
    }
    return a == b ? "" : fmt::format("{}: golden {} output {}", path, a.dump(), b.dump());
}

json load_json(const fs::path& p) {
    std::ifstream is(p);
    return json::parse(is);
}

std::string compare_manifest(const fs::path& g, const fs::path& o) {
    const json a = load_json(g), b = load_json(o);
    for (const char* key : {"config_hash", "status", "exit_code", "experiment", "scenario"}) {
        if (a.value(key, json()) != b.value(key, json())) return fmt::format("manifest field '{}' differs", key);
    }
    std::set<std::string> fa, fb;
    for (const auto& f : a.value("files", json::array())) fa.insert(f.value("path", ""));
    for (const auto& f : b.value("files", json::array())) fb.insert(f.value("path", ""));
    if (fa != fb) return "manifest file lists differ";
    return "";
}

std::string compare_bytes(const fs::path& g, const fs::path& o) {
    return sha256_file(g) == sha256_file(o) ? "" : "contents differ";
}

}  // namespace

VerifyReport verify_dirs(const fs::path& golden_dir, const fs::path& output_dir) {
    VerifyReport rep;
    for (const auto& d : {golden_dir, output_dir}) {
        if (!fs::is_directory(d)) throw InvalidArgument(fmt::format("'{}' is not a directory", d.string()));
    }
    std::map<std::string, Tol> tolerances;
    Tol fallback;
    const fs::path tol_file = golden_dir / "tolerances.json";
    if (fs::exists(tol_file)) {
        const json spec = load_json(tol_file);
        for (const auto& [k, v] : spec.items()) {
            Tol t{v.value("rtol", 1e-9), v.value("atol", 1e-12)};
            if (k == "*") fallback = t;
            else tolerances[k] = t;
        }
    }
    auto golden = files_under(golden_dir);
    golden.erase("tolerances.json");
    const auto output = files_under(output_dir);

    for (const auto& f : golden) {
        if (!output.count(f)) {
            rep.entries.push_back({f, "missing", "not present in output"});
            continue;
        }
        const Tol tol = tolerances.count(f) ? tolerances[f] : fallback;
        const fs::path g = golden_dir / f, o = output_dir / f;
        std::string diff;
        try {
            const auto ext = fs::path(f).extension();
            if (fs::path(f).filename() == "manifest.json") diff = compare_manifest(g, o);
            else if (ext == ".csv") diff = compare_csv(g, o, tol);
            else if (ext == ".json") diff = compare_json(load_json(g), load_json(o), "$", tol);
            else diff = compare_bytes(g, o);
        } catch (const std::exception& e) {
            diff = fmt::format("unreadable: {}", e.what());
        }
        rep.entries.push_back({f, diff.empty() ? "pass" : "fail", diff});
    }
    for (const auto& f : output) {
        if (!golden.count(f)) rep.entries.push_back({f, "extra", "not present in golden directory (warning)"});
    }
    return rep;
}

}  // namespace pinv
