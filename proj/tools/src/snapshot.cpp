#include "heatgate/cli/snapshot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace heatgate::cli {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

void check_shape(std::span<const double> rho, int nx, int ny) {
    if (nx < 1 || ny < 1 || rho.size() != static_cast<std::size_t>(nx) * ny) {
        throw std::invalid_argument("field length does not match the grid");
    }
}

} // namespace

std::string to_string(SnapshotFormat f) {
    switch (f) {
    case SnapshotFormat::pgm: return "pgm";
    case SnapshotFormat::csv: return "csv";
    case SnapshotFormat::both: return "both";
    }
    return "both";
}

SnapshotFormat parse_snapshot_format(const std::string& text) {
    if (text == "pgm") {
        return SnapshotFormat::pgm;
    }
    if (text == "csv") {
        return SnapshotFormat::csv;
    }
    if (text == "both") {
        return SnapshotFormat::both;
    }
    throw std::invalid_argument("format: expected pgm, csv or both, got '" + text + "'");
}

std::vector<std::uint8_t> pgm_pixels(std::span<const double> rho, int nx, int ny, double rho_min,
                                     double rho_max) {
    check_shape(rho, nx, ny);
    std::vector<std::uint8_t> px(rho.size());
    const double span = rho_max - rho_min;
    for (int r = 0; r < ny; ++r) {
        const int image_row = ny - 1 - r;
        for (int c = 0; c < nx; ++c) {
            const double v = std::round(255.0 * (rho[static_cast<std::size_t>(r) * nx + c] - rho_min) / span);
            px[static_cast<std::size_t>(image_row) * nx + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    }
    return px;
}

void write_pgm(const std::filesystem::path& path, std::span<const double> rho, int nx, int ny,
               double rho_min, double rho_max) {
    const auto px = pgm_pixels(rho, nx, ny, rho_min, rho_max);
    auto out = open_for_write(path, std::ios::binary);
    out << "P5\n" << nx << ' ' << ny << "\n255\n";
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    check_written(out, path);
}

PgmImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string magic;
    int maxval = 0;
    PgmImage img;
    if (!(in >> magic >> img.width >> img.height >> maxval) || magic != "P5" || maxval != 255) {
        throw IoError("not an 8-bit binary PGM: " + path.string());
    }
    in.get();
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!in) {
        throw IoError("truncated PGM: " + path.string());
    }
    return img;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw std::invalid_argument("not a number: '" + text + "'");
    }
    return v;
}

void write_csv(const std::filesystem::path& path, std::span<const double> rho, int nx, int ny) {
    check_shape(rho, nx, ny);
    auto out = open_for_write(path, std::ios::out);
    for (int r = ny - 1; r >= 0; --r) {
        for (int c = 0; c < nx; ++c) {
            if (c > 0) {
                out << ',';
            }
            out << format_double(rho[static_cast<std::size_t>(r) * nx + c]);
        }
        out << '\n';
    }
    check_written(out, path);
}

std::vector<double> read_csv(const std::filesystem::path& path, int& nx, int& ny) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            row.push_back(parse_double(cell));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw IoError("ragged CSV: " + path.string());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw IoError("empty CSV: " + path.string());
    }
    ny = static_cast<int>(rows.size());
    nx = static_cast<int>(rows.front().size());
    std::vector<double> rho;
    rho.reserve(static_cast<std::size_t>(nx) * ny);
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        rho.insert(rho.end(), it->begin(), it->end());
    }
    return rho;
}

} // namespace heatgate::cli
