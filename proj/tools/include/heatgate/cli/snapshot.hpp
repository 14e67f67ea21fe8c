#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace heatgate::cli {

enum class SnapshotFormat { pgm, csv, both };

std::string to_string(SnapshotFormat f);
SnapshotFormat parse_snapshot_format(const std::string& text);

// Raised when a file cannot be written or read back.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Density field as an 8-bit grey image, row 0 at the top of the domain.
/// Pixel = round(255 * (rho - rho_min) / (rho_max - rho_min)), clamped to [0, 255].
std::vector<std::uint8_t> pgm_pixels(std::span<const double> rho, int nx, int ny, double rho_min,
                                     double rho_max);

void write_pgm(const std::filesystem::path& path, std::span<const double> rho, int nx, int ny,
               double rho_min, double rho_max);

struct PgmImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

PgmImage read_pgm(const std::filesystem::path& path);

// Shortest text that parses back to exactly the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

/// ny lines of nx comma-separated densities, first line = top row of the domain.
void write_csv(const std::filesystem::path& path, std::span<const double> rho, int nx, int ny);

// Inverse of write_csv; returns the field in element order.
std::vector<double> read_csv(const std::filesystem::path& path, int& nx, int& ny);

} // namespace heatgate::cli
