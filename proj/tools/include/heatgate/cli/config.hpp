#pragma once

#include "heatgate/cli/snapshot.hpp"
#include "heatgate/gates.hpp"
#include "heatgate/optimizer.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace heatgate::cli {

// Invalid configuration; `field()` names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Everything that determines one experiment.
struct RunConfig {
    GateSpec gate;
    bool x = false;
    bool y = false;
    OptParams params; // params.mass always equals gate.mass
    SolveOptions solver;
    bool warm_start = true;
    int jobs = 1;
    std::filesystem::path out = "heatgate-out";
    SnapshotFormat format = SnapshotFormat::both;

    // Throws ConfigError.
    void validate() const;
};

/// Raw key/value settings collected from config files, flags and overrides.
///
/// Keys are "section.name". Later assignments win. Site lines ("sites.NAME") replace the
/// built-in layout of the gate as a whole.
class Settings {
public:
    // Accepts "section.name" or a bare name that is unique across sections.
    void set(std::string_view key, std::string value);

    // Parses TOML-style text: [section] headers, key = value lines, '#' comments.
    // The [result] section of a manifest is ignored.
    void merge_text(std::string_view text, std::string_view origin = "config");
    void merge_file(const std::filesystem::path& path);

    const std::map<std::string, std::string>& values() const noexcept { return values_; }
    const std::vector<std::pair<std::string, std::string>>& sites() const noexcept { return sites_; }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::pair<std::string, std::string>> sites_;
};

// Builds and validates the configuration. Throws ConfigError.
RunConfig resolve(const Settings& settings);

// "role col row [function] [pinned]"
std::string format_site(const SiteSpec& site);
SiteSpec parse_site(const std::string& name, const std::string& text);

struct RunSummary {
    Termination termination = Termination::max_iters;
    int iterations = 0;
    std::vector<OutputReading> outputs;
    std::string error;
};

// Config text that reproduces `config`, optionally followed by a [result] section.
std::string manifest_text(const RunConfig& config, const RunSummary* result = nullptr);

} // namespace heatgate::cli
