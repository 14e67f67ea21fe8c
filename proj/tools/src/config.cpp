#include "heatgate/cli/config.hpp"

#include "heatgate/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace heatgate::cli {

namespace {

constexpr std::array<std::string_view, 25> kKeys{
    "gate.kind",          "gate.bc",           "gate.nx",          "gate.ny",
    "gate.mass",          "gate.t_hi",         "gate.q_hi",        "run.x",
    "run.y",              "run.jobs",          "optimizer.rho_min", "optimizer.rho_max",
    "optimizer.theta",    "optimizer.q",       "optimizer.k_min",  "optimizer.k_max",
    "optimizer.p",        "optimizer.max_iters", "optimizer.rule", "solver.preconditioner",
    "solver.tolerance",   "solver.max_iterations", "solver.warm_start", "output.dir",
    "output.format"};

constexpr std::string_view kStrideKey = "output.snapshot_stride";

bool known(std::string_view key) {
    return key == kStrideKey || std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end();
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
        out = out.substr(1, out.size() - 2);
    }
    return out;
}

std::string resolve_key(std::string_view key) {
    if (key.find('.') != std::string_view::npos) {
        return std::string(key);
    }
    std::string match;
    auto consider = [&](std::string_view full) {
        if (full.substr(full.find('.') + 1) == key) {
            if (!match.empty()) {
                throw ConfigError(std::string(key), "ambiguous key, use section.name");
            }
            match = full;
        }
    };
    for (auto k : kKeys) {
        consider(k);
    }
    consider(kStrideKey);
    if (match.empty()) {
        throw ConfigError(std::string(key), "unknown key");
    }
    return match;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        return parse_double(value);
    } catch (const std::invalid_argument&) {
        throw ConfigError(key, "expected a number, got '" + value + "'");
    }
}

int to_int(const std::string& key, const std::string& value) {
    int v = 0;
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    }
    return v;
}

bool to_bit(const std::string& key, const std::string& value) {
    if (value == "0" || value == "false") {
        return false;
    }
    if (value == "1" || value == "true") {
        return true;
    }
    throw ConfigError(key, "expected 0 or 1, got '" + value + "'");
}

template <class Parse>
auto parse_enum(const std::string& key, const std::string& value, Parse parse) {
    try {
        return parse(value);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
}

} // namespace

void RunConfig::validate() const {
    if (gate.nx < 1 || gate.ny < 1) {
        throw ConfigError("gate.nx", "grid dimensions must be >= 1");
    }
    try {
        gate.validate();
    } catch (const InvalidSpec& e) {
        throw ConfigError("sites", e.what());
    }
    if (params.mass != gate.mass) {
        throw ConfigError("gate.mass", "optimizer mass and gate mass disagree");
    }
    try {
        params.validate(gate.nx * gate.ny);
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        const std::string field = what.substr(0, what.find(':'));
        throw ConfigError(field == "mass" ? "gate.mass" : "optimizer." + field,
                          what.substr(what.find(':') + 2));
    }
    if (!(solver.relative_tolerance > 0.0 && solver.relative_tolerance < 1.0)) {
        throw ConfigError("solver.tolerance", "must be in (0, 1)");
    }
    if (solver.max_iterations < 0) {
        throw ConfigError("solver.max_iterations", "must be >= 0");
    }
    if (jobs < 1) {
        throw ConfigError("run.jobs", "must be >= 1");
    }
}

void Settings::set(std::string_view key, std::string value) {
    if (key.rfind("sites.", 0) == 0) {
        const std::string name(key.substr(6));
        const auto it = std::find_if(sites_.begin(), sites_.end(), [&](const auto& s) { return s.first == name; });
        if (it != sites_.end()) {
            it->second = std::move(value);
        } else {
            sites_.emplace_back(name, std::move(value));
        }
        return;
    }
    const std::string full = resolve_key(key);
    if (!known(full)) {
        throw ConfigError(full, "unknown key");
    }
    values_[full] = std::move(value);
}

void Settings::merge_text(std::string_view text, std::string_view origin) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const std::string where = std::string(origin) + ":" + std::to_string(line_no);
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ConfigError(where, "malformed section header");
            }
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        if (section == "result") {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos || section.empty()) {
            throw ConfigError(where, "expected key = value inside a [section]");
        }
        set(section + "." + trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
    }
}

void Settings::merge_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot read " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    merge_text(ss.str(), path.string());
}

std::string format_site(const SiteSpec& site) {
    std::string s = std::string(to_string(site.role)) + " " + std::to_string(site.at.col) + " " +
                    std::to_string(site.at.row);
    if (site.function != LogicFunction::none) {
        s += " " + std::string(to_string(site.function));
    }
    if (site.pinned) {
        s += " pinned";
    }
    return s;
}

SiteSpec parse_site(const std::string& name, const std::string& text) {
    const std::string key = "sites." + name;
    std::istringstream in(text);
    std::string role;
    std::string col;
    std::string row;
    if (!(in >> role >> col >> row)) {
        throw ConfigError(key, "expected 'role col row [function] [pinned]'");
    }
    SiteSpec s;
    s.name = name;
    s.role = parse_enum(key, role, parse_site_role);
    s.at = {to_int(key, col), to_int(key, row)};
    std::string word;
    while (in >> word) {
        if (word == "pinned") {
            s.pinned = true;
        } else {
            s.function = parse_enum(key, word, parse_logic_function);
        }
    }
    return s;
}

RunConfig resolve(const Settings& settings) {
    const auto& v = settings.values();
    auto get = [&](const char* key) -> const std::string* {
        const auto it = v.find(key);
        return it == v.end() ? nullptr : &it->second;
    };

    RunConfig c;
    const GateKind kind = get("gate.kind") ? parse_enum("gate.kind", *get("gate.kind"), parse_gate_kind)
                                           : GateKind::and_gate;
    const BcKind bc = get("gate.bc") ? parse_enum("gate.bc", *get("gate.bc"), parse_bc_kind) : BcKind::dirichlet;
    c.gate = build_gate(kind, bc);
    c.params = gate_params(c.gate);

    if (!settings.sites().empty()) {
        c.gate.sites.clear();
        for (const auto& [name, text] : settings.sites()) {
            c.gate.sites.push_back(parse_site(name, text));
        }
    }

    for (const auto& [key, value] : v) {
        if (key == "gate.nx") c.gate.nx = to_int(key, value);
        else if (key == "gate.ny") c.gate.ny = to_int(key, value);
        else if (key == "gate.mass") c.gate.mass = to_double(key, value);
        else if (key == "gate.t_hi") c.gate.t_hi = to_double(key, value);
        else if (key == "gate.q_hi") c.gate.q_hi = to_double(key, value);
        else if (key == "run.x") c.x = to_bit(key, value);
        else if (key == "run.y") c.y = to_bit(key, value);
        else if (key == "run.jobs") c.jobs = to_int(key, value);
        else if (key == "optimizer.rho_min") c.params.rho_min = to_double(key, value);
        else if (key == "optimizer.rho_max") c.params.rho_max = to_double(key, value);
        else if (key == "optimizer.theta") c.params.theta = to_double(key, value);
        else if (key == "optimizer.q") c.params.q = to_double(key, value);
        else if (key == "optimizer.k_min") c.params.conductivity.k_min = to_double(key, value);
        else if (key == "optimizer.k_max") c.params.conductivity.k_max = to_double(key, value);
        else if (key == "optimizer.p") c.params.conductivity.p = to_double(key, value);
        else if (key == "optimizer.max_iters") c.params.max_iters = to_int(key, value);
        else if (key == "optimizer.rule") c.params.rule = parse_enum(key, value, parse_update_rule);
        else if (key == "solver.preconditioner") c.solver.preconditioner = parse_enum(key, value, parse_preconditioner);
        else if (key == "solver.tolerance") c.solver.relative_tolerance = to_double(key, value);
        else if (key == "solver.max_iterations") c.solver.max_iterations = to_int(key, value);
        else if (key == "solver.warm_start") c.warm_start = to_bit(key, value);
        else if (key == "output.dir") c.out = value;
        else if (key == "output.format") c.format = parse_enum(key, value, parse_snapshot_format);
        else if (key == "output.snapshot_stride") c.params.snapshot_stride = to_int(key, value);
    }
    c.params.mass = c.gate.mass;
    c.validate();
    return c;
}

std::string manifest_text(const RunConfig& c, const RunSummary* result) {
    std::ostringstream m;
    const auto d = [](double x) { return format_double(x); };
    m << "[gate]\n"
      << "kind = " << to_string(c.gate.kind) << '\n'
      << "bc = " << to_string(c.gate.bc) << '\n'
      << "nx = " << c.gate.nx << '\n'
      << "ny = " << c.gate.ny << '\n'
      << "mass = " << d(c.gate.mass) << '\n'
      << "t_hi = " << d(c.gate.t_hi) << '\n'
      << "q_hi = " << d(c.gate.q_hi) << "\n\n";
    m << "[sites]\n";
    for (const auto& s : c.gate.sites) {
        m << s.name << " = " << format_site(s) << '\n';
    }
    m << "\n[run]\n"
      << "x = " << (c.x ? 1 : 0) << '\n'
      << "y = " << (c.y ? 1 : 0) << '\n'
      << "jobs = " << c.jobs << "\n\n";
    m << "[optimizer]\n"
      << "rho_min = " << d(c.params.rho_min) << '\n'
      << "rho_max = " << d(c.params.rho_max) << '\n'
      << "theta = " << d(c.params.theta) << '\n'
      << "q = " << d(c.params.q) << '\n'
      << "k_min = " << d(c.params.conductivity.k_min) << '\n'
      << "k_max = " << d(c.params.conductivity.k_max) << '\n'
      << "p = " << d(c.params.conductivity.p) << '\n'
      << "max_iters = " << c.params.max_iters << '\n'
      << "rule = " << to_string(c.params.rule) << "\n\n";
    m << "[solver]\n"
      << "preconditioner = " << to_string(c.solver.preconditioner) << '\n'
      << "tolerance = " << d(c.solver.relative_tolerance) << '\n'
      << "max_iterations = " << c.solver.max_iterations << '\n'
      << "warm_start = " << (c.warm_start ? 1 : 0) << "\n\n";
    m << "[output]\n"
      << "dir = " << c.out.string() << '\n'
      << "format = " << to_string(c.format) << '\n'
      << "snapshot_stride = " << c.params.snapshot_stride << '\n';
    if (result) {
        m << "\n[result]\n";
        if (!result->error.empty()) {
            m << "error = " << result->error << '\n';
        } else {
            m << "termination = " << to_string(result->termination) << '\n'
              << "iterations = " << result->iterations << '\n';
            for (const auto& o : result->outputs) {
                m << o.name << " = " << (o.value ? 1 : 0) << '\n'
                  << o.name << ".density = " << d(o.density) << '\n';
            }
        }
    }
    return m.str();
}

} // namespace heatgate::cli
