#include "heatgate/gates.hpp"

#include "heatgate/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <stdexcept>
#include <string>

namespace heatgate {

namespace {

SiteSpec input(std::string name, int col, int row) {
    return {std::move(name), {col, row}, SiteRole::input, false, LogicFunction::none};
}

SiteSpec output(std::string name, int col, int row, LogicFunction fn, bool pinned = false) {
    return {std::move(name), {col, row}, SiteRole::output, pinned, fn};
}

SiteSpec outlet(std::string name, int col, int row, bool pinned = false) {
    return {std::move(name), {col, row}, SiteRole::outlet, pinned, LogicFunction::none};
}

// Isosceles triangle shared by the Dirichlet devices: inputs 102 apart, apex 127 from each.
constexpr ElementCoord kTriangleLeft{49, 150};
constexpr ElementCoord kTriangleRight{151, 150};
constexpr ElementCoord kTriangleApex{100, 34};
constexpr ElementCoord kTriangleBaseMid{100, 150};

void pin_element(const GridMesh& mesh, BoundaryConditionSet& bcs, ElementCoord at, double value) {
    for (int n : mesh.element_nodes(mesh.element(at))) {
        bcs.set_temperature(n, value);
    }
}

} // namespace

std::string_view to_string(GateKind kind) {
    switch (kind) {
    case GateKind::and_gate: return "and";
    case GateKind::xor_gate: return "xor";
    case GateKind::half_adder: return "half-adder";
    }
    return "?";
}

std::string_view to_string(BcKind kind) {
    return kind == BcKind::dirichlet ? "dirichlet" : "neumann";
}

std::string_view to_string(SiteRole role) {
    switch (role) {
    case SiteRole::input: return "input";
    case SiteRole::output: return "output";
    case SiteRole::outlet: return "outlet";
    }
    return "?";
}

std::string_view to_string(LogicFunction fn) {
    switch (fn) {
    case LogicFunction::none: return "none";
    case LogicFunction::conjunction: return "and";
    case LogicFunction::exclusive_or: return "xor";
    }
    return "?";
}

GateKind parse_gate_kind(std::string_view text) {
    if (text == "and") return GateKind::and_gate;
    if (text == "xor") return GateKind::xor_gate;
    if (text == "half-adder" || text == "half_adder") return GateKind::half_adder;
    throw std::invalid_argument("gate: expected and, xor or half-adder, got '" + std::string(text) + "'");
}

BcKind parse_bc_kind(std::string_view text) {
    if (text == "dirichlet") return BcKind::dirichlet;
    if (text == "neumann") return BcKind::neumann;
    throw std::invalid_argument("bc: expected dirichlet or neumann, got '" + std::string(text) + "'");
}

SiteRole parse_site_role(std::string_view text) {
    if (text == "input") return SiteRole::input;
    if (text == "output") return SiteRole::output;
    if (text == "outlet") return SiteRole::outlet;
    throw InvalidSpec("unknown site role '" + std::string(text) + "'");
}

LogicFunction parse_logic_function(std::string_view text) {
    if (text == "none") return LogicFunction::none;
    if (text == "and") return LogicFunction::conjunction;
    if (text == "xor") return LogicFunction::exclusive_or;
    throw InvalidSpec("unknown logic function '" + std::string(text) + "'");
}

bool evaluate(LogicFunction fn, bool x, bool y) {
    switch (fn) {
    case LogicFunction::conjunction: return x && y;
    case LogicFunction::exclusive_or: return x != y;
    case LogicFunction::none: break;
    }
    throw InvalidSpec("output site has no logic function");
}

void GateSpec::validate() const {
    if (nx < 1 || ny < 1) {
        throw InvalidSpec("grid size must be positive");
    }
    if (!(mass > 0.0)) {
        throw InvalidSpec("mass must be positive");
    }
    std::set<std::string> names;
    int inputs = 0;
    int outputs = 0;
    for (const auto& s : sites) {
        if (!names.insert(s.name).second) {
            throw InvalidSpec("duplicate site name '" + s.name + "'");
        }
        if (s.at.col < kSiteMargin || s.at.col >= nx - kSiteMargin || s.at.row < kSiteMargin ||
            s.at.row >= ny - kSiteMargin) {
            throw InvalidSpec("site '" + s.name + "' closer than " + std::to_string(kSiteMargin) +
                              " elements to the boundary");
        }
        switch (s.role) {
        case SiteRole::input:
            ++inputs;
            if (s.name != "I_x" && s.name != "I_y") {
                throw InvalidSpec("input sites must be named I_x and I_y, got '" + s.name + "'");
            }
            break;
        case SiteRole::output:
            ++outputs;
            if (s.function == LogicFunction::none) {
                throw InvalidSpec("output site '" + s.name + "' has no logic function");
            }
            if (s.pinned && bc == BcKind::neumann) {
                throw InvalidSpec("output site '" + s.name + "' cannot be pinned in a Neumann gate");
            }
            break;
        case SiteRole::outlet:
            if (bc == BcKind::dirichlet && !s.pinned) {
                throw InvalidSpec("Dirichlet outlet '" + s.name + "' must be pinned");
            }
            break;
        }
    }
    if (inputs != 2) {
        throw InvalidSpec("a gate needs exactly the two inputs I_x and I_y");
    }
    if (outputs == 0) {
        throw InvalidSpec("a gate needs at least one output");
    }
    if (bc == BcKind::neumann && with_role(SiteRole::outlet).empty()) {
        throw InvalidSpec("a Neumann gate needs at least one outlet to balance its inputs");
    }
}

const SiteSpec& GateSpec::site(std::string_view name) const {
    const auto it = std::find_if(sites.begin(), sites.end(), [&](const auto& s) { return s.name == name; });
    if (it == sites.end()) {
        throw InvalidSpec("no site named '" + std::string(name) + "'");
    }
    return *it;
}

std::vector<const SiteSpec*> GateSpec::with_role(SiteRole role) const {
    std::vector<const SiteSpec*> out;
    for (const auto& s : sites) {
        if (s.role == role) {
            out.push_back(&s);
        }
    }
    return out;
}

GateSpec build_and_dirichlet() {
    GateSpec g;
    g.kind = GateKind::and_gate;
    g.bc = BcKind::dirichlet;
    g.mass = 2000.0;
    g.sites = {input("I_x", kTriangleLeft.col, kTriangleLeft.row),
               input("I_y", kTriangleRight.col, kTriangleRight.row),
               output("O", kTriangleApex.col, kTriangleApex.row, LogicFunction::conjunction, true)};
    return g;
}

GateSpec build_xor_dirichlet() {
    GateSpec g;
    g.kind = GateKind::xor_gate;
    g.bc = BcKind::dirichlet;
    g.mass = 2000.0;
    g.sites = {input("I_x", kTriangleLeft.col, kTriangleLeft.row),
               input("I_y", kTriangleRight.col, kTriangleRight.row),
               outlet("V", kTriangleApex.col, kTriangleApex.row, true),
               output("O", kTriangleBaseMid.col, kTriangleBaseMid.row, LogicFunction::exclusive_or)};
    return g;
}

GateSpec build_half_adder_dirichlet() {
    GateSpec g;
    g.kind = GateKind::half_adder;
    g.bc = BcKind::dirichlet;
    g.mass = 2000.0;
    g.sites = {input("I_x", kTriangleLeft.col, kTriangleLeft.row),
               input("I_y", kTriangleRight.col, kTriangleRight.row),
               output("O_1", kTriangleApex.col, kTriangleApex.row, LogicFunction::conjunction, true),
               output("O_2", kTriangleBaseMid.col, kTriangleBaseMid.row, LogicFunction::exclusive_or)};
    return g;
}

GateSpec build_and_neumann() {
    GateSpec g;
    g.kind = GateKind::and_gate;
    g.bc = BcKind::neumann;
    g.mass = 800.0;
    // V from |I_x V| = 70, |I_y V| = 90 below the input pair.
    g.sites = {input("I_x", 80, 100), input("I_y", 120, 100), outlet("V", 60, 33),
               output("O", 100, 100, LogicFunction::conjunction)};
    return g;
}

GateSpec build_xor_neumann() {
    GateSpec g;
    g.kind = GateKind::xor_gate;
    g.bc = BcKind::neumann;
    g.mass = 400.0;
    // Square of side 42; V_2 sits diagonally opposite I_x, V_1 opposite I_y.
    g.sites = {input("I_x", 79, 121), input("I_y", 121, 121), outlet("V_1", 79, 79),
               outlet("V_2", 121, 79), output("O", 100, 100, LogicFunction::exclusive_or)};
    return g;
}

GateSpec build_half_adder_neumann() {
    GateSpec g;
    g.kind = GateKind::half_adder;
    g.bc = BcKind::neumann;
    g.mass = 2000.0;
    // Square of side 40 with O_2 at its centre; V_3 below with |V_1 V_3| = 36, |V_3 V_2| = 51,
    // and O_1 halfway between V_2 and V_3.
    g.sites = {input("I_x", 80, 130),
               input("I_y", 120, 130),
               outlet("V_1", 80, 90),
               outlet("V_2", 120, 90),
               outlet("V_3", 84, 55),
               output("O_1", 102, 72, LogicFunction::conjunction),
               output("O_2", 100, 110, LogicFunction::exclusive_or)};
    return g;
}

GateSpec build_gate(GateKind kind, BcKind bc) {
    const bool dirichlet = bc == BcKind::dirichlet;
    switch (kind) {
    case GateKind::and_gate: return dirichlet ? build_and_dirichlet() : build_and_neumann();
    case GateKind::xor_gate: return dirichlet ? build_xor_dirichlet() : build_xor_neumann();
    case GateKind::half_adder:
        return dirichlet ? build_half_adder_dirichlet() : build_half_adder_neumann();
    }
    throw InvalidSpec("unknown gate kind");
}

OptParams gate_params(const GateSpec& spec) {
    OptParams p;
    p.mass = spec.mass;
    return p;
}

std::vector<double> site_fluxes(const GateSpec& spec, bool x, bool y) {
    const double qx = x ? spec.q_hi : 0.0;
    const double qy = y ? spec.q_hi : 0.0;
    const auto outlets = spec.with_role(SiteRole::outlet);
    const double drain = outlets.empty() ? 0.0 : -(qx + qy) / static_cast<double>(outlets.size());

    std::vector<double> out;
    out.reserve(spec.sites.size());
    for (const auto& s : spec.sites) {
        switch (s.role) {
        case SiteRole::input: out.push_back(s.name == "I_x" ? qx : qy); break;
        case SiteRole::outlet: out.push_back(drain); break;
        case SiteRole::output: out.push_back(0.0); break;
        }
    }
    return out;
}

BoundaryConditionSet encode_inputs(const GateSpec& spec, bool x, bool y) {
    spec.validate();
    const GridMesh mesh(spec.nx, spec.ny);
    BoundaryConditionSet bcs;
    if (spec.bc == BcKind::dirichlet) {
        for (const auto& s : spec.sites) {
            if (s.role == SiteRole::input) {
                const bool bit = s.name == "I_x" ? x : y;
                pin_element(mesh, bcs, s.at, bit ? spec.t_hi : 0.0);
            } else if (s.pinned) {
                pin_element(mesh, bcs, s.at, 0.0);
            }
        }
        return bcs;
    }

    const auto fluxes = site_fluxes(spec, x, y);
    for (std::size_t i = 0; i < spec.sites.size(); ++i) {
        if (spec.sites[i].role != SiteRole::output && fluxes[i] != 0.0) {
            bcs.add_face_flux(mesh.element(spec.sites[i].at), kSiteFluxFace, fluxes[i]);
        }
    }
    bcs.set_gauge_node(default_gauge_node(mesh, bcs));
    return bcs;
}

double site_density(const GridMesh& mesh, std::span<const double> rho, const SiteSpec& site) {
    if (!site.pinned) {
        return rho[mesh.element(site.at)];
    }
    // Every node of a pinned site element is fixed, so the element carries no gradient and
    // keeps rho_min forever. Its state is read from the edge neighbours that conduct into it.
    std::array<double, 4> ring{};
    const std::array<ElementCoord, 4> around{{{site.at.col, site.at.row - 1},
                                              {site.at.col + 1, site.at.row},
                                              {site.at.col, site.at.row + 1},
                                              {site.at.col - 1, site.at.row}}};
    for (std::size_t i = 0; i < around.size(); ++i) {
        ring[i] = rho[mesh.element(around[i])];
    }
    std::sort(ring.begin(), ring.end());
    return 0.5 * (ring[1] + ring[2]);
}

const OutputReading& ReadoutResult::output(std::string_view name) const {
    const auto it = std::find_if(outputs.begin(), outputs.end(), [&](const auto& o) { return o.name == name; });
    if (it == outputs.end()) {
        throw InvalidSpec("no output named '" + std::string(name) + "'");
    }
    return *it;
}

ReadoutResult read_output(const DensityField& final_state, const GateSpec& spec, double threshold) {
    const GridMesh mesh(spec.nx, spec.ny);
    if (static_cast<int>(final_state.rho.size()) != mesh.element_count()) {
        throw std::invalid_argument("density field length does not match the gate grid");
    }
    ReadoutResult out;
    out.threshold = threshold;
    for (const auto* s : spec.with_role(SiteRole::output)) {
        const double rho = site_density(mesh, final_state.rho, *s);
        out.outputs.push_back({s->name, rho, rho >= threshold});
    }
    if (out.outputs.empty()) {
        throw InvalidSpec("gate has no output site");
    }
    return out;
}

bool TruthTable::matches() const {
    return std::all_of(rows.begin(), rows.end(), [](const TruthRow& r) { return r.matches; });
}

TruthRow evaluate_row(const GateSpec& spec, const OptParams& params, bool x, bool y,
                      const RunOptions& options) {
    TruthRow row;
    row.x = x;
    row.y = y;
    try {
        const GridMesh mesh(spec.nx, spec.ny);
        const auto bcs = encode_inputs(spec, x, y);
        row.trace = run(initial_density(mesh, params), mesh, bcs, params, options);
        row.readout = read_output(row.trace->final_state, spec);
        row.matches = true;
        for (const auto& o : row.readout->outputs) {
            if (o.value != evaluate(spec.site(o.name).function, x, y)) {
                row.matches = false;
            }
        }
    } catch (const std::exception& e) {
        row.error = e.what();
        row.matches = false;
    }
    return row;
}

TruthTable truth_table(const GateSpec& spec, const OptParams& params, const TruthTableOptions& options) {
    spec.validate();
    TruthTable table;
    constexpr std::array<std::array<bool, 2>, 4> inputs{{{false, false}, {false, true}, {true, false}, {true, true}}};
    if (options.jobs <= 1) {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            table.rows[i] = evaluate_row(spec, params, inputs[i][0], inputs[i][1], options.run);
        }
        return table;
    }
    std::array<std::future<TruthRow>, 4> pending;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        pending[i] = std::async(std::launch::async, evaluate_row, std::cref(spec), std::cref(params),
                                inputs[i][0], inputs[i][1], std::cref(options.run));
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        table.rows[i] = pending[i].get();
    }
    return table;
}

} // namespace heatgate
