#pragma once

#include "heatgate/fem.hpp"
#include "heatgate/mesh.hpp"
#include "heatgate/optimizer.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heatgate {

enum class GateKind { and_gate, xor_gate, half_adder };
enum class BcKind { dirichlet, neumann };
enum class SiteRole { input, output, outlet };
enum class LogicFunction { none, conjunction, exclusive_or };

std::string_view to_string(GateKind kind);
std::string_view to_string(BcKind kind);
std::string_view to_string(SiteRole role);
std::string_view to_string(LogicFunction fn);
GateKind parse_gate_kind(std::string_view text);
BcKind parse_bc_kind(std::string_view text);
SiteRole parse_site_role(std::string_view text);
LogicFunction parse_logic_function(std::string_view text);

bool evaluate(LogicFunction fn, bool x, bool y);

/// A named site occupying one grid element.
///
/// In Dirichlet gates inputs are always temperature-driven; outputs and outlets are held
/// at T = 0 when `pinned`. In Neumann gates inputs and outlets carry face fluxes and
/// outputs carry no boundary condition.
struct SiteSpec {
    std::string name;
    ElementCoord at;
    SiteRole role = SiteRole::output;
    bool pinned = false;
    LogicFunction function = LogicFunction::none; // outputs only
};

struct GateSpec {
    GateKind kind = GateKind::and_gate;
    BcKind bc = BcKind::dirichlet;
    std::vector<SiteSpec> sites;
    double mass = 2000.0;
    int nx = 200;
    int ny = 200;
    double t_hi = 100.0;
    double q_hi = 1.0;

    // Throws InvalidSpec.
    void validate() const;

    const SiteSpec& site(std::string_view name) const;
    std::vector<const SiteSpec*> with_role(SiteRole role) const;
};

inline constexpr int kSiteMargin = 5;

// Face of the site element that carries a Neumann site flux.
inline constexpr Face kSiteFluxFace = Face::bottom;

GateSpec build_and_dirichlet();
GateSpec build_xor_dirichlet();
GateSpec build_and_neumann();
GateSpec build_xor_neumann();
GateSpec build_half_adder_dirichlet();
GateSpec build_half_adder_neumann();
GateSpec build_gate(GateKind kind, BcKind bc);

// Default optimizer parameters with the gate's target mass.
OptParams gate_params(const GateSpec& spec);

// Input flux of each site for Neumann gates (zero entries for outputs).
std::vector<double> site_fluxes(const GateSpec& spec, bool x, bool y);

BoundaryConditionSet encode_inputs(const GateSpec& spec, bool x, bool y);

struct OutputReading {
    std::string name;
    double density = 0.0;
    bool value = false;
};

struct ReadoutResult {
    std::vector<OutputReading> outputs;
    double threshold = 0.5;

    const OutputReading& output(std::string_view name) const;
};

// Density that represents an output site in the readout (see README for the window rule).
double site_density(const GridMesh& mesh, std::span<const double> rho, const SiteSpec& site);

ReadoutResult read_output(const DensityField& final_state, const GateSpec& spec,
                          double threshold = 0.5);

struct TruthRow {
    bool x = false;
    bool y = false;
    std::optional<ReadoutResult> readout;
    std::optional<RunTrace> trace;
    std::string error;      // non-empty when the row failed
    bool matches = false;   // every output equals its expected bit
};

struct TruthTable {
    std::array<TruthRow, 4> rows;

    bool matches() const;
};

struct TruthTableOptions {
    int jobs = 1; // rows evaluated concurrently
    RunOptions run;
};

TruthTable truth_table(const GateSpec& spec, const OptParams& params,
                       const TruthTableOptions& options = {});

// Single truth-table row: encode, run and read out.
TruthRow evaluate_row(const GateSpec& spec, const OptParams& params, bool x, bool y,
                      const RunOptions& options = {});

} // namespace heatgate
