#include "heatgate/cli/commands.hpp"

#include "heatgate/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

namespace heatgate::cli {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    out.flush();
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
}

RunOptions run_options(const RunConfig& c) {
    RunOptions o;
    o.warm_start = c.warm_start;
    o.solver = c.solver;
    return o;
}

RunSummary summarize(const RunTrace& trace, const ReadoutResult& readout) {
    return {trace.termination, trace.final_state.iteration, readout.outputs, {}};
}

} // namespace

void write_run_artifacts(const fs::path& dir, const RunConfig& config, const RunTrace& trace,
                         const ReadoutResult& readout) {
    make_dir(dir);
    const auto& p = config.params;
    for (const auto& snap : trace.snapshots) {
        const std::string stem = "density_t" + std::to_string(snap.iteration);
        if (config.format != SnapshotFormat::csv) {
            write_pgm(dir / (stem + ".pgm"), snap.rho, config.gate.nx, config.gate.ny, p.rho_min, p.rho_max);
        }
        if (config.format != SnapshotFormat::pgm) {
            write_csv(dir / (stem + ".csv"), snap.rho, config.gate.nx, config.gate.ny);
        }
    }

    std::ostringstream log;
    log << "iteration,total_cost,total_mass,energy,solver_iterations\n";
    for (const auto& r : trace.records) {
        log << r.iteration << ',' << format_double(r.total_cost) << ',' << format_double(r.total_mass) << ','
            << format_double(r.energy) << ',' << r.solver_iterations << '\n';
    }
    write_text(dir / "convergence.csv", log.str());

    const RunSummary summary = summarize(trace, readout);
    write_text(dir / "manifest.cfg", manifest_text(config, &summary));
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const TruthRow row = evaluate_row(config.gate, config.params, config.x, config.y, run_options(config));
    if (!row.error.empty()) {
        err << "error: " << row.error << '\n';
        try {
            make_dir(config.out);
            RunSummary failed;
            failed.error = row.error;
            write_text(config.out / "manifest.cfg", manifest_text(config, &failed));
        } catch (const IoError&) {
        }
        return solver_failure;
    }
    try {
        write_run_artifacts(config.out, config, *row.trace, *row.readout);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return solver_failure;
    }
    out << to_string(config.gate.kind) << ' ' << to_string(config.gate.bc) << " x=" << config.x
        << " y=" << config.y << ": " << to_string(row.trace->termination) << " at iteration "
        << row.trace->final_state.iteration << '\n';
    for (const auto& o : row.readout->outputs) {
        out << "  " << o.name << " = " << o.value << " (rho " << format_double(o.density) << ")\n";
    }
    return ok;
}

int cmd_truth_table(const RunConfig& config, std::ostream& out, std::ostream& err) {
    TruthTableOptions options;
    options.jobs = config.jobs;
    options.run = run_options(config);
    const TruthTable table = truth_table(config.gate, config.params, options);

    const auto outputs = config.gate.with_role(SiteRole::output);
    std::ostringstream csv;
    csv << "x,y";
    for (const auto* o : outputs) {
        csv << ',' << o->name << ',' << o->name << "_density";
    }
    csv << ",iterations,termination,matches,error\n";

    bool failed = false;
    try {
        make_dir(config.out);
        for (const auto& row : table.rows) {
            csv << row.x << ',' << row.y;
            if (row.error.empty()) {
                RunConfig row_config = config;
                row_config.x = row.x;
                row_config.y = row.y;
                row_config.out = config.out / ("row_x" + std::to_string(row.x) + "_y" + std::to_string(row.y));
                write_run_artifacts(row_config.out, row_config, *row.trace, *row.readout);
                for (const auto& o : row.readout->outputs) {
                    csv << ',' << o.value << ',' << format_double(o.density);
                }
                csv << ',' << row.trace->final_state.iteration << ',' << to_string(row.trace->termination);
            } else {
                failed = true;
                for (std::size_t i = 0; i < outputs.size(); ++i) {
                    csv << ",,";
                }
                csv << ",,";
            }
            csv << ',' << row.matches << ',' << row.error << '\n';
        }
        write_text(config.out / "truth_table.csv", csv.str());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return solver_failure;
    }

    out << csv.str();
    if (failed) {
        for (const auto& row : table.rows) {
            if (!row.error.empty()) {
                err << "row x=" << row.x << " y=" << row.y << ": " << row.error << '\n';
            }
        }
        return solver_failure;
    }
    return table.matches() ? ok : table_mismatch;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Logic gates grown by density-based optimisation of heat conduction paths", "heatgate"};
    app.require_subcommand(1);

    struct Flags {
        std::string gate, bc, out, format, config, preconditioner;
        std::optional<int> x, y, iters, stride, jobs;
        std::optional<double> theta, mass;
        std::vector<std::string> set;
    };
    Flags f;
    auto add_common = [&f](CLI::App* cmd, bool with_inputs) {
        cmd->add_option("--gate", f.gate, "and | xor | half-adder");
        cmd->add_option("--bc", f.bc, "dirichlet | neumann");
        if (with_inputs) {
            cmd->add_option("--x", f.x, "first input bit")->check(CLI::Range(0, 1));
            cmd->add_option("--y", f.y, "second input bit")->check(CLI::Range(0, 1));
        }
        cmd->add_option("--iters", f.iters, "iteration cap");
        cmd->add_option("--theta", f.theta, "bang-bang increment");
        cmd->add_option("--mass", f.mass, "target material mass");
        cmd->add_option("--out", f.out, "output directory");
        cmd->add_option("--snapshot-stride", f.stride, "iterations between snapshots");
        cmd->add_option("--format", f.format, "pgm | csv | both");
        cmd->add_option("--preconditioner", f.preconditioner, "multigrid | jacobi");
        cmd->add_option("--config", f.config, "configuration or manifest file");
        cmd->add_option("--set", f.set, "override, key=value (repeatable)");
        cmd->add_option("--jobs", f.jobs, "truth-table rows run concurrently");
    };
    auto* run_cmd = app.add_subcommand("run", "optimise one input pair");
    add_common(run_cmd, true);
    auto* table_cmd = app.add_subcommand("truth-table", "optimise all four input pairs");
    add_common(table_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return invalid_config;
    }

    RunConfig config;
    try {
        Settings s;
        if (!f.config.empty()) {
            s.merge_file(f.config);
        }
        const auto put = [&s](const char* key, const auto& value) {
            if constexpr (std::is_same_v<std::decay_t<decltype(value)>, std::string>) {
                if (!value.empty()) {
                    s.set(key, value);
                }
            } else if (value) {
                if constexpr (std::is_same_v<std::decay_t<decltype(*value)>, double>) {
                    s.set(key, format_double(*value));
                } else {
                    s.set(key, std::to_string(*value));
                }
            }
        };
        put("gate.kind", f.gate);
        put("gate.bc", f.bc);
        put("run.x", f.x);
        put("run.y", f.y);
        put("optimizer.max_iters", f.iters);
        put("optimizer.theta", f.theta);
        put("gate.mass", f.mass);
        put("output.dir", f.out);
        put("output.snapshot_stride", f.stride);
        put("output.format", f.format);
        put("solver.preconditioner", f.preconditioner);
        put("run.jobs", f.jobs);
        for (const auto& kv : f.set) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(kv, "--set expects key=value");
            }
            s.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        config = resolve(s);
    } catch (const std::invalid_argument& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return invalid_config;
    }

    try {
        return run_cmd->parsed() ? cmd_run(config, out, err) : cmd_truth_table(config, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return solver_failure;
    }
}

} // namespace heatgate::cli
