#include "heatgate/cli/config.hpp"
#include "heatgate/cli/snapshot.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace heatgate;
using namespace heatgate::cli;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("heatgate_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_SUITE("io") {
    TEST_CASE("PGM scaling at the box ends") {
        CHECK(pgm_pixels(std::vector<double>(6, 0.01), 3, 2, 0.01, 1.0) == std::vector<std::uint8_t>(6, 0));
        CHECK(pgm_pixels(std::vector<double>(6, 1.0), 3, 2, 0.01, 1.0) == std::vector<std::uint8_t>(6, 255));
    }

    TEST_CASE("PGM midpoint pixel") {
        // round(255 * 0.495 / 0.99) = round(127.5)
        CHECK(pgm_pixels(std::vector<double>{0.505}, 1, 1, 0.01, 1.0)[0] == 128);
    }

    TEST_CASE("PGM puts the top grid row first") {
        // element rows: r = 0 bottom {0.01, 0.01}, r = 1 top {1, 1}
        const auto px = pgm_pixels(std::vector<double>{0.01, 0.01, 1.0, 1.0}, 2, 2, 0.01, 1.0);
        CHECK(px == std::vector<std::uint8_t>{255, 255, 0, 0});
    }

    TEST_CASE("PGM file round trip") {
        const auto dir = scratch_dir("pgm");
        std::vector<double> rho(12);
        for (std::size_t i = 0; i < rho.size(); ++i) {
            rho[i] = 0.01 + 0.09 * static_cast<double>(i);
        }
        write_pgm(dir / "a.pgm", rho, 4, 3, 0.01, 1.0);
        const auto img = read_pgm(dir / "a.pgm");
        CHECK(img.width == 4);
        CHECK(img.height == 3);
        CHECK(img.pixels == pgm_pixels(rho, 4, 3, 0.01, 1.0));
        CHECK(std::filesystem::file_size(dir / "a.pgm") == std::string("P5\n4 3\n255\n").size() + 12);
    }

    TEST_CASE("CSV round trip is bit-exact") {
        const auto dir = scratch_dir("csv");
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> unit(0.01, 1.0);
        std::vector<double> rho(35);
        for (auto& r : rho) {
            r = unit(rng);
        }
        rho[0] = 0.01;
        rho[1] = 1.0;
        rho[2] = 0.01 + 3 * 0.03;
        write_csv(dir / "f.csv", rho, 7, 5);
        int nx = 0;
        int ny = 0;
        const auto back = read_csv(dir / "f.csv", nx, ny);
        CHECK(nx == 7);
        CHECK(ny == 5);
        CHECK(back == rho);
    }

    TEST_CASE("CSV first line is the top row") {
        const auto dir = scratch_dir("csv_orientation");
        write_csv(dir / "f.csv", std::vector<double>{0.25, 0.5, 0.75, 1.0}, 2, 2);
        std::ifstream in(dir / "f.csv");
        std::string first;
        std::getline(in, first);
        CHECK(first == "0.75,1");
    }

    TEST_CASE("unwritable paths raise IoError") {
        CHECK_THROWS_AS(write_csv("/nonexistent-dir/x.csv", std::vector<double>{1.0}, 1, 1), IoError);
        CHECK_THROWS_AS(write_pgm("/nonexistent-dir/x.pgm", std::vector<double>{1.0}, 1, 1, 0.01, 1.0), IoError);
    }

    TEST_CASE("shortest round-trip number format") {
        for (double v : {0.1, 1.0 / 3.0, 2000.0, 1e-8, 0.0090991}) {
            CHECK(parse_double(format_double(v)) == v);
        }
        CHECK(format_double(0.03) == "0.03");
        CHECK_THROWS_AS(parse_double("0.3x"), std::invalid_argument);
    }
}

TEST_SUITE("config") {
    TEST_CASE("defaults are the AND Dirichlet gate") {
        const auto c = resolve(Settings{});
        CHECK(c.gate.kind == GateKind::and_gate);
        CHECK(c.gate.bc == BcKind::dirichlet);
        CHECK(c.params.mass == 2000.0);
        CHECK(c.params.theta == 0.03);
        CHECK(c.params.max_iters == 200);
        CHECK(c.params.snapshot_stride == 10);
        CHECK(c.solver.preconditioner == Preconditioner::multigrid);
    }

    TEST_CASE("file sections and bare override keys") {
        Settings s;
        s.merge_text(R"(
# XOR with a heavier budget
[gate]
kind = xor
bc = neumann
mass = 450

[optimizer]
theta = 0.05
rule = euler

[output]
format = csv
)");
        s.set("max_iters", "17");
        const auto c = resolve(s);
        CHECK(c.gate.kind == GateKind::xor_gate);
        CHECK(c.gate.bc == BcKind::neumann);
        CHECK(c.gate.mass == 450.0);
        CHECK(c.params.mass == 450.0);
        CHECK(c.params.theta == 0.05);
        CHECK(c.params.rule == UpdateRule::euler);
        CHECK(c.params.max_iters == 17);
        CHECK(c.format == SnapshotFormat::csv);
    }

    TEST_CASE("unknown keys are rejected by name") {
        Settings s;
        try {
            s.merge_text("[optimizer]\nthetta = 0.1\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field() == "optimizer.thetta");
        }
        CHECK_THROWS_AS(s.set("colour", "red"), ConfigError);
    }

    TEST_CASE("invariant violations name the field") {
        auto field_of = [](const char* key, const char* value) {
            Settings s;
            s.set(key, value);
            try {
                resolve(s);
            } catch (const ConfigError& e) {
                return e.field();
            }
            return std::string();
        };
        CHECK(field_of("rho_min", "0") == "optimizer.rho_min");
        CHECK(field_of("theta", "-1") == "optimizer.theta");
        CHECK(field_of("mass", "1e9") == "gate.mass");
        CHECK(field_of("x", "2") == "run.x");
        CHECK(field_of("format", "png") == "output.format");
        CHECK(field_of("preconditioner", "ilu") == "solver.preconditioner");
        CHECK(field_of("max_iters", "ten") == "optimizer.max_iters");
    }

    TEST_CASE("custom site layouts") {
        Settings s;
        s.merge_text(R"(
[gate]
kind = and
bc = dirichlet
nx = 60
ny = 40
mass = 300
[sites]
I_x = input 10 30
I_y = input 50 30
O = output 30 8 and pinned
)");
        const auto c = resolve(s);
        REQUIRE(c.gate.sites.size() == 3);
        CHECK(c.gate.site("O").pinned);
        CHECK(c.gate.site("O").function == LogicFunction::conjunction);
        CHECK(c.gate.site("I_y").at == ElementCoord{50, 30});

        Settings bad = s;
        bad.set("sites.O", "output 58 8 and");
        CHECK_THROWS_AS(resolve(bad), ConfigError);
    }

    TEST_CASE("manifest text reproduces the configuration") {
        Settings s;
        s.set("gate.kind", "half-adder");
        s.set("gate.bc", "neumann");
        s.set("theta", "0.031");
        s.set("q", "0.1");
        s.set("x", "1");
        s.set("preconditioner", "jacobi");
        const auto c = resolve(s);
        RunSummary result{Termination::converged, 12, {{"O_1", 0.01, false}}, {}};
        const auto text = manifest_text(c, &result);
        CHECK(text.find("[result]") != std::string::npos);
        CHECK(text.find("O_1 = 0") != std::string::npos);

        Settings again;
        again.merge_text(text);
        const auto c2 = resolve(again);
        CHECK(manifest_text(c2, &result) == text);
        CHECK(c2.params.theta == c.params.theta);
        CHECK(c2.solver.preconditioner == Preconditioner::jacobi);
        CHECK(c2.gate.sites.size() == c.gate.sites.size());
    }

    TEST_CASE("site text round trip") {
        const SiteSpec s{"O_1", {102, 72}, SiteRole::output, true, LogicFunction::conjunction};
        const auto back = parse_site("O_1", format_site(s));
        CHECK(back.at == s.at);
        CHECK(back.role == s.role);
        CHECK(back.pinned);
        CHECK(back.function == s.function);
        CHECK_THROWS_AS(parse_site("A", "input 3"), ConfigError);
    }
}
