#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "lmepurify/io.hpp"
#include "lmepurify/oracle_check.hpp"
#include "lmepurify/scenarios.hpp"

using namespace lmepurify;
using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string &tag) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("lmepurify_test_" + std::to_string(getpid()) + "_" + tag +
                          "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// run the command-line driver; returns its exit code
int run_cli(const std::string &args) {
    const std::string cmd =
        std::string(LMEPURIFY_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("number formatting", "[io]") {
    SECTION("correctness") {
        CHECK(fmt_g(0.5) == "0.5");
        CHECK(fmt_g(1.0 / 3.0) == "0.333333333333");
        CHECK(fmt_g(1.0) == "1");
        CHECK(fmt_g(-0.0078125) == "-0.0078125");
    }
}

TEST_CASE("JSON round trips", "[io]") {
    SECTION("correctness") {
        const LmesSpec spec =
            make_spec(4, {{1, 2, 3}, {2, 3, 4}}, {{1, 4}, {2}, {3}});
        const json js = spec;
        const LmesSpec back = js.get<LmesSpec>();
        CHECK(back.n == spec.n);
        CHECK(back.gates == spec.gates);
        CHECK(back.colors == spec.colors);

        ChannelSpec ch;
        ch.kind = ChannelSpec::Kind::local_dephasing;
        ch.parameter = 0.875;
        ch.targets = {1, 3};
        const json jc = ch;
        const ChannelSpec cback = jc.get<ChannelSpec>();
        CHECK(cback.kind == ch.kind);
        CHECK(cback.parameter == ch.parameter);
        CHECK(cback.targets == ch.targets);

        ScheduleSpec sched = ScheduleSpec::parse("ABC-CAB-BCA");
        sched.max_rounds = 77;
        const json jsch = sched;
        const ScheduleSpec sback = jsch.get<ScheduleSpec>();
        CHECK(sback.sequence == sched.sequence);
        CHECK(sback.max_rounds == 77);

        CutPlan plan{{{1, 2, +1}, {1, 5, -1}}};
        const json jp = plan;
        const CutPlan pback = jp.get<CutPlan>();
        REQUIRE(pback.steps.size() == 2);
        CHECK(pback.steps[1].qubit == 5);
        CHECK(pback.steps[1].outcome == -1);
        CHECK(pback.steps[0].copy == 1);
    }
    SECTION("validation") {
        const json bad{{"n", 3}, {"gates", json::array({json::array({1, 2, 9})})}};
        CHECK_THROWS_AS(bad.get<LmesSpec>(), SpecError);
    }
}

TEST_CASE("atomic file writes", "[io]") {
    const fs::path dir = fresh_dir("atomic");
    SECTION("correctness") {
        const fs::path target = dir / "nested" / "report.txt";
        atomic_write(target, "first\n");
        CHECK(slurp(target) == "first\n");
        atomic_write(target, "second\n");
        CHECK(slurp(target) == "second\n");
        CHECK_FALSE(fs::exists(target.string() + ".tmp"));
    }
    fs::remove_all(dir);
}

TEST_CASE("threshold table emission", "[io]") {
    SECTION("correctness") {
        const ThresholdTable empty = emit_threshold_table({});
        CHECK(empty.text == "# state\tchannel\tthreshold\n");
        CHECK(empty.warnings.empty());

        const ThresholdTable table = emit_threshold_table(
            {{"3q", "local_depolarizing", 0.8152},
             {"3q", "local_dephasing", 0.79971},
             {"3q", "local_depolarizing", 0.9}});
        CHECK_THAT(table.text, ContainsSubstring("3q\tlocal_dephasing\t0.79971\n"));
        CHECK_THAT(table.text, ContainsSubstring("0.8152"));
        // the duplicate row is dropped, keeping the first value
        CHECK_THAT(table.text, !ContainsSubstring("0.9\n"));
        REQUIRE(table.warnings.size() == 1);
        CHECK_THAT(table.warnings.front(), ContainsSubstring("duplicate"));
    }
}

TEST_CASE("preconfigured scenarios", "[io]") {
    SECTION("correctness") {
        CHECK(scenario_registry().size() == 9);
        for (const auto &sc : scenario_registry()) {
            CHECK_NOTHROW(sc.spec.validate());
            CHECK(sc.spec.regular());
            CHECK_NOTHROW(scenario_schedule(sc).validate(sc.spec));
        }
        for (const std::string &name : table_scenarios())
            CHECK(get_scenario(name).name == name);
        CHECK(get_scenario("6q-ghz").spec.n == 6);
    }
    SECTION("validation") {
        CHECK_THROWS_WITH(get_scenario("10q"), ContainsSubstring("6q-linear"));
    }
}

TEST_CASE("driver runs the build and purify commands", "[cli]") {
    const fs::path dir = fresh_dir("cli_basic");
    SECTION("correctness") {
        REQUIRE(run_cli("build --out " + (dir / "b").string()) == 0);
        CHECK(fs::exists(dir / "b" / "build.txt"));
        const json spec_json = json::parse(slurp(dir / "b" / "spec.json"));
        CHECK(spec_json.at("n").get<int>() == 3);
        CHECK_NOTHROW(spec_json.get<LmesSpec>());

        // convergent run above the basin edge
        const fs::path cfg = dir / "good.json";
        atomic_write(cfg, json{{"channel", {{"kind", "global_white"},
                                            {"parameter", 0.8}}}}
                              .dump());
        REQUIRE(run_cli("purify --config " + cfg.string() + " --out " +
                        (dir / "p").string()) == 0);
        const json pj = json::parse(slurp(dir / "p" / "purify.json"));
        CHECK(pj.at("converged").get<bool>());
        CHECK(pj.at("final_fidelity").get<double>() >= 1.0 - 1e-6);
        CHECK_THAT(slurp(dir / "p" / "trace.txt"), ContainsSubstring("# pass"));

        // divergent run below the basin edge exits with the no-convergence code
        const fs::path low = dir / "low.json";
        atomic_write(low, json{{"channel", {{"kind", "global_white"},
                                            {"parameter", 0.55}}}}
                              .dump());
        CHECK(run_cli("purify --config " + low.string() + " --out " +
                      (dir / "pl").string()) == 4);
    }
    fs::remove_all(dir);
}

TEST_CASE("driver resolves thresholds and brackets", "[cli]") {
    const fs::path dir = fresh_dir("cli_threshold");
    SECTION("correctness") {
        REQUIRE(run_cli("threshold --scenario bell --out " + (dir / "t").string()) ==
                0);
        const json tj = json::parse(slurp(dir / "t" / "threshold.json"));
        const double critical =
            tj.at("report").at("critical").get<double>();
        CHECK(std::abs(critical - 0.539331) < 2e-3);
    }
    SECTION("validation") {
        // a bracket that does not straddle the transition is a usage error
        const fs::path cfg = dir / "bad_bracket.json";
        atomic_write(cfg, json{{"bracket", {0.7, 0.9}}}.dump());
        CHECK(run_cli("threshold --config " + cfg.string() + " --out " +
                      (dir / "tb").string()) == 3);
    }
    fs::remove_all(dir);
}

TEST_CASE("driver rejects malformed input", "[cli]") {
    const fs::path dir = fresh_dir("cli_errors");
    SECTION("validation") {
        const fs::path broken = dir / "broken.json";
        atomic_write(broken, "{ not json");
        CHECK(run_cli("build --config " + broken.string()) == 2);
        CHECK(run_cli("build --scenario nope --out " + (dir / "x").string()) == 2);
        CHECK(run_cli("") == 2);           // a subcommand is required
        CHECK(run_cli("frobnicate") == 2);  // unknown subcommand
        CHECK(run_cli("build --tol -1 --out " + (dir / "y").string()) == 2);
    }
    fs::remove_all(dir);
}

TEST_CASE("driver output is seed-deterministic", "[cli]") {
    const fs::path dir = fresh_dir("cli_seed");
    SECTION("correctness") {
        const fs::path cfg = dir / "batch.json";
        atomic_write(cfg, json{{"count", 40}, {"search_evals", 150}}.dump());
        const std::string base = "phi-batch --config " + cfg.string() + " --seed 11 ";
        REQUIRE(run_cli(base + "--out " + (dir / "a").string()) == 0);
        REQUIRE(run_cli(base + "--out " + (dir / "b").string()) == 0);
        CHECK(slurp(dir / "a" / "phi_norms.txt") == slurp(dir / "b" / "phi_norms.txt"));

        REQUIRE(run_cli("phi-batch --config " + cfg.string() + " --seed 12 --out " +
                        (dir / "c").string()) == 0);
        CHECK(slurp(dir / "a" / "phi_norms.txt") != slurp(dir / "c" / "phi_norms.txt"));
    }
    fs::remove_all(dir);
}
