// Batch experiment driver: parses a config plus flags, dispatches to the
// library, and writes deterministic machine-readable artifacts.
//
// Exit codes: 0 success, 2 parse/config error, 3 bracket error,
//             4 non-convergence, 5 internal assertion failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lmepurify/depolarization.hpp"
#include "lmepurify/io.hpp"
#include "lmepurify/lme_core.hpp"
#include "lmepurify/noise.hpp"
#include "lmepurify/oracle_check.hpp"
#include "lmepurify/purify.hpp"
#include "lmepurify/scenarios.hpp"
#include "lmepurify/spec.hpp"
#include "lmepurify/strategies.hpp"

namespace lp = lmepurify;
using lp::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitBracket = 3;
constexpr int kExitNoConverge = 4;
constexpr int kExitInternal = 5;

struct Options {
    std::string command;
    std::string config_path;
    std::string out_dir = "out";
    std::string scenario;
    uint64_t seed = 12345;
    double tol = -1.0;       // negative = per-command default
    int max_rounds = -1;     // negative = schedule default
    json config;             // parsed config file (object, possibly empty)
};

json load_config(const std::string &path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw lp::SpecError("config file '" + path + "' does not exist");
    json j = json::parse(in);  // throws json::parse_error with byte position
    if (!j.is_object()) throw lp::SpecError("config root must be a JSON object");
    return j;
}

// spec resolution order: --scenario flag, config "scenario", config "spec"
lp::LmesSpec resolve_spec(const Options &opt) {
    if (!opt.scenario.empty()) return lp::get_scenario(opt.scenario).spec;
    if (opt.config.contains("scenario"))
        return lp::get_scenario(opt.config.at("scenario").get<std::string>()).spec;
    if (opt.config.contains("spec")) return opt.config.at("spec").get<lp::LmesSpec>();
    return lp::get_scenario("3q").spec;
}

lp::ScheduleSpec resolve_schedule(const Options &opt, const lp::LmesSpec &spec) {
    lp::ScheduleSpec sched = opt.config.contains("schedule")
                                 ? opt.config.at("schedule").get<lp::ScheduleSpec>()
                                 : lp::ScheduleSpec::default_for(spec);
    if (opt.max_rounds > 0) sched.max_rounds = opt.max_rounds;
    sched.validate(spec);
    return sched;
}

lp::ChannelSpec resolve_channel(const Options &opt) {
    if (opt.config.contains("channel"))
        return opt.config.at("channel").get<lp::ChannelSpec>();
    lp::ChannelSpec ch;
    ch.kind = lp::ChannelSpec::Kind::global_white;
    ch.parameter = 0.6;
    return ch;
}

double resolve_tol(const Options &opt, double fallback) {
    if (opt.tol > 0) return opt.tol;
    if (opt.config.contains("tol")) return opt.config.at("tol").get<double>();
    return fallback;
}

std::filesystem::path out_path(const Options &opt, const std::string &name) {
    return std::filesystem::path(opt.out_dir) / name;
}

std::string spec_summary(const lp::LmesSpec &spec) {
    std::ostringstream os;
    os << "n=" << spec.n << " gates=[";
    for (size_t i = 0; i < spec.gates.size(); ++i) {
        if (i) os << " ";
        os << "{";
        for (size_t j = 0; j < spec.gates[i].size(); ++j) {
            if (j) os << ",";
            os << spec.gates[i][j];
        }
        os << "}";
    }
    os << "]";
    if (spec.has_coloring()) {
        os << " colors=";
        for (size_t c = 0; c < spec.colors.size(); ++c) {
            if (c) os << "|";
            os << lp::LmesSpec::color_name(static_cast<int>(c)) << ":";
            for (size_t j = 0; j < spec.colors[c].size(); ++j) {
                if (j) os << ",";
                os << spec.colors[c][j];
            }
        }
    }
    return os.str();
}

// family of coefficient matrices swept by the threshold search
std::function<lp::LmeCoeffMatrix(double)> channel_family(const lp::LmesSpec &spec,
                                                         lp::ChannelSpec::Kind kind) {
    return [&spec, kind](double x) {
        lp::ChannelSpec ch;
        ch.kind = kind;
        ch.parameter = x;
        return lp::channel_coeffs(spec, ch);
    };
}

std::pair<double, double> default_bracket(lp::ChannelSpec::Kind kind, int n) {
    if (kind == lp::ChannelSpec::Kind::global_white)
        return {1.0 / lp::dim_of(n) + 1e-9, 0.95};
    return {0.5, 0.995};
}

int cmd_build(const Options &opt) {
    const lp::LmesSpec spec = resolve_spec(opt);
    const lp::StateVector psi = lp::build_state(spec);
    std::string table = "# index\tbits\tamplitude\n";
    for (int x = 0; x < lp::dim_of(spec.n); ++x)
        table += std::to_string(x) + "\t" +
                 lp::index_to_display(static_cast<lp::MultiIndex>(x), spec.n) + "\t" +
                 lp::fmt_g(psi(x).real()) + "\n";
    lp::atomic_write(out_path(opt, "build.txt"), table);
    json j = spec;
    j["regular"] = spec.regular();
    lp::atomic_write(out_path(opt, "spec.json"), j.dump(2) + "\n");
    std::cout << "build " << spec_summary(spec) << " regular="
              << (spec.regular() ? "yes" : "no") << "\n";
    return kExitOk;
}

int cmd_purify(const Options &opt) {
    const lp::LmesSpec spec = resolve_spec(opt);
    const lp::ScheduleSpec sched = resolve_schedule(opt, spec);
    const lp::ChannelSpec ch = resolve_channel(opt);
    const lp::LmeCoeffMatrix lam0 = lp::channel_coeffs(spec, ch);
    const lp::ScheduleResult res = lp::run_schedule(lam0, spec, sched);

    std::string trace = "# pass\tcolor\tfidelity\tparity_success\n";
    for (const auto &row : res.trace)
        trace += std::to_string(row.round) + "\t" +
                 lp::LmesSpec::color_name(row.color) + "\t" +
                 lp::fmt_g(row.fidelity) + "\t" + lp::fmt_g(row.parity_success_prob) +
                 "\n";
    lp::atomic_write(out_path(opt, "trace.txt"), trace);
    json j{{"spec", spec},
           {"channel", ch},
           {"schedule", sched},
           {"converged", res.converged},
           {"rounds_used", res.rounds_used},
           {"final_fidelity", res.final_fidelity}};
    lp::atomic_write(out_path(opt, "purify.json"), j.dump(2) + "\n");
    std::cout << "purify " << spec_summary(spec) << " channel="
              << lp::ChannelSpec::kind_name(ch.kind) << "(" << lp::fmt_g(ch.parameter)
              << ") converged=" << (res.converged ? "yes" : "no")
              << " rounds=" << res.rounds_used
              << " fidelity=" << lp::fmt_g(res.final_fidelity) << "\n";
    return res.converged ? kExitOk : kExitNoConverge;
}

int cmd_threshold(const Options &opt) {
    const lp::ChannelSpec ch = resolve_channel(opt);
    if (opt.scenario == "all") {
        // coarse sweep over the preconfigured patterns for both local channels
        const double tol = resolve_tol(opt, 5e-3);
        std::vector<lp::ThresholdRow> rows;
        for (const std::string &name : lp::table_scenarios()) {
            const lp::Scenario &sc = lp::get_scenario(name);
            const lp::ScheduleSpec sched = resolve_schedule(opt, sc.spec);
            for (const auto kind : {lp::ChannelSpec::Kind::local_depolarizing,
                                    lp::ChannelSpec::Kind::local_dephasing}) {
                const auto [lo, hi] = default_bracket(kind, sc.spec.n);
                const lp::ThresholdReport rep = lp::find_threshold(
                    channel_family(sc.spec, kind), sc.spec, sched, lo, hi, tol);
                rows.push_back({name, lp::ChannelSpec::kind_name(kind), rep.critical});
                std::cout << "threshold " << name << " "
                          << lp::ChannelSpec::kind_name(kind) << " "
                          << lp::fmt_g(rep.critical) << "\n";
            }
        }
        const lp::ThresholdTable table = lp::emit_threshold_table(rows);
        lp::atomic_write(out_path(opt, "thresholds.txt"), table.text);
        return kExitOk;
    }
    const lp::LmesSpec spec = resolve_spec(opt);
    const lp::ScheduleSpec sched = resolve_schedule(opt, spec);
    const double tol = resolve_tol(opt, 5e-4);
    auto [lo, hi] = default_bracket(ch.kind, spec.n);
    if (opt.config.contains("bracket")) {
        lo = opt.config.at("bracket").at(0).get<double>();
        hi = opt.config.at("bracket").at(1).get<double>();
    }
    const lp::ThresholdReport rep =
        lp::find_threshold(channel_family(spec, ch.kind), spec, sched, lo, hi, tol);
    json j{{"spec", spec},
           {"channel_kind", lp::ChannelSpec::kind_name(ch.kind)},
           {"report", rep}};
    lp::atomic_write(out_path(opt, "threshold.json"), j.dump(2) + "\n");
    std::cout << "threshold " << spec_summary(spec) << " channel="
              << lp::ChannelSpec::kind_name(ch.kind)
              << " critical=" << lp::fmt_g(rep.critical) << " bracket=["
              << lp::fmt_g(rep.lo) << "," << lp::fmt_g(rep.hi) << "]\n";
    return kExitOk;
}

int cmd_cj_check(const Options &opt) {
    const lp::LmesSpec spec = resolve_spec(opt);
    if (spec.n > 3) throw lp::DimensionError("cj-check needs a spec with n <= 3");
    const double tol = resolve_tol(opt, 0.01);
    const double dep = lp::pt_trace_norm(lp::cj_state(lp::twirl_map(spec.n), spec),
                                         spec.n, 1);
    const double ident = lp::pt_trace_norm(lp::cj_state(lp::identity_map(spec.n), spec),
                                           spec.n, 1);
    double max_party_dev = 0.0;
    const lp::DensityMatrix cj = lp::cj_state(lp::twirl_map(spec.n), spec);
    for (int party = 2; party <= spec.n; ++party)
        max_party_dev = std::max(max_party_dev,
                                 std::abs(lp::pt_trace_norm(cj, spec.n, party) - dep));
    json j{{"spec", spec},
           {"depolarization_pt_norm", dep},
           {"identity_pt_norm", ident},
           {"max_party_deviation", max_party_dev}};
    lp::atomic_write(out_path(opt, "cj_check.json"), j.dump(2) + "\n");
    std::cout << "cj-check dep_norm=" << lp::fmt_g(dep)
              << " identity_norm=" << lp::fmt_g(ident)
              << " party_dev=" << lp::fmt_g(max_party_dev) << "\n";
    const bool ok = std::abs(dep - 1.75) <= tol && std::abs(ident - 1.0) <= 1e-9 &&
                    max_party_dev <= 1e-9;
    return ok ? kExitOk : kExitInternal;
}

int cmd_phi_batch(const Options &opt) {
    const lp::LmesSpec spec = resolve_spec(opt);
    if (spec.n > 3) throw lp::DimensionError("phi-batch needs a spec with n <= 3");
    const int count = opt.config.value("count", 1000);
    const int search_evals = opt.config.value("search_evals", 10000);
    const lp::PhiBatch batch = lp::sample_phi_batch(spec, count, opt.seed);
    const lp::PhiSearchResult search = lp::phi_search_min(spec, opt.seed + 1, search_evals);

    std::string table = "# sample\tpt_trace_norm\n";
    for (size_t i = 0; i < batch.norms.size(); ++i)
        table += std::to_string(i) + "\t" + lp::fmt_g(batch.norms[i]) + "\n";
    lp::atomic_write(out_path(opt, "phi_norms.txt"), table);
    json j{{"spec", spec},
           {"count", count},
           {"seed", opt.seed},
           {"min_norm", batch.min_norm},
           {"search_evals", search_evals},
           {"search_min_norm", search.min_norm}};
    lp::atomic_write(out_path(opt, "phi_batch.json"), j.dump(2) + "\n");
    std::cout << "phi-batch count=" << count << " min_norm=" << lp::fmt_g(batch.min_norm)
              << " search_min=" << lp::fmt_g(search.min_norm) << "\n";
    const bool ok = batch.min_norm > 1.0 + 1e-6 && search.min_norm > 1.0;
    return ok ? kExitOk : kExitInternal;
}

int cmd_counterexample(const Options &opt) {
    const lp::LmesSpec spec = lp::get_scenario("3q").spec;
    const auto [lo, hi] = lp::counterexample_psd_range();
    json j{{"psd_lo", lo}, {"psd_hi", hi}};
    bool any_ordered = false;
    for (const std::string seq : {"ABC-CAB-BCA", "ABC"}) {
        const lp::ScheduleSpec sched = lp::ScheduleSpec::parse(seq);
        const lp::SpoilComparison cmp =
            lp::spoil_comparison(spec, sched, resolve_tol(opt, 1e-5));
        j["schedules"][sched.sequence_string()] = {
            {"raw_threshold", cmp.raw.critical},
            {"twirled_threshold", cmp.twirled.critical}};
        if (cmp.raw.critical < cmp.twirled.critical) any_ordered = true;
        std::cout << "counterexample schedule=" << sched.sequence_string()
                  << " raw=" << lp::fmt_g(cmp.raw.critical)
                  << " twirled=" << lp::fmt_g(cmp.twirled.critical) << "\n";
    }
    j["raw_below_twirled"] = any_ordered;
    lp::atomic_write(out_path(opt, "counterexample.json"), j.dump(2) + "\n");
    std::cout << "counterexample psd_range=[" << lp::fmt_g(lo) << "," << lp::fmt_g(hi)
              << "] raw_below_twirled=" << (any_ordered ? "yes" : "no") << "\n";
    return any_ordered ? kExitOk : kExitInternal;
}

int cmd_compare(const Options &opt) {
    const double tol = resolve_tol(opt, 5e-4);
    const lp::Scenario &six = lp::get_scenario("6q-linear");
    const lp::ScheduleSpec sched = lp::ScheduleSpec::default_for(six.spec);
    const auto family = [&six](double f) {
        return lp::LmeCoeffMatrix(lp::white_noise_diagonal(six.spec.n, f).asDiagonal());
    };
    const lp::ThresholdReport direct =
        lp::find_threshold(family, six.spec, sched, 0.25, 0.6, tol);
    const lp::ThresholdReport graph =
        lp::indirect_threshold(lp::IndirectStrategy::graph, tol);
    const lp::ThresholdReport bipartite =
        lp::indirect_threshold(lp::IndirectStrategy::bipartite, tol);
    const bool ordered = direct.critical <= graph.critical + tol &&
                         graph.critical < bipartite.critical;
    json j{{"direct", direct},
           {"graph_indirect", graph},
           {"bipartite", bipartite},
           {"ordering_holds", ordered}};
    lp::atomic_write(out_path(opt, "compare.json"), j.dump(2) + "\n");
    std::cout << "compare direct=" << lp::fmt_g(direct.critical)
              << " graph=" << lp::fmt_g(graph.critical)
              << " bipartite=" << lp::fmt_g(bipartite.critical)
              << " ordering=" << (ordered ? "yes" : "no") << "\n";
    return ordered ? kExitOk : kExitInternal;
}

int cmd_verify_oracle(const Options &opt) {
    json j;
    bool all_ok = true;
    int total_runs = 0;
    for (const std::string name : {"3q", "4q"}) {
        const lp::Scenario &sc = lp::get_scenario(name);
        const lp::OracleReport rep = lp::verify_recurrence_oracle(sc.spec, 20, opt.seed);
        all_ok = all_ok && rep.ok();
        total_runs += rep.basis_runs;
        j[name] = {{"basis_runs", rep.basis_runs},
                   {"basis_failures", rep.basis_failures},
                   {"density_checks", rep.density_checks},
                   {"density_failures", rep.density_failures},
                   {"max_basis_dev", rep.max_basis_dev},
                   {"max_density_dev", rep.max_density_dev}};
        std::cout << "verify-oracle " << name << " basis_runs=" << rep.basis_runs
                  << " basis_failures=" << rep.basis_failures
                  << " density_checks=" << rep.density_checks
                  << " density_failures=" << rep.density_failures << "\n";
    }
    lp::atomic_write(out_path(opt, "verify_oracle.json"), j.dump(2) + "\n");
    std::cout << "verify-oracle total_circuit_runs=" << total_runs
              << " result=" << (all_ok ? "pass" : "FAIL") << "\n";
    return all_ok ? kExitOk : kExitInternal;
}

int dispatch(const Options &opt) {
    if (opt.command == "build") return cmd_build(opt);
    if (opt.command == "purify") return cmd_purify(opt);
    if (opt.command == "threshold") return cmd_threshold(opt);
    if (opt.command == "cj-check") return cmd_cj_check(opt);
    if (opt.command == "phi-batch") return cmd_phi_batch(opt);
    if (opt.command == "counterexample") return cmd_counterexample(opt);
    if (opt.command == "compare") return cmd_compare(opt);
    if (opt.command == "verify-oracle") return cmd_verify_oracle(opt);
    throw lp::SpecError("unknown command '" + opt.command + "'");
}

}  // namespace

int main(int argc, char **argv) {
    Options opt;
    CLI::App app{"multipartite entanglement purification workbench"};
    app.require_subcommand(1);
    for (const char *name : {"build", "purify", "threshold", "cj-check", "phi-batch",
                             "counterexample", "compare", "verify-oracle"}) {
        CLI::App *sub = app.add_subcommand(name);
        sub->fallthrough();
        sub->callback([&opt, name] { opt.command = name; });
    }
    app.add_option("--config", opt.config_path, "JSON config file");
    app.add_option("--seed", opt.seed, "random seed (64-bit unsigned)");
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--tol", opt.tol, "tolerance override (positive)");
    app.add_option("--max-rounds", opt.max_rounds, "schedule pass limit override");
    app.add_option("--scenario", opt.scenario, "preconfigured scenario name (or 'all')");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitParse;
    }

    try {
        if (app.count("--tol") && !(opt.tol > 0))
            throw lp::SpecError("tolerance must be positive");
        opt.config = load_config(opt.config_path);
        if (opt.config.contains("seed") && !app.count("--seed"))
            opt.seed = opt.config.at("seed").get<uint64_t>();
        if (opt.config.contains("out") && !app.count("--out"))
            opt.out_dir = opt.config.at("out").get<std::string>();
        if (opt.config.contains("max_rounds") && !app.count("--max-rounds"))
            opt.max_rounds = opt.config.at("max_rounds").get<int>();
        if (opt.scenario.empty() && opt.config.contains("scenario"))
            opt.scenario = opt.config.at("scenario").get<std::string>();
        return dispatch(opt);
    } catch (const json::exception &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitParse;
    } catch (const lp::BracketError &e) {
        std::cerr << "bracket error: " << e.what() << "\n";
        return kExitBracket;
    } catch (const std::invalid_argument &e) {
        // spec and dimension violations are configuration mistakes
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const lp::PostselectError &e) {
        std::cerr << "postselection error: " << e.what() << "\n";
        return kExitNoConverge;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
