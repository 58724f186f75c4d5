#pragma once
// Serialization and artifact plumbing: JSON round-trips for the domain
// types, atomic file writes, fixed-precision number formatting, and the
// plot-ready threshold table.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "noise.hpp"
#include "purify.hpp"
#include "spec.hpp"
#include "strategies.hpp"

namespace lmepurify {

using nlohmann::json;

// shortest round-trippable decimal with stable cross-platform output
inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void to_json(json &j, const LmesSpec &s) {
    j = json{{"n", s.n}, {"gates", s.gates}};
    if (s.has_coloring()) j["colors"] = s.colors;
}

inline void from_json(const json &j, LmesSpec &s) {
    std::vector<std::vector<int>> gates = j.at("gates").get<std::vector<std::vector<int>>>();
    std::vector<std::vector<int>> colors;
    if (j.contains("colors")) colors = j.at("colors").get<std::vector<std::vector<int>>>();
    s = make_spec(j.at("n").get<int>(), std::move(gates), std::move(colors));
}

inline void to_json(json &j, const ChannelSpec &c) {
    j = json{{"kind", ChannelSpec::kind_name(c.kind)}, {"parameter", c.parameter}};
    if (!c.targets.empty()) j["targets"] = c.targets;
}

inline void from_json(const json &j, ChannelSpec &c) {
    c.kind = ChannelSpec::kind_from_name(j.at("kind").get<std::string>());
    c.parameter = j.at("parameter").get<double>();
    c.targets.clear();
    if (j.contains("targets")) c.targets = j.at("targets").get<std::vector<int>>();
}

inline void to_json(json &j, const ScheduleSpec &s) {
    j = json{{"sequence", s.sequence_string()},
             {"max_rounds", s.max_rounds},
             {"convergence_eps", s.convergence_eps},
             {"divergence_window", s.divergence_window}};
}

inline void from_json(const json &j, ScheduleSpec &s) {
    s = ScheduleSpec::parse(j.at("sequence").get<std::string>());
    if (j.contains("max_rounds")) s.max_rounds = j.at("max_rounds").get<int>();
    if (j.contains("convergence_eps"))
        s.convergence_eps = j.at("convergence_eps").get<double>();
    if (j.contains("divergence_window"))
        s.divergence_window = j.at("divergence_window").get<int>();
}

inline void to_json(json &j, const CutStep &s) {
    j = json{{"copy", s.copy}, {"qubit", s.qubit}, {"outcome", s.outcome}};
}

inline void from_json(const json &j, CutStep &s) {
    s.copy = j.value("copy", 1);
    s.qubit = j.at("qubit").get<int>();
    s.outcome = j.at("outcome").get<int>();
}

inline void to_json(json &j, const CutPlan &p) { j = json{{"steps", p.steps}}; }

inline void from_json(const json &j, CutPlan &p) {
    p.steps = j.at("steps").get<std::vector<CutStep>>();
}

inline void to_json(json &j, const ThresholdReport &r) {
    j = json{{"critical", r.critical}, {"lo", r.lo},       {"hi", r.hi},
             {"tol", r.tol},           {"rounds_lo", r.probe_lo.rounds_used},
             {"rounds_hi", r.probe_hi.rounds_used}};
}

inline void to_json(json &j, const CompositionPart &p) {
    j = json{{"qubits", p.qubits}, {"spec", p.part}};
}

inline void to_json(json &j, const CompositionPlan &p) {
    j = json{{"parts", p.parts}, {"free_qubits", p.free_qubits}};
}

// write-then-rename so readers never observe a partial file
inline void atomic_write(const std::filesystem::path &path, const std::string &content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

struct ThresholdRow {
    std::string state;
    std::string channel;
    double threshold = 0.0;
};

struct ThresholdTable {
    std::string text;
    std::vector<std::string> warnings;
};

// gnuplot-ready delimited table: one row per (state, channel), '#' comments,
// duplicates dropped with a warning, stable order as given
inline ThresholdTable emit_threshold_table(const std::vector<ThresholdRow> &rows) {
    ThresholdTable table;
    std::string out = "# state\tchannel\tthreshold\n";
    std::vector<std::pair<std::string, std::string>> seen;
    for (const auto &r : rows) {
        const std::pair<std::string, std::string> key{r.state, r.channel};
        bool dup = false;
        for (const auto &k : seen)
            if (k == key) dup = true;
        if (dup) {
            table.warnings.push_back("duplicate row dropped: " + r.state + "/" +
                                     r.channel);
            continue;
        }
        seen.push_back(key);
        out += r.state + "\t" + r.channel + "\t" + fmt_g(r.threshold) + "\n";
    }
    table.text = std::move(out);
    return table;
}

}  // namespace lmepurify
