#pragma once
// Preconfigured benchmark states: the colored gate patterns whose noise
// thresholds the threshold table reproduces, plus small bipartite and path
// cases used by the comparison strategies.

#include <string>
#include <vector>

#include "purify.hpp"
#include "spec.hpp"

namespace lmepurify {

struct Scenario {
    std::string name;
    LmesSpec spec;
};

inline const std::vector<Scenario> &scenario_registry() {
    static const std::vector<Scenario> reg = [] {
        std::vector<Scenario> v;
        v.push_back({"3q", make_spec(3, {{1, 2, 3}}, {{1}, {2}, {3}})});
        v.push_back({"4q", make_spec(4, {{1, 2, 3}, {2, 3, 4}}, {{1, 4}, {2}, {3}})});
        v.push_back({"5q-linear", make_spec(5, {{1, 2, 3}, {2, 3, 4}, {3, 4, 5}},
                                            {{1, 4}, {2, 5}, {3}})});
        v.push_back({"5q-ghz", make_spec(5, {{1, 2, 3}, {1, 2, 4}, {1, 2, 5}},
                                         {{1}, {2}, {3, 4, 5}})});
        v.push_back({"6q-linear",
                     make_spec(6, {{1, 2, 3}, {2, 3, 4}, {3, 4, 5}, {4, 5, 6}},
                               {{1, 4}, {2, 5}, {3, 6}})});
        v.push_back({"6q-intermediate",
                     make_spec(6, {{1, 3, 4}, {2, 3, 5}, {2, 3, 4}, {3, 4, 6}},
                               {{3}, {4, 5}, {1, 2, 6}})});
        v.push_back({"6q-ghz",
                     make_spec(6, {{1, 2, 3}, {1, 2, 4}, {1, 2, 5}, {1, 2, 6}},
                               {{1}, {2}, {3, 4, 5, 6}})});
        v.push_back({"bell", make_spec(2, {{1, 2}}, {{1}, {2}})});
        v.push_back({"3q-path", make_spec(3, {{1, 2}, {2, 3}}, {{1, 3}, {2}})});
        return v;
    }();
    return reg;
}

inline std::vector<std::string> scenario_names() {
    std::vector<std::string> names;
    for (const auto &s : scenario_registry()) names.push_back(s.name);
    return names;
}

inline const Scenario &get_scenario(const std::string &name) {
    for (const auto &s : scenario_registry())
        if (s.name == name) return s;
    std::string known;
    for (const auto &s : scenario_registry()) {
        if (!known.empty()) known += ", ";
        known += s.name;
    }
    throw SpecError("unknown scenario '" + name + "'; known scenarios: " + known);
}

// the seven multipartite patterns of the threshold table, in display order
inline std::vector<std::string> table_scenarios() {
    return {"3q",        "4q",     "5q-linear", "5q-ghz",
            "6q-linear", "6q-intermediate", "6q-ghz"};
}

inline ScheduleSpec scenario_schedule(const Scenario &s) {
    return ScheduleSpec::default_for(s.spec);
}

}  // namespace lmepurify
