// Threshold sweep demo: bisect the critical white-noise fidelity for two
// benchmark states and print a small gnuplot-ready table.

#include <iostream>

#include "lmepurify/io.hpp"
#include "lmepurify/noise.hpp"
#include "lmepurify/purify.hpp"
#include "lmepurify/scenarios.hpp"

int main() {
    using namespace lmepurify;

    std::vector<ThresholdRow> rows;
    for (const std::string name : {"3q", "4q"}) {
        const Scenario &sc = get_scenario(name);
        const auto family = [&sc](double f) {
            return LmeCoeffMatrix(white_noise_diagonal(sc.spec.n, f).asDiagonal());
        };
        const ThresholdReport rep =
            find_threshold(family, sc.spec, ScheduleSpec::default_for(sc.spec),
                           1.0 / dim_of(sc.spec.n) + 1e-9, 0.95, 1e-3);
        rows.push_back({name, "global_white", rep.critical});
    }
    std::cout << emit_threshold_table(rows).text;
    return 0;
}
