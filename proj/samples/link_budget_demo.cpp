// Prints the link budget and R_M along the 25-200 km scenario for both
// schemas, using the library directly.
#include <cstdio>
#include <vector>

#include "qrwr/sweep.hpp"

int main() {
    using namespace qrwr;
    const std::vector<double> ranges{25, 50, 100, 150, 200};
    const auto bg = RadiationBackground::with_total(1e4);
    const SignalModel signal{1e-4, 100};

    std::printf("%8s %5s %12s %12s %12s %12s\n", "range", "sky", "eta_t", "eta_r", "R_M(gs)", "R_M(sp)");
    for (Weather w : {Weather::Good, Weather::Bad}) {
        const auto gs = scenario_line(ranges, w, LinkParameters{}, bg, Protocol::QiGaussian, signal);
        const auto sp = scenario_line(ranges, w, LinkParameters{}, bg, Protocol::QiSinglePhoton, signal);
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            const auto& p = gs.points[i];
            std::printf("%6.0fkm %5s %12.4e %12.4e %12.4e %12.4e\n", p.range_km, to_string(w).data(), p.eta_t,
                        p.eta_r, p.rm.rm, sp.points[i].rm.rm);
        }
    }
}
