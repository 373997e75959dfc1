// Builds the reference table, follows one orbit and prints horn excursion data.
#include <hornbill/hornbill.hpp>

#include <iostream>

int main()
{
    using namespace hornbill;
    const auto rc = config::reference_config(1.5, 7);
    const auto& cfg = rc.table;

    const auto report = table::validate_table(cfg);
    std::cout << "tau range [" << report.tau_min << ", " << report.tau_max << "]\n";

    const auto prof = cfg.obstacles[0].profile();
    for (double phi : {0.1, 0.5, 1.0}) {
        const auto ex = horn::excursion(prof, phi, {}, true);
        std::cout << "phi0=" << phi << " tmax=" << ex.tmax << " dtheta=" << ex.dtheta << " kappa=" << *ex.kappa << '\n';
    }

    Rng rng(rc.seed, 0);
    const auto rec = suspension::orbit(cfg, suspension::sample_mu(cfg, rng), {1000, std::nullopt});
    std::cout << "1000 collisions took flow time " << rec.points.back().time << '\n';

    const auto lyap = tangent::lyapunov(cfg, rec.points.front().coord, 5000, rc.seed);
    std::cout << "lambda = " << lyap.lambda << " +- " << lyap.std_err << '\n';
}
