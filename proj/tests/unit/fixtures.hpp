#pragma once

#include <hornbill/hornbill.hpp>

#include <cmath>
#include <vector>

namespace fixtures {

using namespace hornbill;

/// Two unit scatterers at (0,0) and (4,0) on an 8 x 8 torus: head-on orbit of period 2, gap 2.
inline table::TableConfig collinear_scatterers()
{
    table::TableConfig cfg;
    cfg.domain = {table::DomainKind::torus, 8.0, 8.0};
    cfg.obstacles = {{{0.0, 0.0}, 1.0, table::HardScatterer{}}, {{4.0, 0.0}, 1.0, table::HardScatterer{}}};
    return cfg;
}

inline table::TableConfig reference(double beta) { return config::reference_config(beta).table; }

/// Both obstacles horns facing each other along the x axis.
inline table::TableConfig facing_horns(double beta)
{
    table::TableConfig cfg;
    cfg.domain = {table::DomainKind::torus, 5.0, 4.0};
    cfg.obstacles = {{{1.25, 2.0}, 1.0, table::TorricelliHorn{beta}}, {{3.75, 2.0}, 0.8, table::TorricelliHorn{beta}}};
    return cfg;
}

/// Draws mu-random outgoing points whose next flight is well inside the regular set.
inline std::vector<table::CollisionCoord> regular_points(const table::TableConfig& cfg, std::size_t n,
                                                         std::uint64_t seed, double min_cos = 0.1,
                                                         double min_head_on = 0.1)
{
    Rng rng(seed);
    std::vector<table::CollisionCoord> out;
    while (out.size() < n) {
        const auto x = suspension::sample_mu(cfg, rng);
        if (std::cos(x.phi) < min_cos) {
            continue;
        }
        const auto f = table::flight(cfg, x);
        if (std::cos(f.hit.phi) < min_cos) {
            continue;
        }
        if (cfg.obstacles[f.hit.obstacle].is_horn() && std::abs(f.hit.phi) < min_head_on) {
            continue;
        }
        out.push_back(x);
    }
    return out;
}

} // namespace fixtures
