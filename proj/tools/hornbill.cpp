#include <hornbill/hornbill.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace hornbill;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    unsigned workers = default_workers();
    std::string config_path;
    double beta = 1.5;
};

struct Context {
    config::RunConfig run;
    std::uint64_t seed = 0;
    QuadratureSettings q;
};

Context resolve(const Globals& g)
{
    Context ctx;
    ctx.run = g.config_path.empty() ? config::reference_config(g.beta) : config::parse_config(g.config_path);
    ctx.seed = g.seed.value_or(ctx.run.seed);
    ctx.q = ctx.run.quadrature;
    if (g.tol) {
        ctx.q.rel_tol = *g.tol;
    }
    ctx.q.validate();
    std::cerr << "seed=" << ctx.seed << " config_hash=" << ctx.run.hash << '\n';
    return ctx;
}

std::size_t first_horn(const table::TableConfig& cfg)
{
    for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
        if (cfg.obstacles[i].is_horn()) {
            return i;
        }
    }
    throw DomainError("configuration has no horn");
}

std::size_t horn_index(const table::TableConfig& cfg, int requested)
{
    if (requested < 0) {
        return first_horn(cfg);
    }
    const auto i = static_cast<std::size_t>(requested);
    if (i >= cfg.obstacles.size() || !cfg.obstacles[i].is_horn()) {
        throw DomainError("obstacle " + std::to_string(requested) + " is not a horn");
    }
    return i;
}

stats::Scaling parse_scaling(const std::string& s)
{
    if (s == "auto") {
        return stats::Scaling::automatic;
    }
    if (s == "stable") {
        return stats::Scaling::stable;
    }
    if (s == "log") {
        return stats::Scaling::log_gaussian;
    }
    return stats::Scaling::gaussian;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hornbill: billiards with hard scatterers and Torricelli horns"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Random seed (overrides the config seed)");
    app.add_option("--tol", g.tol, "Quadrature relative tolerance")->check(CLI::Range(1e-15, 1e-3));
    app.add_option("--workers", g.workers, "Worker threads (default: HORNBILL_WORKERS or 1)")
        ->check(CLI::Range(1u, 1024u));
    app.add_option("--config", g.config_path, "JSON table configuration")->check(CLI::ExistingFile);
    app.add_option("--beta", g.beta, "Horn exponent for the built-in reference table and profile commands")
        ->check(CLI::PositiveNumber);

    // validate
    auto* validate = app.add_subcommand("validate", "Check geometry and sample the flight-time range.\n"
                                                    "CSV: key,value");
    int grid_theta = 128;
    int grid_phi = 65;
    validate->add_option("--grid-theta", grid_theta, "Boundary positions per obstacle")->check(CLI::PositiveNumber);
    validate->add_option("--grid-phi", grid_phi, "Angles per position")->check(CLI::PositiveNumber);

    // rotation
    auto* rotation = app.add_subcommand("rotation", "Rotation function on a grid of incidence angles.\n"
                                                    "CSV: phi0,dtheta,kappa,tmax (phi0 at cell midpoints of (0, pi/2))");
    double r0 = 1.0;
    int grid = 100;
    rotation->add_option("--r0", r0, "Boundary radius")->check(CLI::PositiveNumber);
    rotation->add_option("--grid", grid, "Number of angles")->check(CLI::PositiveNumber);

    // conditions
    auto* conditions = app.add_subcommand("conditions", "Grid check of the six horn regularity conditions.\n"
                                                        "CSV: index,name,pass,witness,detail");
    int horn_opt = -1;
    conditions->add_option("--horn", horn_opt, "Horn obstacle index (default: first horn)");

    // orbit
    auto* orbit_cmd = app.add_subcommand("orbit", "Billiard orbit from a mu-random or given start.\n"
                                                  "CSV: step,obstacle,theta,phi,time,tau,sojourn");
    std::optional<std::size_t> collisions;
    std::optional<double> flow_time;
    std::optional<std::size_t> start_obstacle;
    double start_theta = 0.0;
    double start_phi = 0.3;
    orbit_cmd->add_option("--collisions", collisions, "Stop after this many collisions");
    orbit_cmd->add_option("--time", flow_time, "Stop once the flow time reaches this value");
    orbit_cmd->add_option("--obstacle", start_obstacle, "Start on this obstacle (default: mu-random start)");
    orbit_cmd->add_option("--theta", start_theta, "Start position on the obstacle");
    orbit_cmd->add_option("--phi", start_phi, "Start outgoing angle");

    // tails
    auto* tails = app.add_subcommand("tails", "Tail of the per-visit sojourn time.\n"
                                              "CSV: t,s_star,asymptote,asymptote_ratio");
    std::vector<double> t_grid{1e3, 1e4, 1e5, 1e6};
    tails->add_option("--t", t_grid, "Comma-separated times")->delimiter(',');
    tails->add_option("--r0", r0, "Boundary radius")->check(CLI::PositiveNumber);

    // lyapunov
    auto* lyap = app.add_subcommand("lyapunov", "Top Lyapunov exponent per collision, one row per replica.\n"
                                                "CSV: replica,lambda,stderr,steps,restarts");
    std::size_t steps = 100000;
    std::size_t replicas = 10;
    lyap->add_option("--steps", steps, "Collisions per replica")->check(CLI::Range(1000ul, 1ul << 40));
    lyap->add_option("--replicas", replicas, "Independent replicas")->check(CLI::PositiveNumber);

    // acf
    auto* acf_cmd = app.add_subcommand("acf", "Autocorrelation of cos(theta) along one orbit.\n"
                                              "CSV: lag,rho,noise_floor");
    std::size_t max_lag = 20;
    acf_cmd->add_option("--steps", steps, "Orbit length in collisions");
    acf_cmd->add_option("--max-lag", max_lag, "Largest lag")->check(CLI::PositiveNumber);

    // singular-curve
    auto* singular = app.add_subcommand("singular-curve", "Head-on curve of a horn.\n"
                                                          "CSV: theta,phi,residual");
    int opposite_opt = -1;
    int thetas = 64;
    singular->add_option("--horn", horn_opt, "Horn obstacle index (default: first horn)");
    singular->add_option("--opposite", opposite_opt, "Opposite obstacle (default: from config)");
    singular->add_option("--thetas", thetas, "Boundary positions to trace")->check(CLI::PositiveNumber);

    // limitlaw
    auto* limitlaw = app.add_subcommand("limitlaw", "Scaled centered horn-occupation sums.\n"
                                                    "CSV: T,replica,raw_sum,scaled_sum (nan marks a discarded replica)");
    std::vector<double> T_list{5000, 20000};
    std::size_t ll_replicas = 2000;
    std::string scaling = "auto";
    double tail_fraction = 0.05;
    limitlaw->add_option("--T", T_list, "Comma-separated horizons")->delimiter(',');
    limitlaw->add_option("--replicas", ll_replicas, "Replicas per horizon (>= 500)");
    limitlaw->add_option("--scaling", scaling, "auto | stable | log | gaussian")
        ->check(CLI::IsMember({"auto", "stable", "log", "gaussian"}));
    limitlaw->add_option("--tail-fraction", tail_fraction, "Hill tail fraction");
    limitlaw->add_option("--horn", horn_opt, "Horn obstacle index (default: first horn)");

    // occupation
    auto* occupation = app.add_subcommand("occupation", "Horn occupation time over [0, T] per replica.\n"
                                                        "CSV: replica,occupation,collisions,termination");
    double occ_T = 1000.0;
    std::size_t occ_replicas = 100;
    occupation->add_option("--T", occ_T, "Flow-time horizon")->check(CLI::PositiveNumber);
    occupation->add_option("--replicas", occ_replicas, "Replicas")->check(CLI::PositiveNumber);
    occupation->add_option("--horn", horn_opt, "Horn obstacle index (default: first horn)");

    // hill
    auto* hill_cmd = app.add_subcommand("hill", "Hill tail index of a CSV column.\n"
                                                "CSV: tail_fraction,index,k_used,stderr");
    std::string input;
    std::string column;
    bool use_abs = false;
    std::vector<double> fractions{0.01, 0.02, 0.05, 0.1};
    hill_cmd->add_option("--input", input, "CSV file")->required()->check(CLI::ExistingFile);
    hill_cmd->add_option("--column", column, "Column name")->required();
    hill_cmd->add_flag("--abs", use_abs, "Use absolute values");
    hill_cmd->add_option("--fractions", fractions, "Comma-separated tail fractions")->delimiter(',');

    // plot
    auto* plot = app.add_subcommand("plot", "Render CSV columns to a self-contained SVG");
    std::string x_col;
    std::string y_col;
    std::string kind = "line";
    std::string output;
    svg::PlotSpec spec;
    plot->add_option("--input", input, "CSV file")->required()->check(CLI::ExistingFile);
    plot->add_option("--x", x_col, "Column for x (histogram: the sampled column)")->required();
    plot->add_option("--y", y_col, "Column for y (line, scatter)");
    plot->add_option("--kind", kind, "line | scatter | histogram")
        ->check(CLI::IsMember({"line", "scatter", "histogram"}));
    plot->add_option("--output", output, "SVG path (default: stdout)");
    plot->add_option("--title", spec.title, "Plot title");
    plot->add_option("--bins", spec.bins, "Histogram bins")->check(CLI::PositiveNumber);
    plot->add_flag("--log-x", spec.log_x, "log10 x axis");
    plot->add_flag("--log-y", spec.log_y, "log10 y axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::cout.imbue(std::locale::classic());
    try {
        const Context ctx = resolve(g);
        const auto& cfg = ctx.run.table;
        const auto& q = ctx.q;

        if (validate->parsed()) {
            const auto rep = table::validate_table(cfg, {grid_theta, grid_phi});
            csv::Writer w(std::cout, {"key", "value"});
            w.row("finite_horizon_suspect", rep.finite_horizon_suspect ? 1 : 0);
            w.row("tau_min", rep.tau_min);
            w.row("tau_max", rep.tau_max);
            w.row("samples", rep.samples);
            w.row("horizon_failures", rep.horizon_failures);
            for (const auto& msg : rep.warnings) {
                std::cerr << "warning: " << msg << '\n';
            }
        } else if (rotation->parsed()) {
            const auto prof = horn::HornProfile::torricelli(g.beta, r0);
            std::vector<horn::ExcursionSolution> rows(static_cast<std::size_t>(grid));
            parallel_for(rows.size(), g.workers, [&](std::size_t i) {
                const double phi = horn::half_pi * (static_cast<double>(i) + 0.5) / grid;
                rows[i] = horn::excursion(prof, phi, q, true);
            });
            csv::Writer w(std::cout, {"phi0", "dtheta", "kappa", "tmax"});
            for (const auto& r : rows) {
                w.row(r.phi0, r.dtheta, *r.kappa, r.tmax);
            }
        } else if (conditions->parsed()) {
            const auto i = horn_index(cfg, horn_opt);
            const auto rep = tangent::conditions_report(cfg.obstacles[i].profile(), cfg, q);
            csv::Writer w(std::cout, {"index", "name", "pass", "witness", "detail"});
            for (const auto& c : rep.items) {
                w.row(c.index, c.name, c.pass ? 1 : 0, c.witness, c.detail);
            }
            if (!rep.all_pass()) {
                std::cerr << "warning: not all conditions hold\n";
            }
        } else if (orbit_cmd->parsed()) {
            if (!collisions && !flow_time) {
                collisions = 1000;
            }
            table::CollisionCoord x0;
            if (start_obstacle) {
                if (*start_obstacle >= cfg.obstacles.size()) {
                    throw DomainError("orbit: start obstacle out of range");
                }
                x0 = {*start_obstacle, table::wrap_angle(start_theta), start_phi, table::Side::outgoing};
            } else {
                Rng rng(ctx.seed, 0);
                x0 = suspension::sample_mu(cfg, rng);
            }
            const auto rec = suspension::orbit(cfg, x0, {collisions, flow_time}, q);
            csv::Writer w(std::cout, {"step", "obstacle", "theta", "phi", "time", "tau", "sojourn"});
            for (std::size_t k = 0; k < rec.points.size(); ++k) {
                const auto& p = rec.points[k];
                w.row(k, p.coord.obstacle, p.coord.theta, p.coord.phi, p.time, p.tau, p.sojourn);
            }
            if (rec.termination != suspension::Termination::completed) {
                std::cerr << "orbit terminated early: " << suspension::to_string(rec.termination) << ": "
                          << rec.message << '\n';
            }
        } else if (tails->parsed()) {
            const auto rows = suspension::tail_profile(horn::HornProfile::torricelli(g.beta, r0), t_grid, q);
            csv::Writer w(std::cout, {"t", "s_star", "asymptote", "asymptote_ratio"});
            for (const auto& r : rows) {
                w.row(r.t, r.s_star, r.asymptote, r.asymptote_ratio);
            }
        } else if (lyap->parsed()) {
            std::vector<tangent::LyapunovEstimate> est(replicas);
            parallel_for(replicas, g.workers, [&](std::size_t r) {
                Rng rng(ctx.seed, 2, r);
                const auto x0 = suspension::sample_mu(cfg, rng);
                est[r] = tangent::lyapunov(cfg, x0, steps, derive_seed(ctx.seed, 3, r), q);
            });
            csv::Writer w(std::cout, {"replica", "lambda", "stderr", "steps", "restarts"});
            double mean = 0.0;
            for (std::size_t r = 0; r < replicas; ++r) {
                w.row(r, est[r].lambda, est[r].std_err, est[r].steps, est[r].restarts);
                mean += est[r].lambda;
            }
            mean /= static_cast<double>(replicas);
            if (replicas > 1) {
                double var = 0.0;
                for (const auto& e : est) {
                    var += (e.lambda - mean) * (e.lambda - mean);
                }
                const double se = std::sqrt(var / static_cast<double>(replicas - 1) / static_cast<double>(replicas));
                std::cerr << "lambda=" << mean << " ci95=[" << mean - 1.96 * se << ", " << mean + 1.96 * se << "]\n";
            }
        } else if (acf_cmd->parsed()) {
            Rng rng(ctx.seed, 0);
            const auto rec = suspension::orbit(cfg, suspension::sample_mu(cfg, rng), {steps, std::nullopt}, q);
            if (rec.termination != suspension::Termination::completed) {
                throw Error("acf: orbit terminated early: " + rec.message);
            }
            std::vector<double> series;
            series.reserve(rec.points.size());
            for (const auto& p : rec.points) {
                series.push_back(std::cos(p.coord.theta));
            }
            const auto res = stats::acf(series, max_lag);
            csv::Writer w(std::cout, {"lag", "rho", "noise_floor"});
            for (std::size_t k = 0; k < res.rho.size(); ++k) {
                w.row(k, res.rho[k], res.noise_floor);
            }
            std::cerr << "fit rate=" << res.fit.rate << " lags=" << res.fit.lags.size()
                      << (res.fit.fallback ? " (fallback to lags 1-2)" : "") << '\n';
        } else if (singular->parsed()) {
            const auto j = horn_index(cfg, horn_opt);
            std::size_t opp = 0;
            if (opposite_opt >= 0) {
                opp = static_cast<std::size_t>(opposite_opt);
            } else {
                bool found = false;
                for (const auto& p : ctx.run.opposite) {
                    if (p.horn == j) {
                        opp = p.obstacle;
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    throw DomainError("singular-curve: no opposite obstacle for horn " + std::to_string(j) +
                                      "; pass --opposite");
                }
            }
            std::vector<double> grid_t;
            for (int i = 0; i < thetas; ++i) {
                grid_t.push_back(table::two_pi * (i + 0.5) / thetas);
            }
            const auto curve = tangent::head_on_curve(cfg, j, opp, grid_t);
            csv::Writer w(std::cout, {"theta", "phi", "residual"});
            for (const auto& p : curve.points) {
                w.row(p.theta, p.phi, p.residual);
            }
            std::cerr << "gaps=" << curve.gaps.size() << '\n';
        } else if (limitlaw->parsed()) {
            stats::LimitLawOptions opt;
            opt.replicas = ll_replicas;
            opt.seed = ctx.seed;
            opt.workers = g.workers;
            opt.scaling = parse_scaling(scaling);
            opt.tail_fraction = tail_fraction;
            opt.quadrature = q;
            opt.config_hash = ctx.run.hash;
            const auto res = stats::limit_law_experiment(cfg, horn_index(cfg, horn_opt), T_list, opt);
            csv::Writer w(std::cout, {"T", "replica", "raw_sum", "scaled_sum"});
            for (const auto& row : res.rows) {
                for (std::size_t r = 0; r < row.raw.size(); ++r) {
                    w.row(row.T, r, row.raw[r], row.raw[r] / row.scale);
                }
            }
            std::cerr << "v_bar=" << res.v_bar << " scaling=" << stats::to_string(res.scaling) << '\n';
            for (std::size_t i = 0; i < res.rows.size(); ++i) {
                const auto& row = res.rows[i];
                std::cerr << "T=" << row.T << " trapped=" << row.trapped << " ks_gaussian=" << row.ks_gaussian;
                if (row.hill) {
                    std::cerr << " hill=" << row.hill->index << "+-" << row.hill->std_err;
                }
                if (i < res.ks_consecutive.size()) {
                    std::cerr << " ks_next=" << res.ks_consecutive[i];
                }
                std::cerr << '\n';
            }
            for (const auto& msg : res.warnings) {
                std::cerr << "warning: " << msg << '\n';
            }
        } else if (occupation->parsed()) {
            const auto i = horn_index(cfg, horn_opt);
            std::vector<suspension::OccupationResult> res(occ_replicas);
            parallel_for(occ_replicas, g.workers, [&](std::size_t r) {
                Rng rng(ctx.seed, 0, r);
                res[r] = suspension::horn_occupation(cfg, suspension::sample_mu(cfg, rng), occ_T, i, q);
            });
            csv::Writer w(std::cout, {"replica", "occupation", "collisions", "termination"});
            for (std::size_t r = 0; r < occ_replicas; ++r) {
                w.row(r, res[r].occupation, res[r].collisions, suspension::to_string(res[r].termination));
            }
        } else if (hill_cmd->parsed()) {
            std::ifstream in(input);
            const auto t = csv::read(in);
            std::vector<double> v;
            for (double x : t.columns[t.column(column)]) {
                if (std::isfinite(x)) {
                    v.push_back(use_abs ? std::abs(x) : x);
                }
            }
            csv::Writer w(std::cout, {"tail_fraction", "index", "k_used", "stderr"});
            for (double f : fractions) {
                const auto fit = stats::hill(v, f);
                w.row(f, fit.index, fit.k_used, fit.std_err);
            }
        } else if (plot->parsed()) {
            std::ifstream in(input);
            const auto t = csv::read(in);
            spec.kind = kind == "line" ? svg::PlotKind::line
                        : kind == "scatter" ? svg::PlotKind::scatter
                                            : svg::PlotKind::histogram;
            const auto& xs = t.columns[t.column(x_col)];
            std::vector<double> ys;
            if (spec.kind != svg::PlotKind::histogram) {
                if (y_col.empty()) {
                    throw DomainError("plot: --y is required for line and scatter plots");
                }
                ys = t.columns[t.column(y_col)];
            }
            spec.x_label = x_col;
            spec.y_label = spec.kind == svg::PlotKind::histogram ? "count" : y_col;
            if (output.empty()) {
                svg::render(std::cout, xs, ys, spec);
            } else {
                std::ofstream out(output, std::ios::binary);
                if (!out) {
                    throw Error("plot: cannot write " + output);
                }
                svg::render(out, xs, ys, spec);
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cout.flush();
    return 0;
}
