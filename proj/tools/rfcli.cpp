// Batch front end: reproducible lift/solve/slowfast/average/study runs plus
// a deterministic invariant self-test. Exit codes: 0 ok, 1 configuration
// error, 2 numerical failure, 3 self-test failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "rf/config.hpp"
#include "rf/serialize.hpp"
#include "rf/study.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "roughflow 0.1.0";

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int workers = 0;
    std::string out_dir = ".";
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "key-value config file");
    cmd->add_option("--seed", o.seed, "master seed (overrides config)")
        ->each([&o](const std::string&) { o.seed_given = true; });
    cmd->add_option("--workers", o.workers, "worker threads (0 = hardware)");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

rf::Config load_config(const CommonOpts& o) {
    rf::Config cfg;
    if (!o.config_path.empty()) cfg = rf::Config::load(o.config_path);
    if (o.seed_given) cfg.set("seed", std::to_string(o.seed));
    return cfg;
}

int resolve_workers(const CommonOpts& o) {
    if (o.workers > 0) return o.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << content;
}

void write_manifest(const CommonOpts& o, const rf::Config& cfg, const char* command,
                    json extra) {
    json m;
    m["version"] = kVersion;
    m["command"] = command;
    m["seed"] = cfg.get_u64("seed", o.seed);
    m["config"] = json::object();
    for (const auto& [k, v] : cfg.entries()) m["config"][k] = v;
    m.update(extra);
    write_text(fs::path(o.out_dir) / "manifest.json", m.dump(2) + "\n");
}

rf::NoiseKind parse_kind(const std::string& s) {
    if (s == "brownian_ito") return rf::NoiseKind::brownian_ito;
    if (s == "brownian_strat") return rf::NoiseKind::brownian_strat;
    if (s == "fbm") return rf::NoiseKind::fbm;
    if (s == "smooth") return rf::NoiseKind::deterministic_smooth;
    throw std::invalid_argument("unknown noise kind '" + s + "'");
}

rf::NoiseSpec noise_from_config(const rf::Config& cfg, std::uint64_t seed) {
    rf::NoiseSpec spec;
    spec.kind = parse_kind(cfg.get_string("noise.kind", "brownian_strat"));
    spec.dim = static_cast<int>(cfg.get_int("noise.dim", 1));
    spec.hurst = cfg.get_double("noise.hurst", 0.4);
    spec.substeps = static_cast<int>(cfg.get_int("noise.substeps", 8));
    spec.seed = seed;
    spec.stream_id = cfg.get_u64("noise.stream", 1);
    spec.validate();
    return spec;
}

std::string path_csv(const rf::Grid& grid, const std::vector<rf::Vec>& values,
                     const std::string& prefix) {
    std::ostringstream out;
    out << "t";
    for (long c = 0; c < values[0].size(); ++c) out << "," << prefix << c;
    out << "\n";
    for (std::size_t k = 0; k < values.size(); ++k) {
        out << rf::format_double(grid.time(static_cast<int>(k)));
        for (long c = 0; c < values[k].size(); ++c)
            out << "," << rf::format_double(values[k](c));
        out << "\n";
    }
    return out.str();
}

int cmd_lift(const CommonOpts& o) {
    rf::Config cfg = load_config(o);
    const std::uint64_t seed = cfg.get_u64("seed", o.seed);
    const rf::NoiseSpec spec = noise_from_config(cfg, seed);
    const rf::Grid grid(cfg.get_double("grid.horizon", 1.0),
                        static_cast<int>(cfg.get_int("grid.steps", 256)));
    const rf::MicroLift lift = rf::make_lift(spec, grid);

    fs::create_directories(o.out_dir);
    const fs::path base = fs::path(o.out_dir) / "lift";
    if (o.format == "csv")
        rf::save_rough_path_csv(lift.rp, (base.string() + ".csv"));
    else
        rf::save_rough_path(lift.rp, (base.string() + ".rfrp"));
    write_manifest(o, cfg, "lift",
                   {{"lift_hash", rf::content_hash(lift.rp)},
                    {"n_steps", grid.n_steps()},
                    {"dim", lift.rp.dim()}});
    return 0;
}

int cmd_solve(const CommonOpts& o) {
    rf::Config cfg = load_config(o);
    const std::uint64_t seed = cfg.get_u64("seed", o.seed);
    const rf::ModelBundle model =
        rf::make_model(cfg.get_string("model.name", "ou_sine"));
    if (!model.frozen.closed_form || !model.frozen.closed_form->fbar)
        throw std::invalid_argument(
            "solve: model has no closed-form averaged drift; use `average` first");
    rf::Config noise_cfg = cfg;
    noise_cfg.set("noise.dim", std::to_string(model.coeffs.slow_noise_dim));
    const rf::NoiseSpec spec = noise_from_config(noise_cfg, seed);
    const rf::Grid grid(cfg.get_double("grid.horizon", 1.0),
                        static_cast<int>(cfg.get_int("grid.steps", 256)));
    const rf::MicroLift lift = rf::make_lift(spec, grid);
    auto rp = std::make_shared<rf::GridRoughPath>(lift.rp);

    const auto fbar = model.frozen.closed_form->fbar;
    const rf::GridControlledPath x = rf::solve_averaged(
        fbar, model.coeffs.sigma, model.coeffs.sigma_deriv, rp, model.x0);

    fs::create_directories(o.out_dir);
    write_text(fs::path(o.out_dir) / "solution.csv", path_csv(grid, x.values(), "x"));
    write_manifest(o, cfg, "solve",
                   {{"lift_hash", rf::content_hash(lift.rp)},
                    {"terminal", x.value(grid.n_steps())(0)}});
    return 0;
}

int cmd_slowfast(const CommonOpts& o) {
    rf::Config cfg = load_config(o);
    const std::uint64_t seed = cfg.get_u64("seed", o.seed);
    const rf::ModelBundle model =
        rf::make_model(cfg.get_string("model.name", "ou_sine"));
    const double eps = cfg.get_double("slowfast.epsilon", 0.1);
    const double T = cfg.get_double("grid.horizon", 1.0);
    int n = static_cast<int>(cfg.get_int("grid.steps", 0));
    const double c_micro = cfg.get_double("slowfast.c_micro", 0.1);
    if (n == 0) n = static_cast<int>(std::ceil(T / (c_micro * eps)));
    const rf::Grid grid(T, n);
    const int substeps = static_cast<int>(cfg.get_int("noise.substeps", 8));

    rf::NoiseSpec bs;
    bs.kind = rf::NoiseKind::brownian_strat;
    bs.dim = model.coeffs.slow_noise_dim;
    bs.substeps = substeps;
    bs.seed = seed;
    bs.stream_id = 1;
    rf::NoiseSpec ws = bs;
    ws.dim = model.coeffs.fast_noise_dim;
    ws.stream_id = 2;
    const rf::MicroPath bm = rf::sample_brownian_micro(bs, grid);
    rf::MicroPath wm = rf::sample_brownian_micro(ws, grid);
    rf::MicroLift bl{rf::geometric_lift_from_micro(bm, 0.5), bm};
    rf::MicroLift wl{rf::ito_lift_from_micro(wm, 0.5, wm.dim == 1), std::move(wm)};
    const rf::MixedLift xi = rf::mixed_lift(bl, wl);

    rf::MicroStepPolicy policy;
    policy.c_micro = c_micro;
    const rf::SlowFastSolution sol =
        rf::solve_slow_fast(model.coeffs, xi, eps, model.x0, model.y0, policy);
    const double em_gap = rf::fast_sde_consistency(model.coeffs, sol, xi);

    fs::create_directories(o.out_dir);
    write_text(fs::path(o.out_dir) / "slow.csv", path_csv(grid, sol.x_path, "x"));
    write_text(fs::path(o.out_dir) / "fast.csv", path_csv(grid, sol.y_path, "y"));
    write_manifest(o, cfg, "slowfast",
                   {{"epsilon", eps},
                    {"lift_hash_b", rf::content_hash(bm)},
                    {"max_fast_abs", sol.max_fast_abs},
                    {"slow_hoelder_beta", sol.slow_hoelder_beta},
                    {"fast_em_gap", em_gap}});
    return 0;
}

int cmd_average(const CommonOpts& o) {
    rf::Config cfg = load_config(o);
    const std::uint64_t seed = cfg.get_u64("seed", o.seed);
    const rf::ModelBundle model =
        rf::make_model(cfg.get_string("model.name", "ou_sine"));
    rf::AveragingBudget budget;
    budget.t_long = cfg.get_double("average.t_long", 200.0);
    budget.t_burn = cfg.get_double("average.t_burn", 10.0);
    budget.t_mix = cfg.get_double("average.t_mix", 10.0);
    budget.h_step = cfg.get_double("average.h_step", 1e-2);
    budget.n_seeds = static_cast<int>(cfg.get_int("average.n_seeds", 4096));
    budget.seed = seed;
    const std::string method_name = cfg.get_string("average.method", "ergodic_average");
    rf::AvgMethod method = rf::AvgMethod::ergodic_average;
    if (method_name == "endpoint_mc") method = rf::AvgMethod::endpoint_mc;
    else if (method_name == "closed_form") method = rf::AvgMethod::closed_form;
    else if (method_name != "ergodic_average")
        throw std::invalid_argument("average: unknown method '" + method_name + "'");

    const double x_lo = cfg.get_double("average.x_min", -3.0);
    const double x_hi = cfg.get_double("average.x_max", 3.0);
    const int n_points = static_cast<int>(cfg.get_int("average.points", 33));
    const rf::FbarTable table =
        rf::build_fbar_table(model.frozen, x_lo, x_hi, n_points, method, budget);

    fs::create_directories(o.out_dir);
    table.save_csv((fs::path(o.out_dir) / "fbar.csv").string());

    json extra = {{"points", n_points}, {"method", method_name}};
    if (model.frozen.closed_form && model.frozen.closed_form->fbar) {
        double max_dev = 0.0;
        for (std::size_t i = 0; i < table.xs().size(); ++i) {
            rf::Vec x(1);
            x << table.xs()[i];
            max_dev = std::max(
                max_dev,
                (table.values()[i] - model.frozen.closed_form->fbar(x)).norm());
        }
        extra["max_dev_from_closed_form"] = max_dev;
    }
    write_manifest(o, cfg, "average", extra);
    return 0;
}

int cmd_study(const CommonOpts& o) {
    rf::Config cfg = load_config(o);
    rf::StudySpec spec;
    spec.model = cfg.get_string("model.name", "ou_sine");
    spec.epsilons = cfg.get_double_list("study.epsilons", {0.5, 0.1, 0.02});
    spec.p = cfg.get_double("study.p", 1.0);
    spec.beta = cfg.get_double("study.beta", 0.4);
    spec.m_mc = static_cast<int>(cfg.get_int("study.paths", 64));
    spec.macro_steps = static_cast<int>(cfg.get_int("grid.steps", 200));
    spec.horizon = cfg.get_double("grid.horizon", 1.0);
    spec.substeps = static_cast<int>(cfg.get_int("noise.substeps", 4));
    spec.b_kind = parse_kind(cfg.get_string("noise.kind", "brownian_strat"));
    spec.hurst = cfg.get_double("noise.hurst", 0.4);
    spec.c_micro = cfg.get_double("slowfast.c_micro", 0.1);
    spec.seed = cfg.get_u64("seed", o.seed);
    spec.workers = resolve_workers(o);
    if (cfg.has("model.sigma_cos"))
        spec.model_params["sigma_cos"] = cfg.get_double("model.sigma_cos");

    const rf::StudyResult res = rf::convergence_study(spec);

    fs::create_directories(o.out_dir);
    write_text(fs::path(o.out_dir) / "study.csv", res.to_csv());
    std::ostringstream plot;
    plot << "log_epsilon,log_mean\n";
    for (std::size_t e = 0; e < res.epsilons.size(); ++e)
        plot << rf::format_double(std::log(res.epsilons[e])) << ","
             << rf::format_double(std::log(res.means[e])) << "\n";
    write_text(fs::path(o.out_dir) / "study_plot.csv", plot.str());

    json hashes = json::array();
    for (std::uint64_t h : res.lift_hashes) hashes.push_back(h);
    write_manifest(o, cfg, "study",
                   {{"slope", res.slope},
                    {"runtime_seconds", res.runtime_seconds},
                    {"lift_hashes", hashes}});
    if (o.format == "json") {
        json jr;
        jr["epsilon"] = res.epsilons;
        jr["mean"] = res.means;
        jr["stderr"] = res.stderrs;
        jr["slope"] = res.slope;
        write_text(fs::path(o.out_dir) / "study.json", jr.dump(2) + "\n");
    }
    return 0;
}

int cmd_selftest(const CommonOpts& o) {
    rf::Config cfg = load_config(o);
    const std::uint64_t seed = cfg.get_u64("seed", o.seed);
    std::string lift_path = cfg.get_string("selftest.lift", "");
    int failures = 0;
    auto report = [&failures](const char* name, bool ok, double value) {
        std::cout << (ok ? "PASS" : "FAIL") << " " << name << " (" << value << ")\n";
        if (!ok) ++failures;
    };

    // Chen consistency across the lift families.
    {
        double worst = 0.0;
        std::vector<rf::NoiseSpec> specs(3);
        specs[0].kind = rf::NoiseKind::brownian_ito;
        specs[1].kind = rf::NoiseKind::fbm;
        specs[1].hurst = 0.4;
        specs[2].kind = rf::NoiseKind::deterministic_smooth;
        const rf::Grid grid(1.0, 64);
        rf::CounterRng rng(seed, 0xc4e);
        for (std::size_t si = 0; si < specs.size(); ++si) {
            specs[si].dim = 2;
            specs[si].seed = seed;
            specs[si].stream_id = 100 + si;
            const rf::MicroLift lift = rf::make_lift(specs[si], grid);
            for (int trial = 0; trial < 200; ++trial) {
                const std::uint64_t idx = si * 1000 + trial;
                int i = static_cast<int>(rng.uniform(idx, 0) * 62);
                int j = i + 1 + static_cast<int>(rng.uniform(idx, 1) * (63 - i));
                int k = j + 1 + static_cast<int>(rng.uniform(idx, 2) * (64 - j));
                const rf::Mat lhs = lift.rp.chen_block(i, k);
                const rf::Mat rhs = lift.rp.chen_block(i, j) + lift.rp.chen_block(j, k) +
                                    lift.rp.increment(i, j) *
                                        lift.rp.increment(j, k).transpose();
                worst = std::max(worst, (lhs - rhs).norm() /
                                            std::max(1.0, lhs.norm()));
            }
        }
        report("chen_relation", worst < 1e-12, worst);
    }

    // Optional: scan an externally supplied serialized lift.
    if (!lift_path.empty()) {
        const rf::GridRoughPath rp = lift_path.size() > 4 &&
                                             lift_path.substr(lift_path.size() - 4) ==
                                                 ".csv"
                                         ? rf::load_rough_path_csv(lift_path)
                                         : rf::load_rough_path(lift_path);
        double worst = 0.0;
        const int n = rp.grid().n_steps();
        rf::CounterRng rng(seed, 0xc4f);
        for (int trial = 0; trial < 500; ++trial) {
            int i = static_cast<int>(rng.uniform(trial, 0) * (n - 2));
            int j = i + 1 + static_cast<int>(rng.uniform(trial, 1) * (n - 1 - i));
            int k = j + 1 + static_cast<int>(rng.uniform(trial, 2) * (n - j));
            const rf::Mat lhs = rp.chen_block(i, k);
            const rf::Mat rhs = rp.chen_block(i, j) + rp.chen_block(j, k) +
                                rp.increment(i, j) * rp.increment(j, k).transpose();
            worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, lhs.norm()));
        }
        report("chen_relation_external_lift", worst < 1e-12, worst);
    }

    // Telescoping: int X dX = X^2_{0,t} for the controlled pair (X, Id).
    {
        rf::NoiseSpec spec;
        spec.kind = rf::NoiseKind::brownian_ito;
        spec.seed = seed;
        spec.stream_id = 200;
        const rf::Grid grid(1.0, 128);
        const rf::MicroLift lift = rf::make_lift(spec, grid);
        auto rp = std::make_shared<rf::GridRoughPath>(lift.rp);
        rf::RoughIntegrand ig;
        ig.reference = rp;
        ig.values.resize(129);
        ig.gubinelli.resize(129);
        for (int k = 0; k <= 128; ++k) {
            ig.values[k] = rp->level1(k).transpose();
            ig.gubinelli[k] = rf::Mat::Identity(1, 1);
        }
        double worst = 0.0;
        for (int k = 1; k <= 128; k += 7) {
            const rf::Vec v = rf::rough_integral_value(ig, 0, k);
            worst = std::max(worst, std::abs(v(0) - rp->chen_block(0, k)(0, 0)));
        }
        report("telescoping_integral", worst < 1e-12, worst);
    }

    // Dilation scales the homogeneous norm linearly.
    {
        rf::NoiseSpec spec;
        spec.kind = rf::NoiseKind::fbm;
        spec.hurst = 0.4;
        spec.dim = 2;
        spec.seed = seed;
        spec.stream_id = 300;
        const rf::MicroLift lift = rf::make_lift(spec, rf::Grid(1.0, 64));
        const double base = rf::homogeneous_norm(lift.rp, 0.4);
        const double scaled = rf::homogeneous_norm(lift.rp.dilate(2.0), 0.4);
        const double rel = std::abs(scaled - 2.0 * base) / (2.0 * base);
        report("dilation_scaling", rel < 1e-10, rel);
    }

    // kappa at alpha = 1/2 against a partial-sum zeta bracket.
    {
        const double k = rf::kappa(0.5);
        double partial = 0.0;
        const int n = 200000;
        for (int i = n; i >= 1; --i) partial += 1.0 / (std::sqrt(double(i)) * i);
        const double lo = partial + 2.0 / std::sqrt(double(n + 1));
        const double hi = partial + 2.0 / std::sqrt(double(n));
        const double scale = std::pow(2.0, 1.5);
        const bool ok = k >= scale * lo - 1e-9 && k <= scale * hi + 1e-9 &&
                        std::abs(k - 7.38873) < 2.5e-4;
        report("kappa_half", ok, k);
    }

    // Ito-Stratonovich shift is an involution.
    {
        rf::NoiseSpec spec;
        spec.kind = rf::NoiseKind::brownian_ito;
        spec.dim = 2;
        spec.seed = seed;
        spec.stream_id = 400;
        const rf::MicroLift lift = rf::make_lift(spec, rf::Grid(1.0, 64));
        const rf::GridRoughPath round_trip =
            rf::stratonovich_from_ito(rf::stratonovich_from_ito(lift.rp, 0.5), -0.5);
        double worst = 0.0;
        for (int c = 0; c < 64; ++c)
            worst = std::max(worst, (round_trip.level2_cell(c) -
                                     lift.rp.level2_cell(c)).norm());
        report("ito_strat_involution", worst < 1e-15, worst);
    }

    if (failures > 0) {
        std::cout << failures << " self-test failure(s)\n";
        return 3;
    }
    std::cout << "all self-tests passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rough-path slow-fast averaging toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::map<std::string, CommonOpts> opts;
    std::map<std::string, int (*)(const CommonOpts&)> handlers = {
        {"lift", cmd_lift},         {"solve", cmd_solve}, {"slowfast", cmd_slowfast},
        {"average", cmd_average},   {"study", cmd_study}, {"selftest", cmd_selftest}};
    const std::map<std::string, std::string> descriptions = {
        {"lift", "generate and serialize a rough path"},
        {"solve", "solve the averaged rough differential equation"},
        {"slowfast", "run one coupled slow-fast trajectory with diagnostics"},
        {"average", "build and export an averaged-drift table"},
        {"study", "run the Monte Carlo convergence study"},
        {"selftest", "run the deterministic invariant suite"}};
    for (auto& [name, fn] : handlers) {
        CLI::App* cmd = app.add_subcommand(name, descriptions.at(name));
        add_common(cmd, opts[name]);
    }

    CLI11_PARSE(app, argc, argv);

    const std::string chosen = app.get_subcommands().front()->get_name();
    try {
        return handlers.at(chosen)(opts.at(chosen));
    } catch (const rf::ExplosionError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
