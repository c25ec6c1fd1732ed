// Command-line front end: level-dynamics scans, Floquet spectra and density
// snapshots, ramped time propagation, contour export, dipole spectra and unit
// conversion. Every subcommand writes deterministic CSV keyed by a config hash.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "ndwp/density.hpp"
#include "ndwp/floquet.hpp"
#include "ndwp/io.hpp"
#include "ndwp/propagator.hpp"
#include "ndwp/quantizer.hpp"

using namespace ndwp;
namespace fs = std::filesystem;
namespace sc = semiclassics;
namespace q = quantum;
namespace dyn = dynamics;

namespace {

struct JobConfig {
    int n0 = 16;
    double f0 = 0.015;
    double fs0 = 0.003;
    int n_window = 10;
    int k_photons = 4;
    int count = 60;
    int jobs = 1;
    bool large = false;
    std::string out_dir = "out";

    // scan
    std::string axis = "fs0";
    double from = 0.0, to = 0.003;
    int points = 6;

    // floquet extras
    bool density = false;
    std::string phases = "0,0.5pi,pi";

    // propagate
    std::string schedule = "turn-on";
    double t1 = 600.0;
    double f0max = 0.015;
    double tail = 0.0;
    int steps_per_period = 256;
    double cadence = 50.0;

    // contours / dipole
    std::string levels = "";

    FieldConfig field() const { return FieldConfig{n0, f0, fs0}; }

    std::string hash(const std::string& subcommand) const {
        std::ostringstream os;
        os << subcommand << "|" << io::kVersion << "|" << n0 << "|" << io::fmt(f0) << "|"
           << io::fmt(fs0) << "|" << n_window << "|" << k_photons << "|" << count << "|" << axis
           << "|" << io::fmt(from) << "|" << io::fmt(to) << "|" << points << "|" << density << "|"
           << phases << "|" << schedule << "|" << io::fmt(t1) << "|" << io::fmt(f0max) << "|"
           << io::fmt(tail) << "|" << steps_per_period << "|" << io::fmt(cadence) << "|" << levels;
        return io::hash_hex(os.str());
    }
};

void load_config_file(JobConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    nlohmann::json j;
    in >> j;
    auto get = [&](const char* key, auto& slot) {
        if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("n0", c.n0);
    get("f0", c.f0);
    get("fs0", c.fs0);
    get("n_window", c.n_window);
    get("k_photons", c.k_photons);
    get("count", c.count);
    get("jobs", c.jobs);
    get("large", c.large);
    get("out_dir", c.out_dir);
    get("axis", c.axis);
    get("from", c.from);
    get("to", c.to);
    get("points", c.points);
    get("density", c.density);
    get("phases", c.phases);
    get("schedule", c.schedule);
    get("t1", c.t1);
    get("f0max", c.f0max);
    get("tail", c.tail);
    get("steps_per_period", c.steps_per_period);
    get("cadence", c.cadence);
    get("levels", c.levels);
}

std::vector<double> parse_phases(const std::string& spec) {
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        double mul = 1.0;
        auto pos = tok.find("pi");
        if (pos != std::string::npos) {
            mul = M_PI;
            tok = tok.substr(0, pos);
            if (tok.empty()) tok = "1";
        }
        out.push_back(std::stod(tok) * mul);
    }
    if (out.empty()) throw ConfigError("no phases given");
    return out;
}

std::vector<int> parse_levels(const std::string& spec) {
    std::vector<int> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    return out;
}

void guard_large(const JobConfig& c, long dim) {
    if (c.large) {
        if (dim > 0)
            std::cerr << "[ndwp] large run: extended-space dimension " << dim
                      << "; expect minutes to hours and gigabytes of workspace\n";
        return;
    }
    if (c.n0 > 30 || dim > 40000)
        throw ConfigError("paper-scale run (n0 > 30 or dimension > 40000) requires --large");
}

std::string motion_name(sc::Motion m) {
    return m == sc::Motion::rotation ? "rotation" : "libration";
}

int cmd_scan(const JobConfig& c) {
    if (c.points < 1) throw ConfigError("scan needs at least one grid point");
    if (!(c.to > c.from) && c.points > 1) throw ConfigError("scan range must be increasing");
    std::vector<double> grid(c.points);
    for (int i = 0; i < c.points; ++i)
        grid[i] = c.points == 1 ? c.from : c.from + (c.to - c.from) * i / (c.points - 1);
    const auto scan = sc::level_dynamics_scan(c.field(), c.axis, grid, c.jobs);

    io::CsvWriter w(fs::path(c.out_dir) / "levels.csv",
                    "axis_value,level_index,energy_au,motion,degeneracy,wkb_p,maslov,near_separatrix",
                    c.hash("scan"), "axis " + c.axis);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (const auto& l : scan.points[i].levels) {
            w.row(grid[i], l.index, l.energy, motion_name(l.motion), l.degeneracy, l.p, l.maslov,
                  static_cast<int>(l.near_separatrix));
        }
    }
    std::cout << "wrote " << (fs::path(c.out_dir) / "levels.csv").string() << " (" << grid.size()
              << " grid points, " << c.n0 << " levels each)\n";
    return 0;
}

int cmd_floquet(const JobConfig& c) {
    const FieldConfig cfg = c.field();
    const auto basis = q::build_basis(cfg, c.n_window, c.k_photons);
    guard_large(c, basis.dim());
    const auto grid = q::RadialGrid::build(basis.n_max);
    const auto z = q::z_block_matrix(basis, grid);
    const auto h = q::assemble_floquet(cfg, basis, z);

    const auto top = sc::quantize_top_level(cfg);
    const double target = q::quantum_zone_target(cfg, top.energy);
    const auto spec = q::diagonalize_window(h, target, std::min<long>(c.count, basis.dim()), basis);
    const auto id = q::identify_wavepacket(spec, cfg, top.energy);

    io::CsvWriter w(fs::path(c.out_dir) / "spectrum.csv",
                    "quasienergy_au,folded_au,manifold_weight,wavepacket,score_rank,residual",
                    c.hash("floquet"));
    for (int j = 0; j < spec.quasienergies.size(); ++j) {
        w.row(spec.quasienergies[j], q::fold_to_zone(spec.quasienergies[j], target, cfg.omega()),
              q::manifold_weight(spec.vectors.col(j), basis), static_cast<int>(j == id.index),
              j == id.index ? 0 : (j == id.runner_up ? 1 : -1), spec.residuals[j]);
    }

    io::CsvWriter wd(fs::path(c.out_dir) / "delta.csv",
                     "e_semiclassical_au,eps_quantum_au,delta_spacings,ambiguous",
                     c.hash("floquet"));
    wd.row(top.energy, spec.quasienergies[id.index],
           q::semiclassical_delta(spec.quasienergies[id.index], top.energy, cfg.n0),
           static_cast<int>(id.ambiguous));

    if (c.density) {
        for (double phi : parse_phases(c.phases)) {
            const auto g = q::density_snapshot(spec.vectors.col(id.index), basis, phi);
            std::ostringstream name;
            name << "density_phi" << io::fmt(phi / M_PI) << "pi.csv";
            io::CsvWriter wg(fs::path(c.out_dir) / name.str(), "rho_au,z_au,rho_density",
                             c.hash("floquet"),
                             "phi " + io::fmt(phi) + " grid " + std::to_string(g.n_rho) + "x" +
                                 std::to_string(g.n_z) + " extent " + io::fmt(g.rho_max));
            for (int iz = 0; iz < g.n_z; ++iz)
                for (int ir = 0; ir < g.n_rho; ++ir)
                    wg.row(g.rho_at(ir), g.z_at(iz), g.at(ir, iz));
        }
    }
    std::cout << "wavepacket state: quasienergy " << io::fmt(spec.quasienergies[id.index])
              << " a.u., manifold weight " << io::fmt(id.weight) << ", delta "
              << io::fmt(id.delta) << " spacings" << (id.ambiguous ? " [ambiguous]" : "") << "\n";
    const double qv = secular::q_parameter(cfg, {1.0, 0.0});
    if (!secular::localization_q_ok(qv))
        std::cerr << "[ndwp] warning: island parameter q = " << io::fmt(qv)
                  << " <= 1; no well-localized wavepacket expected\n";
    return 0;
}

int cmd_propagate(const JobConfig& c) {
    const FieldConfig cfg = c.field();
    const auto basis = q::build_basis(cfg, c.n_window, c.k_photons);
    guard_large(c, basis.dim());
    const auto grid = q::RadialGrid::build(basis.n_max);
    const auto z = q::z_block_matrix(basis, grid);
    const dyn::Propagator prop(cfg, basis, z);

    dyn::RampSchedule sched;
    dyn::EvolvingState s0;
    if (c.schedule == "turn-on") {
        sched = dyn::schedule_sin2_turn_on(c.f0max, c.t1, cfg.fs0, c.tail);
        s0 = dyn::prepare_initial_state(cfg.with_f0(0.0), basis, z);
    } else if (c.schedule == "circularize") {
        sched = dyn::schedule_circularize(c.f0max, c.tail);
        // start on the wavepacket Floquet state at the ramp head
        const FieldConfig start = cfg.with_f0(c.f0max).with_fs0(sched.fs0_at(0.0));
        const auto h = q::assemble_floquet(start, basis, z);
        const auto top = sc::quantize_top_level(start);
        const auto spec = q::diagonalize_window(h, q::quantum_zone_target(start, top.energy),
                                                c.count, basis);
        const auto id = q::identify_wavepacket(spec, start, top.energy);
        s0.c = dyn::collapse_floquet_state(spec.vectors.col(id.index), basis, 0.0);
    } else {
        throw ConfigError("unknown schedule '" + c.schedule + "' (use turn-on or circularize)");
    }
    if (!(sched.duration() > 0.0)) throw ConfigError("schedule has zero duration");

    dyn::PropagateOptions opt;
    opt.steps_per_period = c.steps_per_period;
    opt.overlap_cadence = c.cadence;
    opt.floquet_count = c.count;
    const auto traj = dyn::propagate(s0, sched, cfg, prop, opt);

    io::CsvWriter w(fs::path(c.out_dir) / "trajectory.csv",
                    "t_periods,f0,fs0,norm,overlap,loss_proxy,ambiguous", c.hash("propagate"));
    for (const auto& r : traj.records)
        w.row(r.t_periods, r.f0, r.fs0, r.norm, r.overlap, r.loss_proxy,
              static_cast<int>(r.overlap_ambiguous));

    const auto g = q::density_snapshot_lab(traj.final_state.c, basis);
    io::CsvWriter wg(fs::path(c.out_dir) / "final_density.csv", "rho_au,z_au,rho_density",
                     c.hash("propagate"));
    for (int iz = 0; iz < g.n_z; ++iz)
        for (int ir = 0; ir < g.n_rho; ++ir) wg.row(g.rho_at(ir), g.z_at(iz), g.at(ir, iz));

    std::cout << "final overlap with the wavepacket Floquet state: " << io::fmt(traj.final_overlap)
              << " (norm drift/period " << io::fmt(traj.max_norm_drift_per_period) << ")\n";
    return 0;
}

int cmd_contours(const JobConfig& c) {
    const auto m = sc::quantize_manifold(c.field());
    const auto cs = sc::export_contours(m, parse_levels(c.levels));
    io::CsvWriter w(fs::path(c.out_dir) / "contours.csv", "level_id,L0,psi", c.hash("contours"));
    for (const auto& [id, poly] : cs.polylines)
        for (const auto& [l0, psi] : poly) w.row(id, l0, psi);
    std::cout << "wrote " << (fs::path(c.out_dir) / "contours.csv").string() << " ("
              << cs.polylines.size() << " polylines)\n";
    return 0;
}

int cmd_dipole_spectrum(const JobConfig& c) {
    const FieldConfig cfg = c.field();
    const auto basis = q::build_basis(cfg, c.n_window, c.k_photons);
    guard_large(c, basis.dim());
    const auto grid = q::RadialGrid::build(basis.n_max);
    const auto z = q::z_block_matrix(basis, grid);
    const auto h = q::assemble_floquet(cfg, basis, z);
    const auto top = sc::quantize_top_level(cfg);
    const double target = q::quantum_zone_target(cfg, top.energy);
    const auto spec = q::diagonalize_window(h, target, std::min<long>(c.count, basis.dim()), basis);
    const auto id = q::identify_wavepacket(spec, cfg, top.energy);
    const int ref = basis.state_index(basis.n_min, 0);
    const auto lines = q::dipole_spectrum(spec, z, ref);
    io::CsvWriter w(fs::path(c.out_dir) / "dipole_spectrum.csv",
                    "quasienergy_au,squared_dipole,wavepacket", c.hash("dipole-spectrum"),
                    "reference state n=" + std::to_string(basis.n_min) + " l=0");
    for (std::size_t j = 0; j < lines.size(); ++j)
        w.row(lines[j].quasienergy, lines[j].strength, static_cast<int>(static_cast<int>(j) == id.index));
    std::cout << "wrote dipole_spectrum.csv (" << lines.size() << " lines)\n";
    return 0;
}

int cmd_convert_units(const JobConfig& c) {
    const FieldConfig cfg = c.field();
    cfg.validate();
    std::cout << "n0 " << cfg.n0 << "\n";
    std::cout << "omega " << io::fmt(cfg.omega()) << " a.u.  (" << io::fmt(cfg.microwave_frequency_ghz())
              << " GHz)\n";
    std::cout << "period " << io::fmt(cfg.period_au()) << " a.u.\n";
    std::cout << "F  " << io::fmt(cfg.microwave_field_au()) << " a.u.  ("
              << io::fmt(cfg.microwave_field_v_per_cm()) << " V/cm)  [F0 = " << io::fmt(cfg.f0)
              << "]\n";
    std::cout << "Fs " << io::fmt(cfg.static_field_au()) << " a.u.  ("
              << io::fmt(cfg.static_field_v_per_cm()) << " V/cm)  [Fs0 = " << io::fmt(cfg.fs0)
              << "]\n";
    const double qv = secular::q_parameter(cfg, {1.0, 0.0});
    std::cout << "q(circular) " << io::fmt(qv) << (secular::localization_q_ok(qv) ? "" : "  [below the q > 1 localization rule]")
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven-hydrogen wavepacket toolkit: semiclassical level dynamics, Floquet spectra "
                 "and adiabatic field-ramp simulation"};
    app.require_subcommand(1);

    JobConfig c;
    if (const char* env_out = std::getenv("NDWP_SCRATCH")) c.out_dir = env_out;

    std::string config_path;
    // pre-scan for --config so file values load first and flags override them
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    }
    try {
        if (!config_path.empty()) load_config_file(c, config_path);
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    }

    app.add_option("--config", config_path, "JSON config file; command-line flags override it");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file; command-line flags override it");
        sub->add_option("--n0", c.n0, "resonant principal quantum number");
        sub->add_option("--f0", c.f0, "scaled microwave amplitude F n0^4");
        sub->add_option("--fs0", c.fs0, "scaled static amplitude Fs n0^4");
        sub->add_option("--out", c.out_dir, "output directory");
        sub->add_flag("--large", c.large, "allow paper-scale dimensions (resource heavy)");
    };
    auto add_quantum = [&](CLI::App* sub) {
        sub->add_option("--n-window", c.n_window, "half-width of the n window");
        sub->add_option("--k-photons", c.k_photons, "photon block range K");
        sub->add_option("--count", c.count, "eigenpairs around the target");
    };

    auto* scan = app.add_subcommand(
        "scan", "semiclassical level dynamics along a field axis; with --axis fs0 --f0 0.015 "
                "--n0 60 this reproduces the static-field manifold fan, with --axis f0 "
                "--fs0 0.003 the microwave turn-on fan");
    add_common(scan);
    scan->add_option("--axis", c.axis, "fs0 or f0");
    scan->add_option("--from", c.from, "axis start");
    scan->add_option("--to", c.to, "axis end");
    scan->add_option("--points", c.points, "grid points");
    scan->add_option("--jobs", c.jobs, "parallel workers (deterministic output)");

    auto* flo = app.add_subcommand(
        "floquet", "exact Floquet diagonalization around the wavepacket; --density emits "
                   "meridian-plane snapshots of the identified state at the given phases");
    add_common(flo);
    add_quantum(flo);
    flo->add_flag("--density", c.density, "write density snapshots");
    flo->add_option("--phases", c.phases, "comma list, e.g. 0,0.25pi,0.5pi,pi");

    auto* prop = app.add_subcommand(
        "propagate", "time-dependent evolution under a field ramp: 'turn-on' grows the microwave "
                     "from the extreme Stark state, 'circularize' walks the static field to zero");
    add_common(prop);
    add_quantum(prop);
    prop->add_option("--schedule", c.schedule, "turn-on | circularize");
    prop->add_option("--t1", c.t1, "turn-on time in microwave periods");
    prop->add_option("--f0max", c.f0max, "target scaled microwave amplitude");
    prop->add_option("--tail", c.tail, "hold time after the ramp, in periods");
    prop->add_option("--steps-per-period", c.steps_per_period, "integrator steps per period (>= 200)");
    prop->add_option("--cadence", c.cadence, "periods between Floquet overlap checks");

    auto* cont = app.add_subcommand("contours",
                                    "quantized (L0, psi) contours and separatrix of the slow motion");
    add_common(cont);
    cont->add_option("--levels", c.levels, "comma list of level indices; empty = all");

    auto* dip = app.add_subcommand("dipole-spectrum",
                                   "squared z-dipole from the lowest basis state into each Floquet state");
    add_common(dip);
    add_quantum(dip);

    auto* conv = app.add_subcommand("convert-units", "print the field configuration in atomic and "
                                                     "laboratory units");
    add_common(conv);

    CLI11_PARSE(app, argc, argv);

    try {
        if (scan->parsed()) return cmd_scan(c);
        if (flo->parsed()) return cmd_floquet(c);
        if (prop->parsed()) return cmd_propagate(c);
        if (cont->parsed()) return cmd_contours(c);
        if (dip->parsed()) return cmd_dipole_spectrum(c);
        if (conv->parsed()) return cmd_convert_units(c);
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return 3;
    }
    return 0;
}
