#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluxmech/analysis.hpp"
#include "fluxmech/config.hpp"
#include "fluxmech/core/constants.hpp"
#include "fluxmech/core/trace.hpp"
#include "fluxmech/dynamics.hpp"
#include "fluxmech/fluxonium.hpp"
#include "fluxmech/hybrid.hpp"
#include "fluxmech/semiclassical.hpp"

namespace fluxmech {

/// Collects every artifact a scenario writes so the manifest can list them
/// with content hashes. All output is deterministic for a fixed resolved
/// config: no timestamps, no randomness, full-precision decimal throughout.
class RunContext {
 public:
  RunContext(std::filesystem::path out_dir, std::string scenario, std::string hash, int threads)
      : out_dir_(std::move(out_dir)),
        scenario_(std::move(scenario)),
        hash_(std::move(hash)),
        threads_(threads) {
    std::filesystem::create_directories(out_dir_);
  }

  int threads() const { return threads_; }
  const std::string& scenario() const { return scenario_; }
  const std::string& config_hash() const { return hash_; }
  const std::filesystem::path& out_dir() const { return out_dir_; }

  void write_text(const std::string& name, const std::string& content) {
    const auto path = out_dir_ / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file '" + path.string() + "'");
    os << content;
    os.close();
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    outputs_.push_back({name, content.size(), buf});
  }

  void write_trace(const std::string& name, SpectrumTrace trace) {
    trace.add_metadata("scenario", scenario_);
    trace.add_metadata("config_hash", hash_);
    std::ostringstream os;
    write_csv(trace, os);
    write_text(name, os.str());
    csv_files_.push_back(name);
  }

  void write_json(const std::string& name, const nlohmann::json& j) {
    write_text(name, j.dump(2) + "\n");
  }

  struct Output {
    std::string name;
    std::size_t bytes;
    std::string fnv1a64_hex;
  };
  const std::vector<Output>& outputs() const { return outputs_; }
  const std::vector<std::string>& csv_files() const { return csv_files_; }

 private:
  std::filesystem::path out_dir_;
  std::string scenario_;
  std::string hash_;
  int threads_;
  std::vector<Output> outputs_;
  std::vector<std::string> csv_files_;
};

struct ScenarioSpec {
  std::string name;
  std::string figure;
  std::string description;
  std::vector<ParamSpec> params;
  /// Fills NaN defaults from the rest of the configuration.
  std::function<void(ResolvedConfig&)> resolve;
  std::function<void(const ResolvedConfig&, RunContext&)> run;
};

namespace scenario_detail {

inline FluxoniumParams circuit_from(const ResolvedConfig& cfg) {
  FluxoniumParams p;
  p.e_j = cfg.get("e_j");
  p.e_c = cfg.get("e_c");
  p.e_l = cfg.get("e_l");
  p.basis_size = cfg.get_count("basis_size");
  p.n_levels = cfg.get_count("n_levels");
  p.validate();
  return p;
}

inline std::vector<ParamSpec> circuit_params() {
  return {
      {"e_j", Dimension::Frequency, 5.5e9, "Josephson energy / h"},
      {"e_c", Dimension::Frequency, 0.5e9, "charging energy / h"},
      {"e_l", Dimension::Frequency, 0.2e9, "inductive energy / h"},
      {"basis_size", Dimension::Count, 120, "oscillator basis size"},
      {"n_levels", Dimension::Count, 6, "retained circuit levels"},
  };
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(n);
  if (n == 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * double(i) / double(n - 1));
  return out;
}

inline std::vector<FluxBias> flux_points(const ResolvedConfig& cfg) {
  std::vector<FluxBias> grid;
  for (double f :
       linspace(cfg.get("flux_min"), cfg.get("flux_max"), cfg.get_count("flux_points"))) {
    grid.push_back({f});
  }
  return grid;
}

inline nlohmann::json peak_to_json(const PeakFeature& f) {
  return {{"location_hz", f.location},
          {"width_hz", f.width},
          {"amplitude", f.amplitude},
          {"prominence", f.prominence}};
}

/// Mean phonon number and qubit population from a qubit(2) x fock(m) state.
inline double mean_phonon(const ComplexMatrix& rho, int m) {
  double n = 0.0;
  for (int q = 0; q < 2; ++q) {
    for (int k = 0; k < m; ++k) n += k * rho(q * m + k, q * m + k).real();
  }
  return n;
}

} // namespace scenario_detail

inline const std::vector<ScenarioSpec>& catalog();

inline const ScenarioSpec& find_scenario(const std::string& name) {
  for (const auto& spec : catalog()) {
    if (spec.name == name) return spec;
  }
  std::string nearest;
  int best = 1 << 20;
  for (const auto& spec : catalog()) {
    const int d = detail::levenshtein(name, spec.name);
    if (d < best) {
      best = d;
      nearest = spec.name;
    }
  }
  throw ConfigError("unknown scenario '" + name + "'; nearest is '" + nearest + "'");
}

/// Validates entries for a scenario and fills derived defaults.
inline ResolvedConfig resolve_scenario_config(const std::string& name,
                                              const std::vector<ConfigEntry>& entries) {
  const ScenarioSpec& spec = find_scenario(name);
  ResolvedConfig cfg = validate_config(name, spec.params, entries);
  if (spec.resolve) spec.resolve(cfg);
  for (const auto& [key, value] : cfg.values) {
    if (std::isnan(value)) {
      throw std::logic_error("scenario '" + name + "' left key '" + key + "' unresolved");
    }
  }
  return cfg;
}

struct ScenarioResult {
  std::filesystem::path out_dir;
  std::vector<RunContext::Output> outputs;
};

inline std::string plot_script(const std::vector<std::string>& csv_files);

/// Runs a resolved scenario: artifacts, resolved config, plot script and a
/// manifest with a content hash per file.
inline ScenarioResult run_scenario(const ResolvedConfig& cfg,
                                   const std::filesystem::path& out_dir, int threads = 1) {
  const ScenarioSpec& spec = find_scenario(cfg.scenario);
  RunContext ctx(out_dir, cfg.scenario, config_hash(cfg), std::max(threads, 1));
  ctx.write_text("resolved.cfg", serialize_config(cfg));
  spec.run(cfg, ctx);
  ctx.write_text("plot.py", plot_script(ctx.csv_files()));

  nlohmann::json manifest;
  manifest["scenario"] = cfg.scenario;
  manifest["version"] = kVersion;
  manifest["config_hash"] = ctx.config_hash();
  manifest["outputs"] = nlohmann::json::array();
  for (const auto& out : ctx.outputs()) {
    manifest["outputs"].push_back(
        {{"file", out.name}, {"bytes", out.bytes}, {"fnv1a64", out.fnv1a64_hex}});
  }
  // The manifest lists itself without a hash; everything else is covered.
  manifest["outputs"].push_back({{"file", "manifest.json"}});
  std::ofstream os(out_dir / "manifest.json", std::ios::binary);
  os << manifest.dump(2) << "\n";

  ScenarioResult result;
  result.out_dir = out_dir;
  result.outputs = ctx.outputs();
  return result;
}

// ---------------------------------------------------------------------------
// Scenario runners
// ---------------------------------------------------------------------------

namespace scenario_detail {

inline void run_fluxonium_spectrum(const ResolvedConfig& cfg, RunContext& ctx) {
  const FluxoniumParams p = circuit_from(cfg);
  SpectrumTrace trace = spectrum_sweep(p, flux_points(cfg), ctx.threads());
  ctx.write_trace("fluxonium_spectrum.csv", std::move(trace));
}

inline void run_wavefunctions(const ResolvedConfig& cfg, RunContext& ctx) {
  const FluxoniumParams p = circuit_from(cfg);
  const FluxBias bias{cfg.get("phi_e")};
  const int levels = cfg.get_count("wf_levels");
  const std::vector<double> grid =
      linspace(-cfg.get("phi_span"), cfg.get("phi_span"), cfg.get_count("phi_points"));

  SpectrumTrace trace;
  trace.x_name = "phi";
  trace.x_unit = "rad";
  trace.add_metadata("generator", "fluxonium.wavefunction_on_grid");
  trace.add_metadata("version", kVersion);
  trace.x = grid;
  auto& pot = trace.add_column("potential", "Hz");
  for (int level = 0; level < levels; ++level) {
    const WavefunctionSamples w = wavefunction_on_grid(p, bias, level, grid);
    if (level == 0) pot.values = w.potential;
    auto& col = trace.add_column("psi_" + std::to_string(level), "1/sqrt(rad)");
    col.values = w.psi;
    trace.add_metadata("energy_" + std::to_string(level) + "_hz",
                       detail::format_full(w.energy));
  }
  ctx.write_trace("wavefunctions.csv", std::move(trace));
}

inline void run_matrix_elements(const ResolvedConfig& cfg, RunContext& ctx) {
  const FluxoniumParams p = circuit_from(cfg);
  const MatrixElementTable table =
      phase_matrix_elements(p, flux_points(cfg), 2, ctx.threads());

  SpectrumTrace trace;
  trace.x_name = "phi_e";
  trace.x_unit = "Phi0";
  trace.add_metadata("generator", "fluxonium.phase_matrix_elements");
  trace.add_metadata("version", kVersion);
  trace.x = table.phi_e;
  auto& gg = trace.add_column("phi_gg", "1");
  auto& ee = trace.add_column("phi_ee", "1");
  auto& ge = trace.add_column("abs_phi_ge", "1");
  for (const auto& m : table.elements) {
    gg.values.push_back(m(0, 0).real());
    ee.values.push_back(m(1, 1).real());
    ge.values.push_back(std::abs(m(0, 1)));
  }
  ctx.write_trace("matrix_elements.csv", std::move(trace));
}

inline void run_couplings(const ResolvedConfig& cfg, RunContext& ctx) {
  CouplingSetup setup;
  setup.fluxonium = circuit_from(cfg);
  setup.b_field = cfg.get("b_field");
  setup.mech.omega_m = cfg.get("omega_m");
  setup.mech.mass = cfg.get("mass");
  setup.mech.length = cfg.get("length");
  setup.mech.validate();

  ctx.write_trace("couplings.csv", coupling_rates(setup, flux_points(cfg), ctx.threads()));
  const double hw = cfg.get("zoom_halfwidth");
  std::vector<FluxBias> zoom;
  for (double f : linspace(0.5 - hw, 0.5 + hw, cfg.get_count("zoom_points"))) {
    zoom.push_back({f});
  }
  ctx.write_trace("couplings_zoom.csv", coupling_rates(setup, zoom, ctx.threads()));

  nlohmann::json report;
  report["g_phi_hz"] = setup.g_phi();
  report["x_zp_m"] = setup.mech.x_zp();
  report["mech_frequency_shift_hz"] = mech_frequency_shift(setup);
  report["mech_shift_over_omega_m"] = mech_frequency_shift(setup) / setup.mech.omega_m;
  ctx.write_json("couplings_report.json", report);
}

inline void run_eit(const ResolvedConfig& cfg, RunContext& ctx) {
  const FluxoniumParams p = circuit_from(cfg);
  const MatrixElementTable table = phase_matrix_elements(p, {FluxBias{cfg.get("phi_e")}}, 2);

  PumpProbeConfig c;
  c.phi_gg = table.elements[0](0, 0).real();
  c.phi_ee = table.elements[0](1, 1).real();
  c.g_phi = cfg.get("g_phi");
  c.eps_d = cfg.get("eps_d");
  c.eps_p = cfg.get("eps_p");
  c.gamma = cfg.get("gamma");
  c.gamma_phi = cfg.get("gamma_phi");
  c.n_q = cfg.get("n_q");
  c.omega_m = cfg.get("omega_m");
  c.gamma_m = cfg.get("gamma_m");
  c.delta_q = cfg.get("delta_q");

  // Coarse span plus a dense window around the mechanical frequency; the
  // transparency dip is only gamma_m plus backaction wide.
  std::vector<double> grid = linspace(c.omega_m - cfg.get("probe_halfwidth"),
                                      c.omega_m + cfg.get("probe_halfwidth"),
                                      cfg.get_count("probe_points"));
  const std::vector<double> fine = linspace(c.omega_m - cfg.get("dip_halfwidth"),
                                            c.omega_m + cfg.get("dip_halfwidth"),
                                            cfg.get_count("dip_points"));
  grid.insert(grid.end(), fine.begin(), fine.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  SpectrumTrace trace = probe_response(c, grid, true, ctx.threads());
  trace.add_metadata("phi_gg", detail::format_full(c.phi_gg));
  trace.add_metadata("phi_ee", detail::format_full(c.phi_ee));

  const SpectrumTrace fine_trace = probe_response(c, fine, false, ctx.threads());
  const PeakReport dip = measure_peaks(fine_trace, "amp", FeatureKind::Dips);

  // Depth vs coupling at fixed drives.
  nlohmann::json depth_scan = nlohmann::json::array();
  for (double scale : {1.0 / 3.0, 2.0 / 3.0, 1.0, 1.5, 2.0}) {
    PumpProbeConfig varied = c;
    varied.g_phi = scale * c.g_phi;
    const SpectrumTrace t = probe_response(varied, fine, false, ctx.threads());
    const auto& amp = t.column("amp").values;
    const double edge = 0.5 * (amp.front() + amp.back());
    double lo = amp[0];
    for (double v : amp) lo = std::min(lo, v);
    depth_scan.push_back({{"g_phi_hz", varied.g_phi}, {"dip_depth", edge - lo}});
  }

  const ZeroOrderSolution zero = steady_state_zero_order(c);
  nlohmann::json report;
  report["dip"] = peak_to_json(dip.features.front());
  report["dip_offset_from_omega_m_hz"] = dip.features.front().location - c.omega_m;
  report["omega_m_hz"] = c.omega_m;
  report["weak_drive"] = c.weak_drive();
  report["sigma_z0"] = zero.sigma_z0;
  report["q0"] = zero.q0;
  report["zero_order_residual"] = zero.residual;
  report["depth_vs_g_phi"] = depth_scan;
  ctx.write_json("eit_report.json", report);
  ctx.write_trace("eit.csv", std::move(trace));
}

inline void run_mode_splitting(const ResolvedConfig& cfg, RunContext& ctx) {
  const FluxoniumParams p = circuit_from(cfg);
  const MatrixElementTable table = phase_matrix_elements(p, {FluxBias{cfg.get("phi_e")}}, 2);
  const double g_x = cfg.get("g_phi") * std::abs(table.elements[0](0, 1));

  TransverseConfig base;
  base.omega_q = cfg.get("omega_q");
  base.omega_m = cfg.get("omega_m");
  base.gamma = cfg.get("gamma");
  base.gamma_phi = cfg.get("gamma_phi");
  base.gamma_m = cfg.get("gamma_m");
  base.g_x = g_x;
  base.eps_p = cfg.get("eps_p");

  const std::vector<double> grid =
      linspace(base.omega_q - cfg.get("span_halfwidth"), base.omega_q + cfg.get("span_halfwidth"),
               cfg.get_count("span_points"));

  TransverseConfig cold = base;
  cold.n_q = 0.0;
  const SpectrumTrace cold_trace = transverse_response(cold, grid);

  // Hot qubit twice: thermal occupation in the inversion only (pinned
  // linewidth, isolating the amplitude suppression) and with the fully
  // thermal linewidth (which is what buries the splitting).
  TransverseConfig hot_pinned = base;
  hot_pinned.n_q = cfg.get("n_q_hot");
  hot_pinned.gamma_q_total = cold.gamma_q();
  const SpectrumTrace hot_pinned_trace = transverse_response(hot_pinned, grid);

  TransverseConfig hot_thermal = base;
  hot_thermal.n_q = cfg.get("n_q_hot");
  const SpectrumTrace hot_thermal_trace = transverse_response(hot_thermal, grid);

  SpectrumTrace combined;
  combined.x_name = "omega_p";
  combined.x_unit = "Hz";
  combined.add_metadata("generator", "semiclassical.transverse_response");
  combined.add_metadata("version", kVersion);
  combined.add_metadata("g_x_hz", detail::format_full(g_x));
  combined.add_metadata("abs_phi_ge", detail::format_full(std::abs(table.elements[0](0, 1))));
  combined.x = grid;
  combined.add_column("amp_cold", "1").values = cold_trace.column("amp").values;
  combined.add_column("amp_hot_pinned_linewidth", "1").values =
      hot_pinned_trace.column("amp").values;
  combined.add_column("amp_hot_thermal_linewidth", "1").values =
      hot_thermal_trace.column("amp").values;

  const PeakReport cold_peaks = measure_peaks(cold_trace, "amp", FeatureKind::Peaks);
  const PeakReport hot_peaks = measure_peaks(hot_pinned_trace, "amp", FeatureKind::Peaks);

  // Two modes count as resolved when the split peaks stand out above the
  // single-mode hump just outside them. The sharp antiresonance between the
  // peaks is excluded on purpose: it is gamma_m wide and says nothing about
  // whether the doublet is distinguishable.
  auto mode_contrast = [&](const SpectrumTrace& t) {
    const PeakReport peaks = measure_peaks(t, "amp", FeatureKind::Peaks);
    const auto& amp = t.column("amp").values;
    auto amp_at = [&](double f) {
      size_t best = 0;
      for (size_t i = 0; i < t.x.size(); ++i) {
        if (std::abs(t.x[i] - f) < std::abs(t.x[best] - f)) best = i;
      }
      return amp[best];
    };
    const double center = 0.5 * (peaks.features[0].location + peaks.features[1].location);
    const double half_split = 0.5 * peaks.splitting;
    const double outside =
        0.5 * (amp_at(center - 1.5 * half_split) + amp_at(center + 1.5 * half_split));
    const double peak = std::max(peaks.features[0].amplitude, peaks.features[1].amplitude);
    return 1.0 - outside / peak;
  };
  const double thermal_contrast = mode_contrast(hot_thermal_trace);
  double hot_thermal_max = 0.0;
  for (double v : hot_thermal_trace.column("amp").values) {
    hot_thermal_max = std::max(hot_thermal_max, v);
  }

  nlohmann::json report;
  report["g_x_hz"] = g_x;
  report["cold"] = {{"splitting_hz", cold_peaks.splitting},
                    {"peak", peak_to_json(cold_peaks.features[0])},
                    {"mode_contrast", mode_contrast(cold_trace)}};
  report["hot_pinned_linewidth"] = {{"splitting_hz", hot_peaks.splitting},
                                    {"peak", peak_to_json(hot_peaks.features[0])}};
  report["amplitude_suppression"] =
      cold_peaks.features[0].amplitude / hot_peaks.features[0].amplitude;
  report["splitting_ratio"] = cold_peaks.splitting / hot_peaks.splitting;
  report["hot_thermal_linewidth"] = {{"max_amplitude", hot_thermal_max},
                                     {"mode_contrast", thermal_contrast},
                                     {"splitting_resolved", thermal_contrast > 0.25}};
  ctx.write_json("mode_splitting_report.json", report);
  ctx.write_trace("mode_splitting.csv", std::move(combined));
}

inline void run_cooling(const ResolvedConfig& cfg, RunContext& ctx) {
  const FluxoniumParams p = circuit_from(cfg);
  CouplingSetup setup;
  setup.fluxonium = p;
  setup.b_field = cfg.get("b_field");
  setup.mech.omega_m = cfg.get("omega_m");
  setup.mech.gamma_m = cfg.get("gamma_m");
  const MatrixElementTable table = phase_matrix_elements(p, {FluxBias{cfg.get("phi_e")}}, 2);
  const double g_z =
      setup.g_phi() * 0.5 * (table.elements[0](1, 1).real() - table.elements[0](0, 0).real());

  CoolingInput in;
  in.gamma = cfg.get("gamma");
  in.gamma_phi = cfg.get("gamma_phi");
  in.n_q = cfg.get("n_q");
  in.eps_r = cfg.get("eps_r");
  in.delta_q = cfg.get("delta_q");
  in.g_z = g_z;
  in.omega_m = cfg.get("omega_m");
  in.gamma_m = cfg.get("gamma_m");
  in.n_m = cfg.get("n_m");

  // Adiabatic elimination needs the qubit to stay the fast subsystem.
  const double gamma_q = in.gamma * (2.0 * in.n_q + 1.0) + in.gamma_phi;
  if (gamma_q < 5.0 * std::max(std::abs(g_z), in.gamma_m)) {
    throw std::runtime_error("cooling: adiabatic elimination invalid, Gamma_q = " +
                             std::to_string(gamma_q) + " Hz is not fast against g_z = " +
                             std::to_string(g_z) + " Hz");
  }

  const LindbladModel qubit =
      make_driven_qubit_model(in.gamma, in.gamma_phi, in.n_q, in.delta_q, in.eps_r);
  SpectrumTrace spectrum = qubit_spectral_density(
      qubit,
      linspace(-cfg.get("spec_halfwidth"), cfg.get("spec_halfwidth"),
               cfg.get_count("spec_points")),
      ctx.threads());
  spectrum.add_metadata("eps_r_hz", detail::format_full(in.eps_r));
  spectrum.add_metadata("delta_q_hz", detail::format_full(in.delta_q));
  ctx.write_trace("spectral_density.csv", std::move(spectrum));

  const CoolingReport rates = cooling_rates(in);
  const std::vector<double> times =
      linspace(0.0, cfg.get("t_max"), cfg.get_count("traj_points"));
  ctx.write_trace("cooling_trajectory.csv", cooling_trajectory(rates, in, cfg.get("n0"), times));

  nlohmann::json report;
  report["g_phi_hz"] = setup.g_phi();
  report["g_z_hz"] = g_z;
  report["gamma_q_minus_hz"] = rates.gamma_q_minus;
  report["gamma_q_plus_hz"] = rates.gamma_q_plus;
  report["delta_omega_m_hz"] = rates.delta_omega_m;
  report["n_steady"] = rates.n_steady;
  report["heating"] = rates.heating;
  report["re_s_plus_s"] = rates.s_re_plus;
  report["re_s_minus_s"] = rates.s_re_minus;
  report["gamma_q_over_g_z"] = gamma_q / std::abs(g_z);

  if (cfg.get_count("crosscheck") != 0) {
    // Full two-subsystem run at a reduced initial occupation, against the
    // reduced rate equation at matching checkpoints.
    const int m = cfg.get_count("crosscheck_fock");
    const double n0 = cfg.get("crosscheck_n0");
    LindbladModel full;
    const ComplexMatrix id_m = ops::identity(m);
    const ComplexMatrix b = ops::destroy(m);
    full.hamiltonian = kron(qubit.hamiltonian, id_m) +
                       kron(ops::identity(2), in.omega_m * ops::number(m)) +
                       g_z * kron(ops::sigma_z(), ops::position(m));
    for (const auto& c : qubit.collapse) full.collapse.push_back({kron(c.op, id_m), c.rate});
    full.collapse.push_back({kron(ops::identity(2), b), in.gamma_m * (in.n_m + 1.0)});
    full.collapse.push_back(
        {kron(ops::identity(2), ComplexMatrix(b.adjoint())), in.gamma_m * in.n_m});
    full.dims = {2, m};

    const ComplexMatrix rho0 =
        kron(steady_state(qubit), ops::projector(m, int(std::llround(n0))));
    const std::vector<double> checkpoints =
        linspace(0.0, cfg.get("t_max"), cfg.get_count("crosscheck_points"));
    const auto traj = evolve(full, rho0, checkpoints, EvolveOptions{{1e-8, 1e-12}});
    const SpectrumTrace reduced = cooling_trajectory(rates, in, n0, checkpoints);

    SpectrumTrace cross;
    cross.x_name = "time";
    cross.x_unit = "s";
    cross.add_metadata("generator", "dynamics.cooling_crosscheck");
    cross.add_metadata("version", kVersion);
    cross.x = checkpoints;
    auto& full_col = cross.add_column("mean_phonon_full", "1");
    auto& red_col = cross.add_column("mean_phonon_reduced", "1");
    nlohmann::json checks = nlohmann::json::array();
    for (size_t i = 0; i < checkpoints.size(); ++i) {
      const double n_full = mean_phonon(traj[i], m);
      const double n_red = reduced.column("mean_phonon").values[i];
      full_col.values.push_back(n_full);
      red_col.values.push_back(n_red);
      if (i > 0) {
        checks.push_back({{"time_s", checkpoints[i]},
                          {"full", n_full},
                          {"reduced", n_red},
                          {"relative_error", std::abs(n_full - n_red) / std::abs(n_full)}});
      }
    }
    report["crosscheck"] = checks;
    ctx.write_trace("cooling_crosscheck.csv", std::move(cross));
  }
  ctx.write_json("cooling_report.json", report);
}

inline void run_hybrid_spectrum(const ResolvedConfig& cfg, RunContext& ctx) {
  const FluxoniumParams p = circuit_from(cfg);
  CouplingSetup setup;
  setup.fluxonium = p;
  setup.b_field = cfg.get("b_field");
  setup.mech.omega_m = cfg.get("omega_m");
  const HybridModelFactory factory(p, cfg.get("omega_m"), setup.g_phi(),
                                   cfg.get_count("n_qubit_levels"), cfg.get_count("n_fock"));

  const HybridSweepResult sweep =
      hybrid_spectrum_sweep(factory, flux_points(cfg), HybridSweepOptions{}, ctx.threads());
  SpectrumTrace main_trace = sweep.trace;
  main_trace.add_metadata("min_neighbor_overlap",
                          detail::format_full(sweep.min_neighbor_overlap));
  main_trace.add_metadata("truncation_ok", sweep.truncation_ok ? "true" : "false");
  ctx.write_trace("hybrid_spectrum.csv", std::move(main_trace));

  // Zoomed views around both symmetric crossing regions plus the crossing
  // reports themselves. Near zero flux the single-phonon state crosses the
  // nearly degenerate e/f pair; near half flux it crosses g/e.
  auto zoom = [&](double lo, double hi, const std::string& name) {
    std::vector<FluxBias> grid;
    for (double f : linspace(lo, hi, cfg.get_count("zoom_points"))) grid.push_back({f});
    HybridSweepResult z = hybrid_spectrum_sweep(factory, grid, HybridSweepOptions{},
                                                ctx.threads());
    const HybridModel mid = factory.at(FluxBias{0.5 * (lo + hi)});
    z.trace.add_metadata("e_offset_hz", detail::format_full(mid.qubit_levels(1)));
    if (mid.qubit_levels.size() > 2) {
      z.trace.add_metadata("f_offset_hz", detail::format_full(mid.qubit_levels(2)));
    }
    ctx.write_trace(name, std::move(z.trace));
  };
  zoom(0.0, cfg.get("zoom_zero_halfwidth"), "hybrid_zoom_zero.csv");
  zoom(0.5 - cfg.get("zoom_half_halfwidth"), 0.5, "hybrid_zoom_half.csv");

  auto crossing_json = [&](const CrossingReport& report) {
    const HybridModel at = factory.at(report.location);
    nlohmann::json phi_table = nlohmann::json::array();
    for (int i = 0; i < at.qubit_dim(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < at.qubit_dim(); ++j) row.push_back(at.phi(i, j).real());
      phi_table.push_back(row);
    }
    const double coupling_element = std::abs(at.phi(report.level_a, report.level_b));
    return nlohmann::json{
        {"flux", report.location.phi_e},
        {"gap_hz", report.gap_hz},
        {"states", {{"level_a", report.level_a},
                    {"phonon_a", report.phonon_a},
                    {"level_b", report.level_b},
                    {"phonon_b", report.phonon_b}}},
        {"phi_matrix", phi_table},
        {"two_g_phi_element_hz", 2.0 * setup.g_phi() * coupling_element},
        {"qubit_levels_hz", std::vector<double>(at.qubit_levels.data(),
                                                at.qubit_levels.data() + at.qubit_levels.size())}};
  };

  nlohmann::json report;
  const CrossingReport near_zero =
      find_avoided_crossing(factory, FluxBias{0.0002}, FluxBias{0.0006}, 1, 1, 2, 0);
  const CrossingReport near_half =
      find_avoided_crossing(factory, FluxBias{0.4985}, FluxBias{0.4998}, 0, 1, 1, 0);
  report["near_zero"] = crossing_json(near_zero);
  report["near_half"] = crossing_json(near_half);
  report["g_phi_hz"] = setup.g_phi();
  ctx.write_json("crossings.json", report);
}

inline void run_rabi(const ResolvedConfig& cfg, RunContext& ctx) {
  const FluxoniumParams p = circuit_from(cfg);
  CouplingSetup setup;
  setup.fluxonium = p;
  setup.b_field = cfg.get("b_field");
  setup.mech.omega_m = cfg.get("omega_m");

  // Resonant flux for |e,0> <-> |g,1> and the transverse coupling there.
  const HybridModelFactory factory(p, cfg.get("omega_m"), setup.g_phi(), 3, 3);
  const CrossingReport crossing =
      find_avoided_crossing(factory, FluxBias{cfg.get("bracket_lo")},
                            FluxBias{cfg.get("bracket_hi")}, 0, 1, 1, 0);
  const HybridModel at = factory.at(crossing.location);
  const double g_x = setup.g_phi() * std::abs(at.phi(0, 1));

  RabiSetup base;
  base.omega_q = cfg.get("omega_m");  // exchange resonance after the diabatic sweep
  base.omega_m = cfg.get("omega_m");
  base.g_x = g_x;
  base.full_coupling = cfg.get_count("full_coupling") != 0;
  if (base.full_coupling) {
    base.phi = at.phi.topLeftCorner(2, 2);
    base.g_phi = setup.g_phi();
  }
  base.n_fock = cfg.get_count("n_fock");
  base.gamma_m = cfg.get("gamma_m");

  const FluxSweepProtocol sweep = flux_sweep_protocol(
      FluxBias{cfg.get("park_flux")}, crossing.location, cfg.get("sweep_rate"),
      cfg.get("gamma_m"), cfg.get("gamma_c") * (2.0 * cfg.get("n_q") + 1.0) + cfg.get("gamma_c"));

  const std::vector<double> times = linspace(0.0, cfg.get("t_max"), cfg.get_count("t_points"));

  SpectrumTrace trace;
  trace.x_name = "time";
  trace.x_unit = "s";
  trace.add_metadata("generator", "dynamics.rabi_simulation");
  trace.add_metadata("version", kVersion);
  trace.add_metadata("g_x_hz", detail::format_full(g_x));
  trace.add_metadata("resonant_flux", detail::format_full(crossing.location.phi_e));
  trace.add_metadata("sweep_time_s", detail::format_full(sweep.sweep_time_s));
  trace.add_metadata("sweep_diabatic_ok", sweep.diabatic_ok ? "true" : "false");
  trace.x = times;

  RabiSetup ideal = base;
  const SpectrumTrace ideal_trace = rabi_simulation(ideal, times);
  trace.add_column("p_e_ideal", "1").values = ideal_trace.column("p_e").values;

  const char* names[3] = {"p_e_gamma_a", "p_e_gamma_b", "p_e_gamma_c"};
  const char* keys[3] = {"gamma_a", "gamma_b", "gamma_c"};
  for (int k = 0; k < 3; ++k) {
    RabiSetup lossy = base;
    lossy.gamma = cfg.get(keys[k]);
    lossy.gamma_phi = cfg.get(keys[k]);
    lossy.n_q = cfg.get("n_q");
    lossy.n_m = cfg.get("n_m");
    lossy.drive_amp = cfg.get("drive_amp");
    const SpectrumTrace t = rabi_simulation(lossy, times, OdeOptions{1e-8, 1e-12});
    trace.add_column(names[k], "1").values = t.column("p_e").values;
  }

  const PeakReport dips = measure_peaks(times, ideal_trace.column("p_e").values,
                                        FeatureKind::Dips);
  double first_minimum = times.back();
  for (const auto& f : dips.features) first_minimum = std::min(first_minimum, f.location);
  double min_pe = 1.0;
  for (double v : ideal_trace.column("p_e").values) min_pe = std::min(min_pe, v);

  nlohmann::json report;
  report["g_x_hz"] = g_x;
  report["resonant_flux"] = crossing.location.phi_e;
  report["crossing_gap_hz"] = crossing.gap_hz;
  report["first_minimum_s"] = first_minimum;
  report["expected_first_minimum_s"] = 1.0 / (4.0 * g_x);
  report["ideal_contrast"] = 1.0 - min_pe;
  ctx.write_json("rabi_report.json", report);
  ctx.write_trace("rabi.csv", std::move(trace));
}

inline void append_entanglement_columns(SpectrumTrace& trace, const std::string& suffix,
                                        const std::vector<ComplexMatrix>& states, int m) {
  ComplexVector e0 = ComplexVector::Zero(2 * m);
  e0(m) = 1.0;
  ComplexVector g1 = ComplexVector::Zero(2 * m);
  g1(1) = 1.0;
  const Complex i_unit(0.0, 1.0);
  ComplexVector psi_plus = (g1 + i_unit * e0) / std::sqrt(2.0);
  ComplexVector psi_minus = (g1 - i_unit * e0) / std::sqrt(2.0);

  auto& en = trace.add_column("e_n" + suffix, "1");
  auto& fe0 = trace.add_column("f_e0" + suffix, "1");
  auto& fg1 = trace.add_column("f_g1" + suffix, "1");
  auto& fp = trace.add_column("f_psi_plus" + suffix, "1");
  auto& fm = trace.add_column("f_psi_minus" + suffix, "1");
  for (const auto& rho : states) {
    BipartiteState s{rho, 2, m};
    en.values.push_back(log_negativity(s));
    fe0.values.push_back(fidelity_pure(s, e0));
    fg1.values.push_back(fidelity_pure(s, g1));
    fp.values.push_back(fidelity_pure(s, psi_plus));
    fm.values.push_back(fidelity_pure(s, psi_minus));
  }
}

inline void run_entanglement(const ResolvedConfig& cfg, RunContext& ctx) {
  const FluxoniumParams p = circuit_from(cfg);
  CouplingSetup setup;
  setup.fluxonium = p;
  setup.b_field = cfg.get("b_field");
  setup.mech.omega_m = cfg.get("omega_m");
  const HybridModelFactory factory(p, cfg.get("omega_m"), setup.g_phi(), 3, 3);
  const CrossingReport crossing =
      find_avoided_crossing(factory, FluxBias{cfg.get("bracket_lo")},
                            FluxBias{cfg.get("bracket_hi")}, 0, 1, 1, 0);
  const double g_x = setup.g_phi() * std::abs(factory.at(crossing.location).phi(0, 1));
  const int m = cfg.get_count("n_fock");

  const std::vector<double> times = linspace(0.0, cfg.get("t_max"), cfg.get_count("t_points"));

  auto evolve_case = [&](double detuning, double gamma, double n_th) {
    RabiSetup setup_case;
    setup_case.omega_q = cfg.get("omega_m") + detuning;
    setup_case.omega_m = cfg.get("omega_m");
    setup_case.g_x = g_x;
    setup_case.n_fock = m;
    setup_case.gamma = gamma;
    setup_case.gamma_phi = gamma;
    setup_case.n_q = gamma > 0.0 ? n_th : 0.0;
    setup_case.n_m = gamma > 0.0 ? n_th : 0.0;
    setup_case.gamma_m = gamma > 0.0 ? cfg.get("gamma_m") : 0.0;
    const LindbladModel model = make_rabi_model(setup_case);
    ComplexMatrix rho0 = ComplexMatrix::Zero(2 * m, 2 * m);
    rho0(m, m) = 1.0;  // |e, 0>
    return evolve(model, rho0, times, EvolveOptions{{1e-9, 1e-13}});
  };

  SpectrumTrace trace;
  trace.x_name = "time";
  trace.x_unit = "s";
  trace.add_metadata("generator", "analysis.entanglement");
  trace.add_metadata("version", kVersion);
  trace.add_metadata("g_x_hz", detail::format_full(g_x));
  trace.add_metadata("resonant_flux", detail::format_full(crossing.location.phi_e));
  trace.x = times;
  append_entanglement_columns(trace, "", evolve_case(0.0, 0.0, 0.0), m);

  const double detuning = cfg.get("detuning_over_g_x") * g_x;
  SpectrumTrace detuned;
  detuned.x_name = "time";
  detuned.x_unit = "s";
  detuned.add_metadata("generator", "analysis.entanglement");
  detuned.add_metadata("version", kVersion);
  detuned.add_metadata("detuning_hz", detail::format_full(detuning));
  detuned.x = times;
  append_entanglement_columns(detuned, "_pos", evolve_case(detuning, 0.0, 0.0), m);
  append_entanglement_columns(detuned, "_neg", evolve_case(-detuning, 0.0, 0.0), m);

  SpectrumTrace lossy;
  lossy.x_name = "time";
  lossy.x_unit = "s";
  lossy.add_metadata("generator", "analysis.entanglement");
  lossy.add_metadata("version", kVersion);
  lossy.add_metadata("gamma_hz", detail::format_full(cfg.get("gamma_lossy")));
  lossy.x = times;
  append_entanglement_columns(lossy, "",
                              evolve_case(0.0, cfg.get("gamma_lossy"), cfg.get("n_q")), m);

  // Timing digest: E_N and fidelities at the quarter-period milestones.
  const double quarter = 1.0 / (8.0 * g_x);  // full return takes 1 / (2 g_x)
  nlohmann::json report;
  report["g_x_hz"] = g_x;
  report["quarter_period_s"] = quarter;
  auto at_time = [&](const SpectrumTrace& t, const std::string& col, double when) {
    size_t best = 0;
    for (size_t i = 0; i < t.x.size(); ++i) {
      if (std::abs(t.x[i] - when) < std::abs(t.x[best] - when)) best = i;
    }
    return t.column(col).values[best];
  };
  report["resonant"] = {{"e_n_quarter", at_time(trace, "e_n", quarter)},
                        {"f_psi_plus_quarter", at_time(trace, "f_psi_plus", quarter)},
                        {"e_n_half", at_time(trace, "e_n", 2.0 * quarter)},
                        {"f_g1_half", at_time(trace, "f_g1", 2.0 * quarter)},
                        {"e_n_three_quarter", at_time(trace, "e_n", 3.0 * quarter)},
                        {"f_psi_minus_three_quarter", at_time(trace, "f_psi_minus", 3.0 * quarter)},
                        {"f_e0_full", at_time(trace, "f_e0", 4.0 * quarter)}};
  double en_max_detuned = 0.0;
  for (double v : detuned.column("e_n_pos").values) en_max_detuned = std::max(en_max_detuned, v);
  for (double v : detuned.column("e_n_neg").values) en_max_detuned = std::max(en_max_detuned, v);
  report["detuned_max_e_n"] = en_max_detuned;
  ctx.write_json("entanglement_report.json", report);
  ctx.write_trace("entanglement.csv", std::move(trace));
  ctx.write_trace("entanglement_detuned.csv", std::move(detuned));
  ctx.write_trace("entanglement_dissipative.csv", std::move(lossy));
}

inline void run_dispersive(const ResolvedConfig& cfg, RunContext& ctx) {
  const FluxoniumParams p = circuit_from(cfg);
  CouplingSetup setup;
  setup.fluxonium = p;
  setup.b_field = cfg.get("b_field");
  const FluxBias bias{cfg.get("phi_e")};

  const HybridModelFactory factory(p, cfg.get("omega_m"), setup.g_phi(), 2,
                                   cfg.get_count("n_fock"));
  const HybridModel base = factory.at(bias);
  const double omega_q = base.qubit_levels(1) - base.qubit_levels(0);
  const double g_x = setup.g_phi() * std::abs(base.phi(0, 1));

  // The red side is unbounded, but sliding omega_m = omega_q - Delta caps the
  // blue side below the qubit splitting.
  std::vector<double> detunings;
  const int n = cfg.get_count("detuning_points");
  const double lo = cfg.get("detuning_over_g_x_min") * g_x;
  const double hi = cfg.get("detuning_over_g_x_max") * g_x;
  const double pos_hi = std::min(hi, 0.8 * omega_q);
  for (double d : linspace(lo, hi, n)) detunings.push_back(-d);
  if (pos_hi > lo) {
    for (double d : linspace(lo, pos_hi, n)) detunings.push_back(d);
  }
  SpectrumTrace shifts = dispersive_shifts(factory, bias, detunings);
  ctx.write_trace("dispersive_shifts.csv", std::move(shifts));

  // Resonant n-phonon gaps from the same projected model with the mechanical
  // frequency parked on the qubit.
  HybridModel resonant = base;
  resonant.omega_m = omega_q;
  const EigenSystem sys = hermitian_eig(build_hybrid_hamiltonian(resonant));
  auto pair_gap = [&](int phonons) {
    const int pa = resonant.product_index(0, phonons);
    const int pb = resonant.product_index(1, phonons - 1);
    int best1 = -1, best2 = -1;
    double w1 = -1.0, w2 = -1.0;
    for (int j = 0; j < resonant.dim(); ++j) {
      const double w = std::norm(sys.vectors(pa, j)) + std::norm(sys.vectors(pb, j));
      if (w > w1) {
        w2 = w1;
        best2 = best1;
        w1 = w;
        best1 = j;
      } else if (w > w2) {
        w2 = w;
        best2 = j;
      }
    }
    return std::abs(sys.values(best1) - sys.values(best2));
  };
  const double gap1 = pair_gap(1);
  const double gap2 = pair_gap(2);

  nlohmann::json report;
  report["omega_q_hz"] = omega_q;
  report["g_x_hz"] = g_x;
  report["gap_one_phonon_hz"] = gap1;
  report["gap_two_phonon_hz"] = gap2;
  report["gap_ratio"] = gap2 / gap1;
  report["expected_ratio"] = std::sqrt(2.0);
  ctx.write_json("dispersive_report.json", report);
}

} // namespace scenario_detail

inline const std::vector<ScenarioSpec>& catalog() {
  using namespace scenario_detail;
  static const std::vector<ScenarioSpec> specs = [] {
    std::vector<ScenarioSpec> all;

    auto with_circuit = [](std::vector<ParamSpec> extra) {
      std::vector<ParamSpec> params = circuit_params();
      params.insert(params.end(), extra.begin(), extra.end());
      return params;
    };
    auto flux_grid_params = [](int points) {
      return std::vector<ParamSpec>{
          {"flux_min", Dimension::Flux, 0.0, "sweep start"},
          {"flux_max", Dimension::Flux, 1.0, "sweep end"},
          {"flux_points", Dimension::Count, double(points), "sweep resolution"},
      };
    };

    {
      ScenarioSpec s;
      s.name = "fluxonium-spectrum";
      s.figure = "Fig. 1(b)";
      s.description = "circuit levels versus external flux, referenced to the ground state";
      s.params = with_circuit(flux_grid_params(501));
      s.run = run_fluxonium_spectrum;
      all.push_back(std::move(s));
    }
    {
      ScenarioSpec s;
      s.name = "wavefunctions";
      s.figure = "Fig. 1(c)";
      s.description = "phase-space wavefunctions and the double-well potential at fixed flux";
      s.params = with_circuit({{"phi_e", Dimension::Flux, 0.5, "flux bias"},
                               {"wf_levels", Dimension::Count, 4, "levels to project"},
                               {"phi_span", Dimension::Scalar, 8.0, "grid half-width in phase"},
                               {"phi_points", Dimension::Count, 401, "grid resolution"}});
      s.run = run_wavefunctions;
      all.push_back(std::move(s));
    }
    {
      ScenarioSpec s;
      s.name = "matrix-elements";
      s.figure = "Fig. 2(a)";
      s.description = "phase operator matrix elements of the lowest doublet versus flux";
      s.params = with_circuit(flux_grid_params(501));
      s.run = run_matrix_elements;
      all.push_back(std::move(s));
    }
    {
      ScenarioSpec s;
      s.name = "couplings";
      s.figure = "Fig. 2(b,c)";
      s.description = "transverse and longitudinal electromechanical rates versus flux";
      auto params = with_circuit(flux_grid_params(501));
      params.push_back({"b_field", Dimension::MagneticField, 0.1, "in-plane field"});
      params.push_back({"omega_m", Dimension::Frequency, 6e6, "mechanical frequency"});
      params.push_back({"mass", Dimension::Mass, 0.75e-15, "resonator mass"});
      params.push_back({"length", Dimension::Length, 40e-6, "suspended arm length"});
      params.push_back({"zoom_halfwidth", Dimension::Flux, 0.01, "half-flux zoom window"});
      params.push_back({"zoom_points", Dimension::Count, 201, "zoom resolution"});
      s.params = std::move(params);
      s.run = run_couplings;
      all.push_back(std::move(s));
    }
    {
      ScenarioSpec s;
      s.name = "eit";
      s.figure = "Fig. 3(a)";
      s.description = "pump-probe transparency dip in the longitudinal regime";
      s.params = with_circuit({
          {"phi_e", Dimension::Flux, 0.3, "working flux"},
          {"g_phi", Dimension::Frequency, 60e3, "single-photon coupling"},
          {"eps_d", Dimension::Frequency, 5e3, "pump amplitude"},
          {"eps_p", Dimension::Frequency, 5e3, "probe amplitude"},
          {"gamma", Dimension::Frequency, 2e6, "qubit relaxation"},
          {"gamma_phi", Dimension::Frequency, 0.9e6, "qubit dephasing"},
          {"n_q", Dimension::Scalar, 0.0, "qubit bath occupation"},
          {"omega_m", Dimension::Frequency, 4e6, "mechanical frequency"},
          {"gamma_m", Dimension::Frequency, 5.0, "mechanical decay"},
          {"delta_q", Dimension::Frequency, std::nan(""), "pump detuning (default -omega_m)"},
          {"probe_halfwidth", Dimension::Frequency, 1e6, "coarse scan half-width"},
          {"probe_points", Dimension::Count, 801, "coarse resolution"},
          {"dip_halfwidth", Dimension::Frequency, 200.0, "dense window half-width"},
          {"dip_points", Dimension::Count, 1601, "dense resolution"},
      });
      s.resolve = [](ResolvedConfig& cfg) {
        if (std::isnan(cfg.get("delta_q"))) cfg.set("delta_q", -cfg.get("omega_m"));
      };
      s.run = run_eit;
      all.push_back(std::move(s));
    }
    {
      ScenarioSpec s;
      s.name = "mode-splitting";
      s.figure = "Fig. 3(b)";
      s.description = "transverse-regime mode splitting and its thermal suppression";
      s.params = with_circuit({
          {"phi_e", Dimension::Flux, 0.5, "flux sweet spot"},
          {"omega_q", Dimension::Frequency, 4e6, "qubit splitting"},
          {"omega_m", Dimension::Frequency, 4e6, "mechanical frequency"},
          {"g_phi", Dimension::Frequency, 60e3, "single-photon coupling"},
          {"gamma", Dimension::Frequency, 1e3, "qubit relaxation"},
          {"gamma_phi", Dimension::Frequency, 1e3, "qubit dephasing"},
          {"gamma_m", Dimension::Frequency, 5.0, "mechanical decay"},
          {"eps_p", Dimension::Frequency, 1e3, "probe amplitude"},
          {"n_q_hot", Dimension::Scalar, 78.0, "hot qubit occupation"},
          {"span_halfwidth", Dimension::Frequency, 600e3, "scan half-width"},
          {"span_points", Dimension::Count, 12001, "scan resolution"},
      });
      s.run = run_mode_splitting;
      all.push_back(std::move(s));
    }
    {
      ScenarioSpec s;
      s.name = "cooling";
      s.figure = "Fig. 5";
      s.description = "sideband cooling: qubit noise spectrum, rates and phonon trajectory";
      s.params = with_circuit({
          {"phi_e", Dimension::Flux, 0.3, "working flux"},
          {"b_field", Dimension::MagneticField, 0.1, "in-plane field"},
          {"omega_m", Dimension::Frequency, 6e6, "mechanical frequency"},
          {"gamma_m", Dimension::Frequency, 5.0, "mechanical decay"},
          {"gamma", Dimension::Frequency, 2e6, "qubit relaxation"},
          {"gamma_phi", Dimension::Frequency, 0.9e6, "qubit dephasing"},
          {"n_q", Dimension::Scalar, 0.0, "qubit bath occupation"},
          {"n_m", Dimension::Scalar, 30.0, "mechanical bath occupation"},
          {"eps_r", Dimension::Frequency, std::nan(""), "drive amplitude (default 0.89 omega_m)"},
          {"delta_q", Dimension::Frequency, std::nan(""),
           "drive detuning (default -sqrt(omega_m^2 - eps_r^2))"},
          {"n0", Dimension::Scalar, 30.0, "initial phonon occupation"},
          {"t_max", Dimension::Time, 2e-5, "trajectory span"},
          {"traj_points", Dimension::Count, 401, "trajectory resolution"},
          {"spec_halfwidth", Dimension::Frequency, 12e6, "spectrum half-width"},
          {"spec_points", Dimension::Count, 961, "spectrum resolution"},
          {"crosscheck", Dimension::Count, 1, "run the full two-subsystem comparison"},
          {"crosscheck_n0", Dimension::Scalar, 3.0, "initial phonons for the full run"},
          {"crosscheck_fock", Dimension::Count, 6, "Fock truncation for the full run"},
          {"crosscheck_points", Dimension::Count, 4, "checkpoints"},
      });
      s.resolve = [](ResolvedConfig& cfg) {
        if (std::isnan(cfg.get("eps_r"))) cfg.set("eps_r", 0.89 * cfg.get("omega_m"));
        if (std::isnan(cfg.get("delta_q"))) {
          const double wm = cfg.get("omega_m"), er = cfg.get("eps_r");
          if (er >= wm) throw ConfigError("cooling: eps_r must be below omega_m");
          cfg.set("delta_q", -std::sqrt(wm * wm - er * er));
        }
      };
      s.run = run_cooling;
      all.push_back(std::move(s));
    }
    {
      ScenarioSpec s;
      s.name = "hybrid-spectrum";
      s.figure = "Fig. 4";
      s.description = "composite spectrum versus flux with avoided-crossing reports";
      auto params = with_circuit(flux_grid_params(501));
      params.push_back({"b_field", Dimension::MagneticField, 0.1, "in-plane field"});
      params.push_back({"omega_m", Dimension::Frequency, 6e6, "mechanical frequency"});
      params.push_back({"n_qubit_levels", Dimension::Count, 5, "retained circuit levels"});
      params.push_back({"n_fock", Dimension::Count, 4, "phonon truncation"});
      params.push_back({"zoom_zero_halfwidth", Dimension::Flux, 0.001, "zoom near zero flux"});
      params.push_back({"zoom_half_halfwidth", Dimension::Flux, 0.004, "zoom near half flux"});
      params.push_back({"zoom_points", Dimension::Count, 201, "zoom resolution"});
      s.params = std::move(params);
      s.run = run_hybrid_spectrum;
      all.push_back(std::move(s));
    }
    {
      ScenarioSpec s;
      s.name = "rabi";
      s.figure = "Fig. 6";
      s.description = "single-phonon Rabi exchange after the diabatic flux sweep";
      s.params = with_circuit({
          {"b_field", Dimension::MagneticField, 0.1, "in-plane field"},
          {"omega_m", Dimension::Frequency, 6e6, "mechanical frequency"},
          {"gamma_m", Dimension::Frequency, 5.0, "mechanical decay"},
          {"n_fock", Dimension::Count, 4, "phonon truncation"},
          {"drive_amp", Dimension::Frequency, 10e3, "readout drive amplitude"},
          {"gamma_a", Dimension::Frequency, 100.0, "first decay rate"},
          {"gamma_b", Dimension::Frequency, 500.0, "second decay rate"},
          {"gamma_c", Dimension::Frequency, 1000.0, "third decay rate"},
          {"n_q", Dimension::Scalar, 50.0, "qubit bath occupation"},
          {"n_m", Dimension::Scalar, 50.0, "mechanical bath occupation"},
          {"bracket_lo", Dimension::Flux, 0.4985, "crossing search bracket"},
          {"bracket_hi", Dimension::Flux, 0.4998, "crossing search bracket"},
          {"park_flux", Dimension::Flux, 0.3, "flux before the sweep"},
          {"sweep_rate", Dimension::Scalar, 2e5, "flux sweep rate, Phi0 per second"},
          {"full_coupling", Dimension::Count, 0, "use the full phase-matrix coupling"},
          {"t_max", Dimension::Time, std::nan(""), "trace span (default 2.5 periods)"},
          {"t_points", Dimension::Count, 801, "trace resolution"},
      });
      s.resolve = [](ResolvedConfig& cfg) {
        if (std::isnan(cfg.get("t_max"))) {
          // Period estimate from the half-flux matrix element scale.
          FluxoniumParams p = circuit_from(cfg);
          CouplingSetup setup;
          setup.fluxonium = p;
          setup.b_field = cfg.get("b_field");
          const MatrixElementTable t = phase_matrix_elements(p, {FluxBias{0.4994}}, 2);
          const double g_est = setup.g_phi() * std::abs(t.elements[0](0, 1));
          cfg.set("t_max", 2.5 / (2.0 * g_est));
        }
      };
      s.run = run_rabi;
      all.push_back(std::move(s));
    }
    {
      ScenarioSpec s;
      s.name = "entanglement";
      s.figure = "Fig. 7";
      s.description = "qubit-phonon entanglement and Bell-state fidelities over one exchange";
      s.params = with_circuit({
          {"b_field", Dimension::MagneticField, 0.1, "in-plane field"},
          {"omega_m", Dimension::Frequency, 6e6, "mechanical frequency"},
          {"gamma_m", Dimension::Frequency, 5.0, "mechanical decay"},
          {"n_fock", Dimension::Count, 4, "phonon truncation"},
          {"bracket_lo", Dimension::Flux, 0.4985, "crossing search bracket"},
          {"bracket_hi", Dimension::Flux, 0.4998, "crossing search bracket"},
          {"detuning_over_g_x", Dimension::Scalar, 3.0, "detuned-run offset in units of g_x"},
          {"gamma_lossy", Dimension::Frequency, 100.0, "decay rate for the dissipative run"},
          {"n_q", Dimension::Scalar, 50.0, "bath occupation for the dissipative run"},
          {"t_max", Dimension::Time, std::nan(""), "trace span (default 1.2 periods)"},
          {"t_points", Dimension::Count, 601, "trace resolution"},
      });
      s.resolve = [](ResolvedConfig& cfg) {
        if (std::isnan(cfg.get("t_max"))) {
          FluxoniumParams p = circuit_from(cfg);
          CouplingSetup setup;
          setup.fluxonium = p;
          setup.b_field = cfg.get("b_field");
          const MatrixElementTable t = phase_matrix_elements(p, {FluxBias{0.4994}}, 2);
          const double g_est = setup.g_phi() * std::abs(t.elements[0](0, 1));
          cfg.set("t_max", 1.2 / (2.0 * g_est));
        }
      };
      s.run = run_entanglement;
      all.push_back(std::move(s));
    }
    {
      ScenarioSpec s;
      s.name = "dispersive";
      s.figure = "Fig. 8 (App. B)";
      s.description = "dispersive shifts versus detuning and phonon-number-resolved gaps";
      s.params = with_circuit({
          {"b_field", Dimension::MagneticField, 0.1, "in-plane field"},
          {"phi_e", Dimension::Flux, 0.5, "working flux"},
          {"omega_m", Dimension::Frequency, 6e6, "nominal mechanical frequency"},
          {"n_fock", Dimension::Count, 6, "phonon truncation"},
          {"detuning_over_g_x_min", Dimension::Scalar, 6.0, "window start in units of g_x"},
          {"detuning_over_g_x_max", Dimension::Scalar, 40.0, "window end in units of g_x"},
          {"detuning_points", Dimension::Count, 35, "points per sign"},
      });
      s.run = run_dispersive;
      all.push_back(std::move(s));
    }
    return all;
  }();
  return specs;
}

inline std::vector<std::pair<std::string, std::string>> list_scenarios() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& spec : catalog()) out.emplace_back(spec.name, spec.figure);
  return out;
}

inline std::string plot_script(const std::vector<std::string>& csv_files) {
  std::ostringstream os;
  os << "#!/usr/bin/env python3\n"
     << "# Generic plotter for the CSV traces in this directory.\n"
     << "import csv\n"
     << "import matplotlib.pyplot as plt\n\n"
     << "FILES = [\n";
  for (const auto& f : csv_files) os << "    \"" << f << "\",\n";
  os << "]\n\n"
     << "for name in FILES:\n"
     << "    with open(name) as fh:\n"
     << "        rows = [r for r in csv.reader(fh) if r and not r[0].startswith(\"#\")]\n"
     << "    header, data = rows[0], rows[1:]\n"
     << "    xs = [float(r[0]) for r in data]\n"
     << "    plt.figure()\n"
     << "    for k in range(1, len(header)):\n"
     << "        plt.plot(xs, [float(r[k]) for r in data], label=header[k])\n"
     << "    plt.xlabel(header[0])\n"
     << "    plt.legend(fontsize=7)\n"
     << "    plt.title(name)\n"
     << "    plt.savefig(name.replace(\".csv\", \".png\"), dpi=150)\n"
     << "    plt.close()\n";
  return os.str();
}

} // namespace fluxmech
