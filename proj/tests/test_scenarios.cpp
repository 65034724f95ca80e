#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fluxmech/config.hpp"
#include "fluxmech/scenarios.hpp"

using namespace fluxmech;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("fluxmech_test_" + tag);
  fs::remove_all(dir);
  return dir;
}

} // namespace

TEST_CASE("unit parsing normalizes to base units") {
  const auto entries = parse_config_text("omega_m = 6 MHz\nphi_e = 0.3\nb_field = 100 mT\n");
  std::vector<ParamSpec> schema = {{"omega_m", Dimension::Frequency, 0.0, ""},
                                   {"phi_e", Dimension::Flux, 0.0, ""},
                                   {"b_field", Dimension::MagneticField, 0.0, ""}};
  const ResolvedConfig cfg = validate_config("demo", schema, entries);
  CHECK(cfg.get("omega_m") == 6e6);
  CHECK(cfg.get("phi_e") == 0.3);
  CHECK(cfg.get("b_field") == Approx(0.1));
}

TEST_CASE("config errors carry position and suggestions") {
  std::vector<ParamSpec> schema = {{"e_j", Dimension::Frequency, 5.5e9, ""},
                                   {"e_c", Dimension::Frequency, 0.5e9, ""}};

  CHECK_THROWS_WITH(parse_config_text("e_j 5.5 GHz\n"), Catch::Contains("line 1"));
  CHECK_THROWS_WITH(validate_config("demo", schema, parse_config_text("EJ_GHz = 5.5\n")),
                    Catch::Contains("nearest valid key is 'e_j'"));
  CHECK_THROWS_WITH(validate_config("demo", schema,
                                    parse_config_text("e_j = 5 GHz\ne_j = 6 GHz\n")),
                    Catch::Contains("duplicate key"));
  CHECK_THROWS_WITH(validate_config("demo", schema, parse_config_text("e_j = 5 mT\n")),
                    Catch::Contains("unit mismatch"));
  CHECK_THROWS_WITH(validate_config("demo", schema, parse_config_text("e_j = fast\n")),
                    Catch::Contains("non-numeric"));
}

TEST_CASE("catalog lists the full experiment set") {
  const auto entries = list_scenarios();
  CHECK(entries.size() == 11);
  for (const auto& [name, figure] : entries) {
    CHECK_FALSE(name.empty());
    CHECK(figure.find("Fig.") != std::string::npos);
  }
  CHECK_THROWS_AS(find_scenario("no-such-thing"), ConfigError);
}

TEST_CASE("default fluxonium spectrum writes the documented table shape") {
  const ResolvedConfig cfg = resolve_scenario_config("fluxonium-spectrum", {});
  CHECK(cfg.get_count("flux_points") == 501);
  const fs::path dir = fresh_dir("spectrum_defaults");
  run_scenario(cfg, dir, 4);

  const SpectrumTrace trace = read_csv_file((dir / "fluxonium_spectrum.csv").string());
  CHECK(trace.x.size() == 501);
  CHECK(trace.columns.size() == 6);
  for (int k = 0; k < 6; ++k) CHECK(trace.columns[k].name == "level_" + std::to_string(k));
}

TEST_CASE("runs are deterministic for a fixed resolved config") {
  const auto entries = parse_config_text("flux_points = 31\nbasis_size = 80\n");
  const ResolvedConfig cfg = resolve_scenario_config("fluxonium-spectrum", entries);
  const fs::path a = fresh_dir("determinism_a");
  const fs::path b = fresh_dir("determinism_b");
  run_scenario(cfg, a, 1);
  run_scenario(cfg, b, 4);  // thread count must not leak into the bytes
  CHECK(slurp(a / "fluxonium_spectrum.csv") == slurp(b / "fluxonium_spectrum.csv"));
  CHECK(slurp(a / "resolved.cfg") == slurp(b / "resolved.cfg"));
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
}

TEST_CASE("config hash tracks the resolved values") {
  const ResolvedConfig base = resolve_scenario_config("fluxonium-spectrum", {});
  ResolvedConfig changed = base;
  changed.set("e_j", 5.6e9);
  CHECK(config_hash(base) != config_hash(changed));
  CHECK(config_hash(base) == config_hash(resolve_scenario_config("fluxonium-spectrum", {})));
}

TEST_CASE("manifest lists every artifact with a content hash") {
  const auto entries = parse_config_text("flux_points = 11\nbasis_size = 80\n");
  const ResolvedConfig cfg = resolve_scenario_config("matrix-elements", entries);
  const fs::path dir = fresh_dir("manifest");
  const ScenarioResult result = run_scenario(cfg, dir, 1);

  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["config_hash"] == config_hash(cfg));
  size_t hashed = 0;
  for (const auto& out : manifest["outputs"]) {
    const fs::path file = dir / out["file"].get<std::string>();
    CHECK(fs::exists(file));
    if (out.contains("fnv1a64")) {
      char buf[20];
      std::snprintf(buf, sizeof(buf), "%016llx",
                    static_cast<unsigned long long>(fnv1a64(slurp(file))));
      CHECK(out["fnv1a64"].get<std::string>() == buf);
      ++hashed;
    }
  }
  CHECK(hashed == result.outputs.size());
  // Every file in the directory shows up in the manifest.
  for (const auto& entry : fs::directory_iterator(dir)) {
    bool found = false;
    for (const auto& out : manifest["outputs"]) {
      if (out["file"].get<std::string>() == entry.path().filename().string()) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("emitted traces round-trip exactly through the CSV form") {
  const auto entries = parse_config_text("flux_points = 17\nbasis_size = 80\n");
  const ResolvedConfig cfg = resolve_scenario_config("matrix-elements", entries);
  const fs::path dir = fresh_dir("roundtrip");
  run_scenario(cfg, dir, 1);

  const SpectrumTrace first = read_csv_file((dir / "matrix_elements.csv").string());
  std::ostringstream os;
  write_csv(first, os);
  std::istringstream is(os.str());
  const SpectrumTrace second = read_csv(is);
  REQUIRE(second.x.size() == first.x.size());
  for (size_t i = 0; i < first.x.size(); ++i) CHECK(second.x[i] == first.x[i]);
  for (size_t c = 0; c < first.columns.size(); ++c) {
    for (size_t i = 0; i < first.x.size(); ++i) {
      CHECK(second.columns[c].values[i] == first.columns[c].values[i]);
    }
  }
}

TEST_CASE("trace grids must be strictly monotone") {
  SpectrumTrace bad;
  bad.x_name = "x";
  bad.x_unit = "1";
  bad.x = {0.0, 1.0, 1.0};
  bad.add_column("y", "1").values = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("every catalog entry runs with defaults") {
  for (const auto& spec : catalog()) {
    const ResolvedConfig cfg = resolve_scenario_config(spec.name, {});
    const fs::path dir = fresh_dir("defaults_" + spec.name);
    const ScenarioResult result = run_scenario(cfg, dir, 4);
    INFO(spec.name);
    CHECK(result.outputs.size() >= 2);  // resolved.cfg plus at least one artifact
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "resolved.cfg"));
    CHECK(fs::exists(dir / "plot.py"));
  }
}

TEST_CASE("scenario resolution fills derived defaults") {
  const ResolvedConfig cfg = resolve_scenario_config("cooling", {});
  CHECK(cfg.get("eps_r") == Approx(0.89 * 6e6));
  CHECK(cfg.get("delta_q") ==
        Approx(-std::sqrt(36e12 - cfg.get("eps_r") * cfg.get("eps_r"))));
  // Overrides propagate into the derivation.
  const auto entries = parse_config_text("omega_m = 4 MHz\n");
  const ResolvedConfig other = resolve_scenario_config("cooling", entries);
  CHECK(other.get("eps_r") == Approx(0.89 * 4e6));
}

#ifdef FLUXMECH_BIN
TEST_CASE("command line maps error classes to exit codes") {
  const std::string bin = FLUXMECH_BIN;
  const fs::path dir = fresh_dir("cli");
  fs::create_directories(dir);

  CHECK(std::system((bin + " list > " + (dir / "list.txt").string()).c_str()) == 0);
  const std::string listing = slurp(dir / "list.txt");
  CHECK(listing.find("fluxonium-spectrum") != std::string::npos);

  const int bad_key = std::system((bin + " fluxonium-spectrum --set EJ_GHz=5 --out " +
                                   (dir / "bad").string() + " 2> " +
                                   (dir / "err.txt").string())
                                      .c_str());
  CHECK(WEXITSTATUS(bad_key) == 2);
  CHECK(slurp(dir / "err.txt").find("nearest valid key") != std::string::npos);

  const int ok = std::system((bin +
                              " fluxonium-spectrum --set flux_points=11 --set basis_size=80"
                              " --out " +
                              (dir / "run").string() + " > /dev/null")
                                 .c_str());
  CHECK(WEXITSTATUS(ok) == 0);
  CHECK(fs::exists(dir / "run" / "manifest.json"));

  // A qubit too slow for adiabatic elimination is a numerical failure, not a
  // config error.
  const int numerical = std::system((bin + " cooling --set gamma=1kHz --set gamma_phi=1kHz"
                                           " --out " +
                                     (dir / "num").string() + " 2> " +
                                     (dir / "num_err.txt").string())
                                        .c_str());
  CHECK(WEXITSTATUS(numerical) == 3);
  CHECK(slurp(dir / "num_err.txt").find("adiabatic elimination") != std::string::npos);
}
#endif
