#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "edtsc/config.hpp"
#include "edtsc/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

struct RunOptions {
  std::string scenario = "track";
  double speed_kmh = 60.0;
  std::string fis = "on";
  double dt = 0.005;
  double duration = 0.0;
  std::string config_path;
  std::string out_dir = "out";
};

edtsc::SimSettings to_settings(const RunOptions& opt) {
  edtsc::SimSettings st;
  st.scenario = opt.scenario == "dlc"
                    ? edtsc::SimSettings::Scenario::kLaneChange
                    : edtsc::SimSettings::Scenario::kTrack;
  st.speed_kmh = opt.speed_kmh;
  st.fis_on = opt.fis == "on";
  st.dt = opt.dt;
  st.duration_s = opt.duration;
  return st;
}

int do_run(const RunOptions& opt) {
  edtsc::Config cfg = opt.config_path.empty()
                          ? edtsc::Config()
                          : edtsc::Config::load_file(opt.config_path);
  const edtsc::SimSettings st = to_settings(opt);
  const edtsc::SimResult res = edtsc::run_scenario(cfg, st);

  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory '" << opt.out_dir
              << "': " << ec.message() << "\n";
    return kExitIo;
  }
  try {
    edtsc::write_text_file(opt.out_dir + "/states.csv",
                           edtsc::states_csv(res.log));
    edtsc::write_text_file(opt.out_dir + "/metrics.txt",
                           edtsc::metrics_text(res.metrics));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  std::cout << edtsc::metrics_text(res.metrics);
  return kExitOk;
}

int do_compare(const std::string& dir_a, const std::string& dir_b) {
  const auto a = edtsc::read_metrics_file(dir_a + "/metrics.txt");
  const auto b = edtsc::read_metrics_file(dir_b + "/metrics.txt");
  std::cout << edtsc::format_comparison(a, b);
  return kExitOk;
}

int do_selftest() {
  edtsc::Config cfg;
  for (const char* scenario : {"track", "dlc"}) {
    for (const char* fis : {"on", "off"}) {
      RunOptions opt;
      opt.scenario = scenario;
      opt.speed_kmh = scenario == std::string("track") ? 40.0 : 40.0;
      opt.fis = fis;
      opt.duration = 2.0;
      const edtsc::SimResult res = edtsc::run_scenario(cfg, to_settings(opt));
      if (res.log.size() == 0) {
        std::cerr << "selftest: empty log for " << scenario << "/" << fis
                  << "\n";
        return kExitNumeric;
      }
    }
  }
  std::cout << "selftest ok\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electronic-differential traction and stability simulator"};
  app.require_subcommand(1);

  RunOptions opt;
  CLI::App* run = app.add_subcommand("run", "Simulate one scenario");
  run->add_option("--scenario", opt.scenario, "Scenario: track or dlc")
      ->check(CLI::IsMember({"track", "dlc"}));
  run->add_option("--speed-kmh", opt.speed_kmh,
                  "Track: cruise cap; dlc: test speed [km/h]");
  run->add_option("--fis", opt.fis, "Corrective layer: on or off")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_option("--dt", opt.dt, "Control/integration period [s]");
  run->add_option("--duration", opt.duration,
                  "Simulated time cap [s]; 0 = scenario default");
  run->add_option("--config", opt.config_path, "Parameter file (INI-style)");
  run->add_option("--out", opt.out_dir, "Output directory");

  std::string dir_a, dir_b;
  CLI::App* cmp = app.add_subcommand("compare", "Diff two run directories");
  cmp->add_option("--a", dir_a, "Run directory (candidate)")->required();
  cmp->add_option("--b", dir_b, "Run directory (baseline)")->required();

  CLI::App* self = app.add_subcommand("selftest", "Short end-to-end check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return do_run(opt);
    if (cmp->parsed()) return do_compare(dir_a, dir_b);
    if (self->parsed()) return do_selftest();
  } catch (const edtsc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const edtsc::NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitConfig;
}
