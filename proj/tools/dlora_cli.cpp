// dlora: deterministic single-gateway LoRa uplink simulator with per-node
// bandit agents and the classic allocation baselines.
//
// Subcommands:
//   run       one (policy, radius, seed) experiment from a config file
//   sweep     the full policies x radii x seeds grid with a worker pool
//   validate  parse + validate a config, optionally print the defaults
//   toa       airtime calculator (payload symbols, symbol time, ToA, energy)

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlora/config.hpp"
#include "dlora/csv.hpp"
#include "dlora/engine.hpp"
#include "dlora/sweep.hpp"

namespace {

std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("DLORA_OUT"); env && *env) return env;
  return "out";
}

dlora::SweepSpec load_or_default(const std::string& config_path) {
  if (config_path.empty()) return dlora::parse_config(nlohmann::json::object());
  return dlora::load_config(config_path);
}

void write_trace_csv(const std::vector<dlora::PacketRecord>& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "packet_id,node_id,start_s,toa_s,sf,bw_hz,cf_hz,tp_dbm,rssi_dbm,sinr_db,"
         "collided,signal_lost,fate,energy_mj\n";
  for (const dlora::PacketRecord& r : trace) {
    out << r.packet_id << ',' << r.node_id << ',' << dlora::format_double(r.start_s) << ','
        << dlora::format_double(r.toa_s) << ',' << r.params.sf << ','
        << dlora::format_double(r.params.bw_hz) << ',' << dlora::format_double(r.params.cf_hz)
        << ',' << r.params.tp_dbm << ',' << dlora::format_double(r.rssi_dbm) << ','
        << dlora::format_double(r.sinr_db) << ',' << (r.collided ? 1 : 0) << ','
        << (r.signal_lost ? 1 : 0) << ',' << dlora::fate_name(r.fate) << ','
        << dlora::format_double(r.energy_mj) << '\n';
  }
}

int cmd_run(const std::string& config_path, const std::string& out_flag,
            std::optional<std::uint64_t> seed, const std::string& policy, bool trace,
            const std::string& agents_path) {
  dlora::SweepSpec spec = load_or_default(config_path);
  dlora::SimConfig cfg = spec.base;
  if (seed) cfg.seed = *seed;
  if (!policy.empty()) cfg.policy = dlora::parse_policy(policy);

  const std::string out_dir = resolve_out_dir(out_flag);
  std::filesystem::create_directories(out_dir);

  const dlora::ExperimentResult result = dlora::run_experiment(cfg, trace);

  std::vector<dlora::CellResult> cell(1);
  cell[0].cell = {cfg.policy.name, cfg.radius_m, cfg.seed};
  cell[0].experiment = result;
  const std::vector<dlora::ResultRow> rows = dlora::collect_rows(cell, cfg.utility);

  const std::string csv_path = (std::filesystem::path(out_dir) / "results.csv").string();
  dlora::write_rows_csv(rows, csv_path);
  const std::string summary = dlora::summary_table(rows);
  std::cout << summary;
  std::cout << "wrote " << rows.size() << " rows to " << csv_path << '\n';

  if (trace) {
    const std::string trace_path = (std::filesystem::path(out_dir) / "trace.csv").string();
    write_trace_csv(result.trace, trace_path);
    std::cout << "wrote " << result.trace.size() << " packet records to " << trace_path << '\n';
  }
  if (!agents_path.empty()) {
    std::ofstream out(agents_path, std::ios::binary);
    if (!out) throw std::runtime_error(agents_path + ": cannot open for writing");
    out << dlora::agents_to_json(result.agents).dump(2) << '\n';
    std::cout << "wrote agent snapshot to " << agents_path << '\n';
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_flag, unsigned jobs) {
  const dlora::SweepSpec spec = load_or_default(config_path);
  const std::string out_dir = resolve_out_dir(out_flag);
  const dlora::SweepOutput out = dlora::run_sweep(spec, out_dir, jobs);
  std::cout << out.summary_text;
  std::cout << "wrote " << out.row_count << " rows to " << out.csv_path << '\n'
            << "summary in " << out.summary_path << '\n';
  return 0;
}

int cmd_validate(const std::string& config_path, bool print_defaults) {
  if (print_defaults) {
    std::cout << dlora::default_config_json().dump(2) << '\n';
    return 0;
  }
  const dlora::SweepSpec spec = load_or_default(config_path);
  std::cout << "config ok: " << spec.policies.size() << " policies x " << spec.radii_m.size()
            << " radii x " << spec.seeds.size() << " seeds, " << spec.base.n_nodes
            << " nodes, policy " << spec.base.policy.name << '\n';
  return 0;
}

int cmd_toa(int payload, int sf, double bw, int tp, int preamble, int crc, int header, int de,
            int cr) {
  dlora::ChannelModelConfig ch;
  ch.preamble_symbols = preamble;
  ch.crc = crc;
  ch.explicit_header = header;
  ch.low_data_rate_opt = de;
  ch.coding_rate = cr;
  const dlora::LoRaParams p{sf, bw, 470.1e6, tp};
  const int symbols = dlora::payload_symbols(payload, p, ch);
  const double t_sym = dlora::symbol_time_s(sf, bw);
  const double toa = dlora::time_on_air_s(payload, p, ch);
  std::cout << "payload_symbols: " << symbols << '\n'
            << "symbol_time_s: " << dlora::format_double(t_sym) << '\n'
            << "time_on_air_s: " << dlora::format_double(toa) << '\n'
            << "energy_mj at " << tp << " dBm: " << dlora::format_double(dlora::packet_energy_mj(p, toa))
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dlora - LoRa uplink network simulator with distributed bandit link adaptation"};
  app.require_subcommand(1);
  app.footer(dlora::config_reference_text() +
             "\nOutput directory resolution: --out flag, else $DLORA_OUT, else ./out\n"
             "CSV schema: " + std::string(dlora::kResultHeader) + " (one row per episode)\n");

  std::string config_path, out_dir, policy, agents_path;
  std::optional<std::uint64_t> seed;
  bool trace = false;
  unsigned jobs = 0;
  bool print_defaults = false;

  CLI::App* run = app.add_subcommand("run", "run one experiment (train + test) from a config");
  run->add_option("--config", config_path, "config file (JSON); omit for all defaults");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override the root seed");
  run->add_option("--policy", policy, "override the policy name");
  run->add_flag("--trace", trace, "also write per-packet trace.csv");
  run->add_option("--save-agents", agents_path, "write the trained agent q-tables as JSON");

  CLI::App* sweep = app.add_subcommand("sweep", "run the policies x radii x seeds grid");
  sweep->add_option("--config", config_path, "config file (JSON); omit for all defaults");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--jobs", jobs, "worker pool size (default: hardware concurrency)");

  CLI::App* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", config_path, "config file (JSON)");
  validate->add_flag("--print-defaults", print_defaults, "print the default config as JSON");

  CLI::App* toa = app.add_subcommand("toa", "airtime calculator");
  int payload = 20, sf = 7, tp = 14, preamble = 8, crc = 1, header = 0, de = 0, cr = 1;
  double bw = 125e3;
  toa->add_option("--payload", payload, "payload bytes [default 20]");
  toa->add_option("--sf", sf, "spreading factor 7..12 [default 7]");
  toa->add_option("--bw", bw, "bandwidth in Hz [default 125000]");
  toa->add_option("--tp", tp, "transmit power in dBm, for the energy line [default 14]");
  toa->add_option("--preamble", preamble, "preamble symbols [default 8]");
  toa->add_option("--crc", crc, "CRC flag 0/1 [default 1]");
  toa->add_option("--header", header, "H flag 0/1 [default 0]");
  toa->add_option("--de", de, "low data rate optimization flag 0/1 [default 0]");
  toa->add_option("--cr", cr, "coding rate 1..4 [default 1]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seed, policy, trace, agents_path);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir, jobs);
    if (validate->parsed()) return cmd_validate(config_path, print_defaults);
    if (toa->parsed()) return cmd_toa(payload, sf, bw, tp, preamble, crc, header, de, cr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
