#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "tactile/calibrate.hpp"
#include "tactile/dataset.hpp"
#include "tactile/errors.hpp"
#include "tactile/scenario.hpp"
#include "tactile/stream.hpp"

using namespace tactile;
using nlohmann::json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCalibration = 3;

PipelineConfig pipeline_from(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_scenario_config(path).pipeline;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

void print_metrics(const char* name, const ClassMetrics& m) {
  std::cout << name << ": accuracy " << std::fixed << std::setprecision(4) << m.accuracy
            << ", macro recall " << m.macro_recall << '\n';
  std::cout << "  confusion (rows true, columns predicted; plus minus times divide)\n";
  for (const auto& row : m.confusion) {
    std::cout << "  ";
    for (auto v : row) std::cout << std::setw(5) << v;
    std::cout << '\n';
  }
}

CalibrationRanges ranges_from_json(const json& j) {
  CalibrationRanges r;
  auto read = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  try {
    for (const auto& [key, _] : j.items()) {
      static const std::set<std::string> known{"eta",      "tau_ms",   "theta1",  "theta2",
                                               "theta3",   "freqs_hz", "hold_ms", "tolerance"};
      if (!known.count(key)) throw ConfigError("[config:calibrate] unknown key '" + key + "'");
    }
    read("eta", r.eta);
    read("tau_ms", r.tau_ms);
    read("theta1", r.theta1);
    read("theta2", r.theta2);
    read("theta3", r.theta3);
    read("freqs_hz", r.freqs_hz);
    read("hold_ms", r.hold_ms);
    read("tolerance", r.tolerance);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("[config:calibrate] ") + e.what());
  }
  return r;
}

void write_calibration_table(std::ostream& out, const std::vector<CalibrationRow>& rows) {
  out << "rank,pass,margin,eta,tau_ms,theta1,theta2,theta3";
  if (!rows.empty()) {
    for (const auto& p : rows.front().probes) out << ",count_" << p.freq_hz << "hz";
  }
  out << '\n' << std::setprecision(6);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << i + 1 << ',' << (r.pass ? 1 : 0) << ',' << r.margin << ',' << r.eta << ',' << r.tau_ms << ','
        << r.theta[0] << ',' << r.theta[1] << ',' << r.theta[2];
    for (const auto& p : r.probes) out << ',' << p.count;
    out << '\n';
  }
}

StreamServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuromorphic tactile pipeline simulator"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config, sim_out;
  bool sim_traces = false;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario config end to end");
  simulate->add_option("--config", sim_config, "Scenario JSON")->required();
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_flag("--traces", sim_traces, "Also write per-stage traces");

  // morse
  std::string morse_script, morse_config, morse_out;
  auto* morse = app.add_subcommand("morse", "Tap a scripted Morse message and decode it");
  morse->add_option("--script", morse_script, "Morse script JSON")->required();
  morse->add_option("--config", morse_config, "Scenario JSON supplying the pipeline section");
  morse->add_option("--out", morse_out, "Output directory for run files");

  // symbols
  auto* symbols = app.add_subcommand("symbols", "Operator-symbol dataset and classifier");
  symbols->require_subcommand(1);
  SymbolGenConfig gen;
  std::string gen_out, gen_config;
  auto* sym_gen = symbols->add_subcommand("gen", "Generate a dataset through the full pipeline");
  sym_gen->add_option("--out", gen_out, "Dataset CSV")->required();
  sym_gen->add_option("--n", gen.n_per_class, "Samples per class");
  sym_gen->add_option("--noise", gen.noise, "Noise scale");
  sym_gen->add_option("--seed", gen.seed, "Seed");
  sym_gen->add_option("--config", gen_config, "Scenario JSON supplying the pipeline section");

  TrainConfig train_cfg;
  std::string train_data, train_model;
  double train_split = 0.8;
  std::uint64_t split_seed = 7;
  auto* sym_train = symbols->add_subcommand("train", "Train the classifier on an 80/20 split");
  sym_train->add_option("--data", train_data, "Dataset CSV")->required();
  sym_train->add_option("--model", train_model, "Model output path")->required();
  sym_train->add_option("--epochs", train_cfg.epochs, "Epochs");
  sym_train->add_option("--lr", train_cfg.learning_rate, "Learning rate");
  sym_train->add_option("--batch", train_cfg.batch, "Batch size");
  sym_train->add_option("--seed", train_cfg.seed, "Initialization and shuffling seed");
  sym_train->add_option("--split", train_split, "Training fraction");
  sym_train->add_option("--split-seed", split_seed, "Split seed");

  std::string eval_data, eval_model;
  auto* sym_eval = symbols->add_subcommand("eval", "Evaluate a model on a dataset");
  sym_eval->add_option("--data", eval_data, "Dataset CSV")->required();
  sym_eval->add_option("--model", eval_model, "Model file")->required();

  // codec
  auto* codec = app.add_subcommand("codec", "Convert between code frames and wire units");
  codec->require_subcommand(1);
  std::string enc_in, enc_out;
  auto* encode = codec->add_subcommand("encode", "codes CSV to one hex wire unit per line");
  encode->add_option("--in", enc_in, "codes CSV (t_ms,c0..c8)")->required();
  encode->add_option("--out", enc_out, "Output file (default stdout)");
  std::string dec_in, dec_out;
  auto* decode = codec->add_subcommand("decode", "hex wire units to codes CSV");
  decode->add_option("--in", dec_in, "One 8-digit hex unit per line")->required();
  decode->add_option("--out", dec_out, "Output file (default stdout)");

  // calibrate
  std::string cal_config, cal_ranges, cal_table, cal_out;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Sweep synapse and threshold parameters");
  calibrate_cmd->add_option("--config", cal_config, "Scenario JSON supplying the base pipeline");
  calibrate_cmd->add_option("--ranges", cal_ranges, "Sweep ranges JSON");
  calibrate_cmd->add_option("--table", cal_table, "Write the ranked sweep table CSV here");
  calibrate_cmd->add_option("--out", cal_out, "Write the best pipeline JSON here (default stdout)");

  // serve
  std::uint16_t serve_port = 8765;
  std::string serve_host = "127.0.0.1", serve_config, serve_model;
  bool serve_accel = false;
  auto* serve = app.add_subcommand("serve", "Live NDJSON / WebSocket session endpoint");
  serve->add_option("--port", serve_port, "TCP port");
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--config", serve_config, "Scenario JSON supplying the pipeline section");
  serve->add_option("--model", serve_model, "Symbol classifier model");
  serve->add_flag("--accelerated", serve_accel, "Take simulated time from message timestamps");

  // report
  std::string report_run;
  auto* report = app.add_subcommand("report", "Print a run summary");
  report->add_option("--run", report_run, "Directory written by simulate or morse")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) {
      ScenarioConfig sc = load_scenario_config(sim_config);
      sc.record_traces = sc.record_traces || sim_traces;
      const RunReport run = run_scenario(sc);
      write_run_outputs(run, sim_out);
      std::cout << "windows " << run.windows.size() << ", segments " << run.segments.size() << ", text \""
                << run.decoded_text() << "\", data reduction " << run.efficiency.reduction_ratio << '\n';
    } else if (*morse) {
      const MorseScript script = morse_script_from_json(read_json_file(morse_script));
      ScenarioConfig sc;
      if (!morse_config.empty()) sc = load_scenario_config(morse_config);
      sc.stimulus = morse_stimulus(script);
      sc.seed = script.seed;
      const RunReport run = run_scenario(sc);
      if (!morse_out.empty()) write_run_outputs(run, morse_out);
      std::cout << run.decoded_text() << '\n';
    } else if (*sym_gen) {
      const SymbolDataset ds = gen_symbol_dataset(pipeline_from(gen_config), gen);
      auto out = open_out(gen_out);
      write_dataset_csv(out, ds.samples);
      std::cout << ds.samples.size() << " samples written to " << gen_out << '\n';
    } else if (*sym_train) {
      auto in = open_in(train_data);
      const auto samples = read_dataset_csv(in);
      std::vector<SymbolSample> train, test;
      split_dataset(samples, train_split, split_seed, train, test);
      const auto train_set = to_labeled(train);
      const TrainResult result = mlp_train(train_set, train_cfg);
      auto out = open_out(train_model);
      result.model.save(out);
      print_metrics("train", evaluate(result.model, train_set));
      if (!test.empty()) print_metrics("held-out", evaluate(result.model, to_labeled(test)));
    } else if (*sym_eval) {
      auto in = open_in(eval_data);
      const auto samples = read_dataset_csv(in);
      auto min = open_in(eval_model);
      const Mlp model = Mlp::load(min);
      print_metrics("eval", evaluate(model, to_labeled(samples)));
    } else if (*encode) {
      auto in = open_in(enc_in);
      std::ofstream file;
      if (!enc_out.empty()) file = open_out(enc_out);
      std::ostream& out = enc_out.empty() ? std::cout : file;
      for (const auto& f : read_codes_csv(in)) out << to_wire(pack(f.codes)).hex() << '\n';
    } else if (*decode) {
      auto in = open_in(dec_in);
      const PipelineConfig cfg;
      std::vector<CodeFrame> frames;
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
          const WireUnit unit = WireUnit::from_hex(line);
          frames.push_back({static_cast<double>(cfg.sample_tick(frames.size())) * cfg.tick_ms,
                            unpack(from_wire(unit))});
        } catch (const Error& e) {
          throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
      }
      std::ofstream file;
      if (!dec_out.empty()) file = open_out(dec_out);
      write_codes_csv(dec_out.empty() ? std::cout : file, frames);
    } else if (*calibrate_cmd) {
      const CalibrationRanges ranges = cal_ranges.empty() ? CalibrationRanges{} : ranges_from_json(read_json_file(cal_ranges));
      const PipelineConfig base = pipeline_from(cal_config);
      CalibrationResult result;
      try {
        result = calibrate(base, ranges);
      } catch (const CalibrationError& e) {
        std::cerr << "calibration failed: " << e.what() << '\n';
        return kExitCalibration;
      }
      if (!cal_table.empty()) {
        auto out = open_out(cal_table);
        write_calibration_table(out, result.table);
      }
      const json best = json{{"pipeline", to_json(result.best)}};
      if (cal_out.empty()) {
        std::cout << best.dump(2) << '\n';
      } else {
        auto out = open_out(cal_out);
        out << best.dump(2) << '\n';
      }
      const auto& top = result.table.front();
      std::cerr << "best margin " << top.margin << " (eta " << top.eta << ", tau_ms " << top.tau_ms << ")\n";
    } else if (*serve) {
      std::optional<Mlp> model;
      if (!serve_model.empty()) {
        auto in = open_in(serve_model);
        model = Mlp::load(in);
      }
      StreamServer server(pipeline_from(serve_config),
                          {serve_host, serve_port, serve_accel ? TimeMode::Accelerated : TimeMode::RealTime},
                          model ? &*model : nullptr);
      const auto port = server.listen();
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << serve_host << ':' << port << '\n';
      server.run();
      g_server = nullptr;
    } else if (*report) {
      const json s = read_json_file((std::filesystem::path(report_run) / "summary.json").string());
      const auto& e = s.at("efficiency");
      std::cout << "duration        " << s.at("duration_ms").get<double>() / 1000.0 << " s\n"
                << "pulses          " << s.at("pulses") << '\n'
                << "windows         " << s.at("windows") << " (" << s.at("active_windows") << " active)\n"
                << "segments        " << s.at("segments").size() << '\n'
                << "decoded text    " << s.at("text").get<std::string>() << '\n'
                << "symbols         " << s.at("symbols").size() << '\n'
                << "wire bits       " << e.at("wire_bits") << " of " << std::llround(e.at("baseline_bits").get<double>())
                << " baseline\n"
                << "data reduction  " << e.at("reduction_ratio")
                << " (transmitted-data proxy, not electrical power)\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CalibrationError& e) {
    std::cerr << "calibration failed: " << e.what() << '\n';
    return kExitCalibration;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
