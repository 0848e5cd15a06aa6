#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pmn {

struct CliOptions {
  std::filesystem::path config;  // empty: built-in defaults
  std::filesystem::path out = "results";
  std::filesystem::path params;  // empty: <out>/dan_params.json
  std::uint64_t seed = 1;
  std::vector<std::string> methods{"dan", "es", "nearest"};
  std::string power = "fpwf";
  int nmc = 100;
  std::optional<int> frames;
  std::optional<int> nmax;
  std::string pt_dbm;     // "v" or "start:step:stop"
  std::string noise_dbm;  // same syntax; sweeps the receiver noise instead
  int ao_rounds = 3;
  int n_train = 500;
  int epochs = 1;
  double lr = 5e-5;
  int batch = 1;
  int repeat = 1;
  std::vector<int> bench_nodes{16, 32, 64};
  int bench_targets = 6;
  bool traces = true;  // per-trial CSVs from track
  std::vector<std::string> argv;  // recorded in the manifest
};

int cmd_track(const CliOptions& opt);
int cmd_train(const CliOptions& opt);
int cmd_converge(const CliOptions& opt);
int cmd_bench(const CliOptions& opt);

/// Parses argv and dispatches to one of the commands above.
int run_cli(int argc, char** argv);

/// Expands "a:b:c" into a, a+b, ... up to c (inclusive, with tolerance) or a
/// single value. Throws std::invalid_argument on malformed input.
std::vector<double> parse_sweep(const std::string& text);

}  // namespace pmn
