#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fairgi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct Command {
  std::string verb;  // train, audit, ablate, synth
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> data;
  bool synthetic = false;
  std::optional<std::filesystem::path> out;
  std::vector<std::uint64_t> seeds;

  // audit inputs
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> predictions;
  std::optional<std::filesystem::path> similarity;
  std::optional<std::filesystem::path> nodes;
  std::optional<double> epsilon;

  std::optional<int> epochs;  // overrides the config file
  int jobs = 1;               // ablate: seeds run in this many worker processes
  bool serial = false;        // single-threaded kernels
  bool verbose = false;
};

// Executes one command. Errors are reported as a single JSON line on `err`.
int run(const Command& command, std::ostream& err);

// Parses argv into a Command and runs it.
int cli_main(int argc, char** argv);

}  // namespace fairgi
