#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace pmn {

/// Hex SHA-1 of "blob <size>\0<content>", the object id git assigns to a
/// file with that content.
std::string git_blob_hash(const std::string& content);

/// Records one CLI invocation and writes run_manifest.json exactly once,
/// either through finish() or, failing that, from the destructor.
class RunManifest {
 public:
  RunManifest(std::string command, std::filesystem::path out_dir);
  RunManifest(const RunManifest&) = delete;
  RunManifest& operator=(const RunManifest&) = delete;
  ~RunManifest();

  void set_config(const std::filesystem::path& path);
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void set_arguments(std::vector<std::string> args) { args_ = std::move(args); }
  /// Adds a named input whose content contributes to the combined hash.
  void add_input(const std::string& name, const std::string& content);
  void add_output(const std::filesystem::path& path) { outputs_.push_back(path.filename().string()); }
  void note(const std::string& key, nlohmann::json value) { notes_[key] = std::move(value); }

  std::string input_hash() const;
  void finish(int exit_code);

 private:
  std::string command_;
  std::filesystem::path out_dir_;
  std::filesystem::path config_;
  std::uint64_t seed_ = 0;
  std::vector<std::string> args_;
  std::vector<std::pair<std::string, std::string>> inputs_;  // name, blob hash
  std::vector<std::string> outputs_;
  nlohmann::json notes_ = nlohmann::json::object();
  std::string started_;
  bool written_ = false;
};

}  // namespace pmn
