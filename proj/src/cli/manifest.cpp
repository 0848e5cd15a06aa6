#include "pmn/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pmn {
namespace {

std::string sha1_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string git_blob_hash(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  return sha1_hex(blob);
}

RunManifest::RunManifest(std::string command, std::filesystem::path out_dir)
    : command_(std::move(command)), out_dir_(std::move(out_dir)), started_(utc_now()) {}

RunManifest::~RunManifest() {
  if (!written_) {
    try {
      finish(-1);
    } catch (...) {
    }
  }
}

void RunManifest::set_config(const std::filesystem::path& path) {
  config_ = path;
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  add_input("config", ss.str());
}

void RunManifest::add_input(const std::string& name, const std::string& content) {
  inputs_.emplace_back(name, git_blob_hash(content));
}

std::string RunManifest::input_hash() const {
  std::string listing = command_ + "\n";
  for (const auto& a : args_) listing += a + "\n";
  for (const auto& [name, hash] : inputs_) listing += name + " " + hash + "\n";
  return git_blob_hash(listing);
}

void RunManifest::finish(int exit_code) {
  if (written_) return;
  written_ = true;
  nlohmann::json j;
  j["command"] = command_;
  j["config"] = config_.string();
  j["seed"] = seed_;
  j["output_dir"] = out_dir_.string();
  j["arguments"] = args_;
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [name, hash] : inputs_) inputs[name] = hash;
  j["inputs"] = inputs;
  j["input_hash"] = input_hash();
  j["outputs"] = outputs_;
  j["notes"] = notes_;
  j["exit_code"] = exit_code;
  j["started_utc"] = started_;
  j["finished_utc"] = utc_now();
  std::error_code ec;
  std::filesystem::create_directories(out_dir_, ec);
  std::ofstream os(out_dir_ / "run_manifest.json", std::ios::binary);
  if (os) os << j.dump(2) << '\n';
}

}  // namespace pmn
