#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmn/dan.hpp"

namespace pmn {

inline constexpr int kDanParamsVersion = 1;

/// Where a parameter file came from.
struct ParamsProvenance {
  std::uint64_t seed = 0;
  std::string scenario_fingerprint;
  std::string dataset_fingerprint;
  int n_train = 0;
  int epochs = 0;
  double lr = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

nlohmann::json params_to_json(const DanParams& params, const ParamsProvenance& prov);

/// Throws std::invalid_argument on a wrong version or invalid values.
DanParams params_from_json(const nlohmann::json& j, ParamsProvenance* prov = nullptr);

void save_params(const std::filesystem::path& path, const DanParams& params, const ParamsProvenance& prov);
DanParams load_params(const std::filesystem::path& path, ParamsProvenance* prov = nullptr);

/// One JSON line per training sample: scenario hash, prior information,
/// power, start point and label. Returns the dataset fingerprint.
std::string write_dataset(std::ostream& os, const std::vector<TrainingSample>& data,
                          const std::vector<TargetState>& states, const std::string& scenario_hash);

}  // namespace pmn
