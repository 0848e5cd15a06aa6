#include "pmn/dan_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pmn {
namespace {

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

nlohmann::json params_to_json(const DanParams& p, const ParamsProvenance& prov) {
  nlohmann::json j;
  j["version"] = kDanParamsVersion;
  j["layers"] = p.layers();
  j["alpha_bar"] = p.alpha_bar;
  j["beta1"] = p.beta1;
  j["fixed"] = {{"beta2", p.beta2}, {"eta1", p.eta1},         {"eta_a", p.eta_a},       {"rho_a", p.rho_a},
                {"rho", p.rho},     {"gamma", p.gamma},       {"alpha_lo", p.alpha_lo}, {"alpha_hi", p.alpha_hi},
                {"admm_iters", p.admm_iters}, {"tol", p.tol}};
  j["provenance"] = {{"seed", prov.seed},
                     {"scenario_fingerprint", prov.scenario_fingerprint},
                     {"dataset_fingerprint", prov.dataset_fingerprint},
                     {"n_train", prov.n_train},
                     {"epochs", prov.epochs},
                     {"lr", prov.lr},
                     {"initial_loss", prov.initial_loss},
                     {"final_loss", prov.final_loss}};
  return j;
}

DanParams params_from_json(const nlohmann::json& j, ParamsProvenance* prov) {
  try {
    if (j.at("version").get<int>() != kDanParamsVersion) {
      throw std::invalid_argument("unsupported DAN parameter file version");
    }
    DanParams p;
    p.alpha_bar = j.at("alpha_bar").get<std::vector<double>>();
    p.beta1 = j.at("beta1").get<double>();
    const auto& f = j.at("fixed");
    p.beta2 = f.at("beta2").get<double>();
    p.eta1 = f.at("eta1").get<double>();
    p.eta_a = f.at("eta_a").get<double>();
    p.rho_a = f.at("rho_a").get<double>();
    p.rho = f.at("rho").get<double>();
    p.gamma = f.at("gamma").get<double>();
    p.alpha_lo = f.at("alpha_lo").get<double>();
    p.alpha_hi = f.at("alpha_hi").get<double>();
    p.admm_iters = f.at("admm_iters").get<int>();
    p.tol = f.at("tol").get<double>();
    p.validate();
    if (prov != nullptr && j.contains("provenance")) {
      const auto& v = j.at("provenance");
      prov->seed = v.at("seed").get<std::uint64_t>();
      prov->scenario_fingerprint = v.at("scenario_fingerprint").get<std::string>();
      prov->dataset_fingerprint = v.at("dataset_fingerprint").get<std::string>();
      prov->n_train = v.at("n_train").get<int>();
      prov->epochs = v.at("epochs").get<int>();
      prov->lr = v.at("lr").get<double>();
      prov->initial_loss = v.at("initial_loss").get<double>();
      prov->final_loss = v.at("final_loss").get<double>();
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed DAN parameter file: ") + e.what());
  }
}

void save_params(const std::filesystem::path& path, const DanParams& params, const ParamsProvenance& prov) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << params_to_json(params, prov).dump(2) << '\n';
}

DanParams load_params(const std::filesystem::path& path, ParamsProvenance* prov) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read DAN parameters from " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed DAN parameter file " + path.string() + ": " + e.what());
  }
  return params_from_json(j, prov);
}

std::string write_dataset(std::ostream& os, const std::vector<TrainingSample>& data,
                          const std::vector<TargetState>& states, const std::string& scenario_hash) {
  if (states.size() != data.size()) throw std::invalid_argument("one predicted state per sample is required");
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Mat4& Jp = data[i].ctx.Jp;
    nlohmann::json line = {
        {"scenario", scenario_hash},
        {"index", i},
        {"state", to_std(states[i].x)},
        {"Jp", std::vector<double>(Jp.data(), Jp.data() + 16)},
        {"power", data[i].ctx.power},
        {"nmax", data[i].ctx.nmax},
        {"u0", to_std(data[i].u0)},
        {"label", to_std(data[i].label)},
    };
    const std::string text = line.dump();
    for (unsigned char ch : text) {
      h ^= ch;
      h *= 0x100000001B3ULL;
    }
    os << text << '\n';
  }
  return hex64(h);
}

}  // namespace pmn
