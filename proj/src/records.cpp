#include "scramble/records.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>
#include <system_error>

namespace scramble {

json to_json(const ModelParams& params) {
  json j{{"n", params.n},
         {"alpha", params.alpha},
         {"w", params.w},
         {"j", params.j}};
  if (params.alpha_tilde) j["alpha_tilde"] = *params.alpha_tilde;
  return j;
}

ModelParams params_from_json(const json& j) {
  ModelParams params;
  params.n = j.at("n").get<int>();
  params.alpha = j.at("alpha").get<double>();
  params.w = j.at("w").get<double>();
  params.j = j.value("j", 1.0);
  if (j.contains("alpha_tilde") && !j.at("alpha_tilde").is_null())
    params.alpha_tilde = j.at("alpha_tilde").get<double>();
  params.validate();
  return params;
}

json to_json(const EdRecord& rec) {
  json j = to_json(rec.params);
  j["engine"] = "ed";
  j["seed"] = rec.seed;
  j["index"] = rec.index;
  j["mean_r"] = rec.obs.mean_r;
  if (rec.obs.entropy_states > 0) j["s_mid"] = rec.obs.s_mid;
  j["levels"] = rec.obs.levels;
  j["entropy_states"] = rec.obs.entropy_states;
  j["window"] = rec.window;
  return j;
}

EdRecord ed_record_from_json(const json& j) {
  if (j.at("engine").get<std::string>() != "ed")
    throw std::invalid_argument("ed_record_from_json: wrong engine tag");
  EdRecord rec;
  rec.params = params_from_json(j);
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.index = j.at("index").get<int>();
  rec.obs.mean_r = j.at("mean_r").get<double>();
  rec.obs.s_mid = j.value("s_mid", 0.0);
  rec.obs.levels = j.value("levels", 0);
  rec.obs.entropy_states = j.value("entropy_states", 0);
  rec.window = j.value("window", kSpectrumWindow);
  return rec;
}

json to_json(const OtocCurve& curve) {
  curve.check();
  json j = to_json(curve.params);
  j["engine"] = curve.engine;
  j["seed"] = curve.seed;
  j["index"] = curve.index;
  if (curve.chi > 0) j["chi"] = curve.chi;
  if (curve.ensemble > 0) j["ensemble"] = curve.ensemble;
  j["converged"] = curve.converged;
  j["times"] = curve.times;
  std::vector<double> mean(curve.c_mean.data(),
                           curve.c_mean.data() + curve.c_mean.size());
  j["c_mean"] = mean;
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(curve.c_r.rows()));
  for (Eigen::Index r = 0; r < curve.c_r.rows(); ++r) {
    rows.emplace_back(curve.c_r.row(r).begin(), curve.c_r.row(r).end());
  }
  j["c_r"] = rows;
  return j;
}

OtocCurve curve_from_json(const json& j) {
  OtocCurve curve;
  curve.engine = j.at("engine").get<std::string>();
  curve.params = params_from_json(j);
  curve.seed = j.at("seed").get<std::uint64_t>();
  curve.index = j.at("index").get<int>();
  curve.chi = j.value("chi", 0);
  curve.ensemble = j.value("ensemble", 0);
  curve.converged = j.value("converged", true);
  curve.times = j.at("times").get<std::vector<double>>();
  const auto mean = j.at("c_mean").get<std::vector<double>>();
  curve.c_mean = Eigen::Map<const Eigen::VectorXd>(
      mean.data(), static_cast<Eigen::Index>(mean.size()));
  const auto rows = j.at("c_r").get<std::vector<std::vector<double>>>();
  curve.c_r.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(curve.times.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != curve.times.size())
      throw std::invalid_argument("curve_from_json: ragged c_r");
    curve.c_r.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Eigen::VectorXd>(
        rows[r].data(), static_cast<Eigen::Index>(rows[r].size()));
  }
  curve.check();
  return curve;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, bool append)
    : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  int flags = O_WRONLY | O_CREAT | (append ? O_APPEND : O_TRUNC);
  fd_ = ::open(path.c_str(), flags, 0644);
  if (fd_ < 0)
    throw std::system_error(errno, std::generic_category(),
                            "JsonlWriter: open " + path.string());
}

JsonlWriter::~JsonlWriter() {
  if (fd_ >= 0) ::close(fd_);
}

void JsonlWriter::write_line(const json& j) {
  std::string line = j.dump();
  line.push_back('\n');
  const char* p = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    const ssize_t wrote = ::write(fd_, p, left);
    if (wrote < 0) {
      if (errno == EINTR) continue;
      throw std::system_error(errno, std::generic_category(),
                              "JsonlWriter: write " + path_.string());
    }
    p += wrote;
    left -= static_cast<std::size_t>(wrote);
  }
  if (::fsync(fd_) != 0)
    throw std::system_error(errno, std::generic_category(),
                            "JsonlWriter: fsync " + path_.string());
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::vector<json> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      // A torn final line is the expected residue of a killed run.
      std::string rest;
      if (std::getline(in, rest))
        throw std::runtime_error("read_jsonl: malformed interior line in " +
                                 path.string());
      break;
    }
    rows.push_back(std::move(j));
  }
  return rows;
}

std::uint64_t json_content_hash(const json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace scramble
