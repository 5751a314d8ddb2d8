#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetnids/data/table.hpp"
#include "hetnids/eval/experiment.hpp"

namespace hetnids {

inline constexpr const char* kPreparedFormat = "hetnids-prepared";
inline constexpr int kPreparedVersion = 1;

namespace detail {

inline void write_split_csv(const std::filesystem::path& path, const DomainDataset& ds,
                            const std::vector<std::string>& column_names) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const std::string& name : column_names) out << name << ',';
  out << kDefaultLabelColumn << "\n";
  char buf[40];
  for (int i = 0; i < ds.size(); ++i) {
    const double* row = ds.features.row(i);
    for (int c = 0; c < ds.dim(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
      out << buf << ',';
    }
    out << ds.labels[static_cast<std::size_t>(i)] << "\n";
  }
}

}  // namespace detail

// Persists prepared domains as one CSV per split plus a manifest holding
// feature ids, scaler parameters, seeds and row counts -- everything
// needed to re-run or audit the preparation.
inline void save_prepared(const std::string& dir, const std::vector<PreparedDomain>& domains,
                          std::uint64_t run_seed, const std::string& config_echo = "",
                          bool synthetic_columns = false,
                          const std::map<std::string, std::string>& input_hashes = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir);

  nlohmann::json manifest;
  manifest["format"] = kPreparedFormat;
  manifest["version"] = kPreparedVersion;
  manifest["run_seed"] = run_seed;
  if (!config_echo.empty()) manifest["config_echo"] = nlohmann::json::parse(config_echo);
  if (!input_hashes.empty()) {
    nlohmann::json hashes = nlohmann::json::object();
    for (const auto& [name, hash] : input_hashes) hashes[name] = hash;
    manifest["input_hashes"] = std::move(hashes);
  }
  nlohmann::json domains_json = nlohmann::json::array();

  for (const PreparedDomain& d : domains) {
    std::vector<std::string> columns;
    for (int id : d.feature_ids) {
      columns.push_back(synthetic_columns ? "f" + std::to_string(id) : flow_feature_name(id));
    }
    std::string stem = d.name;
    for (char& c : stem) {
      if (c == '/' || c == ':' || c == ' ') c = '_';
    }
    detail::write_split_csv(fs::path(dir) / (stem + "_train.csv"), d.train, columns);
    detail::write_split_csv(fs::path(dir) / (stem + "_val.csv"), d.val, columns);
    detail::write_split_csv(fs::path(dir) / (stem + "_test.csv"), d.test, columns);

    nlohmann::json dj;
    dj["name"] = d.name;
    dj["files"] = {stem + "_train.csv", stem + "_val.csv", stem + "_test.csv"};
    dj["feature_ids"] = d.feature_ids;
    dj["scaler"] = {{"means", d.scaler.means}, {"stds", d.scaler.stds}};
    dj["counts"] = {{"train", d.train.size()}, {"val", d.val.size()}, {"test", d.test.size()}};
    long long train_attacks = 0;
    for (int label : d.train.labels) train_attacks += label;
    dj["train_attack_count"] = train_attacks;
    char hash_buf[17];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(d.content_hash));
    dj["content_hash"] = hash_buf;
    domains_json.push_back(std::move(dj));
  }
  manifest["domains"] = std::move(domains_json);
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest under " + dir);
  out << manifest.dump(1) << "\n";
}

}  // namespace hetnids
