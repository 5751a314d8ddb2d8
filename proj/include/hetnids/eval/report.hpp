#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hetnids/eval/experiment.hpp"

namespace hetnids {

inline constexpr const char* kReportFormat = "hetnids-report";
inline constexpr int kReportVersion = 1;

namespace detail {

inline nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"tn", m.tn},
          {"fn", m.fn},
          {"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"precision_defined", m.precision_defined},
          {"recall_defined", m.recall_defined},
          {"f1_defined", m.f1_defined}};
}

inline Metrics metrics_from_json(const nlohmann::json& j) {
  Metrics m;
  m.tp = j.at("tp").get<long long>();
  m.fp = j.at("fp").get<long long>();
  m.tn = j.at("tn").get<long long>();
  m.fn = j.at("fn").get<long long>();
  m.accuracy = j.at("accuracy").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.precision_defined = j.at("precision_defined").get<bool>();
  m.recall_defined = j.at("recall_defined").get<bool>();
  m.f1_defined = j.at("f1_defined").get<bool>();
  return m;
}

inline std::string fraction_label(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", fraction);
  return buf;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Writes report.csv (flat aggregates for plotting), report.full (the
// machine-readable record: config echo, seeds, hashes, raw runs and
// aggregates) and one alignment-trace CSV per run under traces/.
inline void export_report(const AggregateReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create report directory " + dir);

  {
    std::ofstream csv(fs::path(dir) / "report.csv");
    if (!csv) throw std::runtime_error("cannot write report.csv under " + dir);
    csv << "experiment,model,domain,fraction,metric,mean,std,status\n";
    for (const AggregateCell& cell : report.cells) {
      const struct {
        const char* name;
        const MetricStats* stats;
      } rows[] = {{"accuracy", &cell.accuracy},
                  {"precision", &cell.precision},
                  {"recall", &cell.recall},
                  {"f1", &cell.f1}};
      for (const auto& row : rows) {
        csv << report.experiment << ',' << cell.model << ',' << cell.domain << ','
            << detail::fraction_label(cell.fraction) << ',' << row.name << ',';
        if (cell.run_count > 0) {
          csv << detail::format_double(row.stats->mean) << ','
              << detail::format_double(row.stats->stddev);
        } else {
          csv << ',';
        }
        csv << ',' << cell.status << "\n";
      }
    }
  }

  {
    nlohmann::json j;
    j["format"] = kReportFormat;
    j["version"] = kReportVersion;
    j["experiment"] = report.experiment;
    j["base_seed"] = report.base_seed;
    j["runs"] = report.runs;
    j["fractions"] = report.fractions;
    j["domains"] = report.domains;
    nlohmann::json hashes = nlohmann::json::object();
    for (const auto& [name, hash] : report.input_hashes) hashes[name] = hash;
    j["input_hashes"] = std::move(hashes);
    if (!report.config_echo.empty()) j["config_echo"] = nlohmann::json::parse(report.config_echo);
    nlohmann::json raw = nlohmann::json::array();
    for (const RunRecord& r : report.raw) {
      raw.push_back({{"fraction", r.fraction},
                     {"run", r.run},
                     {"seed", r.seed},
                     {"model", r.model},
                     {"domain", r.domain},
                     {"metrics", detail::metrics_to_json(r.metrics)},
                     {"data_hash", r.data_hash},
                     {"status", r.status}});
    }
    j["raw_runs"] = std::move(raw);
    nlohmann::json cells = nlohmann::json::array();
    for (const AggregateCell& c : report.cells) {
      cells.push_back({{"model", c.model},
                       {"domain", c.domain},
                       {"fraction", c.fraction},
                       {"run_count", c.run_count},
                       {"status", c.status},
                       {"accuracy", {{"mean", c.accuracy.mean}, {"std", c.accuracy.stddev}}},
                       {"precision", {{"mean", c.precision.mean}, {"std", c.precision.stddev}}},
                       {"recall", {{"mean", c.recall.mean}, {"std", c.recall.stddev}}},
                       {"f1", {{"mean", c.f1.mean}, {"std", c.f1.stddev}}}});
    }
    j["aggregates"] = std::move(cells);
    std::ofstream full(fs::path(dir) / "report.full");
    if (!full) throw std::runtime_error("cannot write report.full under " + dir);
    full << j.dump(1) << "\n";
  }

  for (const MmdTrace& trace : report.traces) {
    const fs::path tdir =
        fs::path(dir) / "traces" / ("fraction_" + detail::fraction_label(trace.fraction));
    fs::create_directories(tdir, ec);
    if (ec) throw std::runtime_error("cannot create " + tdir.string());
    std::ofstream out(tdir / ("mmd_trace_run" + std::to_string(trace.run) + ".csv"));
    out << "cycle,mean_mmd\n";
    for (const auto& [cycle, mmd] : trace.trace) {
      out << cycle << ',' << detail::format_double(mmd) << "\n";
    }
  }
}

// Reads report.full back; aggregates come back bit-exact thanks to
// shortest-round-trip JSON doubles.
inline AggregateReport import_report(const std::string& dir) {
  std::ifstream in(std::filesystem::path(dir) / "report.full");
  if (!in) throw std::runtime_error("cannot read report.full under " + dir);
  nlohmann::json j;
  in >> j;
  if (j.at("format").get<std::string>() != kReportFormat)
    throw std::runtime_error("report.full: unrecognized format");
  if (j.at("version").get<int>() != kReportVersion)
    throw std::runtime_error("report.full: unsupported version");
  AggregateReport report;
  report.experiment = j.at("experiment").get<std::string>();
  report.base_seed = j.at("base_seed").get<std::uint64_t>();
  report.runs = j.at("runs").get<int>();
  report.fractions = j.at("fractions").get<std::vector<double>>();
  report.domains = j.at("domains").get<std::vector<std::string>>();
  if (j.contains("input_hashes")) {
    for (const auto& [name, hash] : j.at("input_hashes").items())
      report.input_hashes.emplace_back(name, hash.get<std::string>());
  }
  if (j.contains("config_echo")) report.config_echo = j.at("config_echo").dump();
  for (const auto& rj : j.at("raw_runs")) {
    RunRecord r;
    r.fraction = rj.at("fraction").get<double>();
    r.run = rj.at("run").get<int>();
    r.seed = rj.at("seed").get<std::uint64_t>();
    r.model = rj.at("model").get<std::string>();
    r.domain = rj.at("domain").get<std::string>();
    r.metrics = detail::metrics_from_json(rj.at("metrics"));
    r.data_hash = rj.at("data_hash").get<std::string>();
    r.status = rj.at("status").get<std::string>();
    report.raw.push_back(std::move(r));
  }
  for (const auto& cj : j.at("aggregates")) {
    AggregateCell c;
    c.model = cj.at("model").get<std::string>();
    c.domain = cj.at("domain").get<std::string>();
    c.fraction = cj.at("fraction").get<double>();
    c.run_count = cj.at("run_count").get<int>();
    c.status = cj.at("status").get<std::string>();
    c.accuracy = {cj.at("accuracy").at("mean").get<double>(), cj.at("accuracy").at("std").get<double>()};
    c.precision = {cj.at("precision").at("mean").get<double>(), cj.at("precision").at("std").get<double>()};
    c.recall = {cj.at("recall").at("mean").get<double>(), cj.at("recall").at("std").get<double>()};
    c.f1 = {cj.at("f1").at("mean").get<double>(), cj.at("f1").at("std").get<double>()};
    report.cells.push_back(std::move(c));
  }
  return report;
}

}  // namespace hetnids
