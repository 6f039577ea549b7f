// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// driveby: stratify a city, compute fleet coverage and colocations from
// GPS records, select vehicles, and evaluate selections on held-out data.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "driveby/driveby.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::int64_t> parse_id_list(const std::string& csv) {
  std::vector<std::int64_t> out;
  if (csv.empty()) return out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    out.push_back(std::stoll(item, &pos));
    if (pos != item.size()) throw std::runtime_error("bad integer list element: " + item);
  }
  return out;
}

void write_report(const ordered_json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << doc.dump(2) << '\n';
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return doc;
}

driveby::WeightMap load_weights_file(const std::string& path) {
  const json doc = load_json_file(path);
  driveby::WeightMap w(doc.value("default", 1.0));
  if (doc.contains("cells")) {
    for (const auto& entry : doc["cells"]) {
      if (!entry.is_array() || entry.size() != 3)
        throw std::runtime_error("weights file: cells entries must be [stratum, interval, weight]");
      w.set({entry[0].get<std::int64_t>(), entry[1].get<std::int64_t>()},
            entry[2].get<double>());
    }
  }
  return w;
}

driveby::ColocationProfile load_colocations_file(const std::string& path) {
  const json doc = load_json_file(path);
  driveby::ColocationProfile profile;
  if (doc.contains("ref"))
    for (const auto& [vehicle, count] : doc["ref"].items())
      profile.set_ref(std::stoll(vehicle), count.get<std::int64_t>());
  if (doc.contains("pairs"))
    for (const auto& entry : doc["pairs"]) {
      if (!entry.is_array() || entry.size() != 3)
        throw std::runtime_error("colocations file: pairs entries must be [a, b, count]");
      profile.set_pair(entry[0].get<std::int64_t>(), entry[1].get<std::int64_t>(),
                       entry[2].get<std::int64_t>());
    }
  return profile;
}

ordered_json colocations_to_json(const driveby::ColocationProfile& profile) {
  ordered_json doc;
  ordered_json ref = ordered_json::object();
  for (const auto& [vehicle, count] : profile.refs()) ref[std::to_string(vehicle)] = count;
  ordered_json pairs = ordered_json::array();
  for (const auto& [pair, count] : profile.pairs())
    pairs.push_back({pair.first, pair.second, count});
  doc["ref"] = std::move(ref);
  doc["pairs"] = std::move(pairs);
  return doc;
}

ordered_json selection_to_json(const driveby::SelectionResult& result) {
  ordered_json doc;
  doc["chosen"] = result.chosen;
  doc["marginal_gains"] = result.marginal_gains;
  doc["total_weighted_coverage"] = result.total_weighted_coverage;
  doc["feasible"] = result.feasible;
  doc["stop_reason"] = driveby::to_string(result.stop_reason);
  return doc;
}

// --- synth -----------------------------------------------------------------

struct SynthOpts {
  std::string spec_path;
  std::string out_path;
};

void run_synth(const SynthOpts& opts) {
  const json doc = load_json_file(opts.spec_path);
  driveby::FleetSpec spec;
  spec.fixed_route_count = doc.value("fixed_route_count", std::int64_t{0});
  spec.random_route_count = doc.value("random_route_count", std::int64_t{0});
  if (!doc.contains("extent") || !doc["extent"].is_array() || doc["extent"].size() != 4)
    throw std::runtime_error("fleet spec: extent must be [min_lon, min_lat, max_lon, max_lat]");
  spec.extent = driveby::BoundingBox(doc["extent"][0], doc["extent"][1], doc["extent"][2],
                                     doc["extent"][3]);
  spec.days = doc.value("days", std::int64_t{1});
  spec.sample_interval_s = doc.value("sample_interval_s", std::int64_t{60});
  spec.speed_mps = doc.value("speed_mps", 8.0);
  spec.seed = doc.value("seed", std::uint64_t{0});
  const auto fleet = driveby::gen_fleet(spec);
  driveby::write_records_file(fleet, opts.out_path);
  std::cout << "wrote " << fleet.size() << " records for "
            << (spec.fixed_route_count + spec.random_route_count) << " vehicles to "
            << opts.out_path << '\n';
}

// --- stratify ----------------------------------------------------------------

struct StratifyOpts {
  std::string source = "grid";
  double min_lon = 0.0, min_lat = 0.0, max_lon = 0.0, max_lat = 0.0;
  bool extent_set = false;
  double spatial_granularity_m = 100.0;
  std::string custom_path;
  std::string out_path;
};

void run_stratify(const StratifyOpts& opts) {
  driveby::Stratification strata = [&] {
    if (opts.source == "custom") {
      if (opts.custom_path.empty())
        throw CLI::ValidationError("--custom-strata is required with --strata-source custom");
      return driveby::load_strata_file(opts.custom_path);
    }
    if (!opts.extent_set)
      throw CLI::ValidationError(
          "grid mode needs --min-lon --min-lat --max-lon --max-lat");
    return driveby::make_grid(
        driveby::BoundingBox(opts.min_lon, opts.min_lat, opts.max_lon, opts.max_lat),
        opts.spatial_granularity_m);
  }();
  driveby::save_strata_file(strata, opts.out_path);
  std::cout << "wrote " << strata.size() << " strata to " << opts.out_path << '\n';
}

// --- coverage ----------------------------------------------------------------

struct CoverageOpts {
  std::string records_path;
  std::string strata_path;
  std::int64_t temporal_granularity_s = 7200;
  std::int64_t epoch = 0;
  int geohash_precision = 6;
  double spatial_radius_m = 50.0;
  std::int64_t temporal_radius_s = 300;
  std::string monitors_path;
  std::string colocations_out;
  std::string out_path;
};

void run_coverage(const CoverageOpts& opts) {
  const driveby::Stratification strata = driveby::load_strata_file(opts.strata_path);
  const driveby::RecordsLoadResult loaded = driveby::read_records_file(opts.records_path);
  driveby::StoreConfig cfg;
  cfg.temporal_granularity_s = opts.temporal_granularity_s;
  cfg.epoch = opts.epoch;
  cfg.index_geohash_precision = opts.geohash_precision;
  cfg.colocation_spatial_radius_m = opts.spatial_radius_m;
  cfg.colocation_temporal_radius_s = opts.temporal_radius_s;
  const driveby::MobilityStore store = driveby::ingest(loaded.records, strata, cfg);
  const driveby::CoverageMatrix matrix = driveby::build_coverage(store);

  ordered_json doc;
  doc["artifact_version"] = driveby::kVersion;
  ordered_json config;
  config["records"] = opts.records_path;
  config["strata"] = opts.strata_path;
  config["temporal_granularity_s"] = opts.temporal_granularity_s;
  config["epoch"] = opts.epoch;
  config["geohash_precision"] = opts.geohash_precision;
  config["spatial_radius_m"] = opts.spatial_radius_m;
  config["temporal_radius_s"] = opts.temporal_radius_s;
  config["monitors"] = opts.monitors_path;
  doc["config"] = std::move(config);
  doc["malformed_records"] = loaded.malformed;
  doc.update(driveby::coverage_to_json(matrix));
  write_report(doc, opts.out_path);
  std::cout << "coverage for " << matrix.vehicle_count() << " vehicles ("
            << loaded.malformed << " malformed records) written to " << opts.out_path << '\n';

  if (!opts.monitors_path.empty()) {
    if (opts.colocations_out.empty())
      throw CLI::ValidationError("--monitors needs --colocations-out");
    const auto monitors = driveby::read_monitors_file(opts.monitors_path);
    const driveby::ColocationProfile profile = driveby::build_colocation_profile(store, monitors);
    write_report(colocations_to_json(profile), opts.colocations_out);
    std::cout << "colocation profile written to " << opts.colocations_out << '\n';
  }
}

// --- select ------------------------------------------------------------------

struct SelectOpts {
  std::string coverage_path;
  std::string colocations_path;
  std::string algorithm = "greedy";
  std::int64_t budget = 0;
  std::int64_t min_ref_colocations = 0;
  std::int64_t min_sensor_colocations = 0;
  std::string sensor_mode = "all_fleet";
  std::string weights_path;
  double min_coverage = 0.0;
  std::string existing_csv;
  std::int64_t k_min_records = 1;
  std::uint64_t seed = 0;
  std::string out_path;
};

void run_select(const SelectOpts& opts) {
  const driveby::CoverageMatrix matrix = driveby::load_coverage_file(opts.coverage_path);
  driveby::ColocationProfile profile;
  if ((opts.min_ref_colocations > 0 || opts.min_sensor_colocations > 0) &&
      opts.colocations_path.empty())
    throw CLI::ValidationError("colocation constraints need --colocations");
  if (!opts.colocations_path.empty()) profile = load_colocations_file(opts.colocations_path);

  driveby::SelectionConfig cfg;
  cfg.budget = opts.budget;
  cfg.min_ref_colocations = opts.min_ref_colocations;
  cfg.min_sensor_colocations = opts.min_sensor_colocations;
  cfg.sensor_colocation_mode = opts.sensor_mode == "selected_only"
                                   ? driveby::SensorColocationMode::kSelectedOnly
                                   : driveby::SensorColocationMode::kAllFleet;
  if (!opts.weights_path.empty()) cfg.weights = load_weights_file(opts.weights_path);

  driveby::SelectionResult result;
  if (opts.algorithm == "greedy") {
    result = driveby::greedy_max_coverage(matrix, profile, cfg);
  } else if (opts.algorithm == "min-budget") {
    result = driveby::greedy_min_budget(matrix, profile, opts.min_coverage, cfg);
  } else if (opts.algorithm == "incremental") {
    result = driveby::greedy_incremental(matrix, profile, parse_id_list(opts.existing_csv),
                                         opts.budget, cfg);
  } else if (opts.algorithm == "random-mp") {
    result = driveby::baseline_random_mp(matrix, opts.k_min_records, opts.budget, opts.seed,
                                         cfg.weights);
  } else if (opts.algorithm == "max-points") {
    result = driveby::baseline_max_points(matrix, opts.budget, cfg.weights);
  } else {
    throw CLI::ValidationError("unknown algorithm: " + opts.algorithm);
  }

  ordered_json doc;
  doc["artifact_version"] = driveby::kVersion;
  doc["algorithm"] = opts.algorithm;
  ordered_json config;
  config["coverage"] = opts.coverage_path;
  config["colocations"] = opts.colocations_path;
  config["budget"] = opts.budget;
  config["min_ref_colocations"] = opts.min_ref_colocations;
  config["min_sensor_colocations"] = opts.min_sensor_colocations;
  config["sensor_colocation_mode"] = opts.sensor_mode;
  config["weights"] = opts.weights_path;
  config["min_coverage"] = opts.min_coverage;
  config["existing"] = opts.existing_csv;
  config["k_min_records"] = opts.k_min_records;
  config["seed"] = opts.seed;
  doc["config"] = std::move(config);
  if (opts.algorithm == "random-mp") doc["rng"] = "splitmix64-fisher-yates";
  doc.update(selection_to_json(result));
  write_report(doc, opts.out_path);
  std::cout << "selected " << result.chosen.size() << " vehicles ("
            << driveby::to_string(result.stop_reason) << ") -> " << opts.out_path << '\n';
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateOpts {
  std::string train_path;
  std::string test_path;
  double min_lon = 0.0, min_lat = 0.0, max_lon = 0.0, max_lat = 0.0;
  bool extent_set = false;
  double spatial_granularity_m = 100.0;
  std::int64_t temporal_granularity_s = 7200;
  std::int64_t epoch = 0;
  std::string budgets_csv = "10,20,30,40,50";
  int random_mp_seeds = 10;
  std::int64_t k_min_records = 1;
  std::uint64_t seed = 0;
  std::string out_path;
};

void run_evaluate(const EvaluateOpts& opts) {
  if (!opts.extent_set)
    throw CLI::ValidationError("evaluate needs --min-lon --min-lat --max-lon --max-lat");
  const auto budgets = parse_id_list(opts.budgets_csv);
  if (budgets.empty()) throw CLI::ValidationError("--budgets must list at least one budget");

  const driveby::Stratification strata = driveby::make_grid(
      driveby::BoundingBox(opts.min_lon, opts.min_lat, opts.max_lon, opts.max_lat),
      opts.spatial_granularity_m);
  driveby::StoreConfig cfg;
  cfg.temporal_granularity_s = opts.temporal_granularity_s;
  cfg.epoch = opts.epoch;

  const driveby::RecordsLoadResult train = driveby::read_records_file(opts.train_path);
  const driveby::RecordsLoadResult test = driveby::read_records_file(opts.test_path);
  if (train.records.empty() || test.records.empty())
    throw std::runtime_error("evaluate: train and test halves must both contain records");

  const driveby::MobilityStore train_store = driveby::ingest(train.records, strata, cfg);
  const driveby::MobilityStore test_store = driveby::ingest(test.records, strata, cfg);
  const driveby::CoverageMatrix train_m = driveby::build_coverage(train_store);

  ordered_json doc;
  doc["artifact_version"] = driveby::kVersion;
  ordered_json config;
  config["train"] = opts.train_path;
  config["test"] = opts.test_path;
  config["extent"] = {opts.min_lon, opts.min_lat, opts.max_lon, opts.max_lat};
  config["spatial_granularity_m"] = opts.spatial_granularity_m;
  config["temporal_granularity_s"] = opts.temporal_granularity_s;
  config["epoch"] = opts.epoch;
  config["budgets"] = budgets;
  config["random_mp_seeds"] = opts.random_mp_seeds;
  config["k_min_records"] = opts.k_min_records;
  config["seed"] = opts.seed;
  doc["config"] = std::move(config);
  doc["train_records"] = train.records.size();
  doc["test_records"] = test.records.size();
  doc["train_malformed"] = train.malformed;
  doc["test_malformed"] = test.malformed;
  doc["strata"] = strata.size();

  ordered_json greedy_rows = ordered_json::array();
  ordered_json max_points_rows = ordered_json::array();
  ordered_json random_mp_rows = ordered_json::array();
  for (const std::int64_t budget : budgets) {
    driveby::SelectionConfig scfg;
    scfg.budget = budget;
    const driveby::SelectionResult greedy =
        driveby::greedy_max_coverage(train_m, driveby::ColocationProfile(), scfg);
    ordered_json g;
    g["budget"] = budget;
    g["chosen"] = greedy.chosen;
    g["test_percentage_coverage"] =
        driveby::evaluate_selection(train_store, test_store, greedy.chosen);
    greedy_rows.push_back(std::move(g));

    const driveby::SelectionResult top = driveby::baseline_max_points(train_m, budget);
    ordered_json t;
    t["budget"] = budget;
    t["chosen"] = top.chosen;
    t["test_percentage_coverage"] =
        driveby::evaluate_selection(train_store, test_store, top.chosen);
    max_points_rows.push_back(std::move(t));

    std::vector<double> per_seed;
    for (int i = 0; i < opts.random_mp_seeds; ++i) {
      const driveby::SelectionResult pick = driveby::baseline_random_mp(
          train_m, opts.k_min_records, budget,
          driveby::derive_seed(opts.seed, static_cast<std::uint64_t>(i)));
      per_seed.push_back(driveby::evaluate_selection(train_store, test_store, pick.chosen));
    }
    double mean = 0.0;
    for (const double v : per_seed) mean += v;
    mean /= static_cast<double>(per_seed.size());
    double var = 0.0;
    for (const double v : per_seed) var += (v - mean) * (v - mean);
    const double stddev =
        per_seed.size() > 1 ? std::sqrt(var / static_cast<double>(per_seed.size() - 1)) : 0.0;
    ordered_json r;
    r["budget"] = budget;
    r["per_seed"] = per_seed;
    r["mean"] = mean;
    r["stddev"] = stddev;
    random_mp_rows.push_back(std::move(r));
  }
  doc["methods"]["greedy"] = std::move(greedy_rows);
  doc["methods"]["max_points"] = std::move(max_points_rows);
  doc["methods"]["random_mp"] = std::move(random_mp_rows);
  doc["rng"] = "splitmix64-fisher-yates";
  write_report(doc, opts.out_path);
  std::cout << "evaluation report written to " << opts.out_path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drive-by sensing fleet selection pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "config file with [subcommand] sections of key=value options");

  SynthOpts synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic fleet records CSV");
  synth_cmd->fallthrough();
  synth_cmd->add_option("--spec", synth.spec_path, "fleet spec JSON")->required();
  synth_cmd->add_option("--out", synth.out_path, "output records CSV")->required();

  StratifyOpts stratify;
  CLI::App* stratify_cmd = app.add_subcommand("stratify", "build or validate a strata file");
  stratify_cmd->fallthrough();
  stratify_cmd->add_option("--strata-source", stratify.source, "grid | custom")
      ->check(CLI::IsMember({"grid", "custom"}));
  auto* s_minlon = stratify_cmd->add_option("--min-lon", stratify.min_lon, "extent west edge");
  auto* s_minlat = stratify_cmd->add_option("--min-lat", stratify.min_lat, "extent south edge");
  auto* s_maxlon = stratify_cmd->add_option("--max-lon", stratify.max_lon, "extent east edge");
  auto* s_maxlat = stratify_cmd->add_option("--max-lat", stratify.max_lat, "extent north edge");
  stratify_cmd->add_option("--spatial-granularity-m", stratify.spatial_granularity_m,
                           "grid cell side in meters");
  stratify_cmd->add_option("--custom-strata", stratify.custom_path, "custom strata GeoJSON");
  stratify_cmd->add_option("--out", stratify.out_path, "output strata GeoJSON")->required();

  CoverageOpts coverage;
  CLI::App* coverage_cmd =
      app.add_subcommand("coverage", "compute per-vehicle coverage from records");
  coverage_cmd->fallthrough();
  coverage_cmd->add_option("--records", coverage.records_path, "records CSV")->required();
  coverage_cmd->add_option("--strata", coverage.strata_path, "strata GeoJSON")->required();
  coverage_cmd->add_option("--temporal-granularity-s", coverage.temporal_granularity_s,
                           "interval width in seconds");
  coverage_cmd->add_option("--epoch", coverage.epoch, "interval epoch (unix seconds)");
  coverage_cmd->add_option("--geohash-precision", coverage.geohash_precision,
                           "index geohash precision (1..12)");
  coverage_cmd->add_option("--spatial-radius-m", coverage.spatial_radius_m,
                           "colocation spatial radius");
  coverage_cmd->add_option("--temporal-radius-s", coverage.temporal_radius_s,
                           "colocation temporal radius");
  coverage_cmd->add_option("--monitors", coverage.monitors_path, "reference monitors CSV");
  coverage_cmd->add_option("--colocations-out", coverage.colocations_out,
                           "colocation profile output JSON");
  coverage_cmd->add_option("--out", coverage.out_path, "coverage output JSON")->required();

  SelectOpts select;
  CLI::App* select_cmd = app.add_subcommand("select", "select vehicles from a coverage file");
  select_cmd->fallthrough();
  select_cmd->add_option("--coverage", select.coverage_path, "coverage JSON")->required();
  select_cmd->add_option("--colocations", select.colocations_path, "colocation profile JSON");
  select_cmd->add_option("--algorithm", select.algorithm,
                         "greedy | min-budget | incremental | random-mp | max-points")
      ->check(CLI::IsMember({"greedy", "min-budget", "incremental", "random-mp", "max-points"}));
  select_cmd->add_option("--budget", select.budget, "vehicle budget (extra budget for incremental)");
  select_cmd->add_option("--min-ref-colocations", select.min_ref_colocations,
                         "reference colocation threshold (b)");
  select_cmd->add_option("--min-sensor-colocations", select.min_sensor_colocations,
                         "sensor colocation threshold (s)");
  select_cmd->add_option("--sensor-colocation-mode", select.sensor_mode,
                         "all_fleet | selected_only")
      ->check(CLI::IsMember({"all_fleet", "selected_only"}));
  select_cmd->add_option("--weights", select.weights_path, "cell weights JSON");
  select_cmd->add_option("--min-coverage", select.min_coverage,
                         "coverage target (min-budget mode)");
  select_cmd->add_option("--existing", select.existing_csv,
                         "comma-separated deployed vehicle ids (incremental mode)");
  select_cmd->add_option("--k-min-records", select.k_min_records,
                         "eligibility record count (random-mp)");
  select_cmd->add_option("--seed", select.seed, "random seed (random-mp)");
  select_cmd->add_option("--out", select.out_path, "selection report JSON")->required();

  EvaluateOpts evaluate;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "train/test budget sweep of all methods");
  evaluate_cmd->fallthrough();
  evaluate_cmd->add_option("--train", evaluate.train_path, "train-half records CSV")->required();
  evaluate_cmd->add_option("--test", evaluate.test_path, "test-half records CSV")->required();
  auto* e_minlon = evaluate_cmd->add_option("--min-lon", evaluate.min_lon, "extent west edge");
  auto* e_minlat = evaluate_cmd->add_option("--min-lat", evaluate.min_lat, "extent south edge");
  auto* e_maxlon = evaluate_cmd->add_option("--max-lon", evaluate.max_lon, "extent east edge");
  auto* e_maxlat = evaluate_cmd->add_option("--max-lat", evaluate.max_lat, "extent north edge");
  evaluate_cmd->add_option("--spatial-granularity-m", evaluate.spatial_granularity_m,
                           "grid cell side in meters");
  evaluate_cmd->add_option("--temporal-granularity-s", evaluate.temporal_granularity_s,
                           "interval width in seconds");
  evaluate_cmd->add_option("--epoch", evaluate.epoch, "interval epoch");
  evaluate_cmd->add_option("--budgets", evaluate.budgets_csv, "comma-separated budget sweep");
  evaluate_cmd->add_option("--random-mp-seeds", evaluate.random_mp_seeds,
                           "number of Random-MP repetitions");
  evaluate_cmd->add_option("--k-min-records", evaluate.k_min_records,
                           "Random-MP eligibility record count");
  evaluate_cmd->add_option("--seed", evaluate.seed, "base random seed");
  evaluate_cmd->add_option("--out", evaluate.out_path, "evaluation report JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) run_synth(synth);
    if (stratify_cmd->parsed()) {
      stratify.extent_set =
          s_minlon->count() && s_minlat->count() && s_maxlon->count() && s_maxlat->count();
      run_stratify(stratify);
    }
    if (coverage_cmd->parsed()) run_coverage(coverage);
    if (select_cmd->parsed()) run_select(select);
    if (evaluate_cmd->parsed()) {
      evaluate.extent_set =
          e_minlon->count() && e_minlat->count() && e_maxlon->count() && e_maxlat->count();
      run_evaluate(evaluate);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
