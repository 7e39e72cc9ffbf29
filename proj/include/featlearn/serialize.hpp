#ifndef FEATLEARN_SERIALIZE_HPP
#define FEATLEARN_SERIALIZE_HPP

#include <json.hpp>
#include <string>
#include <vector>

#include "featlearn/autoencoder.hpp"
#include "featlearn/dataset.hpp"
#include "featlearn/pca.hpp"
#include "featlearn/pipeline.hpp"
#include "featlearn/plot.hpp"
#include "featlearn/regressors.hpp"

// JSON and CSV serialization. Doubles are written in shortest round-trip
// decimal form, so dump/parse cycles are value-exact.

namespace featlearn {

using json = nlohmann::json;

void to_json(json& j, const ScalerParams& p);
void from_json(const json& j, ScalerParams& p);

void to_json(json& j, const Histogram& h);
void from_json(const json& j, Histogram& h);

void to_json(json& j, const GapReport& r);
void from_json(const json& j, GapReport& r);

void to_json(json& j, const AeParams& p);
void from_json(const json& j, AeParams& p);

void to_json(json& j, const GridSearchResult& r);
void from_json(const json& j, GridSearchResult& r);

void to_json(json& j, const LinearModel& m);
void from_json(const json& j, LinearModel& m);

// Pre-order node list with explicit leaf markers.
void to_json(json& j, const TreeModel& m);
void from_json(const json& j, TreeModel& m);

void to_json(json& j, const PlotSpec& s);
void from_json(const json& j, PlotSpec& s);

// Strict parse: unknown or ill-typed keys raise bad_config naming the key.
ExperimentConfig experiment_config_from_json(const json& j);

void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

// One CSV with a header row; every column must have equal length.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

// Dataset back to the on-disk layout: features then target, no header.
void write_dataset_csv(const std::string& path, const Dataset& ds, char delimiter = ',');

} // namespace featlearn

#endif
