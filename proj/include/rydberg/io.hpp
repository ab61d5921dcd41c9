#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rydberg/montecarlo.hpp"
#include "rydberg/tomography.hpp"

namespace rydberg {

using json = nlohmann::json;

// 17 significant digits, enough to round-trip a double.
std::string format_double(double v);

// Plans. Unknown keys and wrong types raise ConfigError before any work.
ExperimentPlan plan_from_json(const json& j);
json plan_to_json(const ExperimentPlan& plan);
ExperimentPlan load_plan(const std::string& path);

json geometry_to_json(const ArrayGeometry& g);
ArrayGeometry geometry_from_json(const json& j);
json pattern_to_json(const AddressingPattern& p);
AddressingPattern pattern_from_json(const json& j);

// Long format: sweep,observable,mean,std,n,stderr
void write_sweep_csv(const SweepResult& r, std::ostream& os);
json sweep_to_json(const SweepResult& r);

json density_to_json(const Mat& rho);
Mat density_from_json(const json& j);

// Rows: basis,outcome,value with outcome as 'u'/'d' per atom, value a
// probability or a count (normalized per basis).
TomographyDataset read_dataset_csv(std::istream& is);
void write_dataset_csv(const TomographyDataset& d, std::ostream& os);

// shot_id,basis,outcome,seed
void write_shots_csv(const std::vector<ShotRecord>& shots, std::ostream& os);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace rydberg
