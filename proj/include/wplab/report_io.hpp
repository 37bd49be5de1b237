#pragma once

#include <string>

#include <json.hpp>

#include "wplab/estimates.hpp"
#include "wplab/quadrature.hpp"
#include "wplab/radial_lab.hpp"
#include "wplab/weight_calculus.hpp"

namespace wplab {

using json = nlohmann::json;

/// Fixed 17-significant-digit formatting so repeated runs are byte-identical.
std::string fmt(double v);

json to_json(const QuadratureConfig& cfg);
json to_json(const ExponentReport& r);
json to_json(const DoublingReport& r);
json to_json(const ApReport& r);
json to_json(const DecayFit& r);
json to_json(const DecaySchedule& r);
json to_json(const BubbleResidual& r);
json to_json(const NormLedger& r);
json to_json(const HarnackReport& r);
json to_json(const OscillationReport& r);
json to_json(const TailReport& r);
json to_json(const ExponentChain& r);
json to_json(const DecayCheck& r);
json to_json(const StructuralReport& r);

void write_text_file(const std::string& path, const std::string& content);

/// JSON report with the resolved run configuration embedded under "config".
void write_json_report(const std::string& path, json report, json config);

std::string csv_config_header(const json& config);

/// Companion gnuplot script: plot `csv` columns x_col:y_col.
std::string gnuplot_script(const std::string& csv_name, int x_col, int y_col,
                           const std::string& title, bool log_log = false);

}  // namespace wplab
