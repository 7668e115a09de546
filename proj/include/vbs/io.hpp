#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "vbs/analysis.hpp"
#include "vbs/mc.hpp"
#include "vbs/model.hpp"
#include "vbs/spectrum.hpp"
#include "vbs/transfer.hpp"

namespace vbs {

using Json = nlohmann::ordered_json;

/// {"vertices", "bonds", "boundary", "spin2": {"k": 2S}, "family"}; square and
/// hexagonal graphs also carry "nx" and "ny".
Json to_json(const SymmetricGraph& graph);
SymmetricGraph graph_from_json(const Json& j);

Json to_json(const MCConfig& cfg);
MCConfig mc_config_from_json(const Json& j);

/// {"dim", "mean", "stderr", "max_imag", "config"} plus bookkeeping fields.
Json to_json(const OverlapEstimate& est);
OverlapEstimate estimate_from_json(const Json& j);

/// {"family", "m", "n", "coeff": {"()": "1", "(1,2)": "1/9"}}.
Json to_json(const LadderCoefficients& state);
LadderCoefficients coefficients_from_json(const Json& j);

Json to_json(const EntropySpectrum& s);
EntropySpectrum spectrum_from_json(const Json& j);

Json to_json(const AreaLawFit& fit);
Json to_json(const ExtrapolationReport& report);

/// {"family", "nx", "points": [{"boundary_size", "per_bond", "stderr"}]}.
Json to_json(const ScalingDataset& data);
ScalingDataset dataset_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace vbs
