#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rmtldp/dyson.hpp"
#include "rmtldp/extended_real.hpp"
#include "rmtldp/measure.hpp"
#include "rmtldp/montecarlo.hpp"
#include "rmtldp/rate.hpp"
#include "rmtldp/wigner.hpp"

namespace rmtldp::io {

using json = nlohmann::json;
using Model = std::variant<CovarianceModel, DeformedWignerModel>;

/// Malformed input document.
struct FormatError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Locale-independent, 17 significant digits; "inf" / "-inf" for infinities.
[[nodiscard]] std::string format_number(double v);

[[nodiscard]] json extended_to_json(const ExtendedReal& v);
[[nodiscard]] ExtendedReal extended_from_json(const json& j);

[[nodiscard]] json measure_to_json(const SpectralMeasure& m);
[[nodiscard]] SpectralMeasure measure_from_json(const json& j);

[[nodiscard]] json model_to_json(const Model& m);
/// Covariance models carry "kind": "covariance" (the default when absent);
/// deformed-Wigner models carry "kind": "deformed-wigner".
[[nodiscard]] Model model_from_json(const json& j);
[[nodiscard]] Model read_model(const std::string& path);

[[nodiscard]] json edge_to_json(const EdgeData& e);
[[nodiscard]] json dw_edge_to_json(const DWEdgeData& e);

[[nodiscard]] std::string rate_table_csv(const RateTable& t);
[[nodiscard]] std::string rate_table_csv(const std::vector<double>& x, const std::vector<double>& g,
                                         const std::vector<double>& gbar,
                                         const std::vector<double>& i);
[[nodiscard]] std::string approx_csv(const ApproxReport& rep);
[[nodiscard]] std::string mc_csv(const std::vector<SpectrumSample>& samples);
/// Little-endian float64 eigenvalues, one row of n values per replica.
[[nodiscard]] std::string spectra_binary(const std::vector<SpectrumSample>& samples);

/// Write to `path` through a temporary file in the same directory and a rename.
void write_atomic(const std::string& path, const std::string& content);
[[nodiscard]] std::string read_file(const std::string& path);

}  // namespace rmtldp::io
