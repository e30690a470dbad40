#pragma once

#include <json.hpp>

#include <string>

#include "epslab/grid.hpp"
#include "epslab/integrand.hpp"
#include "epslab/operators.hpp"
#include "epslab/relaxed.hpp"
#include "epslab/solve.hpp"
#include "epslab/spectral.hpp"

namespace epslab {

using json = nlohmann::json;

// Operators: {"n", "dim_V", "dim_W", "coeffs" (n matrices as row arrays),
// "name"}.  A bare string selects a builtin by name.
json operator_to_json(const FirstOrderOperator& op);
FirstOrderOperator operator_from_json(const json& j);

json ellipticity_to_json(const EllipticityReport& r);
json kk_to_json(const KKReduction& r);
json mu_report_to_json(const MuReport& r);
json breakdown_to_json(const EnergyBreakdown& b);

// 1D BV competitors: {"breakpoints", "slopes", "jumps": [{"x","height"}],
// "datum": [left, right], "trace_left" (optional, default 0)}.
BVPiecewise1D bv1d_from_json(const json& j);
json bv1d_to_json(const BVPiecewise1D& u);

// Nodal fields.  CSV columns: x, y, comp0, comp1, ...; binary layout:
// int32 N, int32 dim, int32 domain tag, then row-major float64 values.
void write_field_csv(const std::string& path, const GridField& field);
void write_field_binary(const std::string& path, const GridField& field);
GridField read_field_binary(const std::string& path, GridPtr grid = nullptr);

/// Formats a double with enough digits to round-trip (C locale, '.').
std::string format_double(double v);

/// Writes rows of doubles as CSV with a header line and LF endings.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/**
 * Reads a config file as JSON; files whose first non-space byte is not
 * '{' are parsed as flat TOML-style key = value pairs ([section] headers
 * prefix the keys, arrays and scalars only) and converted to the same
 * nested JSON object.
 */
json load_config(const std::string& path);

}  // namespace epslab
