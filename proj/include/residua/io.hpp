#pragma once

// JSON encoding of engine inputs and results. Parsers throw SchemaError naming the offending
// path; encoders use insertion-ordered objects so that dumps are byte-stable.

#include <string>
#include <vector>

#include <json.hpp>

#include "residua/cfl.hpp"
#include "residua/currents.hpp"
#include "residua/errors.hpp"
#include "residua/mellin.hpp"
#include "residua/quadrature.hpp"
#include "residua/testforms.hpp"

namespace residua::io {

using Json = nlohmann::ordered_json;

/// "0x1.8p+1" style rendering, exact and locale-independent.
std::string hexfloat(double x);

// ---- parsing; `path` is prefixed to error messages

/// Exponent vector from [1,0,2] or a monomial string "x1*x3^2".
std::vector<int> parse_exponent(const Json& j, int n, const std::string& path);
/// {"kind": "RES"|"PV", "gamma": ..., "witness"?: ..., "label"?: str}
ProductStep parse_step(const Json& j, int n, const std::string& path);
/// {"kind": "smooth_step", "s": 3} or {"kind": "indicator"}; also the strings "indicator" and
/// "smooth_step".
CutoffProfile parse_cutoff(const Json& j, const std::string& path);
/// {"kind": "beta", "d": 8} or {"kind": "plateau", "s": 2}.
RadialProfile parse_profile(const Json& j, const std::string& path);
/// {"terms": [{"k": [...], "m": [...], "c": "1/2+3i"}], "profiles"?: [...], "M"?: [...],
///  "beta_d"?: 8}. Indices in M are 1-based in documents.
TestForm parse_testform(const Json& j, int n, const std::string& path);
/// {"terms": [{"k": [...], "m": [...], "c": 0.25}]} or {"radial_quadratic": a}.
WeightPoly parse_weight(const Json& j, int n, const std::string& path);
/// Step plus optional "cutoff" and "weight".
RegularizedStep parse_regularized_step(const Json& j, int n, const CutoffProfile& fallback, const std::string& path);
/// Overrides fields of `base` that are present.
GridSpec parse_grid(const Json& j, GridSpec base, const std::string& path);
/// {"kind": "iterated"|"tower"|"diagonal"|"custom", "beta"?: 2, "epsilons"?: [[...]]}
EpsilonSchedule parse_schedule(const Json& j, const std::string& path);
ExtrapolationConfig parse_extrapolation(const Json& j, ExtrapolationConfig base, const std::string& path);
/// {"rank": 2, "components": ["x1", "x2"], "support_witness": [1, 1]}
VectorSection parse_section(const Json& j, int n, const std::string& path);
/// {"section": {...}, "kind": "U"|"R", "k": 1, "cutoff"?: ..., "component"?: [1, 2]};
/// component indices are 1-based in documents.
CFLFactorSpec parse_cfl_factor(const Json& j, int n, const std::string& path);

// ---- encoding

Json encode(const Complex& z);
Json encode(const ScalarSum& x);
Json encode(const ProductStep& s);
Json encode(const TestForm& phi);
Json encode(const VectorSection& f);
Json encode(const CurrentSum& T);
Json encode(const LimitResult& r);
Json encode(const PoleLine& line);
Json encode(const RateFit& fit);
/// Value, uncertainty, grid data and the refinement and ladder histories.
Json encode(const NumericalResult& r);

}  // namespace residua::io
