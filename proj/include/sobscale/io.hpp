#pragma once

// Structured-text (JSON) codecs for weights, parameters, Gram matrices,
// atlases and symbols, plus the binary grid-function format:
//
//   one JSON header line {"n":..,"N":..,"L":..} followed by N^n
//   little-endian complex64 values (float32 re, float32 im), row-major.

#include <iosfwd>
#include <json.hpp>

#include "sobscale/atlas.hpp"
#include "sobscale/interpolation.hpp"
#include "sobscale/pdo.hpp"
#include "sobscale/weights.hpp"

namespace sobscale {

using Json = nlohmann::json;

/// Non-finite doubles become the strings "inf", "-inf", "nan".
Json number(double v);
double number_from(const Json& j);

Json to_json(const Weight& w);
Weight weight_from_json(const Json& j);
Json to_json(const InterpParameter& psi);
InterpParameter parameter_from_json(const Json& j);

Json to_json(const ROCertificate& c);
Json to_json(const MatuszewskaEstimate& m);

/// Nested [[ [re, im], ... ], ...] rows.
Json gram_to_json(const MatrixC& g);
MatrixC gram_from_json(const Json& j);

Json to_json(const Grid& g);
Grid grid_from_json(const Json& j);

Json to_json(const Model& m);
Model model_from_json(const Json& j);
/// model, epsilon, spacing, sharpness, centers, cover order, C_alpha and,
/// when given, the transition certificate.
Json describe_atlas(const Atlas& atlas, const TransitionCertificate* cert = nullptr);

/// {"order": m, "expr": "..."} for general symbols, {"order": m, "multiplier": weight}
/// for multipliers. Separable symbols serialize their weight and grid but not chi.
Json to_json(const Symbol& s);
/// Accepts the general and multiplier forms; `dim` applies to general symbols.
Symbol symbol_from_json(const Json& j, int dim);

void write_grid_function(std::ostream& out, const GridFunction& u);
GridFunction read_grid_function(std::istream& in);

/// Header line {"format":"patch_vector","count":K,"charts":[...]}, then K
/// grid-function records.
void write_patch_vector(std::ostream& out, const PatchVector& v);
PatchVector read_patch_vector(std::istream& in);

}  // namespace sobscale
