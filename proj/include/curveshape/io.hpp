#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "curveshape/stats.hpp"

namespace curveshape {

using Json = nlohmann::json;

Json curve_to_json(const Curve& curve);
Curve curve_from_json(const Json& j);
Json field_to_json(const TangentField& field);
TangentField field_from_json(const Json& j);
Json path_to_json(const Path& path);
Path path_from_json(const Json& j);
Json params_to_json(const MetricParams& params);
MetricParams params_from_json(const Json& j);
Json breakdown_to_json(const EnergyBreakdown& b);
Json reparam_to_json(const Reparam& rep);
Json rigid_to_json(const RigidMotion& rigid);
Json bvp_options_to_json(const BvpOptions& options);
Json geodesic_to_json(const GeodesicResult& result);
Json discrete_geodesic_to_json(const DiscreteGeodesic& geodesic);
Json pca_to_json(const PcaResult& pca);
PcaResult pca_from_json(const Json& j);
Json karcher_to_json(const KarcherResult& result);

Json read_json(const std::string& path);
/// Writes with a fixed indentation and a trailing newline.
void write_json(const std::string& path, const Json& j);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Header row of labels followed by the full matrix.
std::string distance_matrix_to_csv(const DistanceMatrix& dm);
DistanceMatrix distance_matrix_from_csv(const std::string& text);

/// Polyline text: one "x y" (or "x,y") pair per line.
Points parse_polyline(const std::string& text);

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a(const std::string& data);

}  // namespace curveshape
