#pragma once

// JSON conversions shared by the core translation units. Not installed.

#include <json.hpp>

#include "vgstar/geometry.hpp"
#include "vgstar/greens.hpp"
#include "vgstar/medium.hpp"

namespace vgs::detail {

using nlohmann::json;

json point_to_json(const Point& p, int dim);
Point point_from_json(const json& j, int dim);
json medium_spec_to_json(const MediumSpec& s);
json bandwidth_to_json(const Bandwidth& b);
json probe_to_json(const ProbeGeometry& p);

}  // namespace vgs::detail
