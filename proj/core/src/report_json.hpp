#pragma once

#include <json.hpp>

#include "artic/metrics.hpp"

namespace artic::metrics {

// JSON builders shared by the public serializers, the scene manifest and
// the CLI. nlohmann::json keeps keys sorted, which the manifest hash
// relies on.

nlohmann::json report_json(const MetricReport& report);
nlohmann::json scene_report_json(const SceneReport& report);

}  // namespace artic::metrics
