#ifndef HYPGRAPH_REPORT_HPP
#define HYPGRAPH_REPORT_HPP

#include <string>

#include <json.hpp>

#include "hypgraph/diagnostics.hpp"

namespace hypgraph {

using Json = nlohmann::ordered_json;

Json report_to_json(const DiagnosticsReport& report);
Json trace_to_json(const ContinuationTrace& trace);
Json metrics_to_json(const StateMetrics& m);

std::string emit_trace(const ContinuationTrace& trace, ReportFormat format);

// "%.17g"
std::string format_double(double x);

}  // namespace hypgraph

#endif
