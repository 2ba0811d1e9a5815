#pragma once

#include "lowrank/problems.hpp"
#include "lowrank/solver.hpp"
#include "lowrank/variety.hpp"

#include <json.hpp>

#include <iosfwd>
#include <memory>
#include <string>

namespace lowrank::io {

using Json = nlohmann::json;

/// %.17g: 17 significant digits, lossless for doubles.
std::string format_double(double value);

/// One row per line, comma-separated.
std::string matrix_to_csv(const Matrix &x);
Matrix matrix_from_csv(const std::string &text);

/// {"rows": m, "cols": n, "entries": [row-major]}
Json matrix_to_json(const Matrix &x);
Matrix matrix_from_json(const Json &j);

/// {"u", "sigma", "v", "rank", "m", "n", "r"}
Json point_to_json(const VarietyPoint &point);
VarietyPoint point_from_json(const Json &j);

/// {"type": "lowrank_approx" | "completion" | "polynomial",
///  "shape": [m, n], "payload": {...}}
std::shared_ptr<CostFunction> problem_from_json(const Json &j);
Json problem_to_json(const CostFunction &problem);

inline constexpr const char *kTraceHeader =
    "iter,f,s,rank,delta_rank,chosen_j,alpha,candidates";

std::string trace_to_csv(const Trace &trace);
Json trace_summary(const Trace &trace);

Json read_json_file(const std::string &path);
std::string read_text_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &content);

} // namespace lowrank::io
