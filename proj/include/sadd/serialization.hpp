#pragma once

// JSON mappings for the persisted types (schemes, models, reports).

#include <json.hpp>

#include "sadd/dataset.hpp"
#include "sadd/discretizer.hpp"
#include "sadd/eval.hpp"
#include "sadd/nb.hpp"
#include "sadd/stats.hpp"

namespace sadd {

void to_json(nlohmann::json& j, const Attribute& a);
void from_json(const nlohmann::json& j, Attribute& a);

void to_json(nlohmann::json& j, const ImputationStats& s);
void from_json(const nlohmann::json& j, ImputationStats& s);

void to_json(nlohmann::json& j, const SchemeParams& p);
void from_json(const nlohmann::json& j, SchemeParams& p);
void to_json(nlohmann::json& j, const DiscretizationScheme& s);
void from_json(const nlohmann::json& j, DiscretizationScheme& s);

void to_json(nlohmann::json& j, const NbModel& m);
void from_json(const nlohmann::json& j, NbModel& m);
void to_json(nlohmann::json& j, const WeightedParams& p);
void from_json(const nlohmann::json& j, WeightedParams& p);
void to_json(nlohmann::json& j, const TrainOptions& o);
void from_json(const nlohmann::json& j, TrainOptions& o);

void to_json(nlohmann::json& j, const PipelineConfig& c);
/// Missing keys take the defaults of make_config for the given method.
void from_json(const nlohmann::json& j, PipelineConfig& c);

void to_json(nlohmann::json& j, const TTestResult& t);
void from_json(const nlohmann::json& j, TTestResult& t);
void to_json(nlohmann::json& j, const DiagnosticsTable& t);
void from_json(const nlohmann::json& j, DiagnosticsTable& t);
void to_json(nlohmann::json& j, const FoldResult& f);
void from_json(const nlohmann::json& j, FoldResult& f);
void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);
void to_json(nlohmann::json& j, const Comparison& c);
void from_json(const nlohmann::json& j, Comparison& c);
void to_json(nlohmann::json& j, const BenchReport& r);
void from_json(const nlohmann::json& j, BenchReport& r);

}  // namespace sadd
