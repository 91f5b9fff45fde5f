#pragma once

#include <string>

#include <json.hpp>

#include "mis/hdp.hpp"
#include "mis/lda.hpp"
#include "mis/pipeline.hpp"

namespace mis {

using Json = nlohmann::json;

inline constexpr const char* kModelSchema = "mis.model/1";
inline constexpr const char* kHdpSchema = "mis.hdp/1";
inline constexpr const char* kSnapshotSchema = "mis.snapshot/1";
inline constexpr const char* kRunManifestSchema = "mis.run/1";

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json model_to_json(const LdaModel& model);
LdaModel model_from_json(const Json& j);
void save_model(const std::string& path, const LdaModel& model);
LdaModel load_model(const std::string& path);

Json hdp_to_json(const HdpResult& result);
HdpResult hdp_from_json(const Json& j);
void save_hdp(const std::string& path, const HdpResult& result);
HdpResult load_hdp(const std::string& path);

Json snapshot_to_json(const YearSnapshot& snapshot);
YearSnapshot snapshot_from_json(const Json& j);
void save_snapshot(const std::string& path, const YearSnapshot& snapshot);
YearSnapshot load_snapshot(const std::string& path);

struct RunManifest {
  std::string config_digest;
  std::uint64_t master_seed = 0;
  std::vector<int> years;
  std::vector<std::string> snapshot_files;
  std::vector<std::string> vocab;
  std::vector<std::string> warnings;
};

Json manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const Json& j);
void save_manifest(const std::string& path, const RunManifest& manifest);
RunManifest load_manifest(const std::string& path);

Json config_to_json(const PipelineConfig& config);
/// Fields present in j override the base; everything else is kept.
PipelineConfig config_from_json(const Json& j, PipelineConfig base = {});

/// Stable 16-hex-digit digest of the canonical config serialization.
std::string config_digest(const PipelineConfig& config);

/// Generic helpers shared by every reader/writer.
void require_schema(const Json& j, const std::string& expected);
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace mis
