#include "mis/snapshot.hpp"

#include <fstream>
#include <stdexcept>

namespace mis {

void require_schema(const Json& j, const std::string& expected) {
  const std::string got = j.value("schema", "");
  if (got != expected)
    throw std::runtime_error("unsupported schema '" + got + "' (expected '" +
                             expected + "')");
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  Json j;
  in >> j;
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows; ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return Json{{"rows", m.rows}, {"cols", m.cols}, {"data", rows}};
}

Matrix matrix_from_json(const Json& j) {
  Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  const Json& rows = j.at("data");
  if (static_cast<int>(rows.size()) != m.rows)
    throw std::runtime_error("matrix row count mismatch");
  for (int r = 0; r < m.rows; ++r) {
    const Json& row = rows[r];
    if (static_cast<int>(row.size()) != m.cols)
      throw std::runtime_error("matrix column count mismatch");
    for (int c = 0; c < m.cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

namespace {

Json fit_config_to_json(const FitConfig& config) {
  return Json{{"sweeps", config.sweeps},
              {"burn_in", config.burn_in},
              {"thin", config.thin},
              {"seed", config.seed}};
}

FitConfig fit_config_from_json(const Json& j) {
  FitConfig config;
  config.sweeps = j.at("sweeps").get<int>();
  config.burn_in = j.at("burn_in").get<int>();
  config.thin = j.at("thin").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  return config;
}

Json prior_to_json(const DirichletPrior& prior) {
  return Json{{"alpha", matrix_to_json(prior.alpha)}, {"beta", prior.beta}};
}

DirichletPrior prior_from_json(const Json& j) {
  DirichletPrior prior;
  prior.alpha = matrix_from_json(j.at("alpha"));
  prior.beta = j.at("beta").get<std::vector<double>>();
  return prior;
}

Json model_body_to_json(const LdaModel& model) {
  return Json{{"vocab", model.vocab},
              {"firm_ids", model.firm_ids},
              {"phi", matrix_to_json(model.phi)},
              {"theta", matrix_to_json(model.theta)},
              {"prior", prior_to_json(model.prior)},
              {"posterior_alpha", matrix_to_json(model.posterior_alpha)},
              {"fit_meta", fit_config_to_json(model.fit_meta)}};
}

LdaModel model_body_from_json(const Json& j) {
  LdaModel model;
  model.vocab = j.at("vocab").get<std::vector<std::string>>();
  model.firm_ids = j.at("firm_ids").get<std::vector<std::string>>();
  model.phi = matrix_from_json(j.at("phi"));
  model.theta = matrix_from_json(j.at("theta"));
  model.prior = prior_from_json(j.at("prior"));
  model.posterior_alpha = matrix_from_json(j.at("posterior_alpha"));
  model.fit_meta = fit_config_from_json(j.at("fit_meta"));
  return model;
}

}  // namespace

Json model_to_json(const LdaModel& model) {
  Json j = model_body_to_json(model);
  j["schema"] = kModelSchema;
  return j;
}

LdaModel model_from_json(const Json& j) {
  require_schema(j, kModelSchema);
  return model_body_from_json(j);
}

void save_model(const std::string& path, const LdaModel& model) {
  write_json_file(path, model_to_json(model));
}

LdaModel load_model(const std::string& path) {
  return model_from_json(read_json_file(path));
}

Json hdp_to_json(const HdpResult& result) {
  return Json{{"schema", kHdpSchema},
              {"k_found", result.k_found},
              {"phi", matrix_to_json(result.phi)},
              {"eta", result.eta},
              {"topic_masses", result.topic_masses},
              {"vocab", result.vocab},
              {"k_max_hit", result.k_max_hit}};
}

HdpResult hdp_from_json(const Json& j) {
  require_schema(j, kHdpSchema);
  HdpResult result;
  result.k_found = j.at("k_found").get<int>();
  result.phi = matrix_from_json(j.at("phi"));
  result.eta = j.at("eta").get<std::vector<double>>();
  result.topic_masses = j.at("topic_masses").get<std::vector<double>>();
  result.vocab = j.at("vocab").get<std::vector<std::string>>();
  result.k_max_hit = j.at("k_max_hit").get<bool>();
  return result;
}

void save_hdp(const std::string& path, const HdpResult& result) {
  write_json_file(path, hdp_to_json(result));
}

HdpResult load_hdp(const std::string& path) {
  return hdp_from_json(read_json_file(path));
}

Json snapshot_to_json(const YearSnapshot& snapshot) {
  return Json{{"schema", kSnapshotSchema},
              {"year", snapshot.year},
              {"k", snapshot.k},
              {"prior", prior_to_json(snapshot.prior)},
              {"model", model_body_to_json(snapshot.model)},
              {"topic_labels", snapshot.topic_labels},
              {"topic_token_shares", snapshot.topic_token_shares},
              {"provenance",
               Json{{"master_seed", snapshot.provenance.master_seed},
                    {"member_seeds", snapshot.provenance.member_seeds},
                    {"lda_seed", snapshot.provenance.lda_seed},
                    {"config_digest", snapshot.provenance.config_digest},
                    {"warnings", snapshot.provenance.warnings}}}};
}

YearSnapshot snapshot_from_json(const Json& j) {
  require_schema(j, kSnapshotSchema);
  YearSnapshot snapshot;
  snapshot.year = j.at("year").get<int>();
  snapshot.k = j.at("k").get<int>();
  snapshot.prior = prior_from_json(j.at("prior"));
  snapshot.model = model_body_from_json(j.at("model"));
  snapshot.topic_labels = j.at("topic_labels").get<std::vector<std::string>>();
  snapshot.topic_token_shares =
      j.at("topic_token_shares").get<std::vector<double>>();
  const Json& p = j.at("provenance");
  snapshot.provenance.master_seed = p.at("master_seed").get<std::uint64_t>();
  snapshot.provenance.member_seeds =
      p.at("member_seeds").get<std::vector<std::uint64_t>>();
  snapshot.provenance.lda_seed = p.at("lda_seed").get<std::uint64_t>();
  snapshot.provenance.config_digest = p.at("config_digest").get<std::string>();
  snapshot.provenance.warnings =
      p.at("warnings").get<std::vector<std::string>>();
  return snapshot;
}

void save_snapshot(const std::string& path, const YearSnapshot& snapshot) {
  write_json_file(path, snapshot_to_json(snapshot));
}

YearSnapshot load_snapshot(const std::string& path) {
  return snapshot_from_json(read_json_file(path));
}

Json manifest_to_json(const RunManifest& manifest) {
  return Json{{"schema", kRunManifestSchema},
              {"config_digest", manifest.config_digest},
              {"master_seed", manifest.master_seed},
              {"years", manifest.years},
              {"snapshot_files", manifest.snapshot_files},
              {"vocab", manifest.vocab},
              {"warnings", manifest.warnings}};
}

RunManifest manifest_from_json(const Json& j) {
  require_schema(j, kRunManifestSchema);
  RunManifest manifest;
  manifest.config_digest = j.at("config_digest").get<std::string>();
  manifest.master_seed = j.at("master_seed").get<std::uint64_t>();
  manifest.years = j.at("years").get<std::vector<int>>();
  manifest.snapshot_files =
      j.at("snapshot_files").get<std::vector<std::string>>();
  manifest.vocab = j.at("vocab").get<std::vector<std::string>>();
  manifest.warnings = j.at("warnings").get<std::vector<std::string>>();
  return manifest;
}

void save_manifest(const std::string& path, const RunManifest& manifest) {
  write_json_file(path, manifest_to_json(manifest));
}

RunManifest load_manifest(const std::string& path) {
  return manifest_from_json(read_json_file(path));
}

Json config_to_json(const PipelineConfig& config) {
  return Json{
      {"ensemble",
       Json{{"members", config.ensemble.members},
            {"quorum", config.ensemble.quorum},
            {"match_threshold", config.ensemble.match_threshold},
            {"prior_strength", config.ensemble.prior_strength},
            {"dilution_exponent", config.ensemble.dilution_exponent}}},
      {"hdp",
       Json{{"gamma", config.hdp.gamma},
            {"alpha0", config.hdp.alpha0},
            {"word_prior", config.hdp.word_prior},
            {"sweeps", config.hdp.sweeps},
            {"burn_in", config.hdp.burn_in},
            {"prune_threshold", config.hdp.prune_threshold},
            {"k_max", config.hdp.k_max}}},
      {"fit",
       Json{{"sweeps", config.fit.sweeps},
            {"burn_in", config.fit.burn_in},
            {"thin", config.fit.thin}}},
      {"master_seed", config.master_seed},
      {"allow_year_gaps", config.allow_year_gaps},
      {"drift_alarm", config.drift_alarm}};
}

PipelineConfig config_from_json(const Json& j, PipelineConfig base) {
  PipelineConfig config = std::move(base);
  if (j.contains("ensemble")) {
    const Json& e = j.at("ensemble");
    config.ensemble.members = e.value("members", config.ensemble.members);
    config.ensemble.quorum = e.value("quorum", config.ensemble.quorum);
    config.ensemble.match_threshold =
        e.value("match_threshold", config.ensemble.match_threshold);
    config.ensemble.prior_strength =
        e.value("prior_strength", config.ensemble.prior_strength);
    config.ensemble.dilution_exponent =
        e.value("dilution_exponent", config.ensemble.dilution_exponent);
  }
  if (j.contains("hdp")) {
    const Json& h = j.at("hdp");
    config.hdp.gamma = h.value("gamma", config.hdp.gamma);
    config.hdp.alpha0 = h.value("alpha0", config.hdp.alpha0);
    config.hdp.word_prior = h.value("word_prior", config.hdp.word_prior);
    config.hdp.sweeps = h.value("sweeps", config.hdp.sweeps);
    config.hdp.burn_in = h.value("burn_in", config.hdp.burn_in);
    config.hdp.prune_threshold =
        h.value("prune_threshold", config.hdp.prune_threshold);
    config.hdp.k_max = h.value("k_max", config.hdp.k_max);
  }
  if (j.contains("fit")) {
    const Json& f = j.at("fit");
    config.fit.sweeps = f.value("sweeps", config.fit.sweeps);
    config.fit.burn_in = f.value("burn_in", config.fit.burn_in);
    config.fit.thin = f.value("thin", config.fit.thin);
  }
  config.master_seed = j.value("master_seed", config.master_seed);
  config.allow_year_gaps = j.value("allow_year_gaps", config.allow_year_gaps);
  config.drift_alarm = j.value("drift_alarm", config.drift_alarm);
  return config;
}

std::string config_digest(const PipelineConfig& config) {
  // nlohmann::json orders keys, so dump() is canonical.
  const std::string canonical = config_to_json(config).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace mis
