#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "slidetailor/error.hpp"
#include "slidetailor/evaluator/evaluator.hpp"
#include "slidetailor/gateway/backend.hpp"
#include "slidetailor/gateway/gateway.hpp"
#include "slidetailor/json.hpp"
#include "slidetailor/realizer/realizer.hpp"

namespace slidetailor::bench {

struct SamplePair {
  std::filesystem::path ref_paper;
  std::filesystem::path ref_slides;
  bool operator==(const SamplePair&) const = default;
};

struct Manifest {
  std::vector<std::filesystem::path> papers;
  std::vector<SamplePair> sample_pairs;
  std::vector<std::filesystem::path> templates;

  std::uint64_t combination_count() const;
};

/// Paths are resolved against `base_dir`. Throws EmptyList, MissingPath
/// (diagnostic path names the entry), ConfigError for a malformed document.
Manifest manifest_from_json(const Json& j, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);

struct JobFlags {
  bool content_pref = true;
  bool chain_of_speech = true;
  bool operator==(const JobFlags&) const = default;
};

/// "full", "no_content_pref", "no_chain_of_speech" or both joined by '+'.
std::string ablation_label(const JobFlags& flags);

struct JobSpec {
  std::string job_id;
  std::filesystem::path target_paper;
  SamplePair pair;
  std::filesystem::path template_path;
  int num_slides = 10;
  JobFlags flags;
  std::uint64_t seed = 0;
  gateway::Mode mode = gateway::Mode::Live;
  std::filesystem::path transcripts;

  /// Throws PreconditionFailed (num_slides < 2) or ConfigError (replay or
  /// record without a transcript directory).
  void validate() const;
  Json to_json() const;
  static JobSpec from_json(const Json& j);
  bool operator==(const JobSpec&) const = default;
};

/// Uniform draw from [0, bound) by rejection on the raw 64-bit output, so
/// the sequence depends only on mt19937_64 and not on the standard library.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound);

/// Partial Fisher-Yates over paper indices (n draws), then one pair draw and
/// one template draw per job in job order. Throws NotEnoughPapers.
std::vector<JobSpec> sample_jobs(const Manifest& manifest, std::size_t n, std::uint64_t seed);

struct PipelineConfig {
  gateway::ModelOptions model;
  gateway::HttpBackendConfig http;
  /// Slide renderer, invoked as `<command> <pptx> <out_dir>`.
  std::string render_command;
  /// PDF extractor, used when a paper path ends in .pdf.
  std::string pdf_extractor;
  bool evaluate = true;
  int workers = 4;
  realizer::RealizeOptions realize;
};

Json config_to_json(const PipelineConfig& config);

struct Failure {
  std::string stage;
  std::string code;
  std::string message;
  std::vector<Diagnostic> diagnostics;
};

struct RunRecord {
  JobSpec job;
  std::filesystem::path run_dir;
  /// Artifact name to path relative to run_dir.
  std::map<std::string, std::string> artifacts;
  std::optional<evaluator::EvalReport> eval;
  std::map<std::string, double> timings_ms;
  std::vector<std::string> notes;
  std::optional<Failure> failure;

  bool ok() const noexcept { return !failure.has_value(); }
  Json to_json() const;
};

/// Reads run_record.json (and eval_report.json when listed).
RunRecord load_run_record(const std::filesystem::path& run_dir);

/// Runs distill, reorganize, outline, select, realize, narration and
/// (optionally) evaluate, persisting each artifact into `run_dir`. Stage
/// errors are captured in the record instead of thrown. `backend` serves
/// live and record modes.
RunRecord run_pipeline(const JobSpec& job, const PipelineConfig& config, const std::filesystem::path& run_dir,
                       std::shared_ptr<gateway::ChatBackend> backend = nullptr);

/// Runs jobs on a bounded pool; each job writes to out_dir/<job_id>.
/// Records come back in job order.
std::vector<RunRecord> run_jobs(const std::vector<JobSpec>& jobs, const PipelineConfig& config,
                                const std::filesystem::path& out_dir,
                                std::shared_ptr<gateway::ChatBackend> backend = nullptr);

struct ReportRow {
  std::string label;
  std::size_t cases = 0;
  std::array<double, 6> means{};
  double overall = 0.0;
};

struct ReportTable {
  std::vector<ReportRow> rows;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;

  std::string to_csv() const;
  std::string to_text() const;
};

/// One row per ablation configuration, averaging evaluated records; failed
/// or unevaluated records are counted in `excluded`. Throws
/// NoEvaluatedRecords.
ReportTable aggregate_report(const std::vector<RunRecord>& records);

}  // namespace slidetailor::bench
