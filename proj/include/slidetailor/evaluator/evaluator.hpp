#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slidetailor/deck/deck.hpp"
#include "slidetailor/gateway/gateway.hpp"
#include "slidetailor/json.hpp"

namespace slidetailor::evaluator {

inline constexpr const char* kSubtopicSchema = "subtopics";
inline constexpr const char* kJudgeSchema = "judge_lenient";

using SubtopicSequence = std::vector<std::string>;

enum class Metric { Coverage, Flow, ContentStructure, AestheticPref, Content, Aesthetic };

inline constexpr std::array<Metric, 6> kAllMetrics = {Metric::Coverage,      Metric::Flow,
                                                      Metric::ContentStructure, Metric::AestheticPref,
                                                      Metric::Content,       Metric::Aesthetic};

std::string_view to_string(Metric metric) noexcept;
std::optional<Metric> parse_metric(std::string_view name);

struct MetricScore {
  Metric metric = Metric::Coverage;
  /// IoU in [0,1], 1 - NGLD in [0,1], or a judge score in {1..5}.
  double raw = 0.0;
  double normalized = 0.0;
  std::string reason;
  std::vector<std::string> warnings;
  /// Digest of the first request for judged metrics.
  std::string request_digest;

  Json to_json() const;
  static MetricScore from_json(const Json& j);
};

struct EvalReport {
  std::vector<MetricScore> scores;
  double overall = 0.0;
  SubtopicSequence generated_subtopics;
  SubtopicSequence reference_subtopics;
  Json provenance = Json::object();

  const MetricScore* find(Metric metric) const;
  Json to_json() const;
  /// Throws WrongArity when the six metrics are not all present.
  static EvalReport from_json(const Json& j);
};

void register_schemas();

/// One text block per slide, taken from the shapes' visible text.
std::vector<std::string> slide_texts(const deck::DeckModel& deck);

/// Throws EmptyDeck, ExhaustedRepairs. One canonical label per slide.
SubtopicSequence extract_subtopics(const std::vector<std::string>& slides, gateway::ModelGateway& gateway,
                                   const gateway::ModelOptions& options = {});

/// Set IoU; 1 when both are empty.
double coverage_iou(const SubtopicSequence& a, const SubtopicSequence& b);

template <class T>
std::size_t levenshtein(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

template <class T>
double ngld(std::span<const T> a, std::span<const T> b) {
  std::size_t l = levenshtein(a, b);
  if (l == 0) return 0.0;
  return 2.0 * static_cast<double>(l) / static_cast<double>(a.size() + b.size() + l);
}

std::size_t levenshtein(const SubtopicSequence& a, const SubtopicSequence& b);
double ngld(const SubtopicSequence& a, const SubtopicSequence& b);
/// (1 - NGLD) * 100.
double flow_score(const SubtopicSequence& generated, const SubtopicSequence& reference);

/// Numbered subtopic lines with a one-line summary of each slide.
std::string structure_text(const SubtopicSequence& subtopics, const std::vector<std::string>& slides);

/// Judges clamp the parsed score to [1,5] and record a warning when they do.
/// All throw ExhaustedRepairs when no acceptable answer arrives.
MetricScore judge_content_structure(const std::string& ref_structure, const std::string& gen_structure,
                                    gateway::ModelGateway& gateway, const gateway::ModelOptions& options = {});
/// Throws MissingRender when either image list is empty.
MetricScore judge_aesthetic_similarity(const std::vector<std::filesystem::path>& gen_images,
                                       const std::vector<std::filesystem::path>& template_images,
                                       gateway::ModelGateway& gateway, const gateway::ModelOptions& options = {});
/// Throws PreconditionFailed for blank paper text, MissingRender for no images.
MetricScore judge_content_quality(const std::string& paper_text, const std::vector<std::filesystem::path>& gen_images,
                                  gateway::ModelGateway& gateway, const gateway::ModelOptions& options = {});
/// Throws PreconditionFailed for a blank description. Images are optional.
MetricScore judge_visual_quality(const std::string& descr, const std::vector<std::filesystem::path>& gen_images,
                                 gateway::ModelGateway& gateway, const gateway::ModelOptions& options = {});

/// score * 20. Throws OutOfRange outside [1,5].
double normalize_judge(double score);
/// Mean of exactly six values. Throws WrongArity.
double overall(std::span<const double> scores);
/// Sample correlation. Throws ArityMismatch, ZeroVariance.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct Rating {
  std::string case_id;
  std::string rater_id;
  std::string metric;
  double score = 0.0;
};

/// Header row case_id,rater_id,metric,score. Throws IoError, ConfigError.
std::vector<Rating> load_ratings_csv(const std::filesystem::path& path);

struct PairedScores {
  std::vector<double> xs;
  std::vector<double> ys;
};

/// Pairs rater_x's scores with the mean of rater_y's over the same
/// (case_id, metric). An empty rater_y means every other rater.
PairedScores pair_ratings(const std::vector<Rating>& ratings, const std::string& rater_x,
                          const std::string& rater_y = {});

struct EvalInputs {
  const deck::DeckModel* generated = nullptr;
  /// Text of each reference slide, in order.
  std::vector<std::string> reference_slides;
  std::string paper_text;
  std::vector<std::filesystem::path> generated_images;
  std::vector<std::filesystem::path> template_images;
};

/// Runs extraction, the computed metrics and the four judges.
EvalReport evaluate(const EvalInputs& inputs, gateway::ModelGateway& gateway,
                    const gateway::ModelOptions& options = {});

/// Builds a report from six normalized values given in kAllMetrics order.
EvalReport report_from_values(std::span<const double> normalized);

}  // namespace slidetailor::evaluator
