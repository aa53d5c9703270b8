#include "slidetailor/evaluator/evaluator.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <set>

#include "slidetailor/gateway/prompt.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::evaluator {

namespace {

constexpr std::size_t kSummaryLimit = 160;

std::vector<Diagnostic> validate_subtopics(Json& v) {
  std::vector<Diagnostic> out;
  if (!gateway::schema::require_object(v, "", out)) return out;
  if (!gateway::schema::require_string_array(v, "subtopics", "", out)) return out;
  const auto& arr = v["subtopics"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (canonicalize_label(arr[i].get_ref<const std::string&>()).empty()) {
      out.push_back({"EmptyField", "/subtopics/" + std::to_string(i), "label must not be empty"});
    }
  }
  return out;
}

MetricScore run_judge(Metric metric, const std::string& prompt, const std::vector<std::filesystem::path>& images,
                      const char* purpose, gateway::ModelGateway& gateway, const gateway::ModelOptions& options) {
  auto request = gateway::make_request(prompt, options, purpose, images);
  MetricScore score;
  score.metric = metric;
  score.request_digest = gateway::request_digest(request);
  auto outcome = gateway.complete_structured(std::move(request), kJudgeSchema);
  long long s = outcome.value["score"].get<long long>();
  if (s < 1 || s > 5) {
    long long clamped = std::clamp(s, 1LL, 5LL);
    score.warnings.push_back("score " + std::to_string(s) + " clamped to " + std::to_string(clamped));
    s = clamped;
  }
  score.raw = static_cast<double>(s);
  score.normalized = normalize_judge(score.raw);
  score.reason = outcome.value["reason"].get<std::string>();
  return score;
}

std::string first_line(const std::string& text) {
  for (const auto& line : split_lines(text)) {
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.size() > kSummaryLimit) {
      // Cut on a UTF-8 boundary.
      std::size_t cut = kSummaryLimit;
      while (cut > 0 && (static_cast<unsigned char>(t[cut]) & 0xC0) == 0x80) --cut;
      t = t.substr(0, cut) + "...";
    }
    return t;
  }
  return "(no text)";
}

std::string visual_description(const deck::DeckModel& deck, std::size_t image_count) {
  std::string out = std::to_string(deck.slides.size()) + " slides";
  if (image_count > 0) out += ", screenshots attached in slide order";
  out += ".\n";
  for (std::size_t i = 0; i < deck.slides.size(); ++i) {
    std::map<std::string, int> kinds;
    for (const auto& s : deck.slides[i].shapes) ++kinds[std::string(deck::to_string(s.kind))];
    out += "Slide " + std::to_string(i + 1) + ":";
    bool first = true;
    for (const auto& [kind, n] : kinds) {
      out += (first ? " " : ", ") + std::to_string(n) + " " + kind;
      first = false;
    }
    if (kinds.empty()) out += " empty";
    out += "\n";
  }
  return out;
}

}  // namespace

std::string_view to_string(Metric metric) noexcept {
  switch (metric) {
    case Metric::Coverage: return "coverage";
    case Metric::Flow: return "flow";
    case Metric::ContentStructure: return "content_structure";
    case Metric::AestheticPref: return "aesthetic_pref";
    case Metric::Content: return "content";
    case Metric::Aesthetic: return "aesthetic";
  }
  return "coverage";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (auto m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

Json MetricScore::to_json() const {
  Json j = Json::object();
  j["metric"] = std::string(to_string(metric));
  j["raw"] = raw;
  j["normalized"] = normalized;
  j["reason"] = reason;
  j["warnings"] = warnings;
  if (!request_digest.empty()) j["request_digest"] = request_digest;
  return j;
}

MetricScore MetricScore::from_json(const Json& j) {
  MetricScore s;
  auto m = parse_metric(j.at("metric").get<std::string>());
  if (!m) throw Error(Errc::ConfigError, "unknown metric " + j.at("metric").get<std::string>());
  s.metric = *m;
  s.raw = j.at("raw").get<double>();
  s.normalized = j.at("normalized").get<double>();
  s.reason = j.value("reason", "");
  if (j.contains("warnings")) s.warnings = j["warnings"].get<std::vector<std::string>>();
  s.request_digest = j.value("request_digest", "");
  return s;
}

const MetricScore* EvalReport::find(Metric metric) const {
  for (const auto& s : scores) {
    if (s.metric == metric) return &s;
  }
  return nullptr;
}

Json EvalReport::to_json() const {
  Json j = Json::object();
  Json arr = Json::array();
  for (const auto& s : scores) arr.push_back(s.to_json());
  j["scores"] = std::move(arr);
  j["overall"] = overall;
  j["generated_subtopics"] = generated_subtopics;
  j["reference_subtopics"] = reference_subtopics;
  j["provenance"] = provenance;
  return j;
}

EvalReport EvalReport::from_json(const Json& j) {
  EvalReport r;
  for (const auto& s : j.at("scores")) r.scores.push_back(MetricScore::from_json(s));
  for (auto m : kAllMetrics) {
    if (!r.find(m)) throw Error(Errc::WrongArity, "report lacks metric " + std::string(to_string(m)));
  }
  r.overall = j.at("overall").get<double>();
  if (j.contains("generated_subtopics")) r.generated_subtopics = j["generated_subtopics"].get<SubtopicSequence>();
  if (j.contains("reference_subtopics")) r.reference_subtopics = j["reference_subtopics"].get<SubtopicSequence>();
  if (j.contains("provenance")) r.provenance = j["provenance"];
  return r;
}

void register_schemas() {
  static std::once_flag once;
  std::call_once(once, [] { gateway::schema_catalog().add(kSubtopicSchema, validate_subtopics); });
}

std::vector<std::string> slide_texts(const deck::DeckModel& deck) {
  std::vector<std::string> out;
  for (const auto& slide : deck.slides) {
    std::string text;
    for (const auto& s : slide.shapes) {
      std::string t = s.paragraphs.empty() ? s.nested_text : s.text();
      if (trim(t).empty()) continue;
      if (!text.empty()) text += "\n";
      text += t;
    }
    out.push_back(std::move(text));
  }
  return out;
}

SubtopicSequence extract_subtopics(const std::vector<std::string>& slides, gateway::ModelGateway& gateway,
                                   const gateway::ModelOptions& options) {
  register_schemas();
  if (slides.empty()) throw Error(Errc::EmptyDeck, "deck has no slides");
  std::string blocks;
  for (std::size_t i = 0; i < slides.size(); ++i) {
    if (i > 0) blocks += "\n\n";
    blocks += "### Slide " + std::to_string(i + 1) + "\n";
    blocks += trim(slides[i]).empty() ? "(no text)" : trim(slides[i]);
  }
  auto prompt = gateway::render_prompt(gateway::prompt_template("subtopic_extraction").text,
                                       {{"num_slides", std::to_string(slides.size())}, {"slides", blocks}});
  const std::size_t n = slides.size();
  auto check = [n](const Json& v) {
    std::vector<Diagnostic> out;
    if (v["subtopics"].size() != n) {
      out.push_back({"SubtopicCountMismatch", "/subtopics",
                     "expected " + std::to_string(n) + " labels, got " + std::to_string(v["subtopics"].size())});
    }
    return out;
  };
  auto outcome = gateway.complete_structured(gateway::make_request(prompt, options, "subtopic_extraction"),
                                             kSubtopicSchema, 2, check);
  SubtopicSequence seq;
  for (const auto& label : outcome.value["subtopics"]) seq.push_back(canonicalize_label(label.get<std::string>()));
  return seq;
}

double coverage_iou(const SubtopicSequence& a, const SubtopicSequence& b) {
  std::set<std::string> sa(a.begin(), a.end());
  std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t levenshtein(const SubtopicSequence& a, const SubtopicSequence& b) {
  return levenshtein(std::span<const std::string>(a), std::span<const std::string>(b));
}

double ngld(const SubtopicSequence& a, const SubtopicSequence& b) {
  return ngld(std::span<const std::string>(a), std::span<const std::string>(b));
}

double flow_score(const SubtopicSequence& generated, const SubtopicSequence& reference) {
  return (1.0 - ngld(generated, reference)) * 100.0;
}

std::string structure_text(const SubtopicSequence& subtopics, const std::vector<std::string>& slides) {
  std::string out = "Subtopic sequence: ";
  for (std::size_t i = 0; i < subtopics.size(); ++i) {
    if (i > 0) out += " -> ";
    out += subtopics[i];
  }
  out += "\n";
  for (std::size_t i = 0; i < subtopics.size(); ++i) {
    out += std::to_string(i + 1) + ". [" + subtopics[i] + "] ";
    out += i < slides.size() ? first_line(slides[i]) : std::string("(no text)");
    out += "\n";
  }
  return out;
}

MetricScore judge_content_structure(const std::string& ref_structure, const std::string& gen_structure,
                                    gateway::ModelGateway& gateway, const gateway::ModelOptions& options) {
  if (trim(ref_structure).empty() || trim(gen_structure).empty()) {
    throw Error(Errc::PreconditionFailed, "content structure judge needs both structures");
  }
  auto prompt = gateway::render_prompt(gateway::prompt_template("judge_content_structure").text,
                                       {{"ref_structure", ref_structure}, {"pres_structure", gen_structure}});
  return run_judge(Metric::ContentStructure, prompt, {}, "judge_content_structure", gateway, options);
}

MetricScore judge_aesthetic_similarity(const std::vector<std::filesystem::path>& gen_images,
                                       const std::vector<std::filesystem::path>& template_images,
                                       gateway::ModelGateway& gateway, const gateway::ModelOptions& options) {
  if (gen_images.empty()) throw Error(Errc::MissingRender, "no rendered images of the generated deck");
  if (template_images.empty()) throw Error(Errc::MissingRender, "no rendered images of the template");
  auto prompt = gateway::render_prompt(gateway::prompt_template("judge_aesthetic_similarity").text,
                                       {{"num_of_target_slide", std::to_string(gen_images.size())},
                                        {"num_of_template_slide", std::to_string(template_images.size())}});
  std::vector<std::filesystem::path> images = gen_images;
  images.insert(images.end(), template_images.begin(), template_images.end());
  return run_judge(Metric::AestheticPref, prompt, images, "judge_aesthetic_similarity", gateway, options);
}

MetricScore judge_content_quality(const std::string& paper_text, const std::vector<std::filesystem::path>& gen_images,
                                  gateway::ModelGateway& gateway, const gateway::ModelOptions& options) {
  if (trim(paper_text).empty()) throw Error(Errc::PreconditionFailed, "content judge needs the paper text");
  if (gen_images.empty()) throw Error(Errc::MissingRender, "no rendered images of the generated deck");
  auto prompt =
      gateway::render_prompt(gateway::prompt_template("judge_content").text, {{"paper", paper_text}});
  return run_judge(Metric::Content, prompt, gen_images, "judge_content", gateway, options);
}

MetricScore judge_visual_quality(const std::string& descr, const std::vector<std::filesystem::path>& gen_images,
                                 gateway::ModelGateway& gateway, const gateway::ModelOptions& options) {
  if (trim(descr).empty()) throw Error(Errc::PreconditionFailed, "visual judge needs a description");
  auto prompt = gateway::render_prompt(gateway::prompt_template("judge_visual").text, {{"descr", descr}});
  return run_judge(Metric::Aesthetic, prompt, gen_images, "judge_visual", gateway, options);
}

double normalize_judge(double score) {
  if (!(score >= 1.0 && score <= 5.0)) {
    throw Error(Errc::OutOfRange, "judge score " + std::to_string(score) + " is outside [1, 5]");
  }
  return score * 20.0;
}

double overall(std::span<const double> scores) {
  if (scores.size() != kAllMetrics.size()) {
    throw Error(Errc::WrongArity, "overall needs 6 scores, got " + std::to_string(scores.size()));
  }
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw Error(Errc::ArityMismatch, "pearson needs two equal-length samples of size >= 2");
  }
  const double n = static_cast<double>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::ZeroVariance, "pearson input has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw Error(Errc::ConfigError, "ratings line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

std::vector<Rating> load_ratings_csv(const std::filesystem::path& path) {
  std::string data;
  try {
    data = read_file(path);
  } catch (const Error& e) {
    throw Error(Errc::IoError, "cannot read ratings " + path.string() + ": " + e.what());
  }
  auto lines = split_lines(data);
  std::vector<Rating> out;
  std::map<std::string, std::size_t> col;
  bool header = false;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    auto fields = split_csv_row(lines[n], n + 1);
    if (!header) {
      for (std::size_t i = 0; i < fields.size(); ++i) col[trim(fields[i])] = i;
      for (const char* name : {"case_id", "rater_id", "metric", "score"}) {
        if (!col.count(name)) throw Error(Errc::ConfigError, std::string("ratings header lacks column ") + name);
      }
      header = true;
      continue;
    }
    auto get = [&](const char* name) -> std::string {
      std::size_t i = col[name];
      if (i >= fields.size()) {
        throw Error(Errc::ConfigError, "ratings line " + std::to_string(n + 1) + ": missing " + name);
      }
      return trim(fields[i]);
    };
    Rating r{get("case_id"), get("rater_id"), get("metric"), 0.0};
    std::string score = get("score");
    auto [p, ec] = std::from_chars(score.data(), score.data() + score.size(), r.score);
    if (ec != std::errc() || p != score.data() + score.size() || !std::isfinite(r.score)) {
      throw Error(Errc::ConfigError, "ratings line " + std::to_string(n + 1) + ": bad score '" + score + "'");
    }
    out.push_back(std::move(r));
  }
  if (!header) throw Error(Errc::ConfigError, "ratings file is empty");
  return out;
}

PairedScores pair_ratings(const std::vector<Rating>& ratings, const std::string& rater_x, const std::string& rater_y) {
  using Key = std::pair<std::string, std::string>;
  std::map<Key, double> x;
  std::map<Key, std::pair<double, int>> y;
  for (const auto& r : ratings) {
    Key key{r.case_id, r.metric};
    if (r.rater_id == rater_x) {
      x[key] = r.score;
    } else if (rater_y.empty() || r.rater_id == rater_y) {
      auto& acc = y[key];
      acc.first += r.score;
      ++acc.second;
    }
  }
  PairedScores out;
  for (const auto& [key, score] : x) {
    auto it = y.find(key);
    if (it == y.end()) continue;
    out.xs.push_back(score);
    out.ys.push_back(it->second.first / it->second.second);
  }
  return out;
}

EvalReport evaluate(const EvalInputs& inputs, gateway::ModelGateway& gateway, const gateway::ModelOptions& options) {
  if (!inputs.generated) throw Error(Errc::PreconditionFailed, "evaluation needs the generated deck");
  EvalReport report;
  auto gen_text = slide_texts(*inputs.generated);
  const auto& ref_text = inputs.reference_slides;
  report.generated_subtopics = extract_subtopics(gen_text, gateway, options);
  report.reference_subtopics = extract_subtopics(ref_text, gateway, options);

  MetricScore coverage;
  coverage.metric = Metric::Coverage;
  coverage.raw = coverage_iou(report.generated_subtopics, report.reference_subtopics);
  coverage.normalized = coverage.raw * 100.0;
  report.scores.push_back(coverage);

  MetricScore flow;
  flow.metric = Metric::Flow;
  flow.normalized = flow_score(report.generated_subtopics, report.reference_subtopics);
  flow.raw = flow.normalized / 100.0;
  report.scores.push_back(flow);

  report.scores.push_back(judge_content_structure(structure_text(report.reference_subtopics, ref_text),
                                                  structure_text(report.generated_subtopics, gen_text), gateway,
                                                  options));
  report.scores.push_back(
      judge_aesthetic_similarity(inputs.generated_images, inputs.template_images, gateway, options));
  report.scores.push_back(judge_content_quality(inputs.paper_text, inputs.generated_images, gateway, options));
  report.scores.push_back(judge_visual_quality(
      visual_description(*inputs.generated, inputs.generated_images.size()), inputs.generated_images, gateway,
      options));

  std::vector<double> values;
  for (const auto& s : report.scores) values.push_back(s.normalized);
  report.overall = overall(values);
  report.provenance["model_id"] = options.model_id;
  report.provenance["mode"] = std::string(gateway::to_string(gateway.mode()));
  Json prompts = Json::object();
  for (const char* name : {"subtopic_extraction", "judge_content_structure", "judge_aesthetic_similarity",
                           "judge_content", "judge_visual"}) {
    prompts[name] = std::string(gateway::prompt_template(name).version);
  }
  report.provenance["prompt_versions"] = std::move(prompts);
  return report;
}

EvalReport report_from_values(std::span<const double> normalized) {
  if (normalized.size() != kAllMetrics.size()) {
    throw Error(Errc::WrongArity, "expected 6 values, got " + std::to_string(normalized.size()));
  }
  EvalReport report;
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
    MetricScore s;
    s.metric = kAllMetrics[i];
    s.normalized = normalized[i];
    s.raw = i < 2 ? normalized[i] / 100.0 : normalized[i] / 20.0;
    report.scores.push_back(s);
  }
  report.overall = overall(normalized);
  return report;
}

}  // namespace slidetailor::evaluator
