#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <thread>

#include "slidetailor/bench/bench.hpp"
#include "slidetailor/deck/deck.hpp"
#include "slidetailor/distill/preferences.hpp"
#include "slidetailor/ingest/bundle.hpp"
#include "slidetailor/planner/planner.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::bench {

namespace fs = std::filesystem;

Json config_to_json(const PipelineConfig& config) {
  Json j = Json::object();
  j["model"] = config.model.model_id;
  j["temperature"] = config.model.temperature;
  j["max_tokens"] = config.model.max_tokens;
  j["endpoint"] = config.http.endpoint;
  j["render_command"] = config.render_command;
  j["pdf_extractor"] = config.pdf_extractor;
  j["evaluate"] = config.evaluate;
  j["embed_notes"] = config.realize.embed_notes;
  j["overflow_threshold"] = config.realize.overflow_threshold;
  return j;
}

Json RunRecord::to_json() const {
  Json j = Json::object();
  j["job"] = job.to_json();
  Json a = Json::object();
  for (const auto& [name, rel] : artifacts) a[name] = rel;
  j["artifacts"] = std::move(a);
  j["notes"] = notes;
  if (eval) j["overall"] = eval->overall;
  if (failure) {
    Json f = Json::object();
    f["stage"] = failure->stage;
    f["code"] = failure->code;
    f["message"] = failure->message;
    Json d = Json::array();
    for (const auto& x : failure->diagnostics) d.push_back({{"code", x.code}, {"path", x.path}, {"message", x.message}});
    f["diagnostics"] = std::move(d);
    j["failure"] = std::move(f);
  }
  return j;
}

RunRecord load_run_record(const fs::path& run_dir) {
  Json j;
  try {
    j = Json::parse(read_file(run_dir / "run_record.json"));
  } catch (const Json::parse_error& e) {
    throw Error(Errc::IoError, "corrupt run record in " + run_dir.string() + ": " + e.what());
  }
  RunRecord r;
  r.run_dir = run_dir;
  r.job = JobSpec::from_json(j.at("job"));
  for (const auto& [name, rel] : j.at("artifacts").items()) r.artifacts[name] = rel.get<std::string>();
  if (j.contains("notes")) r.notes = j["notes"].get<std::vector<std::string>>();
  if (j.contains("failure")) {
    const auto& f = j["failure"];
    Failure fail{f.value("stage", ""), f.value("code", ""), f.value("message", ""), {}};
    for (const auto& d : f.value("diagnostics", Json::array())) {
      fail.diagnostics.push_back({d.value("code", ""), d.value("path", ""), d.value("message", "")});
    }
    r.failure = std::move(fail);
  }
  auto it = r.artifacts.find("eval_report");
  if (it != r.artifacts.end()) {
    r.eval = evaluator::EvalReport::from_json(Json::parse(read_file(run_dir / it->second)));
  }
  if (fs::exists(run_dir / "timings.json")) {
    for (const auto& [k, v] : Json::parse(read_file(run_dir / "timings.json")).items()) r.timings_ms[k] = v.get<double>();
  }
  return r;
}

namespace {

std::string sanitize(std::string_view tag) {
  std::string out;
  for (char c : tag) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') ? c : '_';
  return out;
}

// Writes one file per exchange into requests/, numbered in call order.
class RequestLog {
 public:
  explicit RequestLog(fs::path dir) : dir_(std::move(dir)) {}

  void operator()(const gateway::ChatRequest& request, const std::string& digest, const std::string& response) {
    std::lock_guard lock(mutex_);
    Json msgs = Json::array();
    for (const auto& m : request.messages) {
      Json images = Json::array();
      for (const auto& img : m.image_refs) images.push_back(sha256_hex(read_file(img)));
      msgs.push_back({{"role", std::string(gateway::to_string(m.role))}, {"text", m.text}, {"images", images}});
    }
    Json j = Json::object();
    j["digest"] = digest;
    j["purpose_tag"] = request.purpose_tag;
    j["model_id"] = request.model_id;
    j["temperature"] = request.temperature;
    j["messages"] = std::move(msgs);
    j["response"] = response;
    char name[16];
    std::snprintf(name, sizeof name, "%03d_", ++count_);
    write_file(dir_ / (name + sanitize(request.purpose_tag) + ".json"), j.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::mutex mutex_;
  int count_ = 0;
};

std::vector<std::string> reference_slide_texts(const fs::path& path, const ingest::PaperBundle& bundle) {
  if (path.extension() == ".pptx") return evaluator::slide_texts(deck::parse_deck_file(path));
  std::vector<std::string> out;
  for (const auto& s : bundle.sections) out.push_back(s.heading.empty() ? s.text : s.heading + "\n" + s.text);
  return out;
}

}  // namespace

RunRecord run_pipeline(const JobSpec& job, const PipelineConfig& config, const fs::path& run_dir,
                       std::shared_ptr<gateway::ChatBackend> backend) {
  using Clock = std::chrono::steady_clock;
  RunRecord rec;
  rec.job = job;
  rec.run_dir = run_dir;
  std::string stage = "setup";
  auto stage_start = Clock::now();
  auto finish_stage = [&](const std::string& next) {
    auto now = Clock::now();
    rec.timings_ms[stage] = std::chrono::duration<double, std::milli>(now - stage_start).count();
    stage = next;
    stage_start = now;
  };
  auto save = [&](const std::string& name, const std::string& file, const Json& value) {
    write_file_atomic(run_dir / file, value.dump(2) + "\n");
    rec.artifacts[name] = file;
  };

  try {
    fs::create_directories(run_dir);
    // Stale artifacts from an earlier run must not leak into this one.
    for (const char* stale : {"requests", "render", "extract", "job.json", "content_pref.json", "aesthetic_pref.json",
                              "reorganized.json", "outline.json", "outline_selected.json", "deck.pptx",
                              "realize_report.json", "narration.json", "narration.txt", "eval_report.json",
                              "timings.json", "run_record.json"}) {
      fs::remove_all(run_dir / stale);
    }
    job.validate();
    save("job", "job.json", job.to_json());

    std::shared_ptr<gateway::TranscriptStore> store;
    if (!job.transcripts.empty()) store = std::make_shared<gateway::TranscriptStore>(job.transcripts);
    gateway::ModelGateway gw(job.mode, store, job.mode == gateway::Mode::Replay ? nullptr : backend);
    RequestLog log(run_dir / "requests");
    gw.set_observer([&log](const gateway::ChatRequest& r, const std::string& d, const std::string& resp) {
      log(r, d, resp);
    });
    const auto& opts = config.model;

    finish_stage("load");
    auto target = ingest::load_any(job.target_paper, config.pdf_extractor, run_dir / "extract");
    auto ref_paper = ingest::load_any(job.pair.ref_paper, config.pdf_extractor, run_dir / "extract");
    auto ref_slides = ingest::load_any(job.pair.ref_slides, config.pdf_extractor, run_dir / "extract");
    std::string template_bytes = read_file(job.template_path);
    auto tmpl = deck::parse_deck(template_bytes);

    finish_stage("distill");
    std::optional<distill::ContentPreferenceProfile> content;
    if (job.flags.content_pref) {
      content = distill::distill_content_preferences(ref_paper, ref_slides, gw, opts);
      save("content_pref", "content_pref.json", content->to_json());
    }
    auto aesthetic = distill::distill_aesthetic_profile(tmpl, gw, opts);
    save("aesthetic_pref", "aesthetic_pref.json", aesthetic.to_json());

    finish_stage("reorganize");
    auto doc = planner::reorganize_paper(target, content, gw, opts);
    save("reorganized", "reorganized.json", doc.to_json());

    finish_stage("outline");
    planner::OutlineOptions outline_opts{job.num_slides, job.flags.chain_of_speech};
    auto outline = planner::generate_outline(doc, content, target.assets, outline_opts, gw, opts);
    save("outline", "outline.json", outline);

    finish_stage("select");
    auto selected = planner::select_layouts(outline, aesthetic, gw, opts);
    save("outline_selected", "outline_selected.json", selected);

    finish_stage("realize");
    std::vector<realizer::ElementMapping> mappings;
    for (const auto& [key, entry] : selected.items()) {
      mappings.push_back(realizer::map_content_to_elements(key, entry, doc, tmpl, aesthetic, target.assets, gw, opts));
    }
    auto realized = realizer::realize_deck(tmpl, selected, mappings, target.assets, config.realize);
    realized.report.output_path = "deck.pptx";
    std::string deck_bytes = deck::serialize_deck(realized.deck);
    write_file_atomic(run_dir / "deck.pptx", deck_bytes);
    rec.artifacts["deck"] = "deck.pptx";
    save("realize_report", "realize_report.json", realized.report.to_json());

    finish_stage("narration");
    if (job.flags.chain_of_speech) {
      realizer::export_narration(selected, run_dir);
      rec.artifacts["narration"] = "narration.json";
      rec.artifacts["narration_text"] = "narration.txt";
    } else {
      rec.notes.push_back("narration skipped: chain-of-speech is off, so the outline carries no speech drafts");
    }

    if (config.evaluate) {
      finish_stage("evaluate");
      deck::RenderOptions render{config.render_command, {}};
      evaluator::EvalInputs inputs;
      inputs.generated = &realized.deck;
      inputs.reference_slides = reference_slide_texts(job.pair.ref_slides, ref_slides);
      inputs.paper_text = planner::paper_prompt_text(target);
      inputs.generated_images = deck::render_slides(deck_bytes, render, run_dir / "render" / "generated");
      inputs.template_images = deck::render_slides(template_bytes, render, run_dir / "render" / "template");
      auto report = evaluator::evaluate(inputs, gw, opts);
      save("eval_report", "eval_report.json", report.to_json());
      rec.eval = std::move(report);
    }
    finish_stage("done");
  } catch (const Error& e) {
    rec.failure = Failure{stage, std::string(to_string(e.code())), e.what(), e.diagnostics()};
  } catch (const std::exception& e) {
    rec.failure = Failure{stage, "Internal", e.what(), {}};
  }
  if (rec.failure) finish_stage("failed");

  try {
    if (job.mode != gateway::Mode::Replay) {
      Json t = Json::object();
      for (const auto& [k, v] : rec.timings_ms) t[k] = v;
      write_file_atomic(run_dir / "timings.json", t.dump(2) + "\n");
    }
    write_file_atomic(run_dir / "run_record.json", rec.to_json().dump(2) + "\n");
  } catch (const std::exception& e) {
    if (!rec.failure) rec.failure = Failure{"persist", "IoError", e.what(), {}};
  }
  return rec;
}

std::vector<RunRecord> run_jobs(const std::vector<JobSpec>& jobs, const PipelineConfig& config, const fs::path& out_dir,
                                std::shared_ptr<gateway::ChatBackend> backend) {
  std::vector<RunRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      records[i] = run_pipeline(jobs[i], config, out_dir / jobs[i].job_id, backend);
    }
  };
  std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, config.workers)), jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return records;
}

}  // namespace slidetailor::bench
