#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "slidetailor/bench/bench.hpp"
#include "slidetailor/deck/deck.hpp"
#include "slidetailor/distill/preferences.hpp"
#include "slidetailor/evaluator/evaluator.hpp"
#include "slidetailor/ingest/bundle.hpp"
#include "slidetailor/planner/planner.hpp"
#include "slidetailor/realizer/realizer.hpp"
#include "slidetailor/util.hpp"

namespace fs = std::filesystem;
using namespace slidetailor;

namespace {

struct Globals {
  int num_slides = 10;
  bool no_content_pref = false;
  bool no_chain_of_speech = false;
  std::string mode = "live";
  std::string transcripts;
  std::uint64_t seed = 0;
};

struct Paths {
  std::string target, ref_paper, ref_slides, template_path, out;
  std::string prefs, plan, deck, manifest, runs;
  std::size_t n = 0;
};

class Session {
 public:
  Session(const Globals& g, const bench::PipelineConfig& c) : globals_(g), config_(c) {}

  gateway::ModelGateway& gateway() {
    if (!gw_) {
      auto mode = gateway::parse_mode(globals_.mode);
      std::shared_ptr<gateway::TranscriptStore> store;
      if (!globals_.transcripts.empty()) store = std::make_shared<gateway::TranscriptStore>(globals_.transcripts);
      std::shared_ptr<gateway::ChatBackend> backend;
      if (mode != gateway::Mode::Replay) backend = std::make_shared<gateway::HttpChatBackend>(config_.http);
      gw_ = std::make_unique<gateway::ModelGateway>(mode, store, backend);
    }
    return *gw_;
  }

  std::shared_ptr<gateway::ChatBackend> backend() const {
    if (gateway::parse_mode(globals_.mode) == gateway::Mode::Replay) return nullptr;
    return std::make_shared<gateway::HttpChatBackend>(config_.http);
  }

  ingest::PaperBundle load(const std::string& path) const {
    return ingest::load_any(path, config_.pdf_extractor, fs::temp_directory_path() / "slidetailor-extract");
  }

  const gateway::ModelOptions& model() const { return config_.model; }

 private:
  const Globals& globals_;
  const bench::PipelineConfig& config_;
  std::unique_ptr<gateway::ModelGateway> gw_;
};

void save_json(const fs::path& path, const Json& value) {
  write_file_atomic(path, value.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

Json load_json(const fs::path& path) { return Json::parse(read_file(path)); }

int do_distill(const Globals& g, Session& s, const Paths& p) {
  fs::create_directories(p.out);
  if (!g.no_content_pref) {
    auto content = distill::distill_content_preferences(s.load(p.ref_paper), s.load(p.ref_slides), s.gateway(), s.model());
    save_json(fs::path(p.out) / "content_pref.json", content.to_json());
  }
  auto aesthetic = distill::distill_aesthetic_profile(deck::parse_deck_file(p.template_path), s.gateway(), s.model());
  save_json(fs::path(p.out) / "aesthetic_pref.json", aesthetic.to_json());
  return 0;
}

std::optional<distill::ContentPreferenceProfile> load_content(const Globals& g, const fs::path& dir) {
  if (g.no_content_pref || !fs::exists(dir / "content_pref.json")) return std::nullopt;
  auto v = distill::validate_content_profile(load_json(dir / "content_pref.json"));
  if (!v.profile) throw Error(Errc::ConfigError, "invalid content_pref.json", v.diagnostics);
  return v.profile;
}

int do_plan(const Globals& g, Session& s, const Paths& p) {
  fs::path prefs = p.prefs;
  auto content = load_content(g, prefs);
  auto aesthetic = distill::AestheticProfile::from_json(load_json(prefs / "aesthetic_pref.json"));
  auto target = s.load(p.target);
  fs::create_directories(p.out);
  auto doc = planner::reorganize_paper(target, content, s.gateway(), s.model());
  save_json(fs::path(p.out) / "reorganized.json", doc.to_json());
  auto outline = planner::generate_outline(doc, content, target.assets, {g.num_slides, !g.no_chain_of_speech},
                                           s.gateway(), s.model());
  save_json(fs::path(p.out) / "outline.json", outline);
  auto selected = planner::select_layouts(outline, aesthetic, s.gateway(), s.model());
  save_json(fs::path(p.out) / "outline_selected.json", selected);
  return 0;
}

int do_realize(const Globals& g, Session& s, const Paths& p, const bench::PipelineConfig& config) {
  fs::path plan = p.plan;
  auto doc = planner::ReorganizedDoc::from_json(load_json(plan / "reorganized.json"));
  auto selected = load_json(plan / "outline_selected.json");
  auto aesthetic = distill::AestheticProfile::from_json(load_json(fs::path(p.prefs.empty() ? p.plan : p.prefs) /
                                                                  "aesthetic_pref.json"));
  auto target = s.load(p.target);
  auto tmpl = deck::parse_deck_file(p.template_path);
  std::vector<realizer::ElementMapping> mappings;
  for (const auto& [key, entry] : selected.items()) {
    mappings.push_back(
        realizer::map_content_to_elements(key, entry, doc, tmpl, aesthetic, target.assets, s.gateway(), s.model()));
  }
  auto realized = realizer::realize_deck(tmpl, selected, mappings, target.assets, config.realize);
  fs::create_directories(p.out);
  fs::path deck_path = fs::path(p.out) / "deck.pptx";
  write_file_atomic(deck_path, deck::serialize_deck(realized.deck));
  std::cout << "wrote " << deck_path.string() << " (" << realized.deck.slides.size() << " slides)\n";
  realized.report.output_path = "deck.pptx";
  save_json(fs::path(p.out) / "realize_report.json", realized.report.to_json());
  if (!g.no_chain_of_speech) {
    realizer::export_narration(selected, p.out);
    std::cout << "wrote narration.json and narration.txt\n";
  }
  return 0;
}

bench::JobSpec job_from(const Globals& g, const Paths& p) {
  bench::JobSpec job;
  job.job_id = "generate";
  job.target_paper = p.target;
  job.pair = {p.ref_paper, p.ref_slides};
  job.template_path = p.template_path;
  job.num_slides = g.num_slides;
  job.flags = {!g.no_content_pref, !g.no_chain_of_speech};
  job.seed = g.seed;
  job.mode = gateway::parse_mode(g.mode);
  job.transcripts = g.transcripts;
  return job;
}

void print_failure(const bench::RunRecord& rec) {
  const auto& f = *rec.failure;
  std::cerr << rec.job.job_id << ": failed in " << f.stage << " with " << f.code << ": " << f.message << "\n";
  for (const auto& d : f.diagnostics) std::cerr << "  [" << d.code << "] " << d.path << ": " << d.message << "\n";
}

int do_generate(const Globals& g, Session& s, const Paths& p, const bench::PipelineConfig& config) {
  auto rec = bench::run_pipeline(job_from(g, p), config, p.out, s.backend());
  if (!rec.ok()) {
    print_failure(rec);
    return 1;
  }
  std::cout << "run directory: " << p.out << "\n";
  for (const auto& n : rec.notes) std::cout << "note: " << n << "\n";
  if (rec.eval) {
    for (const auto& m : rec.eval->scores) {
      std::printf("%-18s %7.2f\n", std::string(evaluator::to_string(m.metric)).c_str(), m.normalized);
    }
    std::printf("%-18s %7.2f\n", "overall", rec.eval->overall);
  }
  return 0;
}

int do_evaluate(Session& s, const Paths& p, const bench::PipelineConfig& config) {
  std::string deck_bytes = read_file(p.deck);
  auto generated = deck::parse_deck(deck_bytes);
  std::vector<std::string> ref_texts;
  if (fs::path(p.ref_slides).extension() == ".pptx") {
    ref_texts = evaluator::slide_texts(deck::parse_deck_file(p.ref_slides));
  } else {
    for (const auto& sec : s.load(p.ref_slides).sections) ref_texts.push_back(sec.heading + "\n" + sec.text);
  }
  fs::path out = p.out.empty() ? fs::path(p.deck).parent_path() : fs::path(p.out);
  deck::RenderOptions render{config.render_command, {}};
  evaluator::EvalInputs inputs;
  inputs.generated = &generated;
  inputs.reference_slides = ref_texts;
  inputs.paper_text = planner::paper_prompt_text(s.load(p.target));
  inputs.generated_images = deck::render_slides(deck_bytes, render, out / "render" / "generated");
  inputs.template_images = deck::render_slides(read_file(p.template_path), render, out / "render" / "template");
  auto report = evaluator::evaluate(inputs, s.gateway(), s.model());
  save_json(out / "eval_report.json", report.to_json());
  std::printf("overall %.2f\n", report.overall);
  return 0;
}

void write_report(const std::vector<bench::RunRecord>& records, const fs::path& dir) {
  auto table = bench::aggregate_report(records);
  write_file_atomic(dir / "report.csv", table.to_csv());
  write_file_atomic(dir / "report.txt", table.to_text());
  std::cout << table.to_text();
}

int do_bench(const Globals& g, Session& s, const Paths& p, const bench::PipelineConfig& config) {
  auto manifest = bench::load_manifest(p.manifest);
  std::cout << "manifest: " << manifest.papers.size() << " papers, " << manifest.sample_pairs.size() << " pairs, "
            << manifest.templates.size() << " templates, " << manifest.combination_count() << " combinations\n";
  std::size_t n = p.n == 0 ? manifest.papers.size() : p.n;
  auto jobs = bench::sample_jobs(manifest, n, g.seed);
  for (auto& job : jobs) {
    job.num_slides = g.num_slides;
    job.flags = {!g.no_content_pref, !g.no_chain_of_speech};
    job.mode = gateway::parse_mode(g.mode);
    job.transcripts = g.transcripts;
  }
  fs::path out = p.out.empty() ? fs::path("runs") : fs::path(p.out);
  auto records = bench::run_jobs(jobs, config, out, s.backend());
  std::size_t failed = 0;
  for (const auto& r : records) {
    if (!r.ok()) {
      print_failure(r);
      ++failed;
    }
  }
  std::cout << records.size() - failed << "/" << records.size() << " jobs succeeded\n";
  if (failed < records.size() && config.evaluate) write_report(records, out);
  return failed == 0 ? 0 : 1;
}

int do_report(const Paths& p) {
  std::vector<bench::RunRecord> records;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(p.runs)) {
    if (e.is_directory() && fs::exists(e.path() / "run_record.json")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) records.push_back(bench::load_run_record(d));
  write_report(records, p.out.empty() ? fs::path(p.runs) : fs::path(p.out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference-guided slide generation from papers and templates."};
  app.require_subcommand(1);
  Globals g;
  bench::PipelineConfig config;
  Paths p;

  app.set_config("--config", "", "Key-value file setting any long option (key = value)");
  app.add_option("--num-slides", g.num_slides, "Slides to generate")->check(CLI::Range(2, 200))->capture_default_str();
  app.add_flag("--no-content-pref", g.no_content_pref, "Skip content preference guidance");
  app.add_flag("--no-chain-of-speech", g.no_chain_of_speech, "Do not draft speech with the outline");
  app.add_option("--mode", g.mode, "live, record or replay")
      ->check(CLI::IsMember({"live", "record", "replay"}))
      ->capture_default_str();
  app.add_option("--transcripts", g.transcripts, "Transcript directory for record and replay");
  app.add_option("--seed", g.seed, "Sampling seed")->capture_default_str();
  app.add_option("--model", config.model.model_id, "Model id")->capture_default_str();
  app.add_option("--temperature", config.model.temperature, "Sampling temperature")->capture_default_str();
  app.add_option("--max-tokens", config.model.max_tokens, "Completion token limit")->capture_default_str();
  app.add_option("--endpoint", config.http.endpoint, "Chat completions base URL")->capture_default_str();
  app.add_option("--api-key-env", config.http.api_key_env, "Variable holding the API key")->capture_default_str();
  app.add_option("--min-interval-ms", config.http.min_interval_ms, "Minimum spacing between requests");
  app.add_option("--render-command", config.render_command, "Slide renderer: <cmd> <pptx> <out_dir>");
  app.add_option("--pdf-extractor", config.pdf_extractor, "PDF extractor: <cmd> <pdf> <out_dir>");
  app.add_option("--workers", config.workers, "Parallel jobs for bench")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--overflow-threshold", config.realize.overflow_threshold, "Text density warning, chars/pt^2");
  bool no_evaluate = false;
  app.add_flag("--no-evaluate", no_evaluate, "Skip rendering and scoring");

  auto* distill_cmd = app.add_subcommand("distill", "Distill content and aesthetic preferences");
  distill_cmd->add_option("--ref-paper", p.ref_paper)->required();
  distill_cmd->add_option("--ref-slides", p.ref_slides)->required();
  distill_cmd->add_option("--template", p.template_path)->required()->check(CLI::ExistingFile);
  distill_cmd->add_option("--out", p.out, "Output directory")->required();

  auto* plan_cmd = app.add_subcommand("plan", "Reorganize the paper, outline it and choose layouts");
  plan_cmd->add_option("--target", p.target)->required();
  plan_cmd->add_option("--prefs", p.prefs, "Directory written by distill")->required()->check(CLI::ExistingDirectory);
  plan_cmd->add_option("--out", p.out, "Output directory")->required();

  auto* realize_cmd = app.add_subcommand("realize", "Build the deck from a plan");
  realize_cmd->add_option("--plan", p.plan, "Directory written by plan")->required()->check(CLI::ExistingDirectory);
  realize_cmd->add_option("--prefs", p.prefs, "Directory holding aesthetic_pref.json (defaults to --plan)");
  realize_cmd->add_option("--target", p.target)->required();
  realize_cmd->add_option("--template", p.template_path)->required()->check(CLI::ExistingFile);
  realize_cmd->add_option("--out", p.out, "Output directory")->required();

  auto* generate_cmd = app.add_subcommand("generate", "Run one job end to end");
  generate_cmd->add_option("--target", p.target)->required();
  generate_cmd->add_option("--ref-paper", p.ref_paper)->required();
  generate_cmd->add_option("--ref-slides", p.ref_slides)->required();
  generate_cmd->add_option("--template", p.template_path)->required()->check(CLI::ExistingFile);
  generate_cmd->add_option("--out", p.out, "Run directory")->default_val("run");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a generated deck");
  evaluate_cmd->add_option("--deck", p.deck)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--target", p.target)->required();
  evaluate_cmd->add_option("--ref-slides", p.ref_slides)->required();
  evaluate_cmd->add_option("--template", p.template_path)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", p.out, "Output directory (defaults to the deck's)");

  auto* bench_cmd = app.add_subcommand("bench", "Sample jobs from a manifest and run them");
  bench_cmd->add_option("--manifest", p.manifest)->required();
  bench_cmd->add_option("--n", p.n, "Jobs to sample (default: every paper)");
  bench_cmd->add_option("--out", p.out, "Runs directory")->default_val("runs");

  auto* report_cmd = app.add_subcommand("report", "Aggregate evaluated run directories");
  report_cmd->add_option("--runs", p.runs)->required()->check(CLI::ExistingDirectory);
  report_cmd->add_option("--out", p.out, "Where to write report.csv and report.txt");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }
  config.evaluate = !no_evaluate;

  Session session(g, config);
  try {
    if (g.mode != "live" && g.transcripts.empty()) {
      throw Error(Errc::ConfigError, "--mode " + g.mode + " needs --transcripts");
    }
    if (*distill_cmd) return do_distill(g, session, p);
    if (*plan_cmd) return do_plan(g, session, p);
    if (*realize_cmd) return do_realize(g, session, p, config);
    if (*generate_cmd) return do_generate(g, session, p, config);
    if (*evaluate_cmd) return do_evaluate(session, p, config);
    if (*bench_cmd) return do_bench(g, session, p, config);
    if (*report_cmd) return do_report(p);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    for (const auto& d : e.diagnostics()) std::cerr << "  [" << d.code << "] " << d.path << ": " << d.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
