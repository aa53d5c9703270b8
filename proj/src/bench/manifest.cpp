#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>

#include "slidetailor/bench/bench.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::bench {

namespace fs = std::filesystem;

std::uint64_t Manifest::combination_count() const {
  return static_cast<std::uint64_t>(papers.size()) * sample_pairs.size() * templates.size();
}

namespace {

fs::path resolve(const Json& value, const std::string& pointer, const fs::path& base,
                 std::vector<Diagnostic>& missing) {
  if (!value.is_string() || value.get_ref<const std::string&>().empty()) {
    throw Error(Errc::ConfigError, "manifest entry " + pointer + " must be a non-empty path string");
  }
  fs::path p = value.get<std::string>();
  if (p.is_relative()) p = base / p;
  p = p.lexically_normal();
  if (!fs::exists(p)) missing.push_back({"MissingPath", pointer, p.string() + " does not exist"});
  return p;
}

const Json& require_list(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw Error(Errc::ConfigError, std::string("manifest needs a \"") + key + "\" array");
  }
  if (j[key].empty()) {
    throw Error(Errc::EmptyList, std::string("manifest list \"") + key + "\" is empty",
                {{"EmptyList", std::string("/") + key, "list must not be empty"}});
  }
  return j[key];
}

}  // namespace

Manifest manifest_from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "manifest must be a JSON object");
  Manifest m;
  std::vector<Diagnostic> missing;
  const auto& papers = require_list(j, "papers");
  const auto& pairs = require_list(j, "sample_pairs");
  const auto& templates = require_list(j, "templates");
  for (std::size_t i = 0; i < papers.size(); ++i) {
    m.papers.push_back(resolve(papers[i], "/papers/" + std::to_string(i), base_dir, missing));
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::string ptr = "/sample_pairs/" + std::to_string(i);
    const auto& e = pairs[i];
    if (!e.is_object() || !e.contains("ref_paper_path") || !e.contains("ref_slides_path")) {
      throw Error(Errc::ConfigError, "manifest entry " + ptr + " needs ref_paper_path and ref_slides_path");
    }
    m.sample_pairs.push_back({resolve(e["ref_paper_path"], ptr + "/ref_paper_path", base_dir, missing),
                              resolve(e["ref_slides_path"], ptr + "/ref_slides_path", base_dir, missing)});
  }
  for (std::size_t i = 0; i < templates.size(); ++i) {
    m.templates.push_back(resolve(templates[i], "/templates/" + std::to_string(i), base_dir, missing));
  }
  if (!missing.empty()) {
    std::string msg = "manifest names missing paths: " + missing.front().path;
    if (missing.size() > 1) msg += " and " + std::to_string(missing.size() - 1) + " more";
    throw Error(Errc::MissingPath, msg, std::move(missing));
  }
  return m;
}

Manifest load_manifest(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(Errc::MissingPath, "manifest " + path.string() + " does not exist",
                {{"MissingPath", "", path.string()}});
  }
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error(Errc::ConfigError, "manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

std::string ablation_label(const JobFlags& flags) {
  std::string out;
  if (!flags.content_pref) out = "no_content_pref";
  if (!flags.chain_of_speech) out += (out.empty() ? "" : "+") + std::string("no_chain_of_speech");
  return out.empty() ? "full" : out;
}

void JobSpec::validate() const {
  if (num_slides < 2) throw Error(Errc::PreconditionFailed, "num_slides must be at least 2");
  if (mode != gateway::Mode::Live && transcripts.empty()) {
    throw Error(Errc::ConfigError, std::string(gateway::to_string(mode)) + " mode requires a transcript directory");
  }
}

Json JobSpec::to_json() const {
  Json j = Json::object();
  j["job_id"] = job_id;
  j["target_paper"] = target_paper.generic_string();
  j["ref_paper"] = pair.ref_paper.generic_string();
  j["ref_slides"] = pair.ref_slides.generic_string();
  j["template"] = template_path.generic_string();
  j["num_slides"] = num_slides;
  j["content_pref"] = flags.content_pref;
  j["chain_of_speech"] = flags.chain_of_speech;
  j["seed"] = seed;
  j["mode"] = std::string(gateway::to_string(mode));
  j["transcripts"] = transcripts.generic_string();
  return j;
}

JobSpec JobSpec::from_json(const Json& j) {
  JobSpec s;
  s.job_id = j.at("job_id").get<std::string>();
  s.target_paper = j.at("target_paper").get<std::string>();
  s.pair.ref_paper = j.at("ref_paper").get<std::string>();
  s.pair.ref_slides = j.at("ref_slides").get<std::string>();
  s.template_path = j.at("template").get<std::string>();
  s.num_slides = j.value("num_slides", 10);
  s.flags.content_pref = j.value("content_pref", true);
  s.flags.chain_of_speech = j.value("chain_of_speech", true);
  s.seed = j.value("seed", std::uint64_t{0});
  s.mode = gateway::parse_mode(j.value("mode", "live"));
  s.transcripts = j.value("transcripts", "");
  return s;
}

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw Error(Errc::PreconditionFailed, "cannot draw from an empty range");
  // Draws in the top partial block are rejected so every residue is
  // equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r > limit);
  return r % bound;
}

std::vector<JobSpec> sample_jobs(const Manifest& manifest, std::size_t n, std::uint64_t seed) {
  if (n > manifest.papers.size()) {
    throw Error(Errc::NotEnoughPapers, "asked for " + std::to_string(n) + " jobs but the manifest has " +
                                           std::to_string(manifest.papers.size()) + " papers");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(manifest.papers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, order.size() - i));
    std::swap(order[i], order[j]);
  }
  std::vector<JobSpec> jobs;
  jobs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    JobSpec job;
    char id[32];
    std::snprintf(id, sizeof id, "job_%03zu", i);
    job.job_id = id;
    job.target_paper = manifest.papers[order[i]];
    job.pair = manifest.sample_pairs[uniform_index(rng, manifest.sample_pairs.size())];
    job.template_path = manifest.templates[uniform_index(rng, manifest.templates.size())];
    job.seed = seed;
    jobs.push_back(std::move(job));
  }
  return jobs;
}

}  // namespace slidetailor::bench
