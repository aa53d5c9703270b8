#include "scripted_model.hpp"

#include <regex>
#include <set>

#include "slidetailor/error.hpp"
#include "slidetailor/json.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::testing {

namespace {

std::string between(const std::string& text, const std::string& open, const std::string& close) {
  auto a = text.find(open);
  if (a == std::string::npos) return {};
  a += open.size();
  auto b = text.find(close, a);
  return text.substr(a, b == std::string::npos ? std::string::npos : b - a);
}

Json json_block(const std::string& text, const std::string& open, const std::string& close) {
  auto block = between(text, open, close);
  auto start = block.find('{');
  auto end = block.rfind('}');
  if (start == std::string::npos || end == std::string::npos) return Json::object();
  return Json::parse(block.substr(start, end - start + 1));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string first_sentence(const std::string& text, std::size_t limit = 140) {
  auto t = trim(text);
  auto dot = t.find(". ");
  if (dot != std::string::npos) t = t.substr(0, dot + 1);
  if (t.size() > limit) {
    auto cut = t.rfind(' ', limit);
    t = t.substr(0, cut == std::string::npos ? limit : cut) + "...";
  }
  return t;
}

// Keyword guess of the generic structural role of a heading or slide.
std::string generic_label(const std::string& text) {
  static const std::vector<std::pair<const char*, const char*>> table{
      {"conclu", "conclusion"},       {"takeaway", "conclusion"},    {"future", "conclusion"},
      {"result", "results"},          {"ablation", "results"},       {"experiment", "experiments"},
      {"setup", "experiments"},       {"evaluation", "experiments"}, {"method", "method"},
      {"design", "method"},           {"approach", "method"},        {"partition", "method"},
      {"related", "related work"},    {"background", "background"},  {"motivation", "motivation"},
      {"introduction", "motivation"}, {"problem", "motivation"},     {"why", "motivation"},
      {"stall", "motivation"}};
  auto t = lower(text);
  for (const auto& [needle, name] : table) {
    if (t.find(needle) != std::string::npos) return name;
  }
  return "";
}

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::vector<std::string> headings(const std::string& body) {
  std::vector<std::string> out;
  for (const auto& line : split_lines(body)) {
    if (line.rfind("## ", 0) == 0) out.push_back(trim(line.substr(3)));
  }
  return out;
}

std::string content_preference(const std::string& prompt) {
  auto paper = headings(between(prompt, "<Research Paper PDF Begins>:", "<Research Paper PDF Ends>"));
  auto slides = headings(between(prompt, "<Corresponding Slides Begins>:", "<Corresponding Slides Ends>"));
  std::vector<std::string> flow{"Title"};
  std::map<std::string, int> count;
  for (std::size_t i = 1; i < slides.size(); ++i) {
    auto label = generic_label(slides[i]);
    if (label.empty()) continue;
    if (count[label]++ == 0) flow.push_back(capitalized(label));
  }
  Json prefs = Json::array();
  for (const auto& name : flow) {
    auto label = lower(name);
    bool in_paper = label == "title" || std::any_of(paper.begin(), paper.end(),
                                                    [&](const std::string& p) { return generic_label(p) == label; });
    int spans = label == "title" ? 1 : count[label];
    std::string handling = !in_paper ? "Newly Added" : spans > 1 ? "Expanded" : "Condensed";
    prefs.push_back({{"section_name", name},
                     {"content_handling", handling},
                     {"formatting_preferences", handling == "Expanded" ? "Bullet Points" : "Short Phrases"},
                     {"additional_comments", "Spans " + std::to_string(spans) + " slide(s) in the reference deck."}});
  }
  Json omitted = Json::array();
  for (const auto& p : paper) {
    auto label = generic_label(p);
    if (label.empty() || !count.count(label)) omitted.push_back(p);
  }
  Json g = Json::object();
  g["narrative_flow_preference"] = flow;
  g["section_level_preferences"] = prefs;
  g["omitted_sections"] = omitted;
  return Json{{"presentation_guidelines", g}}.dump(2);
}

std::string aesthetic_preference(const std::string& prompt) {
  auto info = json_block(prompt, "<Structured Slide Info Begins>:", "<Structured Slide Info Ends>");
  Json out = Json::object();
  std::size_t k = 0;
  for (const auto& [key, slide] : info.items()) {
    bool image = false, table = false, group = false;
    for (const auto& [sk, shape] : slide.items()) {
      auto desc = shape.value("pptc_description", "");
      image = image || desc.find("[Picture") != std::string::npos || desc.find("type=pic") != std::string::npos;
      table = table || desc.find("[Table") != std::string::npos;
      group = group || desc.find("[Group") != std::string::npos;
    }
    std::string theme;
    if (k == 0) {
      theme = "Opening, main title with presenter information";
    } else if (image) {
      theme = "Contents, image with text, picture beside a short caption";
    } else if (table) {
      theme = "Contents, table with text, suited to experiment results";
    } else if (group) {
      theme = "Contents, grouped text blocks for side-by-side points";
    } else {
      theme = "Contents, text with multiple bullet points";
    }
    out[key] = theme;
    ++k;
  }
  return out.dump(2);
}

std::string paper_reorganizer(const std::string& prompt) {
  auto paper = between(prompt, "<Target Paper Begins>:", "<Target Paper Ends>");
  auto guidelines_text = between(prompt, "<User Preference Guidelines Begins>:", "<User Preference Guidelines Ends>");
  Json meta = {{"title", ""}, {"author", ""}, {"publish date", ""}, {"organization", ""}};
  struct Sec {
    std::string title;
    std::vector<std::string> paragraphs;
  };
  std::vector<Sec> secs;
  for (const auto& line : split_lines(paper)) {
    if (secs.empty()) {
      if (line.rfind("Title: ", 0) == 0) meta["title"] = trim(line.substr(7));
      if (line.rfind("Authors: ", 0) == 0) meta["author"] = trim(line.substr(9));
      if (line.rfind("Organization: ", 0) == 0) meta["organization"] = trim(line.substr(14));
    }
    if (line.rfind("## ", 0) == 0) {
      secs.push_back({trim(line.substr(3)), {""}});
    } else if (!secs.empty() && trim(line).empty()) {
      if (!secs.back().paragraphs.back().empty()) secs.back().paragraphs.emplace_back();
    } else if (!secs.empty()) {
      auto& para = secs.back().paragraphs.back();
      para += (para.empty() ? "" : " ") + trim(line);
    }
  }
  // With guidelines, follow the preferred flow and drop omitted sections.
  auto start = guidelines_text.find('{');
  if (start != std::string::npos) {
    auto g = Json::parse(guidelines_text.substr(start, guidelines_text.rfind('}') - start + 1))["presentation_guidelines"];
    std::vector<Sec> ordered;
    std::vector<bool> used(secs.size(), false);
    for (const auto& f : g["narrative_flow_preference"]) {
      for (std::size_t i = 0; i < secs.size(); ++i) {
        if (!used[i] && generic_label(secs[i].title) == lower(f.get<std::string>())) {
          ordered.push_back(secs[i]);
          used[i] = true;
        }
      }
    }
    // Sections with a recognizable role outside the flow are dropped too.
    for (std::size_t i = 0; i < secs.size(); ++i) {
      if (!used[i] && generic_label(secs[i].title).empty()) ordered.push_back(secs[i]);
    }
    if (!ordered.empty()) secs = std::move(ordered);
  }
  Json sections = Json::array();
  for (const auto& s : secs) {
    Json subs = Json::array();
    for (const auto& para : s.paragraphs) {
      if (para.empty()) continue;
      std::string name = subs.empty() ? " Overview" : " Details " + std::to_string(subs.size());
      subs.push_back({{"title", s.title + name}, {"content", para}});
    }
    if (subs.empty()) subs.push_back({{"title", s.title + " Overview"}, {"content", s.title}});
    sections.push_back({{"title", s.title}, {"subsections", subs}});
  }
  return Json{{"metadata", meta}, {"sections", sections}}.dump(2);
}

std::string slide_outline(const std::string& prompt) {
  auto doc = json_block(prompt, "<Summarized Document Begins>", "<Summarized Document Ends>");
  int n = 10;
  auto np = prompt.find("The desired number of slides: ");
  if (np != std::string::npos) n = std::stoi(prompt.substr(np + 30));
  bool speech = prompt.find("speech_draft") != std::string::npos;
  std::vector<std::string> images;
  std::regex image_line(R"(^- (\S+) \((figure|table)\):)");
  for (const auto& line : split_lines(between(prompt, "<Available Images Begins>", "<Available Images Ends>"))) {
    std::smatch m;
    if (std::regex_search(line, m, image_line)) images.push_back(m[1]);
  }
  struct Sub {
    std::string section, title, content;
  };
  std::vector<Sub> subs;
  for (const auto& s : doc["sections"]) {
    for (const auto& sub : s["subsections"]) {
      subs.push_back({s["title"].get<std::string>(), sub["title"].get<std::string>(), sub["content"].get<std::string>()});
    }
  }
  std::string title = doc["metadata"].value("title", "");
  Json out = Json::object();
  Json first = Json::object();
  first["purpose"] = "Open the talk with the title and authors.";
  if (speech) first["speech_draft"] = "Hello everyone. Today I will present " + (title.empty() ? "our work" : title) + ".";
  first["subsections"] = Json::array();
  first["content_style"] = "Title with author line";
  first["layout_recommendation"] = "title with subtitle";
  out["1_" + (title.empty() ? std::string("Opening") : title)] = first;

  // A closing section gets the last slot; the slots in between share the
  // remaining subsections in order, continuing one across several slots
  // when there are more slots than subsections.
  std::vector<Sub> closing;
  while (!subs.empty() && generic_label(subs.back().section) == "conclusion") {
    closing.insert(closing.begin(), subs.back());
    subs.pop_back();
  }
  int slots = n - 2;
  std::vector<int> image_slot(images.size(), -1);
  for (std::size_t j = 0; j < images.size() && static_cast<int>(j) < slots; ++j) {
    image_slot[j] = static_cast<int>(j * static_cast<std::size_t>(slots) / images.size());
  }
  std::map<std::string, int> topic_uses;
  auto add = [&](int index, std::string topic, const std::vector<Sub>& group, const Json& imgs) {
    int use = ++topic_uses[topic];
    if (use > 1) topic += " (" + std::to_string(use) + ")";
    Json entry = Json::object();
    Json sub_titles = Json::array();
    std::string speech_text;
    for (const auto& sub : group) {
      sub_titles.push_back(sub.title);
      speech_text += (speech_text.empty() ? "" : " ") + first_sentence(sub.content, 240);
    }
    entry["purpose"] = "Explain " + topic + ".";
    if (speech) entry["speech_draft"] = topic + ". " + (speech_text.empty() ? "Thank you for listening." : speech_text);
    entry["subsections"] = sub_titles;
    entry["content_style"] = imgs.empty() ? "Concise bullet points" : "Bullet points beside the figure";
    if (!imgs.empty()) entry["image_assets"] = imgs;
    entry["layout_recommendation"] = imgs.empty() ? "text with bullets" : "text with supporting image";
    out[std::to_string(index) + "_" + topic] = entry;
  };
  for (int k = 0; k < slots; ++k) {
    std::vector<Sub> group;
    if (!subs.empty()) {
      std::size_t lo = static_cast<std::size_t>(k) * subs.size() / static_cast<std::size_t>(slots);
      std::size_t hi = std::max(lo + 1, static_cast<std::size_t>(k + 1) * subs.size() / static_cast<std::size_t>(slots));
      for (std::size_t i = lo; i < hi && i < subs.size(); ++i) group.push_back(subs[i]);
    }
    Json imgs = Json::array();
    for (std::size_t j = 0; j < images.size(); ++j) {
      if (image_slot[j] == k) imgs.push_back(images[j]);
    }
    add(k + 2, group.empty() ? "Discussion" : group.front().section, group, imgs);
  }
  add(n, closing.empty() ? "Conclusion and Takeaways" : closing.front().section, closing, Json::array());
  return "```json\n" + out.dump(4) + "\n```";
}

std::string layout_selection(const std::string& prompt) {
  auto outline = json_block(prompt, "<Original Content Outline Begins>", "<Original Content Outline Ends>");
  auto layouts = json_block(prompt, "<Structural Layouts Begins>", "<Structural Layouts Ends>");
  std::string opening, image;
  std::vector<std::string> text;
  for (const auto& [key, theme] : layouts.items()) {
    auto t = lower(theme.get<std::string>());
    if (t.rfind("opening", 0) == 0 && opening.empty()) opening = key;
    else if (t.find("image") != std::string::npos && image.empty()) image = key;
    else if (t.find("text") != std::string::npos && t.find("table") == std::string::npos &&
             t.find("image") == std::string::npos) text.push_back(key);
  }
  if (opening.empty()) opening = layouts.begin().key();
  if (text.empty()) text.push_back(opening);
  Json out = Json::object();
  std::size_t i = 0, t = 0;
  for (const auto& [key, entry] : outline.items()) {
    Json e = entry;
    bool has_image = entry.contains("image_assets") && !entry["image_assets"].empty();
    if (i == 0) {
      e["layout"] = opening;
      e["layout_justification"] = "The opening layout carries the title and presenter line.";
    } else if (has_image && !image.empty()) {
      e["layout"] = image;
      e["layout_justification"] = "The picture layout fits a slide built around a figure.";
    } else {
      e["layout"] = text[t++ % text.size()];
      e["layout_justification"] = "A text layout suits a slide of short bullet points.";
    }
    out[key] = e;
    ++i;
  }
  return out.dump(4);
}

std::string element_mapping(const std::string& prompt) {
  auto plan = json_block(prompt, "<Planned Slide Begins>", "<Planned Slide Ends>");
  auto elements = json_block(prompt, "<Template Slide Elements Begins>", "<Template Slide Elements Ends>");
  std::vector<std::string> assets;
  if (plan.contains("image_assets")) assets = plan["image_assets"].get<std::vector<std::string>>();
  bool opening = plan["subsections"].empty() && plan.value("layout_recommendation", "") == "title with subtitle";
  std::vector<std::string> body_lines;
  for (const auto& s : plan["subsection_content"]) body_lines.push_back(first_sentence(s["content"].get<std::string>()));
  if (body_lines.empty()) body_lines.push_back(plan.value("purpose", ""));
  const auto& document = plan.contains("document") ? plan["document"] : Json::object();
  std::vector<std::vector<std::string>> opening_lines{
      {document.value("author", "")}, {document.value("organization", "")}};

  std::regex desc_re(R"(\[(\w+) id=(\d+)(?: type=(\w+))?\])");
  Json assignments = Json::array();
  std::size_t next_asset = 0;
  int text_slots = 0;
  for (const auto& [key, shape] : elements.items()) {
    std::smatch m;
    auto desc = shape.value("pptc_description", "");
    if (!std::regex_search(desc, m, desc_re)) continue;
    std::string kind = m[1];
    int id = std::stoi(m[2]);
    std::string type = m[3];
    bool has_text = !trim(shape.value("pptc_text_info", "")).empty();
    if (type == "title" || type == "ctrTitle") {
      assignments.push_back({{"shape_id", id}, {"action", "set_text"}, {"text", {plan.value("slide_title", "")}}});
    } else if (kind == "Picture" || type == "pic") {
      if (next_asset < assets.size()) {
        assignments.push_back({{"shape_id", id}, {"action", "replace_image"}, {"asset_id", assets[next_asset++]}});
      } else {
        assignments.push_back({{"shape_id", id}, {"action", "delete"}});
      }
    } else if (kind == "Table" || kind == "Group") {
      assignments.push_back({{"shape_id", id}, {"action", "delete"}});
    } else if (kind == "TextBox" || kind == "Placeholder") {
      if (!has_text && kind == "TextBox") continue;  // decoration
      if (opening && text_slots < 2 && !trim(opening_lines[text_slots][0]).empty()) {
        assignments.push_back({{"shape_id", id}, {"action", "set_text"}, {"text", opening_lines[text_slots]}});
      } else if (!opening && text_slots == 0) {
        assignments.push_back({{"shape_id", id}, {"action", "set_text"}, {"text", body_lines}});
      } else {
        assignments.push_back({{"shape_id", id}, {"action", "delete"}});
      }
      ++text_slots;
    }
  }
  return Json{{"assignments", assignments}}.dump(2);
}

std::string subtopic_extraction(const std::string& prompt) {
  auto body = between(prompt, "<Slides Begin>", "<Slides End>");
  std::vector<std::string> blocks;
  std::size_t pos = 0;
  while ((pos = body.find("### Slide ", pos)) != std::string::npos) {
    auto next = body.find("### Slide ", pos + 1);
    blocks.push_back(body.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    ++pos;
  }
  Json labels = Json::array();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto lines = split_lines(blocks[i]);
    std::string label = i == 0 ? "title" : generic_label(lines.size() > 1 ? lines[1] : "");
    if (label.empty()) label = generic_label(blocks[i].substr(blocks[i].find('\n') + 1));
    labels.push_back(label.empty() ? "discussion" : label);
  }
  return Json{{"subtopics", labels}}.dump(2);
}

std::string judge(const std::string& tag, const gateway::ChatRequest& request) {
  int score = 4;
  std::string reason;
  if (tag == "judge_content_structure") {
    reason = "The generated deck follows the reference ordering with one extra content block.";
  } else if (tag == "judge_aesthetic_similarity") {
    score = 5;
    reason = "Layouts, colors and element placement match the template closely.";
  } else if (tag == "judge_content") {
    reason = "Slides cover the main contributions with concise supporting detail.";
  } else {
    bool images = !request.messages.front().image_refs.empty();
    score = images ? 4 : 3;
    reason = images ? "Harmonious colors with some visual elements." : "Basic color scheme described, few visuals.";
  }
  return Json{{"reason", reason}, {"score", score}}.dump(2);
}

}  // namespace

std::string scripted_response(const gateway::ChatRequest& request) {
  const auto& tag = request.purpose_tag;
  const auto& prompt = request.messages.front().text;
  if (tag == "content_preference") return content_preference(prompt);
  if (tag == "aesthetic_preference") return aesthetic_preference(prompt);
  if (tag == "paper_reorganizer") return paper_reorganizer(prompt);
  if (tag == "slide_outline") return slide_outline(prompt);
  if (tag == "layout_selection") return layout_selection(prompt);
  if (tag == "element_mapping") return element_mapping(prompt);
  if (tag == "subtopic_extraction") return subtopic_extraction(prompt);
  if (tag.rfind("judge_", 0) == 0) return judge(tag, request);
  throw Error(Errc::TransportFailure, "scripted model has no behavior for " + tag);
}

std::string ScriptedModel::send(const gateway::ChatRequest& request) {
  {
    std::lock_guard lock(mutex_);
    ++calls_[request.purpose_tag];
    log_.push_back(request);
    auto it = queued_.find(request.purpose_tag);
    if (it != queued_.end() && !it->second.empty()) {
      auto text = std::move(it->second.front());
      it->second.pop_front();
      return text;
    }
  }
  return scripted_response(request);
}

void ScriptedModel::enqueue(const std::string& purpose_tag, std::string response) {
  std::lock_guard lock(mutex_);
  queued_[purpose_tag].push_back(std::move(response));
}

std::size_t ScriptedModel::calls(const std::string& purpose_tag) const {
  std::lock_guard lock(mutex_);
  auto it = calls_.find(purpose_tag);
  return it == calls_.end() ? 0 : it->second;
}

std::vector<gateway::ChatRequest> ScriptedModel::requests() const {
  std::lock_guard lock(mutex_);
  return log_;
}

}  // namespace slidetailor::testing
