#include "pseudolab/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace pseudolab::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << content;
}

json bbox_to_json(const BBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

BBox bbox_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("bbox must be a 4-number array");
  BBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  validate_bbox(b);
  return b;
}

static int class_from_json(const json& j) {
  const int c = j.get<int>();
  if (c < 0) throw DomainError("class id must be >= 0");
  return c;
}

Scene scene_from_json(const json& j) {
  Scene scene;
  for (const json& a : j.at("anchors")) scene.anchors.push_back({bbox_from_json(a), 0, 0, 0});
  if (j.contains("predictions")) {
    int index = 0;
    for (const json& p : j.at("predictions")) {
      Prediction pred;
      pred.anchor_index = index++;
      for (const json& v : p.at("probs")) {
        const double prob = v.get<double>();
        if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("prediction probs must lie in [0,1]");
        pred.class_probs.push_back(prob);
      }
      pred.bbox = bbox_from_json(p.at("bbox"));
      scene.predictions.push_back(std::move(pred));
    }
  }
  for (const json& g : j.at("gts"))
    scene.gts.push_back({bbox_from_json(g.at("bbox")), class_from_json(g.at("class"))});
  if (!scene.predictions.empty() && scene.predictions.size() != scene.anchors.size())
    throw DomainError("scene: predictions must match anchors one-to-one");
  return scene;
}

json scene_to_json(const Scene& scene) {
  json j;
  j["anchors"] = json::array();
  for (const Anchor& a : scene.anchors) j["anchors"].push_back(bbox_to_json(a.bbox));
  j["predictions"] = json::array();
  for (const Prediction& p : scene.predictions) {
    json pj;
    pj["probs"] = p.class_probs;
    pj["bbox"] = bbox_to_json(p.bbox);
    j["predictions"].push_back(std::move(pj));
  }
  j["gts"] = json::array();
  for (const GroundTruth& g : scene.gts) {
    json gj;
    gj["bbox"] = bbox_to_json(g.bbox);
    gj["class"] = g.class_id;
    j["gts"].push_back(std::move(gj));
  }
  return j;
}

json assignment_to_json(const AssignmentResult& result) {
  json j;
  j["anchors"] = json::array();
  for (const AnchorAssignment& a : result.anchors) {
    json aj;
    switch (a.state) {
      case AnchorState::Positive:
        aj["state"] = "positive";
        aj["gt"] = a.gt_index;
        aj["cost"] = a.cost;
        break;
      case AnchorState::Negative: aj["state"] = "negative"; break;
      case AnchorState::Ignore: aj["state"] = "ignore"; break;
    }
    j["anchors"].push_back(std::move(aj));
  }
  return j;
}

std::map<int, std::vector<double>> scores_from_json(const json& j) {
  std::map<int, std::vector<double>> out;
  for (const auto& [key, value] : j.at("classes").items()) {
    int cls = 0;
    try {
      cls = std::stoi(key);
    } catch (...) {
      throw ParseError("scores: class key must be an integer, got '" + key + "'");
    }
    if (cls < 0) throw DomainError("scores: class id must be >= 0");
    std::vector<double> scores;
    for (const json& v : value) {
      const double s = v.get<double>();
      if (!(s >= 0.0 && s <= 1.0)) throw DomainError("scores must lie in [0,1]");
      scores.push_back(s);
    }
    out[cls] = std::move(scores);
  }
  return out;
}

json thresholds_to_json(const std::map<int, ThresholdDecision>& thresholds) {
  json classes = json::object();
  for (const auto& [cls, decision] : thresholds) {
    json d;
    d["tau"] = decision.tau;
    d["source"] = decision.source == ThresholdDecision::Source::Gmm ? "gmm" : "fallback";
    classes[std::to_string(cls)] = std::move(d);
  }
  json j;
  j["classes"] = std::move(classes);
  return j;
}

std::vector<ImageDetections> detections_from_json(const json& j) {
  std::vector<ImageDetections> out;
  for (const json& img : j.at("images")) {
    ImageDetections d{img.at("id").get<int>(), {}};
    for (const json& det : img.at("dets")) {
      const double score = det.at("score").get<double>();
      if (!(score >= 0.0 && score <= 1.0)) throw DomainError("detection score must lie in [0,1]");
      d.dets.push_back({bbox_from_json(det.at("bbox")), class_from_json(det.at("class")), score});
    }
    out.push_back(std::move(d));
  }
  return out;
}

json detections_to_json(std::span<const ImageDetections> images) {
  json arr = json::array();
  for (const ImageDetections& img : images) {
    json ij;
    ij["id"] = img.image_id;
    ij["dets"] = json::array();
    for (const Detection& d : img.dets) {
      json dj;
      dj["bbox"] = bbox_to_json(d.bbox);
      dj["class"] = d.class_id;
      dj["score"] = d.score;
      ij["dets"].push_back(std::move(dj));
    }
    arr.push_back(std::move(ij));
  }
  json j;
  j["images"] = std::move(arr);
  return j;
}

std::vector<ImageGroundTruths> ground_truths_from_json(const json& j) {
  std::vector<ImageGroundTruths> out;
  for (const json& img : j.at("images")) {
    ImageGroundTruths g{img.at("id").get<int>(), {}};
    for (const json& gt : img.at("gts"))
      g.gts.push_back({bbox_from_json(gt.at("bbox")), class_from_json(gt.at("class"))});
    out.push_back(std::move(g));
  }
  return out;
}

json ground_truths_to_json(std::span<const ImageGroundTruths> images) {
  json arr = json::array();
  for (const ImageGroundTruths& img : images) {
    json ij;
    ij["id"] = img.image_id;
    ij["gts"] = json::array();
    for (const GroundTruth& g : img.gts) {
      json gj;
      gj["bbox"] = bbox_to_json(g.bbox);
      gj["class"] = g.class_id;
      ij["gts"].push_back(std::move(gj));
    }
    arr.push_back(std::move(ij));
  }
  json j;
  j["images"] = std::move(arr);
  return j;
}

json eval_result_to_json(const EvalResult& result) {
  json thr = json::object();
  char key[16];
  for (const auto& [t, ap] : result.ap_per_iou_threshold) {
    std::snprintf(key, sizeof(key), "%.2f", t);
    thr[key] = ap;
  }
  json per_class = json::object();
  for (const auto& [cls, ap] : result.per_class_ap) per_class[std::to_string(cls)] = ap;
  json j;
  j["map_50_95"] = result.map_50_95;
  j["ap_per_iou_threshold"] = std::move(thr);
  j["per_class_ap"] = std::move(per_class);
  return j;
}

FeaturePyramid pyramid_from_json(const json& j) {
  const int channels = j.at("channels").get<int>();
  PyramidSpec spec;
  for (const json& level : j.at("levels"))
    spec.levels.push_back({level.at("stride").get<int>(), level.at("h").get<int>(),
                           level.at("w").get<int>()});
  FeaturePyramid p(spec, channels);
  int li = 0;
  for (const json& level : j.at("levels")) {
    const json& data = level.at("data");
    if (static_cast<int>(data.size()) != channels)
      throw DomainError("pyramid: one data plane per channel required");
    const PyramidLevelSpec& lv = spec.levels[li];
    for (int c = 0; c < channels; ++c) {
      const json& plane = data[c];
      if (static_cast<int>(plane.size()) != lv.height * lv.width)
        throw DomainError("pyramid: plane size must equal h*w");
      for (int i = 0; i < lv.height; ++i)
        for (int k = 0; k < lv.width; ++k) p.at(li, c, i, k) = plane[i * lv.width + k].get<double>();
    }
    ++li;
  }
  p.validate();
  return p;
}

json pyramid_to_json(const FeaturePyramid& p) {
  json levels = json::array();
  for (int l = 0; l < p.spec().num_levels(); ++l) {
    const PyramidLevelSpec& lv = p.spec().levels[l];
    json lj;
    lj["stride"] = lv.stride;
    lj["h"] = lv.height;
    lj["w"] = lv.width;
    json data = json::array();
    for (int c = 0; c < p.channels(); ++c) {
      json plane = json::array();
      for (int i = 0; i < lv.height; ++i)
        for (int k = 0; k < lv.width; ++k) plane.push_back(p.at(l, c, i, k));
      data.push_back(std::move(plane));
    }
    lj["data"] = std::move(data);
    levels.push_back(std::move(lj));
  }
  json j;
  j["channels"] = p.channels();
  j["levels"] = std::move(levels);
  return j;
}

OffsetField offsets_from_json(const json& j) {
  const FeaturePyramid as_pyramid = pyramid_from_json(j);
  if (as_pyramid.channels() != 3)
    throw DomainError("offsets: exactly 3 channels (d0,d1,d2) required");
  OffsetField field(as_pyramid.spec());
  for (int l = 0; l < as_pyramid.spec().num_levels(); ++l) {
    const PyramidLevelSpec& lv = as_pyramid.spec().levels[l];
    for (int i = 0; i < lv.height; ++i) {
      for (int k = 0; k < lv.width; ++k) {
        field.d0(l, i, k) = as_pyramid.at(l, 0, i, k);
        field.d1(l, i, k) = as_pyramid.at(l, 1, i, k);
        field.d2(l, i, k) = as_pyramid.at(l, 2, i, k);
      }
    }
  }
  return field;
}

namespace {

struct IniEntry {
  std::string section, key, value;
};

std::vector<IniEntry> parse_ini(const std::string& text) {
  std::vector<IniEntry> entries;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key=value");
    entries.push_back({section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }
  return entries;
}

double to_double(const IniEntry& e) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ParseError("config: bad numeric value for " + e.section + "." + e.key);
  }
}

int to_int(const IniEntry& e) {
  const double v = to_double(e);
  if (v != std::floor(v)) throw ParseError("config: integer expected for " + e.section + "." + e.key);
  return static_cast<int>(v);
}

}  // namespace

SimFileConfig sim_config_from_text(const std::string& text) {
  SimFileConfig cfg;
  std::map<std::string, Schedule> schedules;  // keyed by name, insertion-ordered below
  std::vector<std::string> schedule_order;

  for (const IniEntry& e : parse_ini(text)) {
    if (e.section == "world") {
      if (e.key == "n_images") cfg.world.n_images = to_int(e);
      else if (e.key == "boxes_per_image") cfg.world.boxes_per_image = to_int(e);
      else if (e.key == "n_classes") cfg.world.n_classes = to_int(e);
      else if (e.key == "image_w") cfg.world.image_w = to_double(e);
      else if (e.key == "image_h") cfg.world.image_h = to_double(e);
      else throw ParseError("config: unknown key world." + e.key);
    } else if (e.section == "skill") {
      if (e.key == "pos_mean_start") cfg.skill.start.pos_mean = to_double(e);
      else if (e.key == "pos_mean_end") cfg.skill.end.pos_mean = to_double(e);
      else if (e.key == "pos_std_start") cfg.skill.start.pos_std = to_double(e);
      else if (e.key == "pos_std_end") cfg.skill.end.pos_std = to_double(e);
      else if (e.key == "neg_rate_start") cfg.skill.start.neg_rate = to_double(e);
      else if (e.key == "neg_rate_end") cfg.skill.end.neg_rate = to_double(e);
      else if (e.key == "rho_start") cfg.skill.start.rho = to_double(e);
      else if (e.key == "rho_end") cfg.skill.end.rho = to_double(e);
      else throw ParseError("config: unknown key skill." + e.key);
    } else if (e.section == "run") {
      if (e.key == "steps") cfg.steps = to_int(e);
      else if (e.key == "checkpoint_every") cfg.checkpoint_every = to_int(e);
      else throw ParseError("config: unknown key run." + e.key);
    } else if (e.section.rfind("schedule.", 0) == 0) {
      const std::string name = e.section.substr(9);
      if (name.empty() || name.find_first_not_of(
                              "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                              std::string::npos)
        throw ParseError("config: schedule name must be [A-Za-z0-9_-]+, got '" + name + "'");
      if (!schedules.count(name)) {
        schedules[name] = Schedule::fixed(name, 0.4);
        schedule_order.push_back(name);
      }
      Schedule& s = schedules[name];
      if (e.key == "type") {
        if (e.value == "fixed") s.kind = Schedule::Kind::Fixed;
        else if (e.value == "gmm") s.kind = Schedule::Kind::Gmm;
        else throw ParseError("config: schedule type must be fixed or gmm");
      } else if (e.key == "tau") s.fixed_tau = to_double(e);
      else if (e.key == "capacity") s.gmm.bank_capacity = static_cast<std::size_t>(to_int(e));
      else if (e.key == "fallback") s.gmm.fallback_tau = to_double(e);
      else if (e.key == "rule") {
        if (e.value == "argmax") s.gmm.rule = ThresholdRule::Argmax;
        else if (e.value == "crossing") s.gmm.rule = ThresholdRule::Crossing;
        else throw ParseError("config: schedule rule must be argmax or crossing");
      } else throw ParseError("config: unknown key " + e.section + "." + e.key);
    } else {
      throw ParseError("config: unknown section [" + e.section + "]");
    }
  }
  for (const std::string& name : schedule_order) cfg.schedules.push_back(schedules[name]);
  return cfg;
}

}  // namespace pseudolab::io
