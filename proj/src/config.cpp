#include "svq/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "svq/errors.hpp"

namespace svq {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  std::string name;
  int line = 0;
  std::map<std::string, Entry> keys;
};

class Reader {
 public:
  Reader(std::string source, std::vector<Section> sections)
      : source_(std::move(source)), sections_(std::move(sections)) {}

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  Section* find(const std::string& name) {
    for (auto& s : sections_)
      if (s.name == name) return &s;
    return nullptr;
  }

  std::vector<Section>& sections() { return sections_; }

  const Entry* get(Section& sec, const std::string& key) {
    auto it = sec.keys.find(key);
    if (it == sec.keys.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const Entry& require(Section& sec, const std::string& key) {
    const Entry* e = get(sec, key);
    if (!e) fail(sec.line, "section [" + sec.name + "] is missing required key '" + key + "'");
    return *e;
  }

  template <typename T>
  T number(const Entry& e, const std::string& key) {
    T value{};
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) fail(e.line, "key '" + key + "': cannot parse '" + e.value + "'");
    return value;
  }

  template <typename T>
  T number_or(Section& sec, const std::string& key, T fallback) {
    const Entry* e = get(sec, key);
    return e ? number<T>(*e, key) : fallback;
  }

  std::vector<double> number_list(const Entry& e, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      Entry part{trim(item), e.line, true};
      if (part.value.empty()) fail(e.line, "key '" + key + "': empty list element");
      out.push_back(number<double>(part, key));
    }
    if (out.empty()) fail(e.line, "key '" + key + "': empty list");
    return out;
  }

  void reject_unused() {
    for (auto& s : sections_)
      for (auto& [k, e] : s.keys)
        if (!e.used) fail(e.line, "unknown key '" + k + "' in section [" + s.name + "]");
  }

 private:
  std::string source_;
  std::vector<Section> sections_;
};

// Numbered sections "prefix.K" in order K = 1, 2, ...
std::vector<Section*> numbered(Reader& r, const std::string& prefix) {
  std::map<int, Section*> found;
  for (auto& s : r.sections()) {
    if (s.name.rfind(prefix + ".", 0) != 0) continue;
    const std::string idx = s.name.substr(prefix.size() + 1);
    int k = 0;
    auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), k);
    if (ec != std::errc() || ptr != idx.data() + idx.size() || k < 1)
      r.fail(s.line, "bad section index in [" + s.name + "]");
    found[k] = &s;
  }
  std::vector<Section*> out;
  int expect = 1;
  for (auto& [k, s] : found) {
    if (k != expect) r.fail(s->line, "[" + s->name + "] out of sequence; expected [" + prefix + "." + std::to_string(expect) + "]");
    out.push_back(s);
    ++expect;
  }
  return out;
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string_view to_string(BiasNormalizer b) {
  return b == BiasNormalizer::gradient ? "gradient" : "literal";
}

}  // namespace

std::vector<StageSpec> ExperimentConfig::chain_spec() const {
  std::vector<StageSpec> spec;
  std::size_t input = scene.dim;
  for (const auto& s : stages) {
    spec.push_back({s.M, s.n, input});
    input = s.M;
  }
  return spec;
}

void ExperimentConfig::validate() const {
  scene.validate();
  if (stages.empty()) throw ConfigError("at least one stage is required");
  for (const auto& s : stages)
    if (s.M < 1 || s.n < 1) throw ConfigError("stage M and n must be at least 1");
  schedule.validate(stages.size());
  if (snapshot_every == 0) throw ConfigError("snapshot_every must be positive");
}

ExperimentConfig parse_config(std::istream& in, std::string_view source) {
  std::vector<Section> sections;
  std::string raw;
  int line_no = 0;
  const std::string src(source);
  auto fail = [&](const std::string& msg) -> void {
    throw ConfigError(src + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto pos = line.find_first_of("#;"); pos != std::string::npos) line.resize(pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (name.empty()) fail("empty section name");
      for (const auto& s : sections)
        if (s.name == name) fail("duplicate section [" + name + "]");
      sections.push_back({name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (sections.empty()) fail("key outside of any section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) fail("empty key");
    auto& keys = sections.back().keys;
    if (keys.count(key)) fail("duplicate key '" + key + "'");
    keys[key] = Entry{value, line_no, false};
  }

  Reader r(src, std::move(sections));
  for (auto& s : r.sections()) {
    const bool known = s.name == "scene" || s.name == "run" || s.name == "manifest" ||
                       s.name.rfind("stage.", 0) == 0 || s.name.rfind("phase.", 0) == 0;
    if (!known) r.fail(s.line, "unknown section [" + s.name + "]");
  }

  ExperimentConfig cfg;
  Section* scene = r.find("scene");
  if (!scene) r.fail(1, "missing [scene] section");
  {
    const Entry& mode = r.require(*scene, "mode");
    try {
      cfg.scene.mode = parse_scene_mode(mode.value);
    } catch (const ArgumentError& e) {
      r.fail(mode.line, e.what());
    }
    cfg.scene.dim = r.number_or<std::size_t>(*scene, "dim", cfg.scene.dim);
    cfg.scene.half_width = r.number_or<double>(*scene, "half_width", cfg.scene.half_width);
    cfg.scene.amplitude = r.number_or<double>(*scene, "amplitude", cfg.scene.amplitude);
    cfg.scene.sep_min = r.number_or<int>(*scene, "sep_min", cfg.scene.sep_min);
    cfg.scene.sep_max = r.number_or<int>(*scene, "sep_max", cfg.scene.sep_max);
    try {
      cfg.scene.validate();
    } catch (const ConfigError& e) {
      r.fail(scene->line, e.what());
    }
  }

  const auto stage_secs = numbered(r, "stage");
  if (stage_secs.empty()) r.fail(scene->line, "at least one [stage.1] section is required");
  for (Section* s : stage_secs) {
    StageShape shape;
    shape.M = r.number<std::size_t>(r.require(*s, "M"), "M");
    shape.n = r.number<std::size_t>(r.require(*s, "n"), "n");
    if (shape.M < 1 || shape.n < 1) r.fail(s->line, "M and n must be at least 1");
    cfg.stages.push_back(shape);
  }

  const auto phase_secs = numbered(r, "phase");
  if (phase_secs.empty()) r.fail(stage_secs.front()->line, "at least one [phase.1] section is required");
  for (Section* s : phase_secs) {
    Phase p;
    p.epsilon = r.number<double>(r.require(*s, "epsilon"), "epsilon");
    p.steps = r.number<std::size_t>(r.require(*s, "steps"), "steps");
    if (const Entry* w = r.get(*s, "stage_weights")) {
      p.stage_weights = r.number_list(*w, "stage_weights");
      if (p.stage_weights.size() != cfg.stages.size())
        r.fail(w->line, "stage_weights needs " + std::to_string(cfg.stages.size()) + " entries");
    } else {
      p.stage_weights.assign(cfg.stages.size(), 1.0);
    }
    if (!(p.epsilon > 0.0)) r.fail(s->line, "epsilon must be positive");
    if (p.steps == 0) r.fail(s->line, "steps must be positive");
    for (double w : p.stage_weights)
      if (!(w >= 0.0)) r.fail(s->line, "stage weights must be non-negative");
    cfg.schedule.phases.push_back(std::move(p));
  }

  if (Section* run = r.find("run")) {
    cfg.seed = r.number_or<std::uint64_t>(*run, "seed", cfg.seed);
    cfg.snapshot_every = r.number_or<std::size_t>(*run, "snapshot_every", cfg.snapshot_every);
    if (cfg.snapshot_every == 0) r.fail(run->line, "snapshot_every must be positive");
    if (const Entry* out = r.get(*run, "output_dir")) cfg.output_dir = out->value;
    if (const Entry* b = r.get(*run, "bias_normalizer")) {
      if (b->value == "gradient") cfg.bias_normalizer = BiasNormalizer::gradient;
      else if (b->value == "literal") cfg.bias_normalizer = BiasNormalizer::literal;
      else r.fail(b->line, "bias_normalizer must be 'gradient' or 'literal'");
    }
  }
  if (Section* m = r.find("manifest"))
    for (auto& [k, e] : m->keys) e.used = true;

  r.reject_unused();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[scene]\n"
      << "mode = " << to_string(cfg.scene.mode) << "\n"
      << "dim = " << cfg.scene.dim << "\n"
      << "half_width = " << shortest(cfg.scene.half_width) << "\n"
      << "amplitude = " << shortest(cfg.scene.amplitude) << "\n"
      << "sep_min = " << cfg.scene.sep_min << "\n"
      << "sep_max = " << cfg.scene.sep_max << "\n";
  for (std::size_t l = 0; l < cfg.stages.size(); ++l)
    out << "\n[stage." << l + 1 << "]\nM = " << cfg.stages[l].M << "\nn = " << cfg.stages[l].n << "\n";
  for (std::size_t k = 0; k < cfg.schedule.phases.size(); ++k) {
    const auto& p = cfg.schedule.phases[k];
    out << "\n[phase." << k + 1 << "]\nepsilon = " << shortest(p.epsilon) << "\nsteps = " << p.steps
        << "\nstage_weights = ";
    for (std::size_t l = 0; l < p.stage_weights.size(); ++l)
      out << (l ? ", " : "") << shortest(p.stage_weights[l]);
    out << "\n";
  }
  out << "\n[run]\nseed = " << cfg.seed << "\nsnapshot_every = " << cfg.snapshot_every
      << "\noutput_dir = " << cfg.output_dir.string()
      << "\nbias_normalizer = " << to_string(cfg.bias_normalizer) << "\n";
  return out.str();
}

std::string format_manifest(const ExperimentConfig& cfg) {
  return format_config(cfg) + "\n[manifest]\ncode_version = " SVQ_VERSION "\nseed = " +
         std::to_string(cfg.seed) + "\n";
}

}  // namespace svq
