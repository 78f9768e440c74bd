#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "polequil/bne.hpp"
#include "polequil/errors.hpp"
#include "polequil/modelnd.hpp"
#include "polequil/model1d.hpp"

namespace polequil {

// Line-oriented scenario grammar: `[section]` headers and `key = value`
// entries, `#` comments, values either scalars or comma-separated lists.
// Entries keep their textual form so parse -> serialize -> parse is exact.
struct ScenarioEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct ScenarioSection {
  std::string name;  // empty for the leading unnamed section
  std::vector<ScenarioEntry> entries;
  int line = 0;
};

struct ScenarioFile {
  std::vector<ScenarioSection> sections;

  const ScenarioSection* section(const std::string& name) const {
    for (const auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }

  const std::string* find(const std::string& section_name,
                          const std::string& key) const {
    const auto* s = section(section_name);
    if (!s) return nullptr;
    for (const auto& e : s->entries)
      if (e.key == key) return &e.value;
    return nullptr;
  }

  // dotted path "section.key" (keys themselves may contain further dots)
  void set(const std::string& path, const std::string& value) {
    const auto dot = path.find('.');
    if (dot == std::string::npos)
      throw ValidationError("parameter path must look like section.key: " + path);
    const std::string sec = path.substr(0, dot);
    const std::string key = path.substr(dot + 1);
    for (auto& s : sections) {
      if (s.name != sec) continue;
      for (auto& e : s.entries) {
        if (e.key == key) {
          e.value = value;
          return;
        }
      }
      s.entries.push_back({key, value, 0});
      return;
    }
    sections.push_back({sec, {{key, value, 0}}, 0});
  }

  std::string serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& s : sections) {
      if (!s.name.empty()) {
        if (!first) out << "\n";
        out << "[" << s.name << "]\n";
      }
      for (const auto& e : s.entries) out << e.key << " = " << e.value << "\n";
      first = false;
    }
    return out.str();
  }

  bool same_content(const ScenarioFile& other) const {
    if (sections.size() != other.sections.size()) return false;
    for (std::size_t i = 0; i < sections.size(); ++i) {
      if (sections[i].name != other.sections[i].name ||
          sections[i].entries.size() != other.sections[i].entries.size())
        return false;
      for (std::size_t j = 0; j < sections[i].entries.size(); ++j)
        if (sections[i].entries[j].key != other.sections[i].entries[j].key ||
            sections[i].entries[j].value != other.sections[i].entries[j].value)
          return false;
    }
    return true;
  }
};

namespace ioutil {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline bool valid_token(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.')
      return false;
  return true;
}

inline double to_number(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ValidationError(what + " must be a number, got '" + t + "'");
  }
  if (used != t.size())
    throw ValidationError(what + " must be a number, got '" + t + "'");
  return v;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::vector<double> to_numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_number(item, what));
  return out;
}

}  // namespace ioutil

inline ScenarioFile parse_scenario(const std::string& text) {
  ScenarioFile file;
  file.sections.push_back({"", {}, 0});
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = ioutil::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("unterminated section header", line_no,
                         int(raw.find('[')) + 1);
      const std::string name = ioutil::trim(line.substr(1, line.size() - 2));
      if (!ioutil::valid_token(name))
        throw ParseError("bad section name '" + name + "'", line_no, 1);
      file.sections.push_back({name, {}, line_no});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value'", line_no, 1);
    const std::string key = ioutil::trim(line.substr(0, eq));
    const std::string value = ioutil::trim(line.substr(eq + 1));
    if (!ioutil::valid_token(key))
      throw ParseError("bad key '" + key + "'", line_no, 1);
    if (value.empty())
      throw ParseError("empty value for key '" + key + "'", line_no, int(eq) + 2);
    file.sections.back().entries.push_back({key, value, line_no});
  }
  if (file.sections.front().entries.empty() && file.sections.size() > 1)
    file.sections.erase(file.sections.begin());
  if (!file.section("model"))
    throw ParseError("missing [model] section", line_no, 1);
  const std::string* fmt = file.find("", "format");
  if (!fmt || ioutil::trim(*fmt) != "1")
    throw ValidationError("scenario file must declare format = 1");
  return file;
}

inline ScenarioFile load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

enum class ModelKind { OneD, MultiD, Bayesian };

inline ModelKind model_kind(const ScenarioFile& f) {
  const std::string* type = f.find("model", "type");
  if (!type) throw ValidationError("[model] must declare type = 1d | nd | bne");
  if (*type == "1d") return ModelKind::OneD;
  if (*type == "nd") return ModelKind::MultiD;
  if (*type == "bne") return ModelKind::Bayesian;
  throw ValidationError("unknown model type '" + *type + "'");
}

namespace iodetail {

// Tracks consumed keys so anything left over is rejected by name.
class KeyTracker {
 public:
  explicit KeyTracker(const ScenarioFile& f) : file_(f) {}

  const std::string* get(const std::string& section, const std::string& key) {
    used_.insert(section + "\n" + key);
    return file_.find(section, key);
  }

  const std::string& require(const std::string& section, const std::string& key) {
    const std::string* v = get(section, key);
    if (!v)
      throw ValidationError("missing key '" + key + "' in [" + section + "]");
    return *v;
  }

  void allow_section(const std::string& name) { allowed_.insert(name); }

  void mark_all(const std::string& section) {
    if (const auto* s = file_.section(section))
      for (const auto& e : s->entries) used_.insert(section + "\n" + e.key);
  }

  void check_clean() const {
    for (const auto& s : file_.sections) {
      if (s.name.empty()) {
        for (const auto& e : s.entries)
          if (e.key != "format")
            throw ValidationError("unknown top-level key '" + e.key + "'");
        continue;
      }
      if (!allowed_.count(s.name))
        throw ValidationError("unknown section [" + s.name + "]");
      for (const auto& e : s.entries)
        if (!used_.count(s.name + "\n" + e.key))
          throw ValidationError("unknown key '" + e.key + "' in [" + s.name + "]");
    }
  }

 private:
  const ScenarioFile& file_;
  std::set<std::string> used_;
  std::set<std::string> allowed_;
};

// Resolves named function specs from [functions], with mixtures referencing
// other named pdfs.
class PdfResolver {
 public:
  PdfResolver(const ScenarioFile& f, KeyTracker& keys) : file_(f), keys_(keys) {}

  Pdf1D resolve(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    if (in_progress_.count(name))
      throw ValidationError("mixture definitions form a cycle at '" + name + "'");
    in_progress_.insert(name);
    Pdf1D pdf = build(name);
    in_progress_.erase(name);
    cache_.emplace(name, pdf);
    return pdf;
  }

 private:
  Pdf1D build(const std::string& name) {
    const std::string kind = keys_.require("functions", name + ".kind");
    if (kind == "truncated-gaussian-shifted") {
      const auto means = ioutil::to_numbers(
          keys_.require("functions", name + ".means"), name + ".means");
      const auto sigmas = ioutil::to_numbers(
          keys_.require("functions", name + ".sigmas"), name + ".sigmas");
      std::vector<double> weights(means.size(), 1.0);
      if (const auto* w = keys_.get("functions", name + ".weights"))
        weights = ioutil::to_numbers(*w, name + ".weights");
      double offset = 0.0;
      if (const auto* o = keys_.get("functions", name + ".offset"))
        offset = ioutil::to_number(*o, name + ".offset");
      if (means.size() != sigmas.size() || means.size() != weights.size())
        throw ValidationError("'" + name + "' component lists disagree in length");
      std::vector<GaussComponent> comps;
      for (std::size_t i = 0; i < means.size(); ++i) {
        if (sigmas[i] <= 0.0)
          throw ValidationError("'" + name + "' sigmas must be positive");
        comps.push_back({weights[i], means[i], sigmas[i]});
      }
      return normalize_pdf(Pdf1D::gauss_shifted(comps, offset));
    }
    if (kind == "mixture") {
      const std::string first = keys_.require("functions", name + ".first");
      const std::string second = keys_.require("functions", name + ".second");
      const double lambda = ioutil::to_number(
          keys_.require("functions", name + ".lambda"), name + ".lambda");
      return mix_pdfs(resolve(first), resolve(second), lambda);
    }
    if (kind == "tabulated") {
      const auto xs =
          ioutil::to_numbers(keys_.require("functions", name + ".xs"), name + ".xs");
      const auto ys =
          ioutil::to_numbers(keys_.require("functions", name + ".ys"), name + ".ys");
      return normalize_pdf(Pdf1D::tabulated(xs, ys));
    }
    throw ValidationError("unknown pdf kind '" + kind + "' for '" + name + "'");
  }

  const ScenarioFile& file_;
  KeyTracker& keys_;
  std::map<std::string, Pdf1D> cache_;
  std::set<std::string> in_progress_;
};

inline CostCdf build_cost_cdf(KeyTracker& keys) {
  const std::string kind = keys.require("functions", "fc.kind");
  if (kind == "identity-clamped") return CostCdf::identity();
  if (kind != "affine-clamped")
    throw ValidationError("unknown cost-cdf kind '" + kind + "'");
  CostCdf fc = CostCdf::affine(
      ioutil::to_number(keys.require("functions", "fc.slope"), "fc.slope"));
  if (const auto* b = keys.get("functions", "fc.intercept"))
    fc.intercept = ioutil::to_number(*b, "fc.intercept");
  return fc;
}

inline void read_solver_1d(KeyTracker& keys, Scenario1D& s) {
  if (const auto* q = keys.get("solver", "quad_order"))
    s.quad_order = int(ioutil::to_number(*q, "quad_order"));
  if (const auto* t = keys.get("solver", "tolerance"))
    s.tolerance = ioutil::to_number(*t, "tolerance");
}

}  // namespace iodetail

inline Scenario1D build_scenario_1d(const ScenarioFile& f) {
  if (model_kind(f) == ModelKind::MultiD)
    throw ValidationError("scenario declares an nd model, expected 1d");
  iodetail::KeyTracker keys(f);
  for (const char* s : {"model", "functions", "parties", "solver", "experiment", "types"})
    keys.allow_section(s);
  keys.get("model", "type");
  keys.mark_all("experiment");
  keys.mark_all("types");

  iodetail::PdfResolver pdfs(f, keys);
  Scenario1D s;
  s.g = pdfs.resolve("g");
  s.fc = iodetail::build_cost_cdf(keys);
  const std::string mkind = keys.require("functions", "m.kind");
  if (mkind != "polynomial")
    throw ValidationError("1d motivation kind must be polynomial");
  s.m.coeffs = ioutil::to_numbers(keys.require("functions", "m.coeffs"), "m.coeffs");
  s.d_left = {ioutil::to_number(keys.require("parties", "k_left"), "k_left"),
              ioutil::to_number(keys.require("parties", "ideal_left"), "ideal_left")};
  s.d_right = {ioutil::to_number(keys.require("parties", "k_right"), "k_right"),
               ioutil::to_number(keys.require("parties", "ideal_right"), "ideal_right")};
  iodetail::read_solver_1d(keys, s);
  keys.check_clean();
  s.validate();
  return s;
}

inline ScenarioND build_scenario_nd(const ScenarioFile& f) {
  if (model_kind(f) != ModelKind::MultiD)
    throw ValidationError("scenario does not declare an nd model");
  iodetail::KeyTracker keys(f);
  for (const char* s : {"model", "functions", "parties", "solver", "experiment"})
    keys.allow_section(s);
  keys.get("model", "type");
  keys.mark_all("experiment");

  ScenarioND s;
  s.dim = std::size_t(
      ioutil::to_number(keys.require("model", "dimension"), "dimension"));
  if (const auto* axes = keys.get("model", "axes")) {
    s.axis_names = ioutil::split_list(*axes);
    if (s.axis_names.size() != s.dim)
      throw ValidationError("axes list length must equal the dimension");
  }

  iodetail::PdfResolver pdfs(f, keys);
  for (const auto& name : ioutil::split_list(keys.require("model", "g")))
    s.g.push_back(pdfs.resolve(name));

  s.fc = iodetail::build_cost_cdf(keys);
  const std::string mkind = keys.require("functions", "m.kind");
  if (mkind != "quadratic-form")
    throw ValidationError("nd motivation kind must be quadratic-form");
  s.m.quad = ioutil::to_numbers(keys.require("functions", "m.quad"), "m.quad");
  s.m.constant =
      ioutil::to_number(keys.require("functions", "m.constant"), "m.constant");

  if (const auto* grad = keys.get("functions", "phi.gradient")) {
    s.phi.gradient = ioutil::to_numbers(*grad, "phi.gradient");
    if (const auto* sc = keys.get("functions", "phi.scale"))
      s.phi.scale = ioutil::to_number(*sc, "phi.scale");
  } else {
    s.phi = Feasibility::none(s.dim);
  }

  s.d_left.k = ioutil::to_numbers(keys.require("parties", "k_left"), "k_left");
  s.d_left.ideal =
      ioutil::to_numbers(keys.require("parties", "ideal_left"), "ideal_left");
  s.d_right.k = ioutil::to_numbers(keys.require("parties", "k_right"), "k_right");
  s.d_right.ideal =
      ioutil::to_numbers(keys.require("parties", "ideal_right"), "ideal_right");
  // scalar coefficients broadcast across axes
  if (s.d_left.k.size() == 1) s.d_left.k.assign(s.dim, s.d_left.k[0]);
  if (s.d_right.k.size() == 1) s.d_right.k.assign(s.dim, s.d_right.k[0]);

  if (const auto* q = keys.get("solver", "quad_order"))
    s.quad_order = int(ioutil::to_number(*q, "quad_order"));
  if (const auto* r = keys.get("solver", "region")) {
    if (*r == "box")
      s.region = RegionMode::Box;
    else if (*r == "bisector")
      s.region = RegionMode::Bisector;
    else
      throw ValidationError("region must be box or bisector");
  }
  keys.check_clean();
  s.validate();
  return s;
}

struct BneScenario {
  TypeModel types;
  Scenario1D base;
};

inline BneScenario build_scenario_bne(const ScenarioFile& f,
                                      std::optional<std::uint64_t> seed = {}) {
  if (model_kind(f) != ModelKind::Bayesian)
    throw ValidationError("scenario does not declare a bne model");
  if (const auto* types = f.section("types")) {
    static const std::set<std::string> known{
        "candidates", "prior",  "noise", "metric", "radius_left",
        "radius_right", "center", "radius", "count", "seed"};
    for (const auto& e : types->entries)
      if (!known.count(e.key))
        throw ValidationError("unknown key '" + e.key + "' in [types]");
  } else {
    throw ValidationError("bne scenario needs a [types] section");
  }
  BneScenario out;
  out.base = build_scenario_1d(f);  // shares the functions/parties/solver layout

  iodetail::KeyTracker keys(f);
  keys.allow_section("types");
  iodetail::PdfResolver pdfs(f, keys);

  const auto metric_of = [](const std::string& m) {
    if (m == "kl") return Divergence::KL;
    if (m == "js") return Divergence::JS;
    if (m == "wasserstein1") return Divergence::Wasserstein1;
    throw ValidationError("unknown divergence metric '" + m + "'");
  };

  if (const auto* cands = keys.get("types", "candidates")) {
    TypeModel tm;
    for (const auto& name : ioutil::split_list(*cands))
      tm.candidates.push_back(pdfs.resolve(name));
    const std::size_t k = tm.candidates.size();
    tm.prior.assign(k, 1.0 / double(k));
    if (const auto* prior = keys.get("types", "prior"))
      tm.prior = ioutil::to_numbers(*prior, "prior");
    const double noise =
        ioutil::to_number(keys.require("types", "noise"), "noise");
    tm.likelihood_left = confusion_matrix(k, noise);
    tm.likelihood_right = confusion_matrix(k, noise);
    if (const auto* m = keys.get("types", "metric")) tm.metric = metric_of(*m);
    if (const auto* rl = keys.get("types", "radius_left"))
      tm.radius_left = ioutil::to_number(*rl, "radius_left");
    if (const auto* rr = keys.get("types", "radius_right"))
      tm.radius_right = ioutil::to_number(*rr, "radius_right");
    if (const auto* center = keys.get("types", "center"))
      tm.center = pdfs.resolve(*center);
    tm.validate();
    out.types = std::move(tm);
    return out;
  }

  const std::string center = keys.require("types", "center");
  const double radius = ioutil::to_number(keys.require("types", "radius"), "radius");
  const std::size_t count =
      std::size_t(ioutil::to_number(keys.require("types", "count"), "count"));
  const double noise = ioutil::to_number(keys.require("types", "noise"), "noise");
  Divergence metric = Divergence::JS;
  if (const auto* m = keys.get("types", "metric")) metric = metric_of(*m);
  std::uint64_t use_seed = 12345;
  if (const auto* sd = keys.get("types", "seed"))
    use_seed = std::uint64_t(ioutil::to_number(*sd, "seed"));
  if (seed) use_seed = *seed;
  out.types = build_type_model(pdfs.resolve(center), metric, radius, count, noise,
                               use_seed);
  return out;
}

// Parses and validates a scenario file end to end: the declared model builds
// and every key is recognized.
inline ScenarioFile validate_scenario(const std::string& text) {
  ScenarioFile f = parse_scenario(text);
  switch (model_kind(f)) {
    case ModelKind::OneD:
      build_scenario_1d(f);
      break;
    case ModelKind::MultiD:
      build_scenario_nd(f);
      break;
    case ModelKind::Bayesian:
      build_scenario_bne(f);
      break;
  }
  return f;
}

}  // namespace polequil
