#include "zinreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "zinreg/error.hpp"

namespace zinreg {

using nlohmann::json;

namespace {

[[noreturn]] void bad_config(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    bad_config("'" + where + "' has the wrong type");
  }
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad_config("'" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      bad_config("unknown key '" + key + "' in " + where);
    }
  }
}

PartSpec parse_part(const json& j, const std::string& where, int default_knots) {
  check_keys(j, where, {"parametric", "smooth"});
  PartSpec p;
  if (j.contains("parametric")) {
    p.parametric = get_as<std::vector<std::string>>(j["parametric"], where + ".parametric");
  }
  if (j.contains("smooth")) {
    if (!j["smooth"].is_array()) bad_config("'" + where + ".smooth' must be an array");
    for (const auto& s : j["smooth"]) {
      if (s.is_string()) {
        p.smooths.push_back({s.get<std::string>(), default_knots});
      } else {
        check_keys(s, where + ".smooth[]", {"name", "knots"});
        if (!s.contains("name")) bad_config("smooth entry in " + where + " lacks 'name'");
        p.smooths.push_back({get_as<std::string>(s["name"], where + ".smooth.name"),
                             s.contains("knots") ? get_as<int>(s["knots"], where + ".smooth.knots")
                                                 : default_knots});
      }
    }
  }
  return p;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

AnalysisConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad_config(std::string("malformed JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"input", "delimiter", "response", "transform", "factors", "continuous", "model",
              "candidates", "mccv", "seed", "output", "threads", "simulation"});
  AnalysisConfig c;
  if (j.contains("input")) c.input = resolve(base_dir, get_as<std::string>(j["input"], "input"));
  if (j.contains("delimiter")) {
    const auto d = get_as<std::string>(j["delimiter"], "delimiter");
    if (d == "\\t" || d == "tab") {
      c.delimiter = '\t';
    } else if (d.size() == 1 && d != "." && d != "\"") {
      c.delimiter = d[0];
    } else {
      bad_config("delimiter must be a single character");
    }
  }
  if (j.contains("response")) c.response = get_as<std::string>(j["response"], "response");
  if (j.contains("transform")) {
    const auto t = get_as<std::string>(j["transform"], "transform");
    if (t == "identity") {
      c.transform = Transform::Identity;
    } else if (t == "log1p") {
      c.transform = Transform::Log1p;
    } else {
      bad_config("transform must be 'identity' or 'log1p'");
    }
  }
  if (j.contains("factors")) {
    const json& f = j["factors"];
    if (f.is_array()) {
      for (const auto& name : get_as<std::vector<std::string>>(f, "factors")) c.factors[name] = {};
    } else if (f.is_object()) {
      for (const auto& [name, ref] : f.items()) {
        if (ref.is_null()) {
          c.factors[name] = {};
        } else {
          c.factors[name] = get_as<std::string>(ref, "factors." + name);
        }
      }
    } else {
      bad_config("'factors' must be an array or an object");
    }
  }
  if (j.contains("continuous")) {
    c.continuous = get_as<std::vector<std::string>>(j["continuous"], "continuous");
  }
  if (j.contains("model")) {
    const json& m = j["model"];
    check_keys(m, "model", {"link", "knots", "shrinkage", "clamp", "binary", "mean"});
    const int knots = m.contains("knots") ? get_as<int>(m["knots"], "model.knots") : 9;
    if (m.contains("link")) {
      try {
        c.model.link = parse_link(get_as<std::string>(m["link"], "model.link"));
      } catch (const Error&) {
        bad_config("model.link must be 'logit' or 'probit'");
      }
    }
    if (m.contains("shrinkage")) c.model.shrinkage = get_as<double>(m["shrinkage"], "model.shrinkage");
    if (m.contains("clamp")) c.model.clamp = get_as<double>(m["clamp"], "model.clamp");
    if (m.contains("binary")) c.model.binary = parse_part(m["binary"], "model.binary", knots);
    if (m.contains("mean")) c.model.mean = parse_part(m["mean"], "model.mean", knots);
  }
  if (j.contains("candidates")) {
    if (!j["candidates"].is_array()) bad_config("'candidates' must be an array");
    for (const auto& cj : j["candidates"]) {
      check_keys(cj, "candidate", {"name", "constrained", "initial_deltas"});
      CandidateConfig cc;
      if (!cj.contains("name")) bad_config("candidate lacks 'name'");
      cc.name = get_as<std::string>(cj["name"], "candidate.name");
      if (cj.contains("constrained")) {
        cc.constrained = get_as<std::vector<std::string>>(cj["constrained"], "candidate.constrained");
      }
      if (cj.contains("initial_deltas")) {
        cc.initial_deltas =
            get_as<std::map<std::string, double>>(cj["initial_deltas"], "candidate.initial_deltas");
      }
      c.candidates.push_back(std::move(cc));
    }
  }
  if (j.contains("mccv")) {
    const json& m = j["mccv"];
    check_keys(m, "mccv", {"b", "nu", "stratified"});
    if (m.contains("b")) c.mccv.b = get_as<int>(m["b"], "mccv.b");
    if (m.contains("nu")) c.mccv.nu = get_as<double>(m["nu"], "mccv.nu");
    if (m.contains("stratified")) c.mccv.stratified = get_as<bool>(m["stratified"], "mccv.stratified");
  }
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("output")) c.output = resolve(base_dir, get_as<std::string>(j["output"], "output"));
  if (j.contains("threads")) c.threads = get_as<int>(j["threads"], "threads");
  if (j.contains("simulation")) {
    const json& s = j["simulation"];
    check_keys(s, "simulation", {"n", "sigma", "replications"});
    if (s.contains("n")) c.simulation.n = get_as<std::vector<int>>(s["n"], "simulation.n");
    if (s.contains("sigma")) c.simulation.sigma = get_as<std::vector<double>>(s["sigma"], "simulation.sigma");
    if (s.contains("replications")) {
      c.simulation.replications = get_as<int>(s["replications"], "simulation.replications");
    }
  }
  c.validate();
  return c;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::vector<std::string> AnalysisConfig::used_columns() const {
  std::vector<std::string> cols;
  if (!response.empty()) cols.push_back(response);
  for (const auto& [name, ref] : factors) cols.push_back(name);
  cols.insert(cols.end(), continuous.begin(), continuous.end());
  return cols;
}

void AnalysisConfig::validate() const {
  std::set<std::string> seen;
  for (const auto& col : used_columns()) {
    if (!seen.insert(col).second) bad_config("column '" + col + "' declared twice");
  }
  auto is_factor = [&](const std::string& n) { return factors.contains(n); };
  auto is_cont = [&](const std::string& n) {
    return std::find(continuous.begin(), continuous.end(), n) != continuous.end();
  };
  for (const auto* part : {&model.binary, &model.mean}) {
    for (const auto& t : part->parametric) {
      if (t == response) bad_config("response '" + t + "' used as a covariate");
      if (!is_factor(t) && !is_cont(t)) bad_config("term '" + t + "' is not a declared column");
    }
    for (const auto& s : part->smooths) {
      if (s.covariate == response) bad_config("response '" + s.covariate + "' used as a covariate");
      if (!is_cont(s.covariate)) {
        bad_config("smooth '" + s.covariate + "' must be a declared continuous column");
      }
      if (s.n_knots < 0) bad_config("smooth '" + s.covariate + "' has a negative knot count");
    }
  }
  if (!(model.shrinkage > 0.0)) bad_config("model.shrinkage must be positive");
  if (!(model.clamp > 0.0 && model.clamp < 0.5)) bad_config("model.clamp must lie in (0, 0.5)");
  std::set<std::string> names;
  for (const auto& cand : candidates) {
    if (cand.name.empty()) bad_config("candidate names must be nonempty");
    if (!names.insert(cand.name).second) bad_config("duplicate candidate '" + cand.name + "'");
    for (const auto& t : cand.constrained) {
      if (!model.binary.has_smooth(t) || !model.mean.has_smooth(t)) {
        bad_config("candidate '" + cand.name + "' constrains '" + t +
                   "', which is not a smooth in both parts");
      }
    }
    for (const auto& [t, v] : cand.initial_deltas) {
      if (std::find(cand.constrained.begin(), cand.constrained.end(), t) == cand.constrained.end()) {
        bad_config("candidate '" + cand.name + "' sets an initial delta for unconstrained '" + t + "'");
      }
    }
  }
  try {
    mccv.validate();
  } catch (const Error& e) {
    bad_config(e.what());
  }
  if (threads < 1) bad_config("threads must be at least 1");
  for (int n : simulation.n) {
    if (n < 4 || n % 2 != 0) bad_config("simulation sizes must be even and at least 4");
  }
  for (double s : simulation.sigma) {
    if (!(s >= 0.0)) bad_config("simulation noise levels must be nonnegative");
  }
  if (simulation.n.empty() || simulation.sigma.empty()) bad_config("simulation grid is empty");
  if (simulation.replications < 1) bad_config("simulation.replications must be at least 1");
}

ModelSpec AnalysisConfig::candidate_spec(const CandidateConfig& c) const {
  ModelSpec spec = model;
  spec.name = c.name;
  spec.constraint.terms = c.constrained;
  spec.constraint.initial_deltas = c.initial_deltas;
  return spec;
}

ModelSpec AnalysisConfig::candidate_spec(const std::string& name) const {
  if (candidates.empty()) {
    if (!name.empty()) bad_config("no candidate named '" + name + "'");
    return model;
  }
  if (name.empty()) return candidate_spec(candidates.front());
  for (const auto& c : candidates) {
    if (c.name == name) return candidate_spec(c);
  }
  bad_config("no candidate named '" + name + "'");
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
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
    } else if (c == delim) {
      out.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(field);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t\r");
    const auto e = f.find_last_not_of(" \t\r");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

}  // namespace

LoadedData parse_csv(std::istream& in, const AnalysisConfig& config, bool with_response) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "input has no header row");
  const auto header = split_line(line, config.delimiter);
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < header.size(); ++k) index.emplace(header[k], k);

  std::vector<std::string> cols;
  for (const auto& c : config.used_columns()) {
    if (c == config.response && !with_response) continue;
    if (!index.contains(c)) throw Error(ErrorCode::MissingColumn, "column '" + c + "' not in header");
    cols.push_back(c);
  }

  std::map<std::string, std::vector<std::string>> factor_raw;
  std::map<std::string, std::vector<double>> numeric;
  LoadedData out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_line(line, config.delimiter);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::UnparseableValue, "row " + std::to_string(row) + " has " +
                                                   std::to_string(fields.size()) + " fields, expected " +
                                                   std::to_string(header.size()));
    }
    bool missing = false;
    for (const auto& c : cols) missing = missing || is_missing(fields[index[c]]);
    if (missing) {
      ++out.dropped;
      continue;
    }
    for (const auto& c : cols) {
      const std::string& f = fields[index[c]];
      if (config.factors.contains(c)) {
        factor_raw[c].push_back(f);
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::UnparseableValue,
                    "row " + std::to_string(row) + ", column '" + c + "': '" + f + "'");
      }
      numeric[c].push_back(v);
    }
  }

  std::size_t rows = 0;
  for (const auto& c : cols) {
    rows = config.factors.contains(c) ? factor_raw[c].size() : numeric[c].size();
    break;
  }
  if (rows == 0 && with_response) {
    throw Error(ErrorCode::EmptyAfterFiltering, "no complete rows remain");
  }

  Dataset& d = out.data;
  if (with_response) {
    d.y = std::move(numeric[config.response]);
    if (config.transform == Transform::Log1p) {
      for (auto& v : d.y) {
        if (!(v > -1.0)) throw Error(ErrorCode::DomainError, "log1p needs responses above -1");
        v = std::log1p(v);
      }
    }
  } else {
    d.y.assign(rows, 0.0);
  }
  for (const auto& c : config.continuous) d.continuous[c] = numeric[c];
  for (const auto& [name, ref] : config.factors) {
    const auto& raw = factor_raw[name];
    std::set<std::string> distinct(raw.begin(), raw.end());
    FactorColumn f;
    if (ref) {
      if (!distinct.contains(*ref) && !raw.empty()) {
        throw Error(ErrorCode::InvalidConfig,
                    "reference level '" + *ref + "' not present in factor '" + name + "'");
      }
      f.levels.push_back(*ref);
    }
    for (const auto& lev : distinct) {
      if (!ref || lev != *ref) f.levels.push_back(lev);
    }
    for (const auto& v : raw) {
      f.codes.push_back(static_cast<int>(std::find(f.levels.begin(), f.levels.end(), v) - f.levels.begin()));
    }
    d.factors[name] = std::move(f);
  }
  d.validate();
  return out;
}

LoadedData load_csv(const std::filesystem::path& path, const AnalysisConfig& config,
                    bool with_response) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return parse_csv(in, config, with_response);
}

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json part_spec_json(const PartSpec& p) {
  json s = json::array();
  for (const auto& sm : p.smooths) s.push_back({{"covariate", sm.covariate}, {"n_knots", sm.n_knots}});
  return {{"parametric", p.parametric}, {"smooths", s}};
}

PartSpec part_spec_from(const json& j) {
  PartSpec p;
  p.parametric = j.at("parametric").get<std::vector<std::string>>();
  for (const auto& s : j.at("smooths")) {
    p.smooths.push_back({s.at("covariate").get<std::string>(), s.at("n_knots").get<int>()});
  }
  return p;
}

json part_structure_json(const PartStructure& p) {
  json par = json::array();
  for (const auto& pc : p.parametric) {
    par.push_back({{"name", pc.name}, {"covariate", pc.covariate}, {"level", pc.level}});
  }
  json sm = json::array();
  for (const auto& sc : p.smooths) {
    const KnotSet& ks = sc.basis.knot_set();
    sm.push_back({{"covariate", sc.covariate},
                  {"knots", ks.knots},
                  {"domain_lo", ks.domain_lo},
                  {"domain_hi", ks.domain_hi},
                  {"collapsed", ks.collapsed},
                  {"epsilon", sc.penalty.epsilon},
                  {"column_means", vec_json(sc.column_means)}});
  }
  return {{"parametric", par}, {"smooths", sm}};
}

PartStructure part_structure_from(const json& j) {
  PartStructure p;
  for (const auto& pc : j.at("parametric")) {
    p.parametric.push_back({pc.at("name").get<std::string>(), pc.at("covariate").get<std::string>(),
                            pc.at("level").get<std::string>()});
  }
  for (const auto& s : j.at("smooths")) {
    SmoothComponent sc;
    sc.covariate = s.at("covariate").get<std::string>();
    KnotSet ks;
    ks.knots = s.at("knots").get<std::vector<double>>();
    ks.domain_lo = s.at("domain_lo").get<double>();
    ks.domain_hi = s.at("domain_hi").get<double>();
    ks.collapsed = s.at("collapsed").get<int>();
    sc.basis = SplineBasis(std::move(ks));
    const PenaltyMatrix raw = penalty_matrix(sc.basis);
    const double eps = s.at("epsilon").get<double>();
    sc.penalty = eps > 0.0 ? shrink_penalty(raw, eps) : raw;
    sc.column_means = json_vec(s.at("column_means"));
    if (sc.column_means.size() != sc.free_dim()) {
      throw Error(ErrorCode::SchemaMismatch, "artifact smooth '" + sc.covariate + "' is inconsistent");
    }
    p.smooths.push_back(std::move(sc));
  }
  return p;
}

json theta_map(const std::map<std::string, Eigen::VectorXd>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = vec_json(v);
  return j;
}

std::map<std::string, Eigen::VectorXd> theta_map_from(const json& j) {
  std::map<std::string, Eigen::VectorXd> m;
  for (const auto& [k, v] : j.items()) m[k] = json_vec(v);
  return m;
}

}  // namespace

std::string model_to_json(const FittedZinModel& model) {
  const ModelStructure& st = model.structure;
  const ZinParams& p = model.params;
  json j;
  j["format"] = "zinreg-model";
  j["version"] = 1;
  j["spec"] = {{"name", st.spec.name},
               {"link", std::string(link_name(st.spec.link))},
               {"shrinkage", st.spec.shrinkage},
               {"clamp", st.spec.clamp},
               {"binary", part_spec_json(st.spec.binary)},
               {"mean", part_spec_json(st.spec.mean)},
               {"constraint", st.spec.constraint.terms}};
  j["factor_levels"] = st.factor_levels;
  j["structure"] = {{"binary", part_structure_json(st.binary)}, {"mean", part_structure_json(st.mean)}};
  j["params"] = {{"beta0", p.beta0},
                 {"beta", p.beta},
                 {"gamma0", p.gamma0},
                 {"gamma", p.gamma},
                 {"smooths_h", theta_map(p.smooths_h)},
                 {"smooths_s", theta_map(p.smooths_s)},
                 {"deltas", p.deltas},
                 {"sigma2", p.sigma2}};
  j["undefined_deltas"] = model.undefined_deltas;
  j["fit"] = {{"converged", model.converged},
              {"iterations", model.iterations},
              {"gradient_norm", model.gradient_norm},
              {"loglik", model.loglik},
              {"penalized_loglik", model.penalized_loglik},
              {"n", model.n},
              {"n_nonzero", model.n_nonzero}};
  return j.dump(2);
}

LoadedModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "zinreg-model") throw Error(ErrorCode::SchemaMismatch, "not a model artifact");
    LoadedModel m;
    ModelSpec& spec = m.structure.spec;
    const json& s = j.at("spec");
    spec.name = s.at("name").get<std::string>();
    spec.link = parse_link(s.at("link").get<std::string>());
    spec.shrinkage = s.at("shrinkage").get<double>();
    spec.clamp = s.at("clamp").get<double>();
    spec.binary = part_spec_from(s.at("binary"));
    spec.mean = part_spec_from(s.at("mean"));
    spec.constraint.terms = s.at("constraint").get<std::vector<std::string>>();
    m.structure.factor_levels =
        j.at("factor_levels").get<std::map<std::string, std::vector<std::string>>>();
    m.structure.binary = part_structure_from(j.at("structure").at("binary"));
    m.structure.mean = part_structure_from(j.at("structure").at("mean"));
    const json& p = j.at("params");
    m.params.beta0 = p.at("beta0").get<double>();
    m.params.beta = p.at("beta").get<std::map<std::string, double>>();
    m.params.gamma0 = p.at("gamma0").get<double>();
    m.params.gamma = p.at("gamma").get<std::map<std::string, double>>();
    m.params.smooths_h = theta_map_from(p.at("smooths_h"));
    m.params.smooths_s = theta_map_from(p.at("smooths_s"));
    m.params.deltas = p.at("deltas").get<std::map<std::string, double>>();
    m.params.sigma2 = p.at("sigma2").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("malformed model artifact: ") + e.what());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_summary(std::optional<double> v) {
  if (!v || std::isnan(*v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

std::string p_summary(std::optional<double> p) {
  if (p && *p < 0.001) return "<0.001";
  return format_summary(p);
}

template <class... T>
void row(std::ostream& os, char d, const T&... fields) {
  bool first = true;
  ((os << (first ? "" : std::string(1, d)) << fields, first = false), ...);
  os << '\n';
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

}  // namespace

void write_coefficient_table(std::ostream& os, const InferenceReport& r, char d) {
  row(os, d, "part", "term", "estimate", "se", "z", "p_value");
  for (const auto& c : r.coefficients) {
    row(os, d, part_name(c.part), c.name, format_number(c.estimate), format_number(c.se),
        format_number(c.z), format_number(c.p_value));
  }
}

void write_smooth_table(std::ostream& os, const InferenceReport& r, char d) {
  row(os, d, "part", "term", "edf", "f_stat", "p_value", "residual_df", "eliminated");
  for (const auto& s : r.smooths) {
    row(os, d, part_name(s.part), s.name, s.eliminated ? "NA" : format_number(s.test.edf),
        opt_number(s.test.f_stat), opt_number(s.test.p_value), format_number(s.test.residual_df),
        s.eliminated ? 1 : 0);
  }
}

void write_delta_table(std::ostream& os, const InferenceReport& r, char d) {
  row(os, d, "term", "estimate", "se");
  for (const auto& x : r.deltas) row(os, d, x.name, opt_number(x.estimate), opt_number(x.se));
}

void write_summary(std::ostream& os, const FittedZinModel& model, const InferenceReport& r) {
  os << "Model: " << model.structure.spec.name << " (" << link_name(model.structure.spec.link)
     << " link)\n";
  os << "n = " << model.n << ", nonzero = " << model.n_nonzero
     << ", converged = " << (model.converged ? "yes" : "no") << ", iterations = " << model.iterations
     << "\n\n";
  os << "Parametric coefficients\n";
  for (Part part : {Part::Binary, Part::Mean}) {
    os << (part == Part::Binary ? "  Logistic part\n" : "  Linear part\n");
    os << "    " << pad("term", 24) << pad("estimate", 11) << pad("se", 11) << "p-value\n";
    for (const auto& c : r.coefficients) {
      if (c.part != part) continue;
      os << "    " << pad(c.name, 24) << pad(format_summary(c.estimate), 11)
         << pad(format_summary(c.se), 11) << p_summary(c.p_value) << '\n';
    }
  }
  os << "\nSmooth terms\n";
  os << "    " << pad("term", 16) << pad("EDF", 9) << pad("F", 10) << pad("p-value", 10) << pad("EDF", 9)
     << pad("F", 10) << "p-value\n";
  std::vector<std::string> names;
  for (const auto& s : r.smooths) {
    if (std::find(names.begin(), names.end(), s.name) == names.end()) names.push_back(s.name);
  }
  for (const auto& name : names) {
    os << "    " << pad("s(" + name + ")", 16);
    for (Part part : {Part::Binary, Part::Mean}) {
      const auto it = std::find_if(r.smooths.begin(), r.smooths.end(),
                                   [&](const SmoothRow& s) { return s.part == part && s.name == name; });
      if (it == r.smooths.end()) {
        os << pad("", 29);
        continue;
      }
      const bool na = it->eliminated;
      os << pad(na ? "NA" : format_summary(it->test.edf), 9)
         << pad(na ? "NA" : format_summary(it->test.f_stat), 10)
         << pad(na ? "NA" : p_summary(it->test.p_value), 10);
    }
    os << '\n';
  }
  if (!r.deltas.empty()) {
    os << "\nProportionality parameters\n";
    for (const auto& x : r.deltas) {
      os << "    " << pad("delta(" + x.name + ")", 16) << pad(format_summary(x.estimate), 11)
         << format_summary(x.se) << '\n';
    }
  }
  os << "\nsigma2 = " << format_summary(r.sigma2) << ", loglik = " << format_summary(r.loglik)
     << ", penalized loglik = " << format_summary(model.penalized_loglik) << '\n';
  for (const auto& w : model.warnings) os << "warning: " << w << '\n';
}

void write_smooth_grids(std::ostream& os, const FittedZinModel& model, int points, char d) {
  row(os, d, "part", "term", "x", "estimate", "se", "lower", "upper", "eliminated");
  for (Part part : {Part::Binary, Part::Mean}) {
    for (const auto& t : model.smooth_terms) {
      if (t.part != part) continue;
      const KnotSet& ks = t.basis.knot_set();
      std::vector<double> grid(static_cast<std::size_t>(points));
      for (int k = 0; k < points; ++k) {
        grid[static_cast<std::size_t>(k)] =
            points == 1 ? ks.domain_lo
                        : ks.domain_lo + (ks.domain_hi - ks.domain_lo) * k / (points - 1.0);
      }
      if (t.eliminated) {
        for (double x : grid) row(os, d, part_name(part), t.name, format_number(x), 0, 0, 0, 0, 1);
        continue;
      }
      for (const auto& b : confidence_band(model, part, t.name, grid, 0.95)) {
        row(os, d, part_name(part), t.name, format_number(b.x), format_number(b.estimate),
            format_number(b.se), format_number(b.lower), format_number(b.upper), 0);
      }
    }
  }
}

void write_cv_report(std::ostream& os, const CvReport& report,
                     const std::vector<std::string>& smooth_terms, char d) {
  os << "model";
  for (const auto& t : smooth_terms) os << d << "constrained_" << t;
  os << d << "loglik" << d << "loglik_se" << d << "auc" << d << "mse" << d << "mse_c" << d
     << "replications" << d << "failures" << d << "selected\n";
  for (std::size_t c = 0; c < report.candidates.size(); ++c) {
    const auto& cand = report.candidates[c];
    os << cand.name;
    for (const auto& t : smooth_terms) {
      const bool on = std::find(cand.constrained_terms.begin(), cand.constrained_terms.end(), t) !=
                      cand.constrained_terms.end();
      os << d << (on ? 1 : 0);
    }
    os << d << format_number(cand.mean.loglik) << d << format_number(cand.se.loglik) << d
       << format_number(cand.mean.auc) << d << format_number(cand.mean.mse) << d
       << format_number(cand.mean.mse_c) << d << cand.replications.size() << d << cand.failures << d
       << (c == report.selected ? 1 : 0) << '\n';
  }
}

void write_success_table(std::ostream& os, const SuccessRateTable& table, char d) {
  os << "n" << d << "sigma" << d << "replications" << d << "failed";
  for (const char* c : kCriterionNames) os << d << "rate_" << c;
  for (const char* c : kCriterionNames) os << d << "gap_" << c;
  os << '\n';
  for (const auto& r : table.rows) {
    os << r.n << d << format_number(r.sigma) << d << r.replications << d << r.failed;
    for (double v : r.rate) os << d << format_number(v);
    for (double v : r.mean_gap) os << d << format_number(v);
    os << '\n';
  }
}

void write_success_records(std::ostream& os, const SuccessRateTable& table, char d) {
  os << "n" << d << "sigma" << d << "rep" << d << "ok";
  for (const char* who : {"constrained", "unconstrained"}) {
    for (const char* c : kCriterionNames) os << d << who << '_' << c;
  }
  os << '\n';
  for (const auto& r : table.records) {
    os << r.n << d << format_number(r.sigma) << d << r.rep << d << (r.ok ? 1 : 0);
    for (const Criteria* c : {&r.constrained, &r.unconstrained}) {
      os << d << format_number(c->loglik) << d << format_number(c->auc) << d << format_number(c->mse)
         << d << format_number(c->mse_c);
    }
    os << '\n';
  }
}

void write_predictions(std::ostream& os, const Predictions& pred, char d) {
  row(os, d, "p", "mu", "ey");
  for (Eigen::Index i = 0; i < pred.p.size(); ++i) {
    row(os, d, format_number(pred.p[i]), format_number(pred.mu[i]), format_number(pred.ey[i]));
  }
}

}  // namespace zinreg
