#include "problem.hpp"

#include <cmath>
#include <map>
#include <set>

#include "cpext/fixtures.hpp"

namespace cpext::cli {

namespace {

using io::ParseError;

const std::vector<std::pair<Mode, std::string>>& mode_table() {
  static const std::vector<std::pair<Mode, std::string>> t = {
      {Mode::CpCheck, "cp-check"},
      {Mode::CpExtend, "cp-extend"},
      {Mode::Approx, "approx"},
      {Mode::Channel, "channel"},
      {Mode::Probabilistic, "probabilistic"},
      {Mode::Hilbert, "hilbert"},
      {Mode::Au, "au"},
      {Mode::Fidelity, "fidelity"},
      {Mode::Classical, "classical"},
      {Mode::WitnessVerify, "witness-verify"},
      {Mode::CounterexampleSearch, "counterexample-search"},
  };
  return t;
}

double* tolerance_slot(Tolerances& t, const std::string& key) {
  static const std::map<std::string, double Tolerances::*> slots = {
      {"feas", &Tolerances::feas},         {"gap", &Tolerances::gap},
      {"psd", &Tolerances::psd},           {"margin", &Tolerances::margin},
      {"witness_margin", &Tolerances::witness_margin},
      {"hermiticity", &Tolerances::hermiticity},
      {"au", &Tolerances::au},             {"commute", &Tolerances::commute},
      {"cluster", &Tolerances::cluster},
  };
  auto it = slots.find(key);
  return it == slots.end() ? nullptr : &(t.*(it->second));
}

bool boolean_at(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ParseError(path, "expected a boolean");
  return j.get<bool>();
}

std::string string_at(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers_at(const json& j, const std::string& path) {
  RVec v = io::vector_from_json(j, path);
  return {v.data(), v.data() + v.size()};
}

void need(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ParseError(std::string("/") + key, "required for this mode");
}

void need_count(const std::vector<Mat>& ms, size_t n, const char* key) {
  if (ms.size() != n)
    throw ParseError(std::string("/") + key, "expected exactly " + std::to_string(n) + " matrices");
}

}  // namespace

const char* to_string(Mode m) {
  for (const auto& [mode, name] : mode_table())
    if (mode == m) return name.c_str();
  return "?";
}

const std::vector<std::string>& mode_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& e : mode_table()) n.push_back(e.second);
    return n;
  }();
  return names;
}

json tolerances_to_json(const Tolerances& t) {
  return json{{"feas", t.feas},
              {"gap", t.gap},
              {"psd", t.psd},
              {"margin", t.margin},
              {"witness_margin", t.witness_margin},
              {"hermiticity", t.hermiticity},
              {"au", t.au},
              {"commute", t.commute},
              {"cluster", t.cluster}};
}

void apply_tolerance_override(Tolerances& t, const std::string& assignment, const std::string& path) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ParseError(path, "expected key=value, got '" + assignment + "'");
  std::string key = assignment.substr(0, eq);
  double* slot = tolerance_slot(t, key);
  if (!slot) throw ParseError(path, "unknown tolerance '" + key + "'");
  double v = 0;
  try {
    size_t used = 0;
    v = std::stod(assignment.substr(eq + 1), &used);
    if (used != assignment.size() - eq - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ParseError(path, "bad value for tolerance '" + key + "'");
  }
  if (!(v > 0) || !std::isfinite(v)) throw ParseError(path, "tolerance '" + key + "' must be positive");
  *slot = v;
}

Problem parse_problem(const json& doc) {
  if (!doc.is_object()) throw ParseError("", "expected a JSON object");
  static const std::set<std::string> known = {
      "schema_version", "mode",     "label",    "inputs",     "outputs",          "dual_inputs",
      "dual_outputs",   "pairing",  "w",        "epsilons",   "objective",        "priors",
      "floor",          "equal_probabilities",  "trace_preserving", "classical_kind", "witness",
      "d",              "trials",   "seed",     "tolerances", "note"};
  for (const auto& [key, value] : doc.items())
    if (!known.count(key)) throw ParseError("/" + key, "unknown field");

  need(doc, "schema_version");
  if (io::integer_at(doc["schema_version"], "/schema_version") != kSchemaVersion)
    throw ParseError("/schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  need(doc, "mode");
  Problem p;
  std::string mode = string_at(doc["mode"], "/mode");
  bool found = false;
  for (const auto& [m, name] : mode_table())
    if (name == mode) p.mode = m, found = true;
  if (!found) throw ParseError("/mode", "unknown mode '" + mode + "'");

  if (doc.contains("label")) p.label = string_at(doc["label"], "/label");
  if (doc.contains("note")) string_at(doc["note"], "/note");
  if (doc.contains("inputs")) p.inputs = io::matrices_from_json(doc["inputs"], "/inputs");
  if (doc.contains("outputs")) p.outputs = io::matrices_from_json(doc["outputs"], "/outputs");
  if (doc.contains("dual_inputs")) p.dual_inputs = io::matrices_from_json(doc["dual_inputs"], "/dual_inputs");
  if (doc.contains("dual_outputs")) p.dual_outputs = io::matrices_from_json(doc["dual_outputs"], "/dual_outputs");
  if (p.dual_inputs.size() != p.dual_outputs.size())
    throw ParseError("/dual_outputs", "must have as many entries as /dual_inputs");
  if (doc.contains("pairing")) {
    std::string s = string_at(doc["pairing"], "/pairing");
    if (s == "sum-trace") p.pairing = Pairing::SumTrace;
    else if (s == "max-trace") p.pairing = Pairing::MaxTrace;
    else throw ParseError("/pairing", "expected 'sum-trace' or 'max-trace'");
  }
  if (doc.contains("w")) {
    p.w = io::number_at(doc["w"], "/w");
    if (p.w <= 0) throw ParseError("/w", "weight must be positive");
  }
  if (doc.contains("epsilons")) {
    p.epsilons = numbers_at(doc["epsilons"], "/epsilons");
    for (size_t i = 0; i < p.epsilons.size(); ++i)
      if (p.epsilons[i] <= 0) throw ParseError("/epsilons/" + std::to_string(i), "must be positive");
  }
  if (doc.contains("objective")) {
    p.objective = string_at(doc["objective"], "/objective");
    if (p.objective != "maximin" && p.objective != "weighted")
      throw ParseError("/objective", "expected 'maximin' or 'weighted'");
  }
  if (doc.contains("priors")) p.priors = numbers_at(doc["priors"], "/priors");
  if (doc.contains("floor")) p.floor = io::number_at(doc["floor"], "/floor");
  if (doc.contains("equal_probabilities"))
    p.equal_probabilities = boolean_at(doc["equal_probabilities"], "/equal_probabilities");
  if (doc.contains("trace_preserving")) p.trace_preserving = boolean_at(doc["trace_preserving"], "/trace_preserving");
  if (doc.contains("classical_kind")) {
    p.classical_kind = string_at(doc["classical_kind"], "/classical_kind");
    if (p.classical_kind != "domain" && p.classical_kind != "range")
      throw ParseError("/classical_kind", "expected 'domain' or 'range'");
  }
  if (doc.contains("witness")) {
    const json& w = doc["witness"];
    if (!w.is_object()) throw ParseError("/witness", "expected an object");
    for (const char* key : {"h0", "h1", "h2", "objective_bound"})
      if (!w.contains(key)) throw ParseError(std::string("/witness/") + key, "missing");
    AuWitnessPackage pkg;
    pkg.h0 = io::matrix_from_json(w["h0"], "/witness/h0");
    pkg.h1 = io::matrix_from_json(w["h1"], "/witness/h1");
    pkg.h2 = io::matrix_from_json(w["h2"], "/witness/h2");
    pkg.objective_bound = io::number_at(w["objective_bound"], "/witness/objective_bound");
    if (w.contains("eps_range")) {
      std::vector<double> r = numbers_at(w["eps_range"], "/witness/eps_range");
      if (r.size() != 2 || r[0] < 0 || r[1] < r[0])
        throw ParseError("/witness/eps_range", "expected [lo, hi] with 0 <= lo <= hi");
      pkg.eps_range = std::pair{r[0], r[1]};
    }
    for (const auto& [key, value] : w.items())
      if (key != "h0" && key != "h1" && key != "h2" && key != "objective_bound" && key != "eps_range")
        throw ParseError("/witness/" + key, "unknown field");
    p.witness = pkg;
  }
  if (doc.contains("d")) p.d = static_cast<int>(io::integer_at(doc["d"], "/d"));
  if (doc.contains("trials")) p.trials = static_cast<int>(io::integer_at(doc["trials"], "/trials"));
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0)
      throw ParseError("/seed", "expected a non-negative integer");
    p.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    if (!t.is_object()) throw ParseError("/tolerances", "expected an object");
    for (const auto& [key, value] : t.items()) {
      double* slot = tolerance_slot(p.tol, key);
      const std::string path = "/tolerances/" + key;
      if (!slot) throw ParseError(path, "unknown tolerance");
      double v = io::number_at(value, path);
      if (v <= 0) throw ParseError(path, "must be positive");
      *slot = v;
    }
  }

  switch (p.mode) {
    case Mode::CounterexampleSearch:
      if (p.d < 2 || p.d > 4) throw ParseError("/d", "expected 2 <= d <= 4");
      if (p.trials < 1) throw ParseError("/trials", "must be positive");
      break;
    case Mode::Hilbert:
    case Mode::Au:
    case Mode::Fidelity:
    case Mode::WitnessVerify:
      need(doc, "inputs");
      need(doc, "outputs");
      need_count(p.inputs, 2, "inputs");
      need_count(p.outputs, 2, "outputs");
      if (p.mode == Mode::WitnessVerify) need(doc, "witness");
      break;
    default:
      need(doc, "inputs");
      need(doc, "outputs");
      if (p.inputs.empty()) throw ParseError("/inputs", "at least one matrix is required");
      if (p.inputs.size() != p.outputs.size()) throw ParseError("/outputs", "must have as many entries as /inputs");
      break;
  }
  if (p.mode == Mode::Probabilistic && p.objective == "weighted") {
    need(doc, "priors");
    if (p.priors.size() != p.inputs.size()) throw ParseError("/priors", "one prior per input is required");
  }
  if (p.mode == Mode::Approx && p.epsilons.size() == 1)
    throw ParseError("/epsilons", "at least two tolerances are needed for a growth series");
  return p;
}

std::vector<std::string> fixture_names() { return fixtures::names(); }

namespace {

json base(const char* mode, const std::string& label) {
  return json{{"schema_version", kSchemaVersion}, {"mode", mode}, {"label", label}};
}

json from_spec(const char* mode, const std::string& label, const MapSpec& s) {
  json j = base(mode, label);
  j["inputs"] = io::to_json(s.xs);
  j["outputs"] = io::to_json(s.ys);
  return j;
}

json with_identity_pair(const char* mode, const std::string& label, const MapSpec& s) {
  std::vector<Mat> xs = s.xs, ys = s.ys;
  xs.push_back(identity(s.din));
  ys.push_back(identity(s.dout));
  json j = base(mode, label);
  j["inputs"] = io::to_json(xs);
  j["outputs"] = io::to_json(ys);
  return j;
}

json au_instance(const char* mode, const std::string& label, const AuInstance& a) {
  json j = base(mode, label);
  j["inputs"] = io::to_json(std::vector<Mat>{a.rho1, a.rho2});
  j["outputs"] = io::to_json(std::vector<Mat>{a.rho1_out, a.rho2_out});
  return j;
}

}  // namespace

json fixture_problem(const std::string& name) {
  using namespace fixtures;
  if (name == "projector-flip") return from_spec("cp-check", name, projector_flip());
  if (name == "approximating-kraus") {
    json j = from_spec("approx", name, projector_flip());
    j["epsilons"] = json::array({0.1, 0.01, 0.001});
    j["note"] = "Kraus family K1 = [[1, 1/2], [0, 0]], K2 = [[0, 0], [e, -1/(2e)]] approaches the data as e -> 0";
    return j;
  }
  if (name == "sigma-y-stretch") return from_spec("cp-extend", name, sigma_y_stretch());
  if (name == "pauli-cycle") return with_identity_pair("channel", name, pauli_cycle());
  if (name == "pauli-swap") return with_identity_pair("channel", name, pauli_swap());
  if (name == "probabilistic-pair") {
    StatePairs sp = probabilistic_pair();
    json j = base("probabilistic", name);
    j["inputs"] = io::to_json(sp.in);
    j["outputs"] = io::to_json(sp.out);
    j["objective"] = "maximin";
    return j;
  }
  if (name == "commuting-square") return from_spec("classical", name, commuting_square());
  if (name == "commuting-face-pair") {
    json j = from_spec("classical", name, commuting_face_pair());
    j["trace_preserving"] = true;
    return j;
  }
  if (name == "commuting-single") {
    json j = from_spec("classical", name, commuting_single());
    j["trace_preserving"] = true;
    return j;
  }
  if (name == "commuting-boundary-pair") return from_spec("classical", name, commuting_boundary_pair(0.5, 0.5));
  if (name == "transpose-qutrits") return au_instance("channel", name, transpose_qutrits());
  if (name == "transpose-qutrits-witness") {
    json j = au_instance("witness-verify", name, transpose_qutrits());
    AuWitnessPackage w = transpose_qutrits_witness();
    j["witness"] = json{{"h0", io::to_json(w.h0)},
                        {"h1", io::to_json(w.h1)},
                        {"h2", io::to_json(w.h2)},
                        {"objective_bound", w.objective_bound},
                        {"eps_range", json::array({w.eps_range->first, w.eps_range->second})}};
    return j;
  }
  throw ParseError("", "unknown fixture '" + name + "'");
}

}  // namespace cpext::cli
