#include "run.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "cpext/classical.hpp"

namespace cpext::cli {

namespace {

using io::to_json;


json choi_json(const Choi& c) {
  return json{{"din", c.din}, {"dout", c.dout}, {"matrix", to_json(c.m)}, {"min_eig", min_eig(c.m)}};
}

json check_json(const WitnessCheck& c) {
  json j{{"valid", c.valid}, {"min_eig", c.min_eig}, {"objective", c.objective},
         {"max_op_norm", c.max_op_norm}, {"h0_trace_norm", c.h0_trace_norm}};
  if (!c.reason.empty()) j["reason"] = c.reason;
  return j;
}

json witness_json(const Witness& w, const WitnessCheck& c) {
  return json{{"kind", "dual-witness"}, {"h", to_json(w.h)}, {"h0", to_json(w.h0)}, {"check", check_json(c)}};
}

// Channel data check: pairs, trace preservation and positivity of the Choi matrix.
json channel_validation(const MapSpec& spec, const Choi& c) {
  return json{{"pair_residual", constraint_residual(spec, c)},
              {"trace_residual", op_norm(partial_trace(c.m, c.dout, c.din, 1) - identity(c.din))},
              {"min_eig", min_eig(c.m)}};
}

MapSpec spec_of(const Problem& p, const Tolerances& tol) {
  return preprocess(p.inputs, p.outputs, p.dual_inputs, p.dual_outputs, tol);
}

AuInstance instance_of(const Problem& p) {
  AuInstance a{p.inputs[0], p.inputs[1], p.outputs[0], p.outputs[1]};
  validate(a, p.tol.psd);
  return a;
}

struct Outcome {
  std::string verdict;
  int code = kMarginal;
  json result = json::object();
  json certificate = nullptr;
  std::string message;
};

// Exit 1 is reserved for negatives whose certificate re-validated.
void negative_or_marginal(Outcome& o, const std::string& verdict, bool certified, const std::string& why) {
  o.verdict = verdict;
  o.code = certified ? kNegative : kMarginal;
  if (!certified) o.message = why;
}

Outcome cp_check(const Problem& p, const Tolerances& tol) {
  MapSpec spec = spec_of(p, tol);
  CpVerdict v = gamma_sdp(spec, tol, p.pairing);
  Outcome o;
  o.result = json{{"gamma", v.gamma}, {"solver_status", sdp::to_string(v.solver_status)},
                  {"independent_pairs", spec.size()}, {"din", spec.din}, {"dout", spec.dout}};
  o.message = v.message;
  if (v.status == CpStatus::CompletelyPositive) {
    o.verdict = "CompletelyPositive";
    o.code = kAffirmative;
  } else if (v.status == CpStatus::NotCP) {
    bool ok = false;
    if (v.witness) {
      WitnessCheck c = check_witness(spec, *v.witness, tol, p.pairing);
      o.certificate = witness_json(*v.witness, c);
      ok = c.valid && c.objective < -tol.witness_margin;
    }
    negative_or_marginal(o, "NotCP", ok, "witness did not re-validate");
  } else {
    o.verdict = "Marginal";
  }
  return o;
}

Outcome cp_extend(const Problem& p, const Tolerances& tol) {
  MapSpec spec = spec_of(p, tol);
  Classification c = classify(spec, tol);
  Outcome o;
  o.result = json{{"gamma", c.cp.gamma},
                  {"cp_status", to_string(c.cp.status)},
                  {"guarantee", to_string(c.guarantee)},
                  {"implied", to_string(c.implied)},
                  {"explanation", c.explanation},
                  {"residual", c.exact.residual}};
  if (c.element) o.result["guarantee_element"] = to_json(*c.element);
  o.message = c.exact.message;
  switch (c.exact.status) {
    case ExactStatus::Exists:
      o.verdict = "Exists";
      o.code = kAffirmative;
      o.result["choi"] = choi_json(*c.exact.choi);
      o.result["validation"] = json{{"pair_residual", constraint_residual(spec, *c.exact.choi)},
                                    {"min_eig", min_eig(c.exact.choi->m)}};
      break;
    case ExactStatus::NotExists: {
      bool ok = false;
      if (c.exact.certificate) {
        WitnessCheck chk = check_witness(spec, *c.exact.certificate, tol);
        o.certificate = witness_json(*c.exact.certificate, chk);
        ok = chk.valid;
      }
      negative_or_marginal(o, "NotExists", ok, "certificate did not re-validate");
      break;
    }
    case ExactStatus::ApproxOnlyOrUndecided:
      o.verdict = "ApproxOnlyOrUndecided";
      break;
  }
  return o;
}

Outcome approx(const Problem& p, const Tolerances& tol) {
  MapSpec spec = spec_of(p, tol);
  ExtensionVerdict v = approximate(spec, tol);
  Outcome o;
  o.result = json{{"delta", v.delta}, {"best_choi", choi_json(v.best_choi)},
                  {"best_error", approximation_error(spec, v.best_choi, p.pairing)},
                  {"exact_status", to_string(v.exact.status)}};
  if (!p.epsilons.empty()) {
    Unboundedness u = unboundedness_diagnostic(spec, p.epsilons, tol);
    json series = json::array();
    for (const auto& pt : u.series)
      series.push_back(json{{"epsilon", pt.epsilon}, {"dual_norm", pt.dual_norm}, {"delta", pt.delta},
                            {"solver_status", sdp::to_string(pt.solver_status)}});
    o.result["unboundedness"] =
        json{{"series", series}, {"monotone", u.monotone}, {"growth", u.growth}, {"unbounded", u.unbounded_flag}};
  }
  if (v.delta <= tol.witness_margin) {
    o.verdict = "Approximable";
    o.code = kAffirmative;
    return o;
  }
  CpVerdict g = gamma_sdp(spec, tol, p.pairing);
  bool ok = false;
  if (g.status == CpStatus::NotCP && g.witness) {
    WitnessCheck c = check_witness(spec, *g.witness, tol, p.pairing);
    o.certificate = witness_json(*g.witness, c);
    ok = c.valid && c.objective < -tol.witness_margin;
  }
  if (g.status == CpStatus::NotCP) negative_or_marginal(o, "NotApproximable", ok, "witness did not re-validate");
  else o.verdict = "Marginal";
  return o;
}

Outcome channel(const Problem& p, const Tolerances& tol, double w) {
  MapSpec spec = spec_of(p, tol);
  ChannelResult r = channel_extension(spec, tol);
  Outcome o;
  o.message = r.message;
  o.result = json{{"delta", r.delta}, {"gamma", r.gamma}, {"trace_mismatch", r.trace_mismatch}};
  if (!spec.dual_xs.empty()) o.result["dual_pairs_ignored"] = static_cast<int>(spec.dual_xs.size());
  if (!r.trace_mismatch) {
    TpExtensionResult t = cptp_delta(spec, w, tol);
    json tp{{"weight_w", t.weight_w}, {"delta_tp", t.delta_tp}, {"sdp_value", t.sdp_value},
            {"trace_defect", t.lambda}, {"gamma_tp", t.gamma_tp}, {"primal_status", sdp::to_string(t.primal_status)},
            {"dual_status", sdp::to_string(t.dual_status)}};
    if (t.witness) {
      WitnessCheck c = check_channel_witness(spec, *t.witness, tol, w);
      tp["witness"] = witness_json(*t.witness, c);
    }
    o.result["tp_approximation"] = tp;
  }
  switch (r.status) {
    case ChannelStatus::Exists:
      o.verdict = "Exists";
      o.code = kAffirmative;
      o.result["choi"] = choi_json(*r.choi);
      o.result["validation"] = channel_validation(spec, *r.choi);
      break;
    case ChannelStatus::NotExists: {
      bool ok = false;
      if (r.witness) {
        WitnessCheck c = check_channel_witness(spec, *r.witness, tol);
        o.certificate = witness_json(*r.witness, c);
        o.certificate["weight_w"] = nullptr;
        ok = c.valid && c.objective < -tol.witness_margin;
      }
      negative_or_marginal(o, "NotExists", ok, "witness did not re-validate");
      break;
    }
    case ChannelStatus::Marginal:
      o.verdict = "Marginal";
      break;
  }
  return o;
}

Outcome probabilistic(const Problem& p, const Tolerances& tol) {
  for (size_t i = 0; i < p.inputs.size(); ++i) {
    require_density(p.inputs[i], "input state", tol.psd);
    require_density(p.outputs[i], "output state", tol.psd);
  }
  ProbabilisticResult r = p.objective == "maximin"
                              ? probabilistic_maximin(p.inputs, p.outputs, p.equal_probabilities, tol)
                              : probabilistic_weighted(p.inputs, p.outputs, p.priors, p.floor,
                                                       p.equal_probabilities, tol);
  Outcome o;
  o.message = r.message;
  o.result = json{{"objective", p.objective}, {"value", r.value}, {"probabilities", r.probs},
                  {"equal_probabilities", p.equal_probabilities}, {"solver_status", sdp::to_string(r.solver_status)}};
  if (!r.infeasible) o.result["choi"] = choi_json(r.choi);
  double pmin = r.probs.empty() ? 0.0 : *std::min_element(r.probs.begin(), r.probs.end());
  if (r.infeasible) {
    o.verdict = "Infeasible";
    o.code = kNegative;
    o.certificate = json{{"kind", "optimal-value"}, {"floor", *p.floor}, {"best_min_probability", r.value}};
  } else if (pmin > tol.margin) {
    o.verdict = "Feasible";
    o.code = kAffirmative;
  } else if (r.solver_status == sdp::Status::Optimal) {
    o.verdict = "Infeasible";
    o.code = kNegative;
    o.certificate = json{{"kind", "optimal-value"}, {"best_min_probability", pmin}};
  } else {
    o.verdict = "Marginal";
  }
  return o;
}

Outcome hilbert(const Problem& p, const Tolerances& tol) {
  AuInstance a = instance_of(p);
  HilbertResult r = hilbert_metric_check(a.rho1, a.rho2, a.rho1_out, a.rho2_out);
  (void)tol;
  Outcome o;
  o.message = r.message;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json("inf"); };
  o.result = json{{"lhs", num(r.lhs)}, {"rhs", num(r.rhs)}, {"support_boundary", r.support_boundary}};
  if (r.status == HilbertStatus::Exists) {
    o.verdict = "Exists";
    o.code = r.support_boundary ? kMarginal : kAffirmative;
    if (r.support_boundary) o.verdict = "Marginal";
  } else {
    o.verdict = to_string(r.status);
    o.code = r.support_boundary ? kMarginal : kNegative;
    o.certificate = json{{"kind", "metric-inequality"}, {"lhs", num(r.lhs)}, {"rhs", num(r.rhs)}};
  }
  return o;
}

double au_value(const AuInstance& a, double p) {
  return trace_norm(p * a.rho1 - (1 - p) * a.rho2) - trace_norm(p * a.rho1_out - (1 - p) * a.rho2_out);
}

Outcome au(const Problem& p, const Tolerances& tol) {
  AuInstance a = instance_of(p);
  AuResult r = au_condition(a, tol);
  Outcome o;
  o.result = json{{"min_value", r.min_value}, {"argmin_p", r.argmin_p}, {"evaluations", r.evaluations}};
  o.verdict = to_string(r.status);
  if (r.status == AuStatus::Holds) {
    o.code = kAffirmative;
  } else if (r.status == AuStatus::Fails) {
    double v = au_value(a, r.argmin_p);
    o.certificate = json{{"kind", "violating-prior"}, {"p", r.argmin_p}, {"value", v}};
    o.code = v < -tol.au ? kNegative : kMarginal;
  }
  return o;
}

Outcome fidelity(const Problem& p, const Tolerances& tol) {
  AuInstance a = instance_of(p);
  FidelityResult r = fidelity_criterion(a, tol);
  Outcome o;
  o.result = json{{"a", r.a}, {"b", r.b}, {"min_eig_first", r.min_eig_first}, {"min_eig_second", r.min_eig_second},
                  {"fidelity_in", r.fidelity_in}, {"fidelity_out", r.fidelity_out},
                  {"near_boundary", r.near_boundary}};
  o.verdict = to_string(r.status);
  if (r.status == FidelityStatus::Exists) {
    Choi c = construct_qubit_channel(a, tol);
    o.result["choi"] = choi_json(c);
    o.result["validation"] = channel_validation(to_spec(a), c);
    o.code = kAffirmative;
  } else {
    o.certificate = json{{"kind", "failed-condition"}, {"condition", to_string(r.failed)}};
    o.code = kNegative;
  }
  return o;
}

Outcome classical(const Problem& p, const Tolerances& tol) {
  MapSpec spec = spec_of(p, tol);
  Outcome o;
  if (p.classical_kind == "range") {
    RangeExtension r = commuting_range_cp_extension(spec, tol);
    o.message = r.message;
    o.verdict = to_string(r.status);
    if (r.status == RangeStatus::Exists) {
      o.code = kAffirmative;
      o.result["choi"] = choi_json(*r.choi);
      o.result["validation"] = json{{"pair_residual", constraint_residual(spec, *r.choi)}, {"min_eig", min_eig(r.choi->m)}};
    } else if (r.status == RangeStatus::NotCP) {
      bool ok = false;
      if (r.witness) {
        WitnessCheck c = check_witness(spec, *r.witness, tol);
        o.certificate = witness_json(*r.witness, c);
        ok = c.valid && c.objective < -tol.witness_margin;
      }
      negative_or_marginal(o, "NotCP", ok, "witness did not re-validate");
    }
    return o;
  }
  PositivityResult pos = commuting_domain_positive(spec, tol);
  json vertices = json::array();
  for (const RVec& v : pos.polytope.extremes) vertices.push_back(to_json(v));
  o.result = json{{"kind", "domain"}, {"trace_preserving", p.trace_preserving},
                  {"positivity", to_string(pos.status)}, {"min_vertex_eig", pos.min_eig},
                  {"vertices", vertices}, {"common_basis", to_json(pos.basis.u)}};
  if (pos.status == Positivity::NotPositive) {
    o.verdict = "NotPositive";
    o.code = kNegative;
    o.certificate = json{{"kind", "violating-vertex"}, {"vertex", to_json(*pos.vertex)},
                         {"image", to_json(*pos.image)}, {"min_eig", min_eig(*pos.image)}};
    return o;
  }
  DomainExtension d = commuting_domain_extension(spec, p.trace_preserving, tol);
  o.message = d.message;
  o.result["construction"] = d.construction;
  o.verdict = to_string(d.status);
  if (d.status == DomainStatus::Exists) {
    o.code = kAffirmative;
    o.result["choi"] = choi_json(*d.choi);
    o.result["validation"] = p.trace_preserving ? channel_validation(spec, *d.choi)
                                                : json{{"pair_residual", constraint_residual(spec, *d.choi)},
                                                       {"min_eig", min_eig(d.choi->m)}};
  } else if (d.status == DomainStatus::NotExists) {
    bool ok = false;
    if (d.witness) {
      WitnessCheck c = p.trace_preserving ? check_channel_witness(spec, *d.witness, tol)
                                          : check_witness(spec, *d.witness, tol);
      o.certificate = witness_json(*d.witness, c);
      ok = c.valid && c.objective < -tol.witness_margin;
    }
    negative_or_marginal(o, "NotExists", ok, "witness did not re-validate");
  }
  return o;
}

json au_witness_json(const AuWitnessPackage& w) {
  json j{{"h0", to_json(w.h0)}, {"h1", to_json(w.h1)}, {"h2", to_json(w.h2)}, {"objective_bound", w.objective_bound}};
  if (w.eps_range) j["eps_range"] = json::array({w.eps_range->first, w.eps_range->second});
  return j;
}

Outcome witness_verify(const Problem& p, const Tolerances& tol) {
  AuInstance a = instance_of(p);
  AuWitnessCheck c = verify_au_witness(a, *p.witness, tol);
  Outcome o;
  json eps = json::array();
  for (const EpsCheck& e : c.eps_checks)
    eps.push_back(json{{"eps", e.eps}, {"min_eig", e.min_eig}, {"objective", e.objective}, {"valid", e.valid}});
  o.result = json{{"min_eig", c.min_eig}, {"objective", c.objective}, {"objective_bound", p.witness->objective_bound},
                  {"eps_checks", eps}};
  o.message = c.reason;
  o.verdict = c.valid ? "Valid" : "Invalid";
  o.code = c.valid ? kAffirmative : kNegative;
  if (!c.valid) o.certificate = json{{"kind", "rejection"}, {"reason", c.reason}};
  return o;
}

Outcome search(const Problem& p, const Tolerances& tol, int trials, std::uint64_t seed) {
  SearchReport r = transpose_counterexample_search(p.d, trials, seed, tol);
  Outcome o;
  json hits = json::array();
  bool all_valid = true;
  for (const SearchHit& h : r.hits) {
    AuWitnessCheck c = verify_au_witness(h.instance, h.witness, tol, 0);
    all_valid = all_valid && c.valid;
    hits.push_back(json{{"trial", h.trial},
                        {"inputs", to_json(std::vector<Mat>{h.instance.rho1, h.instance.rho2})},
                        {"outputs", to_json(std::vector<Mat>{h.instance.rho1_out, h.instance.rho2_out})},
                        {"delta_tp", h.delta_tp},
                        {"witness", au_witness_json(h.witness)},
                        {"witness_valid", c.valid}});
  }
  o.result = json{{"d", r.d}, {"trials", r.trials}, {"seed", r.seed}, {"hit_count", r.hits.size()},
                  {"hit_fraction", r.hit_fraction}, {"au_failures", r.au_failures}, {"hits", hits}};
  o.verdict = all_valid ? "Completed" : "WitnessRejected";
  o.code = all_valid ? kAffirmative : kNumericFailure;
  return o;
}

json envelope(const std::string& mode, const std::string& label, const Tolerances& tol) {
  json j{{"schema_version", kSchemaVersion}, {"tool", "cpext"}, {"mode", mode}};
  if (!label.empty()) j["label"] = label;
  j["tolerances"] = tolerances_to_json(tol);
  return j;
}

Report error_report(const json& doc, int code, const std::string& kind, const std::string& msg,
                    const std::optional<std::string>& path, const Tolerances& tol) {
  std::string mode = doc.is_object() && doc.contains("mode") && doc["mode"].is_string() ? doc["mode"].get<std::string>()
                                                                                       : "unknown";
  Report r;
  r.exit_code = code;
  r.body = envelope(mode, "", tol);
  r.body["verdict"] = code == kNumericFailure ? "NumericFailure" : "InputError";
  r.body["exit_code"] = code;
  json err{{"kind", kind}, {"message", msg}};
  if (path) err["path"] = *path;
  r.body["error"] = err;
  return r;
}

}  // namespace

Report run(const Problem& problem, const Flags& flags) {
  Tolerances tol = problem.tol;
  for (const std::string& t : flags.tol) apply_tolerance_override(tol, t, "--tol");
  double w = flags.w.value_or(problem.w);
  if (!(w > 0)) throw io::ParseError("--w", "weight must be positive");
  int trials = flags.trials.value_or(problem.trials);
  if (trials < 1) throw io::ParseError("--trials", "must be positive");
  std::uint64_t seed = flags.seed.value_or(problem.seed);

  Outcome o;
  switch (problem.mode) {
    case Mode::CpCheck: o = cp_check(problem, tol); break;
    case Mode::CpExtend: o = cp_extend(problem, tol); break;
    case Mode::Approx: o = approx(problem, tol); break;
    case Mode::Channel: o = channel(problem, tol, w); break;
    case Mode::Probabilistic: o = probabilistic(problem, tol); break;
    case Mode::Hilbert: o = hilbert(problem, tol); break;
    case Mode::Au: o = au(problem, tol); break;
    case Mode::Fidelity: o = fidelity(problem, tol); break;
    case Mode::Classical: o = classical(problem, tol); break;
    case Mode::WitnessVerify: o = witness_verify(problem, tol); break;
    case Mode::CounterexampleSearch: o = search(problem, tol, trials, seed); break;
  }
  Report r;
  r.exit_code = o.code;
  r.body = envelope(to_string(problem.mode), problem.label, tol);
  r.body["verdict"] = o.verdict;
  r.body["exit_code"] = o.code;
  r.body["result"] = o.result;
  r.body["certificate"] = o.certificate;
  if (!o.message.empty()) r.body["message"] = o.message;
  return r;
}

Report run_document(const json& doc, const Flags& flags) {
  Tolerances tol;
  try {
    Problem p = parse_problem(doc);
    tol = p.tol;
    return run(p, flags);
  } catch (const io::ParseError& e) {
    return error_report(doc, kInputError, "ParseError", e.what(), e.path(), tol);
  } catch (const Error& e) {
    int code = e.kind() == ErrorKind::NumericFailure ? kNumericFailure : kInputError;
    return error_report(doc, code, to_string(e.kind()), e.what(), std::nullopt, tol);
  } catch (const std::exception& e) {
    return error_report(doc, kNumericFailure, "Internal", e.what(), std::nullopt, tol);
  }
}

Report run_file(const std::string& path, const Flags& flags) {
  std::ifstream in(path);
  if (!in) return error_report(json(), kInputError, "Io", "cannot read '" + path + "'", std::nullopt, {});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    return error_report(json(), kInputError, "ParseError", e.what(), std::string(""), {});
  }
  return run_document(doc, flags);
}

std::string summary(const Report& r) {
  const json& b = r.body;
  std::ostringstream s;
  s << std::setprecision(10);
  s << "mode:     " << b.value("mode", "?") << "\n";
  if (b.contains("label")) s << "label:    " << b["label"].get<std::string>() << "\n";
  s << "verdict:  " << b.value("verdict", "?") << " (exit " << r.exit_code << ")\n";
  if (b.contains("error")) {
    s << "error:    " << b["error"]["message"].get<std::string>() << "\n";
    return s.str();
  }
  for (const auto& [key, value] : b["result"].items()) {
    if (value.is_number() || value.is_boolean() || value.is_string()) s << "  " << key << ": " << value.dump() << "\n";
    if (key == "probabilities") s << "  " << key << ": " << value.dump() << "\n";
  }
  if (!b["certificate"].is_null()) {
    const json& c = b["certificate"];
    s << "certificate: " << c.value("kind", "?");
    if (c.contains("check"))
      s << " (valid " << c["check"]["valid"].dump() << ", objective " << c["check"]["objective"].get<double>()
        << ", min_eig " << c["check"]["min_eig"].get<double>() << ")";
    s << "\n";
  }
  if (b.contains("message")) s << "message:  " << b["message"].get<std::string>() << "\n";
  return s.str();
}

}  // namespace cpext::cli
