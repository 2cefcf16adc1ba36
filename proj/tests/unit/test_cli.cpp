#include <doctest.h>

#include <fstream>
#include <map>

#include "cpext/fixtures.hpp"
#include "oracles.hpp"
#include "run.hpp"

using namespace cpext;
using namespace cpext::cli;

namespace {

std::vector<Mat> mats(const json& j) { return io::matrices_from_json(j, ""); }

Witness witness_from(const json& cert) {
  return Witness{mats(cert["h"]), mats(cert["h0"])};
}

}  // namespace

TEST_CASE("matrix encoding round-trips bit-exactly") {
  std::mt19937_64 rng(81);
  Mat m = random_hermitian(3, rng) * 1e-7 + random_hermitian(3, rng);
  m(0, 1) = cplx(1.0 / 3.0, -2.0 / 7.0);
  Mat back = io::matrix_from_json(json::parse(io::to_json(m).dump()), "");
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(back(i, j).real() == m(i, j).real());
      CHECK(back(i, j).imag() == m(i, j).imag());
    }
  Mat real = io::matrix_from_json(json::parse(R"({"rows":1,"cols":2,"data":[[1.5,[0,2]]]})"), "");
  CHECK(real(0, 0) == cplx(1.5, 0));
  CHECK(real(0, 1) == cplx(0, 2));
}

TEST_CASE("parse errors name the offending JSON path") {
  json doc = fixture_problem("projector-flip");
  doc["inputs"][1]["data"][1][0] = "x";
  Report r = run_document(doc);
  CHECK(r.exit_code == kInputError);
  CHECK(r.body["error"]["path"] == "/inputs/1/data/1/0");

  json bad_mode = fixture_problem("projector-flip");
  bad_mode["mode"] = "nope";
  CHECK(run_document(bad_mode).body["error"]["path"] == "/mode");

  json extra = fixture_problem("projector-flip");
  extra["colour"] = 1;
  CHECK(run_document(extra).body["error"]["path"] == "/colour");

  json rows = fixture_problem("projector-flip");
  rows["outputs"][0]["rows"] = 3;
  CHECK(run_document(rows).body["error"]["path"] == "/outputs/0/data");

  json tol = fixture_problem("projector-flip");
  tol["tolerances"] = json{{"psd", -1}};
  CHECK(run_document(tol).body["error"]["path"] == "/tolerances/psd");
}

TEST_CASE("library precondition failures map to exit 3") {
  json doc = fixture_problem("probabilistic-pair");
  doc["inputs"][0] = io::to_json(diag({1.2, -0.2}));
  Report r = run_document(doc);
  CHECK(r.exit_code == kInputError);
  CHECK(r.body["error"]["kind"] == "NotPSD");
}

TEST_CASE("fixtures produce the expected exit codes") {
  const std::map<std::string, int> expected = {
      {"projector-flip", 0},      {"approximating-kraus", 0}, {"sigma-y-stretch", 0},
      {"pauli-cycle", 0},         {"pauli-swap", 1},          {"probabilistic-pair", 0},
      {"commuting-square", 1},    {"commuting-face-pair", 1}, {"commuting-single", 0},
      {"commuting-boundary-pair", 0}, {"transpose-qutrits", 1}, {"transpose-qutrits-witness", 0}};
  REQUIRE(fixture_names().size() == expected.size());
  for (const auto& name : fixture_names()) {
    CAPTURE(name);
    Report r = run_document(fixture_problem(name));
    CHECK(r.exit_code == expected.at(name));
    CHECK(r.body["tolerances"].size() == 9);
    if (r.exit_code == kNegative) CHECK_FALSE(r.body["certificate"].is_null());
  }
}

TEST_CASE("embedded certificates re-verify outside the CLI") {
  for (const char* name : {"pauli-swap", "transpose-qutrits"}) {
    CAPTURE(name);
    json doc = fixture_problem(name);
    Report r = run_document(doc);
    REQUIRE(r.exit_code == kNegative);
    MapSpec s = preprocess(mats(doc["inputs"]), mats(doc["outputs"]));
    oracle::WitnessValue v = oracle::channel_witness_value(s, witness_from(r.body["certificate"]));
    CHECK(v.min_eig > -1e-9);
    CHECK(v.objective < -1e-7);
  }
  json doc = fixture_problem("commuting-square");
  Report r = run_document(doc);
  REQUIRE(r.exit_code == kNegative);
  MapSpec s = preprocess(mats(doc["inputs"]), mats(doc["outputs"]));
  oracle::WitnessValue v = oracle::witness_value(s.xs, s.ys, {}, {}, witness_from(r.body["certificate"]));
  CHECK(v.min_eig > -1e-9);
  CHECK(v.objective < -1e-7);

  json ch = fixture_problem("pauli-cycle");
  Report ok = run_document(ch);
  REQUIRE(ok.exit_code == kAffirmative);
  const json& c = ok.body["result"]["choi"];
  Choi choi{c["din"].get<int>(), c["dout"].get<int>(), io::matrix_from_json(c["matrix"], "")};
  oracle::ChannelCheck k = oracle::check_channel(choi, mats(ch["inputs"]), mats(ch["outputs"]));
  CHECK(k.pairs < 1e-7);
  CHECK(k.trace < 1e-7);
  CHECK(k.min_eig > -1e-9);
}

TEST_CASE("reports are deterministic") {
  for (const char* name : {"transpose-qutrits", "probabilistic-pair", "commuting-square"}) {
    json doc = fixture_problem(name);
    CHECK(run_document(doc).body.dump() == run_document(doc).body.dump());
  }
  json search{{"schema_version", 1}, {"mode", "counterexample-search"}, {"d", 3}, {"trials", 3}, {"seed", 5}};
  Report a = run_document(search), b = run_document(search);
  CHECK(a.body.dump() == b.body.dump());
  CHECK(a.exit_code == kAffirmative);
}

TEST_CASE("flags override file settings") {
  json doc = fixture_problem("transpose-qutrits");
  Flags f;
  f.tol = {"psd=1e-10"};
  f.w = 2.5;
  Report r = run_document(doc, f);
  CHECK(r.body["tolerances"]["psd"] == 1e-10);
  CHECK(r.body["result"]["tp_approximation"]["weight_w"] == 2.5);
  Flags bad;
  bad.tol = {"nonsense=1"};
  CHECK(run_document(doc, bad).exit_code == kInputError);

  json search{{"schema_version", 1}, {"mode", "counterexample-search"}, {"d", 2}, {"trials", 50}};
  Flags t;
  t.trials = 2;
  t.seed = 7;
  Report s = run_document(search, t);
  CHECK(s.body["result"]["trials"] == 2);
  CHECK(s.body["result"]["seed"] == 7);
  CHECK(s.body["result"]["hit_count"] == 0);
}

TEST_CASE("shipped fixture files match emission") {
  for (const auto& name : fixture_names()) {
    CAPTURE(name);
    std::ifstream in(std::string(CPEXT_DATA_DIR) + "/fixtures/" + name + ".json");
    REQUIRE(in.good());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text == fixture_problem(name).dump(2) + "\n");
  }
}

TEST_CASE("remaining modes") {
  AuInstance a{diag({0.3, 0.7}), diag({0.6, 0.4}), diag({0.3, 0.7}), diag({0.6, 0.4})};
  json base{{"schema_version", 1},
            {"inputs", io::to_json(std::vector<Mat>{a.rho1, a.rho2})},
            {"outputs", io::to_json(std::vector<Mat>{a.rho1_out, a.rho2_out})}};
  for (const char* mode : {"au", "fidelity", "hilbert"}) {
    json d = base;
    d["mode"] = mode;
    CAPTURE(mode);
    CHECK(run_document(d).exit_code == kAffirmative);
  }
  json sharpen = base;
  sharpen["outputs"] = io::to_json(std::vector<Mat>{diag({1, 0}), diag({0, 1})});
  for (const char* mode : {"au", "fidelity", "hilbert"}) {
    json d = sharpen;
    d["mode"] = mode;
    CAPTURE(mode);
    Report r = run_document(d);
    CHECK(r.exit_code == kNegative);
    CHECK_FALSE(r.body["certificate"].is_null());
  }
  json pr = fixture_problem("probabilistic-pair");
  pr["objective"] = "weighted";
  pr["priors"] = {0.5, 0.5};
  pr["floor"] = 0.9;
  CHECK(run_document(pr).exit_code == kNegative);
  json ext = fixture_problem("projector-flip");
  ext["mode"] = "cp-extend";
  CHECK(run_document(ext).exit_code == kMarginal);
}
