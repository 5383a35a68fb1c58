#include "doctest.h"

#include "speclift/experiment.hpp"

using namespace speclift;

TEST_CASE("config parsing rejects malformed documents with the field named") {
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("{}"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"mystery"})"), ConfigError);
  try {
    parse_config(R"({"kind":"crossed_product","windows":[4,2]})");
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("windows") != std::string::npos);
  }
  try {
    parse_config(R"({"kind":"quantum_torus","theta":[[1,2],[3,4]]})");
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("theta") != std::string::npos);
  }
  try {
    parse_config(R"({"kind":"crossed_product","tolerance":-1})");
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("tolerance") != std::string::npos);
  }
}

TEST_CASE("a small crossed-product experiment runs clean and serializes") {
  ExperimentConfig config = parse_config(
      R"({"kind":"crossed_product","windows":[2],"base_diagonal":[1.0,-1.0],"seed":3})");
  ExperimentResult result = run_experiment(config);
  CHECK(result.all_passed());
  CHECK(!result.spectrum.empty());
  const std::string csv = spectrum_csv(result.spectrum);
  CHECK(csv.rfind("window,block_label,eigenvalue_index,eigenvalue,multiplicity\n", 0) == 0);
  const std::string json = report_json(config, result);
  CHECK(json.find("\"pass\": true") != std::string::npos);
  CHECK(json.find("conventions") != std::string::npos);

  // identical rerun produces byte-identical artifacts
  ExperimentResult again = run_experiment(config);
  CHECK(spectrum_csv(again.spectrum) == csv);
  CHECK(report_json(config, again) == json);

  // compare against itself: empty diff; against a perturbed run: moved entries
  CompareResult same = compare_spectra(result.spectrum, csv, 1e-10);
  CHECK(same.empty());
  ExperimentConfig perturbed = parse_config(
      R"({"kind":"crossed_product","windows":[2],"base_diagonal":[1.05,-1.0],"seed":3})");
  ExperimentResult moved = run_experiment(perturbed);
  CompareResult diff = compare_spectra(moved.spectrum, csv, 1e-10);
  CHECK(!diff.empty());
  CHECK(!diff.moved.empty());
  CHECK_THROWS_AS(compare_spectra(result.spectrum, "bogus,header\n1,2\n", 1e-10),
                  BaselineMismatchError);
}

TEST_CASE("model-level failures surface as exceptions distinct from config errors") {
  // a schema-valid config whose parameters are rejected by the builder
  ExperimentConfig config = parse_config(
      R"({"kind":"homogeneous","group":"torus2","direction":[2,2],"windows":[2]})");
  CHECK_THROWS_AS(run_experiment(config), UnsupportedSubgroupError);
  // identity automorphism is a legitimate crossed product
  ExperimentConfig plain = parse_config(
      R"({"kind":"crossed_product","windows":[1],"base_diagonal":[0.5,1.5],"automorphism":"identity"})");
  CHECK(run_experiment(plain).all_passed());
}
