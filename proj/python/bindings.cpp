// Copyright 2026 The cotrobust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>

#include "cotrobust/anchors.hpp"
#include "cotrobust/corpus.hpp"
#include "cotrobust/error.hpp"
#include "cotrobust/metrics.hpp"
#include "cotrobust/perturb.hpp"
#include "cotrobust/report.hpp"
#include "cotrobust/stats.hpp"
#include "cotrobust/uncertainty.hpp"

namespace py = pybind11;
using namespace cotrobust;

namespace {

py::dict result_dict(const StatTestResult& r) {
  py::dict d;
  d["method"] = std::string(to_string(r.method));
  d["statistic"] = r.statistic;
  d["z"] = r.z;
  d["p_value"] = r.p_value;
  d["effect_size"] = r.effect_size;
  d["n"] = r.n;
  d["exact"] = r.exact;
  return d;
}

// Each step is (token, probability of token, {alternative: probability}).
GenerationTrace trace_from(const std::vector<std::tuple<std::string, double, std::map<std::string, double>>>& steps) {
  std::vector<RawStep> raw;
  for (const auto& [tok, p, alts] : steps) {
    RawStep s{tok, std::log(p), {}};
    for (const auto& [a, q] : alts) s.alternatives.emplace_back(a, std::log(q));
    raw.push_back(std::move(s));
  }
  return assemble_trace("py/0", {}, std::move(raw), "stop");
}

}  // namespace

PYBIND11_MODULE(_cotrobust, m) {
  m.doc() = "Robustness evaluation harness core";

  static py::exception<Error> error(m, "CotrobustError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("pass_at_k", &pass_at_k, py::arg("n"), py::arg("c"), py::arg("k"));
  m.def("relative_degradation", &relative_degradation, py::arg("p_original"), py::arg("p_perturbed"));
  m.def("auroc", &auroc, py::arg("scores_fail"), py::arg("scores_pass"));
  m.def("entropy_bits", &entropy_bits, py::arg("masses"));
  m.def("normalized_distance", &normalized_distance, py::arg("spike"), py::arg("anchor"), py::arg("length"));

  m.def("wilcoxon", [](const std::vector<double>& d) { return result_dict(wilcoxon_signed_rank(d)); });
  m.def("ks_two_sample", [](const std::vector<double>& a, const std::vector<double>& b) {
    return result_dict(ks_two_sample(a, b));
  });
  m.def("chi_square", [](const std::vector<std::vector<double>>& t) {
    return result_dict(chi_square_independence(t));
  });

  m.def(
      "perturb",
      [](const std::string& text, const std::string& family, std::uint64_t seed, double rate) {
        PerturbResult r = apply_family(text, {parse_family(family), seed, rate});
        return py::make_tuple(r.text, r.diff, r.offline_approximation);
      },
      py::arg("text"), py::arg("family"), py::arg("seed") = 0, py::arg("word_rate") = 0.15);

  m.def(
      "detect_anchors",
      [](const std::vector<std::tuple<std::string, double, std::map<std::string, double>>>& steps, int lambda) {
        AnchorSet a = detect_anchors(trace_from(steps), {.lambda = lambda});
        py::dict d;
        d["a1"] = a.a1;
        d["a2"] = a.a2;
        d["a3"] = a.a3;
        d["committed_identifiers"] = a.committed_identifiers;
        return d;
      },
      py::arg("steps"), py::arg("lambda_") = 2);

  m.def(
      "entropy_series",
      [](const std::vector<std::tuple<std::string, double, std::map<std::string, double>>>& steps) {
        UncertaintySeries s = series_from(trace_from(steps));
        return py::make_tuple(s.entropy_bits, s.prob_diff);
      },
      py::arg("steps"));

  m.def(
      "matrix_size",
      [](std::size_t tasks, int inputs, int modes, int temperatures, int models, int samples) {
        MatrixConfig c;
        c.input_conditions.assign(all_input_conditions().begin(), all_input_conditions().begin() + inputs);
        c.modes.assign(modes, Mode::kCoT);
        c.temperatures.assign(temperatures, 0.5);
        c.models.assign(models, "m");
        c.samples_per_cell = samples;
        return matrix_size(tasks, c);
      },
      py::arg("tasks"), py::arg("inputs"), py::arg("modes"), py::arg("temperatures"), py::arg("models"),
      py::arg("samples"));

  m.def(
      "run_replay",
      [](const std::vector<std::filesystem::path>& datasets, const std::filesystem::path& run_dir,
         const std::filesystem::path& replay_dir, const std::vector<std::string>& families,
         const std::vector<std::string>& modes, const std::vector<double>& temperatures,
         const std::vector<std::string>& models, int samples, const std::vector<int>& ks, std::uint64_t seed) {
        RunConfig c;
        c.datasets = datasets;
        c.run_dir = run_dir;
        c.replay_dir = replay_dir;
        for (const auto& f : families) c.matrix.input_conditions.push_back(parse_input_condition(f));
        for (const auto& s : modes) c.matrix.modes.push_back(parse_mode(s));
        c.matrix.temperatures = temperatures;
        c.matrix.models = models;
        c.matrix.samples_per_cell = samples;
        c.ks = ks;
        c.seed = seed;
        py::gil_scoped_release release;
        run_pipeline(c);
      },
      py::arg("datasets"), py::arg("run_dir"), py::arg("replay_dir"),
      py::arg("families") = std::vector<std::string>{"Clean", "C1", "C2", "W2", "S1"},
      py::arg("modes") = std::vector<std::string>{"CoT", "NoCoT"}, py::arg("temperatures") = std::vector<double>{0.5},
      py::arg("models") = std::vector<std::string>{"synthetic-model"}, py::arg("samples") = 1,
      py::arg("ks") = std::vector<int>{1}, py::arg("seed") = 7);
}
