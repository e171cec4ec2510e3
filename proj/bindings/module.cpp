#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "meritluck/agents.hpp"
#include "meritluck/config.hpp"
#include "meritluck/effort.hpp"
#include "meritluck/errors.hpp"
#include "meritluck/experiment.hpp"
#include "meritluck/mathutil.hpp"
#include "meritluck/meritprob.hpp"
#include "meritluck/pipeline.hpp"

namespace py = pybind11;
using namespace meritluck;

namespace {

MeritConvention convention_of(bool strict) {
    return strict ? MeritConvention::StrictlyMore : MeritConvention::WeaklyMore;
}

}  // namespace

PYBIND11_MODULE(_meritluck, m) {
    m.doc() = "Winner-takes-all tournament simulator and merit-probability toolkit";

    py::register_exception<Error>(m, "Error");

    py::class_<EffortDistribution>(m, "EffortDistribution")
        .def_static("truncated_rounded_normal", &EffortDistribution::truncated_rounded_normal,
                    py::arg("mean"), py::arg("sd"), py::arg("min_effort"))
        .def_static("log_normal", &EffortDistribution::log_normal, py::arg("mu_log"),
                    py::arg("sigma_log"))
        .def_static("uniform", &EffortDistribution::uniform, py::arg("upper"))
        .def_static("empirical", &EffortDistribution::empirical, py::arg("efforts"))
        .def("mean", &EffortDistribution::mean)
        .def("ratio_cdf", &EffortDistribution::ratio_cdf, py::arg("t"))
        .def("ratio_density", &EffortDistribution::ratio_density, py::arg("t"))
        .def("diff_cdf", &EffortDistribution::diff_cdf, py::arg("d"));

    py::class_<WorkerPopulation>(m, "WorkerPopulation")
        .def("__len__", [](const WorkerPopulation& pop) { return pop.size(); })
        .def("efforts", [](const WorkerPopulation& pop) {
            std::vector<double> efforts;
            efforts.reserve(pop.workers.size());
            for (const auto& w : pop.workers) efforts.push_back(w.effort);
            return efforts;
        });

    m.def("sample_population", &sample_population, py::arg("dist"), py::arg("n"), py::arg("seed"),
          py::arg("label") = "synthetic");

    m.def("pi_from_q", &pi_from_q, py::arg("q"));
    m.def("q_from_pi", &q_from_pi, py::arg("pi"));
    m.def("pi_analytic", &pi_analytic, py::arg("dist"), py::arg("m"));
    m.def(
        "pi_empirical",
        [](const WorkerPopulation& pop, double m_adv, bool strict) {
            PiEstimate e = pi_empirical(pop, m_adv, convention_of(strict));
            return py::make_tuple(e.pi, e.n_pairings);
        },
        py::arg("population"), py::arg("m"), py::arg("strict_merit") = false);
    m.def(
        "pi_headstart",
        [](const WorkerPopulation& pop, double b, bool strict) {
            PiEstimate e = pi_headstart(pop, b, convention_of(strict));
            return py::make_tuple(e.pi, e.n_pairings);
        },
        py::arg("population"), py::arg("b"), py::arg("strict_merit") = false);
    m.def(
        "pi_curve",
        [](const WorkerPopulation& pop, const std::string& kind, const std::vector<double>& grid,
           bool strict) {
            PiCurve curve = pi_curve(pop, advantage_kind_from_string(kind), grid, convention_of(strict));
            std::vector<py::tuple> points;
            points.reserve(curve.points.size());
            for (const auto& p : curve.points)
                points.push_back(py::make_tuple(p.advantage, p.pi_hat, p.n_pairings));
            return points;
        },
        py::arg("population"), py::arg("kind"), py::arg("grid"), py::arg("strict_merit") = false);

    m.def("optimal_redistribution", &optimal_redistribution, py::arg("fair_share"), py::arg("pi"));
    m.def("snap_to_grid", &snap_to_grid, py::arg("r"));
    m.def("heuristic_outcomes", &heuristic_outcomes, py::arg("c0"), py::arg("c1"), py::arg("q_kink"),
          py::arg("q"));
    m.def("heuristic_opportunities", &heuristic_opportunities, py::arg("a0"), py::arg("a1"),
          py::arg("m_w"), py::arg("m_l"));

    m.def(
        "run_study_rows",
        [](const std::string& config_json, const std::string& arm_name) {
            RunConfig config = config_from_json(config_json);
            config.validate();
            ArmSpec arm = arm_by_name(arm_name);
            if (config.informed) arm.informed = true;
            EffortDistribution dist = config.effort.build();
            WorkerPopulation pop =
                sample_population(dist, config.n_workers, mix_seed(config.seed, fnv1a64("workers")));
            auto dataset = run_study(arm.mixture(config), arm.environment(config), pop,
                                     config.n_spectators, arm.seed(config), nullptr,
                                     config.convention());
            std::vector<py::tuple> rows;
            rows.reserve(dataset.size());
            for (const auto& rec : dataset)
                rows.push_back(py::make_tuple(rec.spectator_id, rec.round, rec.pi_true, rec.r));
            return rows;
        },
        py::arg("config_json"), py::arg("arm") = "outcomes",
        "Simulate one study arm and return (spectator_id, round, pi_true, r) rows");

    m.def(
        "reproduce", [](const std::string& config_json) { cmd_reproduce(config_from_json(config_json)); },
        py::arg("config_json"), "Run every pipeline stage into the configured output directory");
}
