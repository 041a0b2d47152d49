#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coachsim/analysis.hpp"
#include "coachsim/demonstrations.hpp"
#include "coachsim/experiment.hpp"
#include "coachsim/memory.hpp"
#include "coachsim/metrics.hpp"
#include "coachsim/parsers.hpp"
#include "coachsim/remote_backend.hpp"

namespace py = pybind11;

using namespace coachsim;

namespace {

py::dict report_to_dict(const metrics::MetricsReport& r) {
    py::dict d;
    d["collision_count"] = r.collision_count;
    d["collisions_per_meter"] =
        r.collisions_per_meter.undefined ? py::object(py::none()) : py::cast(r.collisions_per_meter.value);
    d["collisions_per_meter_undefined"] = r.collisions_per_meter.undefined;
    d["avg_speed"] = r.avg_speed ? py::cast(*r.avg_speed) : py::object(py::none());
    d["avg_throttle"] = r.avg_throttle ? py::cast(*r.avg_throttle) : py::object(py::none());
    d["avg_brake"] = r.avg_brake ? py::cast(*r.avg_brake) : py::object(py::none());
    d["duration_s"] = r.duration_s;
    d["distance_m"] = r.distance_m;
    return d;
}

py::dict run_condition_py(const std::string& condition_code, std::uint64_t seed, double duration_s,
                          bool aggressive, int npc_vehicles, int npc_pedestrians,
                          const std::string& out_dir) {
    const auto condition = experiment::Condition::from_code(condition_code);
    if (!condition) throw std::invalid_argument("unknown condition code " + condition_code);
    experiment::RunConfig cfg;
    cfg.condition = *condition;
    cfg.seed = seed;
    cfg.duration_s = duration_s;
    cfg.out_dir = out_dir;
    cfg.scenario.npc_vehicle_count = npc_vehicles;
    cfg.scenario.npc_pedestrian_count = npc_pedestrians;
    if (aggressive) {
        cfg.scenario.aggression.lane_change_prob = 0.04;
        cfg.scenario.aggression.red_light_run_prob = 0.08;
        cfg.scenario.aggression.jaywalk_prob = 0.04;
        cfg.scenario.aggression.desired_speed_multiplier = 1.2;
    }
    const experiment::RunResult result = experiment::run_condition(cfg);

    py::dict d;
    py::list seconds, speed, throttle, brake, collisions, distance;
    for (const metrics::LogRecord& rec : result.log) {
        seconds.append(rec.second);
        speed.append(rec.speed);
        throttle.append(rec.throttle_pct);
        brake.append(rec.brake_pct);
        collisions.append(rec.collisions_cum);
        distance.append(rec.distance_cum);
    }
    d["condition"] = result.condition.code();
    d["seed"] = result.seed;
    d["second"] = seconds;
    d["speed"] = speed;
    d["throttle_pct"] = throttle;
    d["brake_pct"] = brake;
    d["collisions_cum"] = collisions;
    d["distance_cum"] = distance;
    d["report"] = report_to_dict(result.report);
    py::list guidelines;
    for (const auto& g : result.guidelines) guidelines.append(g.text);
    d["guidelines"] = guidelines;
    d["decision_count"] = result.decision_count;
    d["fallback_count"] = result.fallback_count;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Driver/coach alignment sandbox: deterministic traffic microsim, "
              "style-aligned agents, metrics and survey analytics";

    m.def("build_matrix", [] {
        std::vector<std::string> codes;
        for (const auto& c : experiment::build_matrix()) codes.push_back(c.code());
        return codes;
    }, "The eight realized experiment conditions in canonical order.");

    m.def("run_condition", &run_condition_py, py::arg("condition"), py::arg("seed") = 1,
          py::arg("duration_s") = 60.0, py::arg("aggressive") = true, py::arg("npc_vehicles") = 60,
          py::arg("npc_pedestrians") = 60, py::arg("out_dir") = "",
          "Run one condition with the rule backend; returns the second-by-second log, "
          "the metrics report and the accumulated guidelines.");

    m.def("token_to_timestep", &reasoning::token_to_timestep, py::arg("token_count"));

    m.def("mdsi_style_score",
          [](const std::vector<int>& risky, const std::vector<int>& cautious,
             const std::vector<bool>& negative, int scale_min, int scale_max) {
              demos::MDSIResponse r;
              r.risky_options = risky;
              r.cautious_options = cautious;
              r.cautious_negative = negative.empty() ? std::vector<bool>(cautious.size(), false) : negative;
              r.scale_min = scale_min;
              r.scale_max = scale_max;
              return demos::mdsi_style_score(r);
          },
          py::arg("risky"), py::arg("cautious"), py::arg("negative") = std::vector<bool>{},
          py::arg("scale_min") = 0, py::arg("scale_max") = 5);

    m.def("classify_driver_style",
          [](double speed, double throttle, double fleet_speed, double fleet_throttle) {
              demos::DriverStats stats{"driver", speed, throttle, std::nullopt};
              demos::DriverStats fleet{"fleet", fleet_speed, fleet_throttle, std::nullopt};
              switch (demos::classify_driver_style(stats, fleet)) {
                  case demos::StyleLabel::Risky: return "risky";
                  case demos::StyleLabel::Cautious: return "cautious";
                  default: return "unlabeled";
              }
          },
          py::arg("mean_speed"), py::arg("mean_throttle"), py::arg("fleet_speed") = 6.40,
          py::arg("fleet_throttle") = 23.09);

    m.def("pearson",
          [](const std::vector<double>& x, const std::vector<double>& y) {
              const auto c = analysis::pearson(x, y);
              py::dict d;
              d["r"] = c.r;
              d["n"] = c.n;
              d["p"] = c.p;
              return d;
          },
          py::arg("x"), py::arg("y"));

    m.def("avg_excluding_zero",
          [](const std::vector<double>& series) -> py::object {
              const auto v = metrics::avg_excluding_zero(series);
              return v ? py::cast(*v) : py::object(py::none());
          },
          py::arg("series"));

    m.def("per_minute_segments",
          [](const std::vector<double>& series) {
              py::list out;
              for (const auto& seg : metrics::per_minute_segments(series)) {
                  py::dict d;
                  d["start_second"] = seg.start_second;
                  d["mean"] = seg.mean ? py::cast(*seg.mean) : py::object(py::none());
                  d["sample_count"] = seg.sample_count;
                  d["partial"] = seg.partial;
                  out.append(d);
              }
              return out;
          },
          py::arg("series"));

    m.def("parse_driver_response",
          [](const std::string& text) -> py::object {
              const auto parsed = reasoning::parse_driver_response(text);
              if (!parsed) return py::none();
              py::dict d;
              d["situation"] = parsed->situation;
              d["reasoning"] = parsed->reasoning;
              d["action"] = std::string(agent::action_token(parsed->action));
              return d;
          },
          py::arg("text"));

    py::class_<agent::ShortTermMemory>(m, "ShortTermMemory")
        .def(py::init<int>(), py::arg("capacity") = 5)
        .def_property_readonly("capacity", &agent::ShortTermMemory::capacity)
        .def("__len__", &agent::ShortTermMemory::size)
        .def("push",
             [](agent::ShortTermMemory& mem, long tick, const std::string& situation,
                const std::string& reasoning, const std::string& action) {
                 const auto a = agent::action_from_token(action);
                 if (!a) throw std::invalid_argument("unknown action token " + action);
                 mem.push({tick, situation, reasoning, *a});
             },
             py::arg("tick"), py::arg("situation"), py::arg("reasoning"), py::arg("action"))
        .def("units", [](const agent::ShortTermMemory& mem) {
            py::list out;
            for (const auto& u : mem.units()) {
                py::dict d;
                d["tick"] = u.tick;
                d["situation"] = u.situation;
                d["reasoning"] = u.reasoning;
                d["action"] = std::string(agent::action_token(u.action));
                out.append(d);
            }
            return out;
        });

    m.attr("__version__") = "0.1.0";
}
