#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "govrek/dilemma.hpp"
#include "govrek/governance.hpp"
#include "govrek/harness.hpp"
#include "govrek/kernel.hpp"
#include "govrek/paths.hpp"
#include "govrek/scheduler.hpp"
#include "govrek/serialize.hpp"

namespace py = pybind11;
using json = nlohmann::json;

namespace {

govrek::Point to_point(const std::vector<double>& coords) {
    if (coords.empty() || coords.size() > 3)
        throw govrek::InvalidInput("points take 1-3 coordinates");
    govrek::Point p;
    p.dims = static_cast<int>(coords.size());
    for (int i = 0; i < p.dims; ++i) p[i] = coords[static_cast<std::size_t>(i)];
    return p;
}

govrek::KernelSpec spec_from_json_str(const std::string& text) {
    return govrek::kernel_spec_from_json(json::parse(text));
}

double py_eval_kernel(const std::string& spec_json, const std::vector<double>& x,
                      const std::vector<double>& x_ref) {
    return govrek::eval_kernel(spec_from_json_str(spec_json), to_point(x), to_point(x_ref));
}

py::dict py_render_field(const std::string& spec_json, const std::vector<std::int64_t>& dims,
                         int n_agents) {
    const govrek::KernelSpec spec = spec_from_json_str(spec_json);
    const govrek::DomainDescriptor domain = govrek::DomainDescriptor::grid(dims);
    govrek::AnchorContext ctx;
    ctx.goal = domain.cell_point(domain.cell_count() - 1);
    ctx.agent_starts.assign(4, domain.cell_point(0));
    const govrek::RewardField raw = govrek::build_reward_field(spec, domain, ctx);
    const govrek::RewardField norm = govrek::normalize_field(raw, n_agents, spec.sign_mode);
    py::dict out;
    out["raw"] = raw.values;
    out["normalized"] = norm.values;
    out["dims"] = dims;
    return out;
}

govrek::DilemmaConfig dilemma_config(int n_agents, const std::string& sparsity,
                                     const std::string& profile, double temptation,
                                     const std::string& index_mode) {
    govrek::DilemmaConfig cfg;
    cfg.n_agents = n_agents;
    cfg.sparsity = sparsity == "baseline" ? govrek::PayoffSparsity::Baseline
                                          : govrek::PayoffSparsity::Sparse;
    cfg.profile = profile == "heterogeneous" ? govrek::PayoffProfile::Heterogeneous
                                             : govrek::PayoffProfile::Homogeneous;
    cfg.temptation = temptation;
    cfg.index_mode = index_mode == "cooperator_count" ? govrek::JointIndexMode::CooperatorCount
                                                      : govrek::JointIndexMode::Lexicographic;
    return cfg.resolved();
}

std::vector<double> py_dilemma_payoffs(const std::vector<int>& actions, const std::string& sparsity,
                                       const std::string& profile, double temptation) {
    return govrek::dilemma_step(
        dilemma_config(static_cast<int>(actions.size()), sparsity, profile, temptation,
                       "lexicographic"),
        actions);
}

std::int64_t py_flatten(const std::vector<int>& actions, const std::string& index_mode) {
    return govrek::flatten_joint_action(
        actions, dilemma_config(static_cast<int>(actions.size()), "sparse", "homogeneous", 0.5,
                                index_mode));
}

py::dict py_plan_rounds(std::int64_t total_budget, int rounds, int eta) {
    const govrek::SearchPlan plan = govrek::plan_rounds(total_budget, rounds, eta);
    py::dict out;
    out["total_budget"] = plan.total_budget;
    out["rounds"] = plan.rounds;
    out["eta"] = plan.eta;
    out["round_budgets"] = plan.round_budgets;
    py::list all_rounds;
    for (const auto& round : plan.brackets) {
        py::list brackets;
        for (const govrek::Bracket& b : round) {
            py::dict bd;
            bd["s"] = b.s;
            bd["n_initial"] = b.n_initial;
            bd["r_initial"] = b.r_initial;
            py::list rungs;
            for (const govrek::Rung& r : b.rungs) {
                py::dict rd;
                rd["n_configs"] = r.n_configs;
                rd["budget"] = r.budget;
                rungs.append(rd);
            }
            bd["rungs"] = rungs;
            brackets.append(bd);
        }
        all_rounds.append(brackets);
    }
    out["brackets"] = all_rounds;
    return out;
}

py::dict py_run_experiment(const std::string& config_json, int workers) {
    const govrek::ExperimentConfig config =
        govrek::parse_experiment_config(json::parse(config_json));
    const govrek::RunOutput run = govrek::run_experiment(config, workers);
    py::dict out;
    out["out_dir"] = run.dir.string();
    py::list seeds;
    for (std::size_t i = 0; i < run.per_seed.size(); ++i) {
        const govrek::TrialResult& r = run.per_seed[i];
        py::dict sd;
        sd["seed"] = config.seeds[i];
        sd["avg_reward"] = r.avg_reward;
        sd["avg_episode_length"] = r.avg_episode_length;
        sd["success_rate"] = r.success_rate;
        sd["steps_to_first_success"] = r.steps_to_first_success;
        sd["total_timesteps"] = r.total_timesteps;
        seeds.append(sd);
    }
    out["per_seed"] = seeds;
    return out;
}

std::uint64_t py_count_paths(const std::vector<std::int64_t>& dims) {
    return govrek::count_monotone_paths(dims);
}

} // namespace

PYBIND11_MODULE(_govrek, m) {
    m.doc() = "Governance-kernel reward shaping for sparse multi-agent RL";

    py::register_exception<govrek::Error>(m, "GovrekError");

    m.def("eval_kernel", &py_eval_kernel, py::arg("spec_json"), py::arg("x"), py::arg("x_ref"),
          "Raw kernel value at x against x_ref; the spec is a JSON string.");
    m.def("render_field", &py_render_field, py::arg("spec_json"), py::arg("dims"),
          py::arg("n_agents") = 2,
          "Evaluate a kernel over a grid; returns raw and normalized values (row-major).");
    m.def("count_monotone_paths", &py_count_paths, py::arg("dims"),
          "Closed-form monotone lattice path count for 2D/3D grids.");
    m.def("dilemma_payoffs", &py_dilemma_payoffs, py::arg("actions"),
          py::arg("sparsity") = "sparse", py::arg("profile") = "homogeneous",
          py::arg("temptation") = 0.5,
          "Per-agent payoff for one joint action (0 = defect, 1 = cooperate).");
    m.def("flatten_joint_action", &py_flatten, py::arg("actions"),
          py::arg("index_mode") = "lexicographic",
          "Joint-action index: lexicographic (agent 0 most significant) or cooperator count.");
    m.def("potential_shaping", &govrek::potential_shaping, py::arg("phi_s"), py::arg("phi_s_next"),
          py::arg("gamma"), "gamma * phi(s') - phi(s)");
    m.def("plan_rounds", &py_plan_rounds, py::arg("total_budget"), py::arg("rounds"),
          py::arg("eta"), "Repeated-Hyperband round budgets and bracket geometry.");
    m.def("run_experiment", &py_run_experiment, py::arg("config_json"), py::arg("workers") = 1,
          "Run a seeded experiment from a config JSON string; returns per-seed metrics.");

    m.attr("__version__") = "0.1.0";
}
