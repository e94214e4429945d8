#include "tensopt/verify/equivalence.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tensopt/dsl/diagnostic.hpp"

namespace tensopt::verify {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Mismatch setup_problem(std::string reason) {
  Mismatch m;
  m.reason = std::move(reason);
  return m;
}

std::string shape_str(const std::vector<std::size_t>& s) {
  std::string o;
  for (auto d : s) o += fmt::format("[{}]", d);
  return o;
}

// Kernel signature must declare exactly the workload's parameters.
std::optional<Mismatch> check_signature(const sim::Program& prog, const WorkloadSpec& spec) {
  const auto want = param_specs(spec);
  const auto& have = prog.params();
  for (const auto& w : want) {
    auto it = std::find_if(have.begin(), have.end(), [&](const auto& h) { return h.name == w.name; });
    if (it == have.end()) return setup_problem(fmt::format("kernel has no parameter '{}'", w.name));
    if (it->type != w.type || it->shape != w.shape) {
      auto m = setup_problem(fmt::format("parameter '{}' is {}{}, expected {}{}", w.name,
                                         name_of(it->type), shape_str(it->shape), name_of(w.type),
                                         shape_str(w.shape)));
      m.param = w.name;
      return m;
    }
  }
  for (const auto& h : have) {
    bool known = std::any_of(want.begin(), want.end(), [&](const auto& w) { return w.name == h.name; });
    if (!known) return setup_problem(fmt::format("unexpected parameter '{}'", h.name));
  }
  return std::nullopt;
}

std::optional<Mismatch> compare(const WorkloadSpec& spec, const TensorMap& expected,
                                const TensorMap& actual, int trial) {
  for (const auto& p : param_specs(spec)) {
    if (p.role == Role::Input) continue;
    const Tensor& e = expected.at(p.name);
    auto it = actual.find(p.name);
    if (it == actual.end()) {
      auto m = setup_problem("output missing from the run");
      m.trial = trial, m.param = p.name;
      return m;
    }
    const Tensor& a = it->second;
    const std::size_t rows = p.shape.empty() ? 1 : p.shape[0];
    const std::size_t row_len = rows == 0 ? 0 : e.size() / rows;
    const bool fp = is_float(p.type);
    for (std::size_t i = p.compare_begin * row_len; i < p.compare_end * row_len; ++i) {
      double ev = fp ? e.get(i) : static_cast<double>(e.get_int(i));
      double av = fp ? a.get(i) : static_cast<double>(a.get_int(i));
      if (!values_match(ev, av, fp)) return Mismatch{trial, p.name, i, ev, av, {}};
    }
  }
  return std::nullopt;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t base_seed, int trial, int n_functional) {
  if (trial == n_functional) return base_seed;
  return splitmix64(base_seed ^ splitmix64(static_cast<std::uint64_t>(trial) + 1));
}

bool values_match(double expected, double actual, bool is_float) {
  if (!is_float) return expected == actual;
  if (std::isnan(expected) || std::isnan(actual)) return false;
  return std::fabs(actual - expected) <= std::max(1e-5 * std::fabs(expected), 1e-6);
}

Verdict check_equivalence(const sim::Program& prog, const WorkloadSpec& spec, const CheckOptions& opts) {
  Verdict v;
  if (auto problem = spec.check(); !problem.empty()) {
    v.first_mismatch = setup_problem("bad workload: " + problem);
    return v;
  }
  const auto& cfg = prog.config();
  if (cfg.elem_type != spec.elem || cfg.acc_type != spec.acc) {
    v.first_mismatch = setup_problem(fmt::format(
        "workload is {}/{} but the accelerator is {}/{}", name_of(spec.elem), name_of(spec.acc),
        name_of(cfg.elem_type), name_of(cfg.acc_type)));
    return v;
  }
  if (auto m = check_signature(prog, spec)) {
    v.first_mismatch = std::move(m);
    return v;
  }

  const int total = opts.n_functional + opts.n_timed;
  for (int t = 0; t < total; ++t) {
    const std::uint64_t seed = trial_seed(opts.base_seed, t, opts.n_functional);
    TensorMap inputs = random_inputs(spec, seed);
    TensorMap expected = reference_outputs(spec, inputs);
    sim::RunOptions ro;
    ro.timed = t >= opts.n_functional;
    ro.garbage_seed = splitmix64(seed ^ 0x6761726261676521ULL);
    ro.node_limit = opts.node_limit;
    sim::RunResult r = prog.run(inputs, ro);
    ++v.simulator_runs;
    v.trials_run = t + 1;
    if (!r.ok) {
      Mismatch m = setup_problem(r.error);
      m.trial = t;
      v.first_mismatch = std::move(m);
      return v;
    }
    if (auto m = compare(spec, expected, r.arrays, t)) {
      v.first_mismatch = std::move(m);
      return v;
    }
    if (t == opts.n_functional && r.perf) {
      v.latency_cycles = r.perf->total_cycles;
      v.perf = r.perf;
    }
  }
  v.correct = true;
  return v;
}

Verdict check_equivalence(const dsl::KernelProgram& p, const WorkloadSpec& spec,
                          const sim::AcceleratorConfig& cfg, const CheckOptions& opts) {
  auto c = sim::Program::compile(p, cfg, spec.bindings());
  if (!c.program) {
    Verdict v;
    v.first_mismatch = setup_problem("compile error: " + dsl::format(c.diagnostics));
    return v;
  }
  return check_equivalence(*c.program, spec, opts);
}

nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j{{"correct", v.correct},
                   {"trials_run", v.trials_run},
                   {"simulator_runs", v.simulator_runs}};
  if (v.first_mismatch) {
    const auto& m = *v.first_mismatch;
    j["first_mismatch"] = {{"trial", m.trial},       {"param", m.param},
                           {"index", m.index},       {"expected", m.expected},
                           {"actual", m.actual},     {"reason", m.reason}};
  }
  if (v.latency_cycles) j["latency_cycles"] = *v.latency_cycles;
  if (v.perf) j["perf"] = sim::to_json(*v.perf);
  return j;
}

Verdict verdict_from_json(const nlohmann::json& j) {
  Verdict v;
  v.correct = j.at("correct").get<bool>();
  v.trials_run = j.value("trials_run", 0);
  v.simulator_runs = j.value("simulator_runs", 0);
  if (j.contains("first_mismatch")) {
    const auto& m = j["first_mismatch"];
    v.first_mismatch = Mismatch{m.value("trial", -1),          m.value("param", std::string{}),
                                m.value("index", std::size_t{0}), m.value("expected", 0.0),
                                m.value("actual", 0.0),        m.value("reason", std::string{})};
  }
  if (j.contains("latency_cycles")) v.latency_cycles = j["latency_cycles"].get<std::int64_t>();
  if (j.contains("perf")) v.perf = sim::perf_from_json(j["perf"]);
  return v;
}

}  // namespace tensopt::verify
