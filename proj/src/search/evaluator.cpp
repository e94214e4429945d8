#include "tensopt/search/evaluator.hpp"

#include "tensopt/core/files.hpp"
#include "tensopt/dsl/diagnostic.hpp"
#include "tensopt/dsl/parser.hpp"
#include "tensopt/dsl/printer.hpp"

namespace tensopt::search {

Evaluator::Evaluator(verify::WorkloadSpec spec, sim::AcceleratorConfig cfg, verify::CheckOptions opts)
    : spec_(std::move(spec)), cfg_(std::move(cfg)), opts_(opts) {}

Evaluation Evaluator::evaluate(const std::string& source) const {
  Evaluation e;
  auto parsed = dsl::parse_kernel(source);
  if (!parsed.program) {
    e.code_text = source;
    e.code_hash = fnv1a(source);
    verify::Mismatch m;
    m.reason = "parse error: " + dsl::format(parsed.diagnostics);
    e.verdict.first_mismatch = m;
    return e;
  }
  e.parsed = true;
  e.code_text = dsl::print_kernel(*parsed.program);
  e.code_hash = fnv1a(e.code_text);
  e.ast = std::make_shared<const dsl::KernelProgram>(std::move(*parsed.program));
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(e.code_text); it != cache_.end()) {
      ++hits_;
      e.verdict = it->second;
      e.cached = true;
      return e;
    }
  }
  e.verdict = verify::check_equivalence(*e.ast, spec_, cfg_, opts_);
  std::lock_guard lock(mu_);
  ++evaluations_;
  cache_.emplace(e.code_text, e.verdict);
  return e;
}

int Evaluator::evaluations() const {
  std::lock_guard lock(mu_);
  return evaluations_;
}

int Evaluator::cache_hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

}  // namespace tensopt::search
