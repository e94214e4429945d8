#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "tensopt/dsl/ast.hpp"
#include "tensopt/sim/config.hpp"
#include "tensopt/verify/equivalence.hpp"
#include "tensopt/verify/workload.hpp"

namespace tensopt::search {

struct Evaluation {
  bool parsed = false;
  std::string code_text;  // canonical print when parsed, else the raw source
  std::uint64_t code_hash = 0;
  std::shared_ptr<const dsl::KernelProgram> ast;
  verify::Verdict verdict;
  bool cached = false;
};

/// Parses, canonicalizes and verifies kernel sources for one workload and
/// accelerator. Verdicts are cached by canonical text; safe to share between
/// threads and between searches on the same workload.
class Evaluator {
 public:
  Evaluator(verify::WorkloadSpec spec, sim::AcceleratorConfig cfg, verify::CheckOptions opts = {});

  Evaluation evaluate(const std::string& source) const;

  const verify::WorkloadSpec& spec() const { return spec_; }
  const sim::AcceleratorConfig& config() const { return cfg_; }
  const verify::CheckOptions& options() const { return opts_; }
  int evaluations() const;
  int cache_hits() const;

 private:
  verify::WorkloadSpec spec_;
  sim::AcceleratorConfig cfg_;
  verify::CheckOptions opts_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, verify::Verdict> cache_;
  mutable int evaluations_ = 0;
  mutable int hits_ = 0;
};

}  // namespace tensopt::search
