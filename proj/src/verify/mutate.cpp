#include "tensopt/verify/mutate.hpp"

#include <functional>
#include <map>

#include <fmt/format.h>

#include "tensopt/dsl/intrinsics.hpp"

namespace tensopt::verify {

namespace {

using dsl::Expr;
using dsl::Stmt;
using dsl::StmtKind;

// Pre-order walk over every statement, handing out mutable pointers.
void walk(std::vector<Stmt>& body, const std::function<void(Stmt&)>& f) {
  for (auto& s : body) {
    f(s);
    walk(s.body, f);
    walk(s.else_body, f);
  }
}

std::vector<int> local_arg_positions(const Stmt& s) {
  std::vector<int> out;
  auto info = dsl::lookup_intrinsic(s.callee);
  if (!info || !info->executable) return out;
  for (std::size_t i = 0; i < s.args.size() && i < info->roles.size(); ++i) {
    if (info->roles[i] == dsl::ArgRole::LocalAddr) out.push_back(static_cast<int>(i));
  }
  return out;
}

bool is_intrinsic_call(const Stmt& s) {
  return s.kind == StmtKind::Call && dsl::lookup_intrinsic(s.callee).has_value();
}

// Applies `edit` to the n-th statement (pre-order) of a copy of `p`.
dsl::KernelProgram edit_nth(const dsl::KernelProgram& p, int n, const std::function<void(Stmt&)>& edit) {
  dsl::KernelProgram q = p;
  int i = 0;
  walk(q.body, [&](Stmt& s) {
    if (i++ == n) edit(s);
  });
  return q;
}

}  // namespace

std::string_view name_of(MutationKind k) {
  switch (k) {
    case MutationKind::DropCall: return "drop";
    case MutationKind::BoundMinusOne: return "bound-1";
    case MutationKind::BoundPlusOne: return "bound+1";
    case MutationKind::SwapAddresses: return "swap";
  }
  return "?";
}

std::vector<Mutant> mutants(const dsl::KernelProgram& p) {
  std::vector<Mutant> out;
  dsl::KernelProgram scan = p;
  std::vector<Stmt*> stmts;
  walk(scan.body, [&](Stmt& s) { stmts.push_back(&s); });

  for (int n = 0; n < static_cast<int>(stmts.size()); ++n) {
    const Stmt& s = *stmts[n];
    if (is_intrinsic_call(s)) {
      out.push_back({MutationKind::DropCall, fmt::format("drop {} @{}", s.callee, s.loc.line),
                     edit_nth(p, n, [](Stmt& t) { t = Stmt{}; })});
      auto locals = local_arg_positions(s);
      if (locals.size() == 2) {
        out.push_back({MutationKind::SwapAddresses, fmt::format("swap {} locals @{}", s.callee, s.loc.line),
                       edit_nth(p, n, [&](Stmt& t) { std::swap(t.args[locals[0]], t.args[locals[1]]); })});
      }
    }
    if (s.kind == StmtKind::For && s.loop.cond.kind == dsl::ExprKind::Binary &&
        s.loop.cond.children.size() == 2) {
      // One iteration too few or too many: with `x += 16` the bound moves by 16.
      Expr step = Expr::int_lit(1);
      if (s.loop.step_kind == dsl::StepKind::AddAssign && s.loop.step) step = *s.loop.step;
      for (auto [kind, op] : {std::pair{MutationKind::BoundMinusOne, dsl::BinaryOp::Sub},
                              std::pair{MutationKind::BoundPlusOne, dsl::BinaryOp::Add}}) {
        out.push_back({kind, fmt::format("{} {} @{}", name_of(kind), s.loop.var, s.loc.line),
                       edit_nth(p, n, [&, op = op](Stmt& t) {
                         Expr& bound = t.loop.cond.children[1];
                         bound = Expr::binary(op, bound, step);
                       })});
      }
    }
  }

  // Exchange the first local address of consecutive calls to the same intrinsic.
  std::map<std::string, int> last;
  for (int n = 0; n < static_cast<int>(stmts.size()); ++n) {
    const Stmt& s = *stmts[n];
    if (!is_intrinsic_call(s)) continue;
    auto locals = local_arg_positions(s);
    if (locals.empty()) continue;
    auto it = last.find(s.callee);
    if (it != last.end()) {
      const Stmt& prev = *stmts[it->second];
      const int a = local_arg_positions(prev)[0], b = locals[0];
      if (!(prev.args[a] == s.args[b])) {
        dsl::KernelProgram q = p;
        std::vector<Stmt*> qs;
        walk(q.body, [&](Stmt& t) { qs.push_back(&t); });
        std::swap(qs[it->second]->args[a], qs[n]->args[b]);
        out.push_back({MutationKind::SwapAddresses,
                       fmt::format("swap {} @{} with @{}", s.callee, prev.loc.line, s.loc.line),
                       std::move(q)});
      }
    }
    last[s.callee] = n;
  }
  return out;
}

MutationReport run_mutation_suite(const dsl::KernelProgram& p, const WorkloadSpec& spec,
                                  const sim::AcceleratorConfig& cfg, const CheckOptions& opts) {
  MutationReport r;
  for (const auto& m : mutants(p)) {
    ++r.total;
    if (check_equivalence(m.program, spec, cfg, opts).correct) {
      r.survivors.push_back(m.label);
    } else {
      ++r.detected;
    }
  }
  return r;
}

}  // namespace tensopt::verify
