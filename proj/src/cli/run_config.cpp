#include "tensopt/cli/run_config.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace tensopt::cli {
namespace {

namespace fs = std::filesystem;
using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"accelerator", {"preset", "name", "dim", "elem_type", "acc_type", "spad_kb", "acc_kb"}},
      {"timing",
       {"cpu_node_cost", "issue_cost", "config_cost", "dma_startup", "bus_bytes_per_cycle", "compute_fill",
        "queue_depth", "fence_drain_overhead", "reuse_preload_cost"}},
      {"workload",
       {"kind", "oracle", "M", "K", "N", "bias", "elem", "acc", "batch", "in_ch", "out_ch", "spatial", "kernel",
        "stride", "nhorizon", "start"}},
      {"search",
       {"menu", "B", "N", "K", "T", "dropout", "seed", "reuse_hint", "include_isa", "include_menu",
        "include_feedback", "enable_dropout", "enable_ensemble", "functional_trials", "timed_trials",
        "check_seed"}},
      {"reuse", {"B", "N", "K", "refine"}},
      {"backend", {"mode", "manifest", "models"}},
      {"output", {"dir"}},
  };
  return k;
}

const std::set<std::string> kModelKeys{"endpoint",    "model",     "temperature", "max_tokens",   "timeout_s",
                                       "max_retries", "backoff_s", "api_key_env", "max_in_flight"};

bool looks_like_secret(const std::string& key) {
  std::string k = boost::algorithm::to_lower_copy(key);
  if (k == "api_key_env") return false;
  return k == "key" || k == "token" || k == "authorization" || boost::algorithm::ends_with(k, "_key") ||
         boost::algorithm::ends_with(k, "_token") || k.find("secret") != std::string::npos ||
         k.find("password") != std::string::npos;
}

// Typed reads with the section and key in every error.
class Section {
 public:
  Section(std::string name, const ptree* t) : name_(std::move(name)), t_(t) {}

  bool has(const std::string& key) const { return t_ && t_->find(key) != t_->not_found(); }

  std::string str(const std::string& key, const std::string& def) const {
    if (!has(key)) return def;
    return boost::algorithm::trim_copy(t_->get<std::string>(key));
  }

  template <class T>
  T num(const std::string& key, T def) const {
    if (!has(key)) return def;
    const std::string s = str(key, "");
    try {
      std::size_t used = 0;
      T v;
      if constexpr (std::is_floating_point_v<T>) {
        v = static_cast<T>(std::stod(s, &used));
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
        v = static_cast<T>(std::stoull(s, &used, 0));
      } else {
        v = static_cast<T>(std::stoll(s, &used, 0));
      }
      if (used != s.size()) throw std::invalid_argument("trailing text");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("[{}] {}: '{}' is not a number", name_, key, s));
    }
  }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    std::string s = boost::algorithm::to_lower_copy(str(key, ""));
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw ConfigError(fmt::format("[{}] {}: '{}' is not a boolean", name_, key, s));
  }

  ElemType elem(const std::string& key, ElemType def) const {
    if (!has(key)) return def;
    auto e = parse_elem_type(str(key, ""));
    if (!e) throw ConfigError(fmt::format("[{}] {}: unknown element type '{}'", name_, key, str(key, "")));
    return *e;
  }

 private:
  std::string name_;
  const ptree* t_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : (base / q).lexically_normal();
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw ConfigError(fmt::format("{} not found: {}", what, p.string()));
}

sim::AcceleratorConfig read_accelerator(const Section& s, const Section& timing) {
  const std::string preset = boost::algorithm::to_lower_copy(s.str("preset", "a"));
  sim::AcceleratorConfig c;
  if (preset == "a") {
    c = sim::instance_a();
  } else if (preset == "b") {
    c = sim::instance_b();
  } else {
    throw ConfigError(fmt::format("[accelerator] preset: expected a or b, got '{}'", preset));
  }
  c.name = s.str("name", c.name);
  c.dim = s.num("dim", c.dim);
  c.elem_type = s.elem("elem_type", c.elem_type);
  c.acc_type = s.elem("acc_type", c.acc_type);
  c.spad_kb = s.num("spad_kb", c.spad_kb);
  c.acc_kb = s.num("acc_kb", c.acc_kb);
  auto& t = c.timing;
  t.cpu_node_cost = timing.num("cpu_node_cost", t.cpu_node_cost);
  t.issue_cost = timing.num("issue_cost", t.issue_cost);
  t.config_cost = timing.num("config_cost", t.config_cost);
  t.dma_startup = timing.num("dma_startup", t.dma_startup);
  t.bus_bytes_per_cycle = timing.num("bus_bytes_per_cycle", t.bus_bytes_per_cycle);
  t.compute_fill = timing.num("compute_fill", t.compute_fill);
  t.queue_depth = timing.num("queue_depth", t.queue_depth);
  t.fence_drain_overhead = timing.num("fence_drain_overhead", t.fence_drain_overhead);
  t.reuse_preload_cost = timing.num("reuse_preload_cost", t.reuse_preload_cost);
  if (auto problem = c.check(); !problem.empty()) throw ConfigError("[accelerator] " + problem);
  return c;
}

verify::WorkloadSpec read_workload(const Section& s, const sim::AcceleratorConfig& accel) {
  const std::string kind_name = s.str("kind", "");
  if (kind_name.empty()) throw ConfigError("[workload] kind is required");
  auto kind = verify::parse_workload_kind(kind_name);
  if (!kind) throw ConfigError(fmt::format("[workload] kind: unknown workload '{}'", kind_name));
  if (s.has("oracle") && s.str("oracle", "") != kind_name) {
    throw ConfigError(fmt::format("[workload] oracle '{}' does not match kind '{}'", s.str("oracle", ""), kind_name));
  }
  verify::WorkloadSpec w;
  switch (*kind) {
    case verify::WorkloadKind::Gemm:
      w = verify::gemm_spec(s.num("M", 0), s.num("K", 0), s.num("N", 0), s.elem("elem", accel.elem_type),
                            s.elem("acc", accel.acc_type));
      w.bias = s.flag("bias", false);
      break;
    case verify::WorkloadKind::Conv: {
      verify::ConvDims d;
      d.batch = s.num("batch", d.batch);
      d.in_ch = s.num("in_ch", d.in_ch);
      d.out_ch = s.num("out_ch", d.out_ch);
      d.spatial = s.num("spatial", d.spatial);
      d.kernel = s.num("kernel", d.kernel);
      d.stride = s.num("stride", d.stride);
      w = verify::conv_spec(d);
      break;
    }
    case verify::WorkloadKind::TinyMpc:
      w = verify::tinympc_spec(s.num("nhorizon", 5));
      break;
  }
  if (auto problem = w.check(); !problem.empty()) throw ConfigError("[workload] " + problem);
  return w;
}

void read_search(const Section& s, search::SearchConfig& sc) {
  const std::string menu = s.str("menu", "gemm");
  if (menu == "gemm") {
    sc = search::default_search_config(search::MenuKind::Gemm);
  } else if (menu == "fine") {
    sc = search::default_search_config(search::MenuKind::FineGrained);
  } else {
    throw ConfigError(fmt::format("[search] menu: expected gemm or fine, got '{}'", menu));
  }
  sc.B = s.num("B", sc.B);
  sc.N = s.num("N", sc.N);
  sc.K = s.num("K", sc.K);
  sc.T = s.num("T", sc.T);
  sc.dropout_prob = s.num("dropout", sc.dropout_prob);
  sc.seed = s.num<std::uint64_t>("seed", sc.seed);
  sc.reuse_hint = s.flag("reuse_hint", sc.reuse_hint);
  auto& a = sc.ablations;
  a.include_isa = s.flag("include_isa", a.include_isa);
  a.include_menu = s.flag("include_menu", a.include_menu);
  a.include_feedback = s.flag("include_feedback", a.include_feedback);
  a.enable_dropout = s.flag("enable_dropout", a.enable_dropout);
  a.enable_ensemble = s.flag("enable_ensemble", a.enable_ensemble);
  sc.check.n_functional = s.num("functional_trials", sc.check.n_functional);
  sc.check.n_timed = s.num("timed_trials", sc.check.n_timed);
  sc.check.base_seed = s.num<std::uint64_t>("check_seed", sc.check.base_seed);
}

llm::ModelSpec read_model(const std::string& name, const ptree& t) {
  for (const auto& [key, _] : t) {
    if (looks_like_secret(key)) {
      throw ConfigError(fmt::format("[model.{}] {}: keys are read from the environment only (set api_key_env)",
                                    name, key));
    }
    if (!kModelKeys.count(key)) throw ConfigError(fmt::format("[model.{}] unknown key '{}'", name, key));
  }
  Section s("model." + name, &t);
  llm::ModelSpec m;
  m.name = name;
  m.endpoint = s.str("endpoint", m.endpoint);
  m.model = s.str("model", "");
  if (m.model.empty()) throw ConfigError(fmt::format("[model.{}] model is required", name));
  m.temperature = s.num("temperature", m.temperature);
  m.max_tokens = s.num("max_tokens", m.max_tokens);
  m.timeout_s = s.num("timeout_s", m.timeout_s);
  m.max_retries = s.num("max_retries", m.max_retries);
  m.backoff_s = s.num("backoff_s", m.backoff_s);
  m.api_key_env = s.str("api_key_env", m.api_key_env);
  m.max_in_flight = s.num("max_in_flight", m.max_in_flight);
  return m;
}

}  // namespace

RunConfig load_run_config(const fs::path& path, bool need_backend) {
  ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("cannot read config: {}", e.what()));
  }
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");

  std::map<std::string, const ptree*> models;
  for (const auto& [name, child] : root) {
    if (child.empty() && !child.data().empty()) {
      throw ConfigError(fmt::format("key '{}' outside any section", name));
    }
    if (boost::algorithm::starts_with(name, "model.")) {
      models[name.substr(6)] = &child;
      continue;
    }
    auto it = known_keys().find(name);
    if (it == known_keys().end()) throw ConfigError(fmt::format("unknown section [{}]", name));
    for (const auto& [key, _] : child) {
      if (looks_like_secret(key)) {
        throw ConfigError(fmt::format("[{}] {}: keys are read from the environment only", name, key));
      }
      if (!it->second.count(key)) throw ConfigError(fmt::format("[{}] unknown key '{}'", name, key));
    }
  }
  auto section = [&](const std::string& name) {
    auto it = root.find(name);
    return Section(name, it == root.not_found() ? nullptr : &it->second);
  };

  RunConfig rc;
  rc.source = path;
  rc.accel = read_accelerator(section("accelerator"), section("timing"));
  rc.workload = read_workload(section("workload"), rc.accel);
  if (section("workload").has("start")) {
    rc.start_kernel = resolve(base, section("workload").str("start", ""));
    require_file(rc.start_kernel, "start kernel");
  }
  read_search(section("search"), rc.search);

  auto reuse = section("reuse");
  rc.reuse.B = reuse.num("B", rc.reuse.B);
  rc.reuse.N = reuse.num("N", rc.reuse.N);
  rc.reuse.K = reuse.num("K", rc.reuse.K);
  rc.refine = reuse.num("refine", 0);
  if (rc.reuse.B < 1 || rc.reuse.N < 1 || rc.reuse.K < 1 || rc.refine < 0) {
    throw ConfigError("[reuse] B, N and K must be at least 1 and refine at least 0");
  }

  auto backend = section("backend");
  const std::string mode = backend.str("mode", "");
  if (mode == "scripted") {
    if (backend.has("models") || !models.empty()) {
      throw ConfigError("[backend] scripted mode takes a manifest and no models");
    }
    if (!backend.has("manifest")) throw ConfigError("[backend] scripted mode needs a manifest");
    rc.manifest = resolve(base, backend.str("manifest", ""));
    require_file(*rc.manifest, "script manifest");
  } else if (mode == "live") {
    if (backend.has("manifest")) throw ConfigError("[backend] live mode takes models and no manifest");
    std::vector<std::string> names;
    boost::algorithm::split(names, backend.str("models", ""), boost::is_any_of(", "), boost::token_compress_on);
    names.erase(std::remove(names.begin(), names.end(), ""), names.end());
    if (names.empty()) throw ConfigError("[backend] live mode needs models = <name>[, <name>...]");
    for (const auto& n : names) {
      auto it = models.find(n);
      if (it == models.end()) throw ConfigError(fmt::format("[backend] no [model.{}] section", n));
      rc.search.models.push_back(read_model(n, *it->second));
    }
    for (const auto& [n, _] : models) {
      if (std::find(names.begin(), names.end(), n) == names.end()) {
        throw ConfigError(fmt::format("[model.{}] is not listed in [backend] models", n));
      }
    }
  } else if (!mode.empty()) {
    throw ConfigError(fmt::format("[backend] mode: expected scripted or live, got '{}'", mode));
  } else if (need_backend) {
    throw ConfigError("[backend] mode is required (scripted or live)");
  }

  rc.output_dir = resolve(base, section("output").str("dir", "out"));
  if (need_backend) {
    if (rc.start_kernel.empty()) throw ConfigError("[workload] start is required");
    if (auto problem = rc.search.validate(); !problem.empty()) throw ConfigError("[search] " + problem);
  }
  return rc;
}

search::Backends make_backends(const RunConfig& rc) {
  search::Backends out;
  if (rc.manifest) {
    out.push_back(std::make_shared<llm::ScriptedBackend>(llm::load_manifest(*rc.manifest)));
    return out;
  }
  for (const auto& m : rc.search.models) out.push_back(std::make_shared<llm::HttpBackend>(m));
  return out;
}

}  // namespace tensopt::cli
