#include "ddgan/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "ddgan/error.hpp"
#include "detail/bytes.hpp"

namespace ddgan {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
}

double to_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const std::string s(v);
    const double d = std::stod(s, &used);
    if (used != s.size()) bad_value(key, v);
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v);
  }
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

int to_int(std::string_view key, std::string_view v) {
  const std::uint64_t u = to_uint(key, v);
  if (u > 1'000'000) bad_value(key, v);
  return static_cast<int>(u);
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v);
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"material.E", [](RunConfig& c, auto k, auto v) { c.material.E = to_double(k, v); }},
      {"material.nu", [](RunConfig& c, auto k, auto v) { c.material.nu = to_double(k, v); }},
      {"material.a", [](RunConfig& c, auto k, auto v) { c.material.a = to_double(k, v); }},
      {"material.p", [](RunConfig& c, auto k, auto v) { c.material.p = to_double(k, v); }},
      {"data.size", [](RunConfig& c, auto k, auto v) { c.dataset_size = to_uint(k, v); }},
      {"data.std", [](RunConfig& c, auto k, auto v) { c.dataset_std = to_double(k, v); }},
      {"data.seed", [](RunConfig& c, auto k, auto v) { c.data_seed = to_uint(k, v); }},
      {"data.path", [](RunConfig& c, auto, auto v) { c.data_path = std::filesystem::path(std::string(v)); }},
      {"generator.hidden_layers", [](RunConfig& c, auto k, auto v) { c.generator.net.hidden_layers = to_int(k, v); }},
      {"generator.units", [](RunConfig& c, auto k, auto v) { c.generator.net.units = to_int(k, v); }},
      {"generator.traction_amplitude",
       [](RunConfig& c, auto k, auto v) { c.generator.traction.amplitude = to_double(k, v); }},
      {"critic.hidden_layers", [](RunConfig& c, auto k, auto v) { c.critic.net.hidden_layers = to_int(k, v); }},
      {"critic.units", [](RunConfig& c, auto k, auto v) { c.critic.net.units = to_int(k, v); }},
      {"critic.alpha", [](RunConfig& c, auto k, auto v) { c.critic.net.activation.alpha = to_double(k, v); }},
      {"critic.input",
       [](RunConfig& c, auto k, auto v) {
         if (v == "whitened") c.train.critic_input = CriticInput::whitened;
         else if (v == "raw") c.train.critic_input = CriticInput::raw;
         else bad_value(k, v);
       }},
      {"train.mode",
       [](RunConfig& c, auto k, auto v) {
         if (v == "wgan_gp") c.train.mode = AdversarialMode::wgan_gp;
         else if (v == "vanilla") c.train.mode = AdversarialMode::vanilla;
         else bad_value(k, v);
         c.critic.sigmoid_output = c.train.mode == AdversarialMode::vanilla;
       }},
      {"train.epochs", [](RunConfig& c, auto k, auto v) { c.train.epochs = to_uint(k, v); }},
      {"train.batch_size", [](RunConfig& c, auto k, auto v) { c.train.batch_size = to_uint(k, v); }},
      {"train.critic_steps", [](RunConfig& c, auto k, auto v) { c.train.critic_steps = to_uint(k, v); }},
      {"train.gp_weight", [](RunConfig& c, auto k, auto v) { c.train.gp_weight = to_double(k, v); }},
      {"train.seed", [](RunConfig& c, auto k, auto v) { c.train.seed = to_uint(k, v); }},
      {"train.shuffle", [](RunConfig& c, auto k, auto v) { c.train.shuffle = to_bool(k, v); }},
      {"train.beta1", [](RunConfig& c, auto k, auto v) { c.train.adam.beta1 = to_double(k, v); }},
      {"train.beta2", [](RunConfig& c, auto k, auto v) { c.train.adam.beta2 = to_double(k, v); }},
      {"train.eps", [](RunConfig& c, auto k, auto v) { c.train.adam.eps = to_double(k, v); }},
      {"train.lr_max", [](RunConfig& c, auto k, auto v) { c.train.schedule.max_lr = to_double(k, v); }},
      {"train.schedule_steps", [](RunConfig& c, auto k, auto v) { c.train.schedule.total_steps = to_uint(k, v); }},
      {"train.pct_start", [](RunConfig& c, auto k, auto v) { c.train.schedule.pct_start = to_double(k, v); }},
      {"train.div_factor", [](RunConfig& c, auto k, auto v) { c.train.schedule.div_factor = to_double(k, v); }},
      {"train.final_div_factor",
       [](RunConfig& c, auto k, auto v) { c.train.schedule.final_div_factor = to_double(k, v); }},
      {"sampling.collocation", [](RunConfig& c, auto k, auto v) { c.collocation = to_uint(k, v); }},
      {"sampling.test", [](RunConfig& c, auto k, auto v) { c.test_points = to_uint(k, v); }},
      {"sampling.test_seed", [](RunConfig& c, auto k, auto v) { c.test_seed = to_uint(k, v); }},
      {"sampling.boundary_per_edge", [](RunConfig& c, auto k, auto v) { c.boundary_per_edge = to_uint(k, v); }},
      {"sampling.dump_points", [](RunConfig& c, auto k, auto v) { c.dump_points = to_bool(k, v); }},
      {"out", [](RunConfig& c, auto, auto v) { c.out_dir = std::filesystem::path(std::string(v)); }},
      {"checkpoint", [](RunConfig& c, auto, auto v) { c.checkpoint_path = std::filesystem::path(std::string(v)); }},
  };
  return table;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  it->second(*this, key, trim(value));
}

void RunConfig::validate() const {
  try {
    material.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (dataset_size == 0) throw ConfigError("data.size must be positive");
  if (!(dataset_std > 0.0)) throw ConfigError("data.std must be positive");
  if (collocation == 0 || test_points == 0) throw ConfigError("sampling counts must be positive");
  if (generator.net.hidden_layers < 1 || generator.net.units < 1) throw ConfigError("generator size must be positive");
  if (critic.net.hidden_layers < 1 || critic.net.units < 1) throw ConfigError("critic size must be positive");
  if (critic.sigmoid_output != (train.mode == AdversarialMode::vanilla)) {
    throw ConfigError("critic output mode does not match train.mode");
  }
  if (out_dir.empty()) throw ConfigError("output directory must not be empty");
  train.validate();
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    base.set(trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  const auto text = detail::read_file(path);
  if (!text) throw ConfigError("cannot read config file " + path.string());
  return parse_config(*text, std::move(base));
}

}  // namespace ddgan
