#include "flb/scenario.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string_view>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "flb/errors.hpp"

namespace flb {
namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& what) const {
    throw ParseError(source_, mark.line + 1, mark.column + 1, what);
  }
  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    fail(node.Mark(), what);
  }

  void expect_map(const YAML::Node& node, std::string_view what) const {
    if (!node.IsMap()) fail(node, fmt::format("{} must be a mapping", what));
  }

  void allow_keys(const YAML::Node& map, std::initializer_list<std::string_view> keys,
                  std::string_view what) const {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (auto k : keys) known = known || k == key;
      if (!known) fail(kv.first, fmt::format("unknown key '{}' in {}", key, what));
    }
  }

  YAML::Node child(const YAML::Node& map, const char* key) const {
    const YAML::Node node = map[key];
    if (!node) fail(map, fmt::format("missing key '{}'", key));
    return node;
  }

  std::string_view scalar(const YAML::Node& node, std::string_view what) const {
    if (!node.IsScalar()) fail(node, fmt::format("{} must be a scalar", what));
    return node.Scalar();
  }

  double number(const YAML::Node& node, std::string_view what) const {
    const auto text = scalar(node, what);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value))
      fail(node, fmt::format("{}: '{}' is not a finite number", what, text));
    return value;
  }

  template <typename Int>
  Int integer(const YAML::Node& node, std::string_view what) const {
    const auto text = scalar(node, what);
    Int value{};
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size())
      fail(node, fmt::format("{}: '{}' is not an integer", what, text));
    return value;
  }

  double number(const YAML::Node& map, const char* key, double fallback) const {
    const YAML::Node node = map[key];
    return node ? number(node, key) : fallback;
  }

  std::vector<double> numbers(const YAML::Node& node, std::string_view what) const {
    if (!node.IsSequence()) fail(node, fmt::format("{} must be a list", what));
    std::vector<double> out;
    for (const auto& item : node) out.push_back(number(item, what));
    return out;
  }

  std::vector<std::size_t> indices(const YAML::Node& node, std::string_view what) const {
    if (!node.IsSequence()) fail(node, fmt::format("{} must be a list", what));
    std::vector<std::size_t> out;
    for (const auto& item : node) out.push_back(integer<std::size_t>(item, what));
    return out;
  }

  ChainSource chain_source(const YAML::Node& map, std::string_view what) const {
    const YAML::Node transition = map["transition"];
    const YAML::Node trace = map["trace"];
    if (static_cast<bool>(transition) == static_cast<bool>(trace))
      fail(map, fmt::format("{} needs exactly one of 'transition' or 'trace'", what));
    ChainSource src;
    if (transition) {
      if (!transition.IsSequence() || transition.size() == 0)
        fail(transition, "transition must be a non-empty list of rows");
      for (const auto& row : transition) src.transition.push_back(numbers(row, "transition row"));
    } else {
      src.trace = indices(trace, "trace");
    }
    return src;
  }

  template <typename Enum>
  Enum choice(const YAML::Node& node, std::string_view what,
              std::initializer_list<std::pair<std::string_view, Enum>> options) const {
    const auto text = scalar(node, what);
    for (const auto& [name, value] : options)
      if (name == text) return value;
    fail(node, fmt::format("{}: unknown value '{}'", what, text));
  }

 private:
  std::string source_;
};

MoContract read_contract(const Reader& r, const YAML::Node& node) {
  r.expect_map(node, "contract");
  r.allow_keys(node,
               {"epsilon", "zeta", "global_sessions", "t_train", "t_comm", "substitutability",
                "bandwidth", "model_bits", "noise_power", "ber", "coherence_time"},
               "contract");
  MoContract c;
  c.epsilon = r.number(node, "epsilon", c.epsilon);
  c.zeta = r.number(node, "zeta", c.zeta);
  c.global_sessions = r.integer<std::size_t>(r.child(node, "global_sessions"), "global_sessions");
  c.t_train = r.number(node, "t_train", c.t_train);
  c.t_comm = r.number(node, "t_comm", c.t_comm);
  c.substitutability = r.number(node, "substitutability", c.substitutability);
  c.bandwidth = r.number(node, "bandwidth", c.bandwidth);
  c.model_bits = r.number(node, "model_bits", c.model_bits);
  c.noise_power = r.number(node, "noise_power", c.noise_power);
  c.ber = r.number(node, "ber", c.ber);
  c.coherence_time = r.number(node, "coherence_time", c.coherence_time);
  return c;
}

void read_solver(const Reader& r, const YAML::Node& node, Scenario& s) {
  r.expect_map(node, "solver");
  r.allow_keys(node,
               {"xi", "max_iterations", "mo_mode", "initial_pricing", "initial_prices",
                "session_update", "energy_iterations", "ilps_markup"},
               "solver");
  auto& cfg = s.solver;
  cfg.xi = r.number(node, "xi", cfg.xi);
  if (node["max_iterations"])
    cfg.max_iterations = r.integer<std::size_t>(node["max_iterations"], "max_iterations");
  if (node["mo_mode"])
    cfg.mode = r.choice<game::MoMode>(node["mo_mode"], "mo_mode",
                                      {{"printed", game::MoMode::printed},
                                       {"derived", game::MoMode::derived}});
  if (node["initial_pricing"])
    cfg.initial_pricing = r.choice<solver::InitialPricing>(
        node["initial_pricing"], "initial_pricing",
        {{"break_even", solver::InitialPricing::break_even},
         {"zeros", solver::InitialPricing::zeros},
         {"explicit", solver::InitialPricing::explicit_values}});
  if (const YAML::Node prices = node["initial_prices"]) {
    r.expect_map(prices, "initial_prices");
    for (const auto& kv : prices)
      cfg.initial_prices[r.integer<int>(kv.first, "UE id")] =
          r.numbers(kv.second, "initial prices");
  }
  if (node["session_update"])
    cfg.session_update = r.choice<solver::SessionUpdate>(
        node["session_update"], "session_update",
        {{"aggregate", solver::SessionUpdate::aggregate},
         {"sequential", solver::SessionUpdate::sequential}});
  if (node["energy_iterations"])
    cfg.energy_iterations = r.choice<IterationModel>(
        node["energy_iterations"], "energy_iterations",
        {{"taylor", IterationModel::taylor}, {"exact", IterationModel::exact}});
  s.ilps_markup = r.number(node, "ilps_markup", s.ilps_markup);
}

ChannelSpec read_channel(const Reader& r, const YAML::Node& node) {
  r.expect_map(node, "channel");
  r.allow_keys(node,
               {"gain_min", "gain_max", "states", "observation_slots", "initial_distribution",
                "transition", "trace"},
               "channel");
  ChannelSpec ch;
  ch.gain_min = r.number(r.child(node, "gain_min"), "gain_min");
  ch.gain_max = r.number(r.child(node, "gain_max"), "gain_max");
  ch.states = r.integer<std::size_t>(r.child(node, "states"), "states");
  if (node["observation_slots"])
    ch.observation_slots =
        r.integer<std::size_t>(node["observation_slots"], "observation_slots");
  if (const YAML::Node init = node["initial_distribution"]) {
    if (init.IsScalar()) {
      if (init.Scalar() != "uniform") r.fail(init, "initial_distribution must be 'uniform' or a list");
    } else {
      ch.initial_distribution = r.numbers(init, "initial_distribution");
    }
  }
  ch.source = r.chain_source(node, "channel");
  return ch;
}

UeSpec read_ue(const Reader& r, const YAML::Node& node) {
  r.expect_map(node, "UE entry");
  r.allow_keys(node,
               {"id", "nu", "cycles_per_sample", "dataset_size", "eta", "f_max", "load_max",
                "load_states", "initial_load_state", "transition", "trace"},
               "UE entry");
  UeSpec ue;
  ue.id = r.integer<int>(r.child(node, "id"), "id");
  ue.nu = r.number(r.child(node, "nu"), "nu");
  ue.cycles_per_sample = r.number(r.child(node, "cycles_per_sample"), "cycles_per_sample");
  ue.dataset_size = r.number(r.child(node, "dataset_size"), "dataset_size");
  ue.eta = r.number(node, "eta", ue.eta);
  ue.f_max = r.number(r.child(node, "f_max"), "f_max");
  ue.load_max = node["load_max"] ? r.number(node["load_max"], "load_max") : ue.f_max;
  ue.load_states = r.integer<std::size_t>(r.child(node, "load_states"), "load_states");
  if (node["initial_load_state"])
    ue.initial_load_state =
        r.integer<std::size_t>(node["initial_load_state"], "initial_load_state");
  ue.source = r.chain_source(node, fmt::format("UE {}", ue.id));
  return ue;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != m)
      throw ValidationError(fmt::format("row {} has {} entries, expected {}", i, row.size(), m));
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = row[static_cast<std::size_t>(j)];
  }
  return out;
}

markov::MarkovChain build_chain(const markov::StateSpace& space, const ChainSource& src,
                                double window) {
  if (!src.from_trace()) return markov::MarkovChain(space, to_matrix(src.transition));
  for (std::size_t i = 0; i < src.trace.size(); ++i)
    if (src.trace[i] >= space.count())
      throw ValidationError(fmt::format("trace slot {} holds state {}, only {} states exist", i,
                                        src.trace[i], space.count()));
  try {
    return markov::estimate_stp(space, {src.trace, window});
  } catch (const InsufficientData& e) {
    throw ValidationError(e.what());
  }
}

template <typename Fn>
auto with_context(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", where, e.what()));
  } catch (const InvalidArgument& e) {
    throw ValidationError(fmt::format("{}: {}", where, e.what()));
  }
}

std::string num(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string list(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + num(xs[i]);
  return out + "]";
}

std::string list(const std::vector<std::size_t>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + std::to_string(xs[i]);
  return out + "]";
}

void render_source(std::ostringstream& out, const ChainSource& src, const char* indent) {
  if (src.from_trace()) {
    out << indent << "trace: " << list(src.trace) << "\n";
    return;
  }
  out << indent << "transition:\n";
  for (const auto& row : src.transition) out << indent << "  - " << list(row) << "\n";
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    r.fail(e.mark, e.msg);
  }
  if (!root.IsMap()) throw ParseError(source, 1, 1, "scenario must be a mapping");

  Scenario s;
  try {
    r.allow_keys(root, {"name", "contract", "solver", "channel", "ues"}, "scenario");
    if (root["name"]) s.name = std::string(r.scalar(root["name"], "name"));
    s.contract = read_contract(r, r.child(root, "contract"));
    if (root["solver"]) read_solver(r, root["solver"], s);
    s.channel = read_channel(r, r.child(root, "channel"));
    const YAML::Node ues = r.child(root, "ues");
    if (!ues.IsSequence()) r.fail(ues, "ues must be a list");
    for (const auto& item : ues) s.ues.push_back(read_ue(r, item));
  } catch (const YAML::Exception& e) {
    r.fail(e.mark, e.msg);
  }
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read scenario file '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.string());
}

void validate_scenario(const Scenario& s) {
  with_context("contract", [&] { s.contract.validate(); return 0; });
  try {
    s.solver.validate();
  } catch (const ConfigError& e) {
    throw ValidationError(fmt::format("solver: {}", e.what()));
  }
  if (!(s.ilps_markup >= 0.0))
    throw ValidationError(fmt::format("solver: ilps_markup {} must be >= 0", s.ilps_markup));
  if (s.channel.observation_slots < 2)
    throw ValidationError("channel: observation_slots must be >= 2");
  with_context("channel", [&] {
    channel_chain(s.channel);
    return channel_initial(s.channel);
  });
  std::set<int> ids;
  for (const auto& ue : s.ues) {
    if (!ids.insert(ue.id).second) throw ValidationError(fmt::format("duplicate UE id {}", ue.id));
    if (!(ue.load_max > 0.0 && ue.load_max <= ue.f_max))
      throw ValidationError(
          fmt::format("UE {}: load_max {} must lie in (0, f_max]", ue.id, ue.load_max));
    const auto profile = with_context(fmt::format("UE {} load chain", ue.id),
                                      [&] { return ue_profile(ue, s.channel); });
    profile.validate();
  }
}

markov::MarkovChain channel_chain(const ChannelSpec& channel) {
  const auto space =
      markov::discretize(markov::StateKind::gain, channel.gain_min, channel.gain_max,
                         channel.states);
  return build_chain(space, channel.source, static_cast<double>(channel.observation_slots));
}

markov::Distribution channel_initial(const ChannelSpec& channel) {
  if (channel.initial_distribution.empty()) return markov::Distribution::uniform(channel.states);
  if (channel.initial_distribution.size() != channel.states)
    throw ValidationError(fmt::format("initial distribution has {} entries, expected {}",
                                      channel.initial_distribution.size(), channel.states));
  return markov::Distribution(Eigen::Map<const Eigen::RowVectorXd>(
      channel.initial_distribution.data(),
      static_cast<Eigen::Index>(channel.initial_distribution.size())));
}

UeProfile ue_profile(const UeSpec& ue, const ChannelSpec& channel) {
  const auto space = markov::discretize(markov::StateKind::load, 0.0, ue.load_max, ue.load_states);
  return UeProfile{.id = ue.id,
                   .nu = ue.nu,
                   .cycles_per_sample = ue.cycles_per_sample,
                   .dataset_size = ue.dataset_size,
                   .eta = ue.eta,
                   .f_max = ue.f_max,
                   .load_chain = build_chain(space, ue.source,
                                             static_cast<double>(channel.observation_slots)),
                   .initial_load_state = ue.initial_load_state};
}

std::vector<solver::GameUe> prepare_game(const Scenario& scenario) {
  const auto chain = channel_chain(scenario.channel);
  const auto initial = channel_initial(scenario.channel);
  std::vector<solver::GameUe> out;
  out.reserve(scenario.ues.size());
  for (const auto& spec : scenario.ues) {
    auto profile = ue_profile(spec, scenario.channel);
    auto forecast = forecast_sessions(profile, scenario.contract, chain, initial);
    out.push_back({std::move(profile), std::move(forecast)});
  }
  return out;
}

std::string render_scenario(const Scenario& s) {
  std::ostringstream out;
  YAML::Emitter name;
  name << YAML::DoubleQuoted << s.name;
  out << "name: " << name.c_str() << "\n";

  const auto& c = s.contract;
  out << "contract:\n"
      << "  epsilon: " << num(c.epsilon) << "\n"
      << "  zeta: " << num(c.zeta) << "\n"
      << "  global_sessions: " << c.global_sessions << "\n"
      << "  t_train: " << num(c.t_train) << "\n"
      << "  t_comm: " << num(c.t_comm) << "\n"
      << "  substitutability: " << num(c.substitutability) << "\n"
      << "  bandwidth: " << num(c.bandwidth) << "\n"
      << "  model_bits: " << num(c.model_bits) << "\n"
      << "  noise_power: " << num(c.noise_power) << "\n"
      << "  ber: " << num(c.ber) << "\n"
      << "  coherence_time: " << num(c.coherence_time) << "\n";

  const auto& cfg = s.solver;
  out << "solver:\n"
      << "  xi: " << num(cfg.xi) << "\n"
      << "  max_iterations: " << cfg.max_iterations << "\n"
      << "  mo_mode: " << game::to_string(cfg.mode) << "\n"
      << "  initial_pricing: " << solver::to_string(cfg.initial_pricing) << "\n";
  if (!cfg.initial_prices.empty()) {
    out << "  initial_prices:\n";
    for (const auto& [id, prices] : cfg.initial_prices)
      out << "    " << id << ": " << list(prices) << "\n";
  }
  out << "  session_update: " << solver::to_string(cfg.session_update) << "\n"
      << "  energy_iterations: "
      << (cfg.energy_iterations == IterationModel::taylor ? "taylor" : "exact") << "\n"
      << "  ilps_markup: " << num(s.ilps_markup) << "\n";

  const auto& ch = s.channel;
  out << "channel:\n"
      << "  gain_min: " << num(ch.gain_min) << "\n"
      << "  gain_max: " << num(ch.gain_max) << "\n"
      << "  states: " << ch.states << "\n"
      << "  observation_slots: " << ch.observation_slots << "\n"
      << "  initial_distribution: "
      << (ch.initial_distribution.empty() ? std::string("uniform")
                                          : list(ch.initial_distribution))
      << "\n";
  render_source(out, ch.source, "  ");

  out << "ues:" << (s.ues.empty() ? " []\n" : "\n");
  for (const auto& ue : s.ues) {
    out << "  - id: " << ue.id << "\n"
        << "    nu: " << num(ue.nu) << "\n"
        << "    cycles_per_sample: " << num(ue.cycles_per_sample) << "\n"
        << "    dataset_size: " << num(ue.dataset_size) << "\n"
        << "    eta: " << num(ue.eta) << "\n"
        << "    f_max: " << num(ue.f_max) << "\n"
        << "    load_max: " << num(ue.load_max) << "\n"
        << "    load_states: " << ue.load_states << "\n"
        << "    initial_load_state: " << ue.initial_load_state << "\n";
    render_source(out, ue.source, "    ");
  }
  return out.str();
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write scenario file '{}'", path.string()));
  out << render_scenario(scenario);
  if (!out) throw IoError(fmt::format("failed writing scenario file '{}'", path.string()));
}

}  // namespace flb
