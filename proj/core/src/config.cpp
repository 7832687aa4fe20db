#include "crowdnav/config.hpp"

#include <algorithm>
#include <sstream>

#include "crowdnav/errors.hpp"
#include "crowdnav/numio.hpp"

namespace crowdnav {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("not a boolean: '" + v + "'");
}

template <typename T, T (*Parse)(const std::string&)>
std::vector<T> parse_list(const std::string& v) {
  std::vector<T> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(Parse(item));
  }
  if (out.empty()) throw ConfigError("empty list: '" + v + "'");
  return out;
}

template <typename T>
std::string join_list(const std::vector<T>& values,
                      std::string (*format)(T)) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format(values[i]);
  }
  return out;
}

std::string format_int_value(long long v) { return std::to_string(v); }
std::string format_u64_value(std::uint64_t v) { return std::to_string(v); }

long long parse_int_value(const std::string& v) { return parse_int(v); }
std::uint64_t parse_u64_value(const std::string& v) { return parse_u64(v); }
double parse_double_value(const std::string& v) { return parse_double(v); }

int parse_int32(const std::string& v) {
  const long long x = parse_int(v);
  if (x < INT32_MIN || x > INT32_MAX) throw ConfigError("integer out of range: " + v);
  return static_cast<int>(x);
}

// Field accessor macros; each expands to the two stateless lambdas the
// registry stores as plain function pointers.
#define ENTRY_DOUBLE(KEY, PATH, DOC)                                        \
  {KEY, DOC, [](const RunConfig& c) { return format_double(c.PATH); },      \
   [](RunConfig& c, const std::string& v) { c.PATH = parse_double(v); }}

#define ENTRY_INT(KEY, PATH, DOC)                                           \
  {KEY, DOC, [](const RunConfig& c) { return std::to_string(c.PATH); },     \
   [](RunConfig& c, const std::string& v) { c.PATH = parse_int32(v); }}

#define ENTRY_I64(KEY, PATH, DOC)                                           \
  {KEY, DOC, [](const RunConfig& c) { return std::to_string(c.PATH); },     \
   [](RunConfig& c, const std::string& v) { c.PATH = parse_int(v); }}

#define ENTRY_U64(KEY, PATH, DOC)                                           \
  {KEY, DOC, [](const RunConfig& c) { return std::to_string(c.PATH); },     \
   [](RunConfig& c, const std::string& v) { c.PATH = parse_u64(v); }}

#define ENTRY_BOOL(KEY, PATH, DOC)                                          \
  {KEY, DOC,                                                                \
   [](const RunConfig& c) { return std::string(c.PATH ? "true" : "false"); }, \
   [](RunConfig& c, const std::string& v) { c.PATH = parse_bool(v); }}

#define ENTRY_STRING(KEY, PATH, DOC)                                        \
  {KEY, DOC, [](const RunConfig& c) { return c.PATH; },                     \
   [](RunConfig& c, const std::string& v) { c.PATH = v; }}

std::vector<ConfigEntry> build_entries() {
  std::vector<ConfigEntry> e = {
      ENTRY_DOUBLE("arena.width", arena.width, "arena width [m]"),
      ENTRY_DOUBLE("arena.height", arena.height, "arena height [m]"),

      ENTRY_DOUBLE("world.ego_radius", scenario.ego_radius, "ego disk radius [m]"),
      ENTRY_DOUBLE("world.ped_radius", scenario.ped_radius,
                   "pedestrian disk radius [m]"),
      ENTRY_DOUBLE("world.clearance", scenario.clearance,
                   "spawn clearance beyond touching [m]"),
      ENTRY_DOUBLE("world.min_goal_dist", scenario.min_goal_dist,
                   "minimum start-to-goal distance [m]"),
      ENTRY_INT("world.max_place_attempts", scenario.max_place_attempts,
                "rejection-sampling budget before PlacementFailure"),
      ENTRY_INT("world.horizon", scenario.horizon, "episode length [steps]"),

      ENTRY_DOUBLE("sim.dt", sim.dt, "integration step [s]"),
      ENTRY_DOUBLE("sim.v_max", sim.v_max, "ego speed cap [m/s]"),
      ENTRY_DOUBLE("sim.ped_v_max", sim.ped_v_max, "pedestrian speed cap [m/s]"),
      ENTRY_DOUBLE("sim.goal_tolerance", sim.goal_tolerance,
                   "goal-reached distance [m]"),
      ENTRY_DOUBLE("sim.freeze_speed", sim.freeze_speed,
                   "speed below which the ego counts as frozen [m/s]"),

      {"peds.controller", "pedestrian controller: orca | sfm",
       [](const RunConfig& c) {
         return std::string(c.controller == PedController::Orca ? "orca"
                                                                : "sfm");
       },
       [](RunConfig& c, const std::string& v) {
         if (v == "orca") {
           c.controller = PedController::Orca;
         } else if (v == "sfm") {
           c.controller = PedController::Sfm;
         } else {
           throw ConfigError("peds.controller must be orca or sfm, got '" + v +
                             "'");
         }
       }},

      ENTRY_DOUBLE("orca.time_horizon", controllers.orca.time_horizon,
                   "reciprocal-avoidance lookahead [s]"),
      ENTRY_DOUBLE("orca.neighbor_dist", controllers.orca.neighbor_dist,
                   "neighbor cutoff [m]"),
      ENTRY_INT("orca.max_neighbors", controllers.orca.max_neighbors,
                "constraint budget per agent"),
      ENTRY_DOUBLE("orca.max_speed", controllers.orca.max_speed,
                   "speed disk radius [m/s]"),

      ENTRY_DOUBLE("sfm.strength_a", controllers.sfm.strength_a,
                   "repulsion amplitude"),
      ENTRY_DOUBLE("sfm.range_b", controllers.sfm.range_b,
                   "repulsion decay length [m]"),
      ENTRY_DOUBLE("sfm.relaxation_time", controllers.sfm.relaxation_time,
                   "desired-velocity relaxation time [s]"),
      ENTRY_DOUBLE("sfm.desired_speed", controllers.sfm.desired_speed,
                   "desired walking speed [m/s]"),

      ENTRY_INT("encoder.k_max", encoder.k_max, "neighbor slot budget"),
      ENTRY_INT("encoder.k_cap", encoder.k_cap, "active-neighbor cap"),
      ENTRY_BOOL("encoder.use_k_cap", encoder.use_k_cap,
                 "ablation: cap active slots at k_cap"),
      ENTRY_BOOL("encoder.use_sorting", encoder.use_sorting,
                 "ablation: distance-sort neighbor slots"),
      ENTRY_DOUBLE("encoder.pos_clip", encoder.pos_clip,
                   "per-axis relative-position clip [m]"),
      ENTRY_DOUBLE("encoder.vel_clip", encoder.vel_clip,
                   "per-axis relative-velocity clip [m/s]"),
      ENTRY_INT("encoder.j_nearest", encoder.j_nearest,
                "number of inverse nearest distances"),
      {"encoder.occupancy_radii", "occupancy radii [m], increasing",
       [](const RunConfig& c) {
         return join_list<double>(c.encoder.occupancy_radii, format_double);
       },
       [](RunConfig& c, const std::string& v) {
         c.encoder.occupancy_radii = parse_list<double, parse_double_value>(v);
       }},
      ENTRY_DOUBLE("encoder.velocity_radius", encoder.velocity_radius,
                   "neighborhood for the mean relative velocity [m]"),
      ENTRY_DOUBLE("encoder.social_eps", encoder.social_eps,
                   "epsilon guarding divisions"),
      ENTRY_DOUBLE("encoder.sigma_press", encoder.sigma_press,
                   "crowd-pressure kernel length [m]"),
      ENTRY_DOUBLE("encoder.pressure_clip", encoder.pressure_clip,
                   "crowd-pressure clip"),
      ENTRY_DOUBLE("encoder.inv_dist_clip", encoder.inv_dist_clip,
                   "inverse-distance clip"),
      ENTRY_DOUBLE("encoder.occupancy_clip", encoder.occupancy_clip,
                   "occupancy / active-fraction clip"),

      ENTRY_DOUBLE("normalizer.clip", normalizer_clip,
                   "normalized observation clip"),
      ENTRY_DOUBLE("normalizer.eps", normalizer_eps,
                   "variance floor inside the normalizer"),

      {"shaping.mode", "reward shaping: none | pss_only | pss_social",
       [](const RunConfig& c) {
         return std::string(shaping_mode_name(c.shaping.mode));
       },
       [](RunConfig& c, const std::string& v) {
         if (v == "none") {
           c.shaping.mode = ShapingMode::None;
         } else if (v == "pss_only") {
           c.shaping.mode = ShapingMode::PssOnly;
         } else if (v == "pss_social") {
           c.shaping.mode = ShapingMode::PssSocial;
         } else {
           throw ConfigError(
               "shaping.mode must be none, pss_only or pss_social, got '" + v +
               "'");
         }
       }},
      ENTRY_DOUBLE("shaping.d_intimate", shaping.d_intimate,
                   "intimate-zone threshold [m]"),
      ENTRY_DOUBLE("shaping.d_personal", shaping.d_personal,
                   "personal-zone threshold [m]"),
      ENTRY_DOUBLE("shaping.k_rep", shaping.k_rep, "intimate penalty scale"),
      ENTRY_DOUBLE("shaping.sigma_intimate", shaping.sigma_intimate,
                   "intimate penalty decay length [m]"),
      ENTRY_DOUBLE("shaping.exp_clip", shaping.exp_clip,
                   "clip on the intimate exponent"),
      ENTRY_DOUBLE("shaping.kappa_personal", shaping.kappa_personal,
                   "personal penalty slope [1/m]"),
      ENTRY_DOUBLE("shaping.w_goal", shaping.w_goal, "goal-distance weight"),
      ENTRY_DOUBLE("shaping.w_intimate", shaping.w_intimate,
                   "intimate cost weight"),
      ENTRY_DOUBLE("shaping.w_personal", shaping.w_personal,
                   "personal cost weight"),
      ENTRY_DOUBLE("shaping.social_radius", shaping.social_radius,
                   "density-scaling neighborhood radius [m]"),
      ENTRY_DOUBLE("shaping.gamma", shaping.gamma, "discount factor"),
      ENTRY_DOUBLE("shaping.beta0", shaping.beta0, "shaping weight at step 0"),
      ENTRY_DOUBLE("shaping.beta_final", shaping.beta_final,
                   "shaping weight after the anneal"),
      ENTRY_I64("shaping.anneal_steps", shaping.anneal_steps,
                "linear anneal horizon [env steps]"),

      ENTRY_DOUBLE("extrinsic.goal_reward", extrinsic.goal_reward,
                   "reward on reaching the goal"),
      ENTRY_DOUBLE("extrinsic.collision_penalty", extrinsic.collision_penalty,
                   "per-contact penalty (negative)"),
      ENTRY_DOUBLE("extrinsic.step_penalty", extrinsic.step_penalty,
                   "per-step penalty (<= 0)"),
      ENTRY_DOUBLE("extrinsic.progress_weight", extrinsic.progress_weight,
                   "reward per meter of goal progress"),

      ENTRY_INT("train.n_min", train.n_min, "training crowd-size minimum"),
      ENTRY_INT("train.n_max", train.n_max, "training crowd-size maximum"),
      ENTRY_I64("train.total_steps", train.total_steps,
                "total env steps across all envs"),
      ENTRY_INT("train.n_envs", train.n_envs, "parallel environments"),
      ENTRY_INT("train.rollout_len", train.rollout_len,
                "steps per env per update"),
      ENTRY_INT("train.epochs", train.ppo.epochs, "epochs per update"),
      ENTRY_INT("train.minibatch_size", train.ppo.minibatch_size,
                "minibatch size"),
      ENTRY_DOUBLE("train.lr", train.ppo.lr, "Adam learning rate"),
      ENTRY_DOUBLE("train.clip_eps", train.ppo.clip_eps,
                   "surrogate clip range"),
      ENTRY_DOUBLE("train.gae_lambda", train.ppo.gae_lambda, "GAE lambda"),
      ENTRY_DOUBLE("train.value_coef", train.ppo.value_coef,
                   "value loss coefficient"),
      ENTRY_DOUBLE("train.entropy_coef", train.ppo.entropy_coef,
                   "entropy bonus coefficient"),
      ENTRY_DOUBLE("train.max_grad_norm", train.ppo.max_grad_norm,
                   "global gradient-norm clip"),
      ENTRY_INT("train.hidden", train.hidden, "hidden units per layer"),
      ENTRY_DOUBLE("train.init_log_std", train.init_log_std,
                   "initial action log-std"),
      ENTRY_U64("train.seed", train.seed, "master training seed"),
      ENTRY_I64("train.checkpoint_interval", train.checkpoint_interval,
                "env steps between checkpoints"),

      {"sweep.densities", "pedestrian counts to evaluate",
       [](const RunConfig& c) {
         std::vector<long long> wide(c.sweep.densities.begin(),
                                     c.sweep.densities.end());
         return join_list<long long>(wide, format_int_value);
       },
       [](RunConfig& c, const std::string& v) {
         const auto wide = parse_list<long long, parse_int_value>(v);
         c.sweep.densities.assign(wide.begin(), wide.end());
       }},
      {"sweep.seeds", "evaluation seeds",
       [](const RunConfig& c) {
         return join_list<std::uint64_t>(c.sweep.seeds, format_u64_value);
       },
       [](RunConfig& c, const std::string& v) {
         c.sweep.seeds = parse_list<std::uint64_t, parse_u64_value>(v);
       }},
      ENTRY_INT("sweep.episodes_per_seed", sweep.episodes_per_seed,
                "episodes per (N, seed) condition"),

      ENTRY_INT("run.n", run.n, "pedestrian count for `run`"),
      ENTRY_U64("run.seed", run.seed, "episode seed for `run`"),
      ENTRY_STRING("run.ego", run.ego,
                   "ego policy: orca | sfm | random | <checkpoint path>"),

      ENTRY_STRING("io.out_dir", out_dir, "output directory"),
  };
  return e;
}

#undef ENTRY_DOUBLE
#undef ENTRY_INT
#undef ENTRY_I64
#undef ENTRY_U64
#undef ENTRY_BOOL
#undef ENTRY_STRING

}  // namespace

const std::vector<ConfigEntry>& config_entries() {
  static const std::vector<ConfigEntry> entries = build_entries();
  return entries;
}

namespace {

const ConfigEntry& find_entry(const std::string& key) {
  for (const auto& entry : config_entries()) {
    if (entry.key == key) return entry;
  }
  throw ConfigError("unknown config key: '" + key + "'");
}

void apply_line(RunConfig& cfg, const std::string& raw, int line_no) {
  std::string line = raw;
  const auto hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  line = trim(line);
  if (line.empty()) return;
  const auto eq = line.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("line " + std::to_string(line_no) +
                      ": expected 'key = value', got '" + trim(raw) + "'");
  }
  const std::string key = trim(line.substr(0, eq));
  const std::string value = trim(line.substr(eq + 1));
  const ConfigEntry& entry = find_entry(key);
  try {
    entry.setter(cfg, value);
  } catch (const ConfigError& err) {
    throw ConfigError("key '" + key + "': " + err.what());
  }
}

}  // namespace

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    apply_line(cfg, line, ++line_no);
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  apply_config_text(cfg, read_file(path));
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  find_entry(key).setter(cfg, value);
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& entry : config_entries()) {
    out += entry.key;
    out += " = ";
    out += entry.getter(cfg);
    out += '\n';
  }
  return out;
}

std::string serialize_config_documented(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& entry : config_entries()) {
    const std::string prefix = entry.key.substr(0, entry.key.find('.'));
    if (prefix != section) {
      if (!out.empty()) out += '\n';
      section = prefix;
    }
    out += "# " + entry.doc + "\n";
    out += entry.key + " = " + entry.getter(cfg) + "\n";
  }
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  return fnv1a_hex(serialize_config(cfg));
}

TrainConfig RunConfig::to_train_config(int n_threads) const {
  TrainConfig t;
  t.arena = arena;
  t.scenario = scenario;
  t.sim = sim;
  t.controller = controller;
  t.controller_params = controllers;
  t.encoder = encoder;
  t.shaping = shaping;
  t.extrinsic = extrinsic;
  t.n_min = train.n_min;
  t.n_max = train.n_max;
  t.total_steps = train.total_steps;
  t.n_envs = train.n_envs;
  t.rollout_len = train.rollout_len;
  t.ppo = train.ppo;
  t.hidden = train.hidden;
  t.init_log_std = train.init_log_std;
  t.seed = train.seed;
  t.checkpoint_interval = train.checkpoint_interval;
  t.normalizer_clip = normalizer_clip;
  t.normalizer_eps = normalizer_eps;
  t.n_threads = n_threads;
  return t;
}

}  // namespace crowdnav
