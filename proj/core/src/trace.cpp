#include "crowdnav/trace.hpp"

#include <bit>
#include <sstream>

#include <json.hpp>

#include "crowdnav/errors.hpp"
#include "crowdnav/numio.hpp"
#include "crowdnav/sim.hpp"

namespace crowdnav {

namespace {

void append_escaped(std::string& out, const std::string& text) {
  out += '"';
  for (const char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void append_agent4(std::string& out, const std::array<double, 4>& a) {
  out += '[';
  for (int i = 0; i < 4; ++i) {
    if (i > 0) out += ',';
    out += format_json_number(a[static_cast<std::size_t>(i)]);
  }
  out += ']';
}

std::array<double, 4> agent4(const AgentState& agent) {
  return {agent.position.x, agent.position.y, agent.velocity.x,
          agent.velocity.y};
}

std::array<double, 4> read_agent4(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw TraceError("trace: agent entry must be a 4-array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

bool bits_equal(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool agents_equal(const std::array<double, 4>& a, const AgentState& b) {
  return bits_equal(a[0], b.position.x) && bits_equal(a[1], b.position.y) &&
         bits_equal(a[2], b.velocity.x) && bits_equal(a[3], b.velocity.y);
}

}  // namespace

std::string write_trace(const RunConfig& cfg, const WorldState& world0,
                        const EpisodeRecord& record) {
  std::string out;
  out.reserve(1024 + record.trace.size() * 256);

  out += "{\"format\":\"crowdnav-trace\",\"version\":";
  out += std::to_string(kTraceVersion);
  out += ",\"config_hash\":\"";
  out += config_hash(cfg);
  out += "\",\"episode_seed\":";
  out += std::to_string(world0.context.seed);
  out += ",\"n\":";
  out += std::to_string(world0.context.pedestrian_count);
  out += ",\"ego\":";
  append_escaped(out, record.method);
  out += ",\"config\":";
  append_escaped(out, serialize_config(cfg));
  out += "}\n";

  out += "{\"t\":0,\"ego\":";
  append_agent4(out, agent4(world0.ego));
  out += ",\"peds\":[";
  for (std::size_t i = 0; i < world0.pedestrians.size(); ++i) {
    if (i > 0) out += ',';
    append_agent4(out, agent4(world0.pedestrians[i]));
  }
  out += "]}\n";

  for (const auto& step : record.trace) {
    out += "{\"t\":";
    out += std::to_string(step.t);
    out += ",\"ego\":";
    append_agent4(out, {step.ego_position.x, step.ego_position.y,
                        step.ego_velocity.x, step.ego_velocity.y});
    out += ",\"action\":[";
    out += format_json_number(step.action.x);
    out += ',';
    out += format_json_number(step.action.y);
    out += "],\"peds\":[";
    for (std::size_t i = 0; i < step.pedestrians.size(); ++i) {
      if (i > 0) out += ',';
      append_agent4(out, step.pedestrians[i]);
    }
    out += "],\"collisions\":[";
    for (std::size_t i = 0; i < step.collisions.size(); ++i) {
      if (i > 0) out += ',';
      out += std::to_string(step.collisions[i]);
    }
    out += "],\"goal\":";
    out += step.reached_goal ? "true" : "false";
    out += ",\"frozen\":";
    out += step.frozen ? "true" : "false";
    out += "}\n";
  }

  out += "{\"outcome\":\"";
  out += outcome_name(record.outcome.kind);
  out += "\",\"collision_steps\":";
  out += std::to_string(record.outcome.total_collision_steps);
  out += ",\"steps_taken\":";
  out += std::to_string(record.outcome.steps_taken);
  out += ",\"final_goal_distance\":";
  out += format_json_number(record.final_goal_distance);
  out += "}\n";
  return out;
}

TraceData parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<nlohmann::json> lines;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw TraceError("trace: line " + std::to_string(lines.size() + 1) +
                       " is not valid JSON");
    }
    lines.push_back(std::move(j));
  }
  if (lines.size() < 3) throw TraceError("trace: too short");

  TraceData trace;
  const nlohmann::json& header = lines.front();
  if (header.value("format", "") != "crowdnav-trace") {
    throw TraceError("trace: missing format marker");
  }
  trace.version = header.value("version", -1);
  if (trace.version != kTraceVersion) {
    throw TraceError("trace: unsupported version " +
                     std::to_string(trace.version));
  }
  trace.config_hash = header.at("config_hash").get<std::string>();
  trace.config_text = header.at("config").get<std::string>();
  trace.episode_seed = header.at("episode_seed").get<std::uint64_t>();
  trace.n = header.at("n").get<int>();
  trace.ego_id = header.at("ego").get<std::string>();

  const nlohmann::json& initial = lines[1];
  if (initial.value("t", -1) != 0) {
    throw TraceError("trace: second line must be the t=0 state");
  }
  trace.initial_ego = read_agent4(initial.at("ego"));
  for (const auto& ped : initial.at("peds")) {
    trace.initial_pedestrians.push_back(read_agent4(ped));
  }

  for (std::size_t i = 2; i + 1 < lines.size(); ++i) {
    const nlohmann::json& j = lines[i];
    TraceStep step;
    step.t = j.at("t").get<int>();
    step.ego = read_agent4(j.at("ego"));
    step.action = {j.at("action")[0].get<double>(),
                   j.at("action")[1].get<double>()};
    for (const auto& ped : j.at("peds")) {
      step.pedestrians.push_back(read_agent4(ped));
    }
    for (const auto& c : j.at("collisions")) {
      step.collisions.push_back(c.get<int>());
    }
    step.reached_goal = j.at("goal").get<bool>();
    step.frozen = j.at("frozen").get<bool>();
    trace.steps.push_back(std::move(step));
  }

  const nlohmann::json& tail = lines.back();
  if (!tail.contains("outcome")) {
    throw TraceError("trace: missing outcome line");
  }
  trace.outcome = tail.at("outcome").get<std::string>();
  trace.collision_steps = tail.at("collision_steps").get<int>();
  trace.steps_taken = tail.at("steps_taken").get<int>();
  trace.final_goal_distance = tail.at("final_goal_distance").get<double>();
  return trace;
}

ReplayResult replay_trace(const TraceData& trace) {
  RunConfig cfg;
  try {
    apply_config_text(cfg, trace.config_text);
  } catch (const ConfigError& err) {
    return {false, -1, std::string("embedded config invalid: ") + err.what()};
  }
  if (config_hash(cfg) != trace.config_hash) {
    return {false, -1, "config hash mismatch against embedded config"};
  }

  WorldState world0 =
      sample_episode(cfg.arena, trace.n, trace.n, trace.episode_seed,
                     cfg.controller, cfg.controllers, cfg.scenario);
  if (!agents_equal(trace.initial_ego, world0.ego)) {
    return {false, 0, "initial ego state differs from reconstruction"};
  }
  if (world0.pedestrians.size() != trace.initial_pedestrians.size()) {
    return {false, 0, "initial pedestrian count differs"};
  }
  for (std::size_t i = 0; i < world0.pedestrians.size(); ++i) {
    if (!agents_equal(trace.initial_pedestrians[i], world0.pedestrians[i])) {
      return {false, 0,
              "initial pedestrian " + std::to_string(i) + " differs"};
    }
  }

  Engine engine(std::move(world0), cfg.arena, cfg.scenario, cfg.sim);
  for (const auto& step : trace.steps) {
    if (engine.finished()) {
      return {false, step.t, "trace continues past termination"};
    }
    engine.step({step.action});
    const WorldState& world = engine.world();
    if (world.step_index != step.t) {
      return {false, step.t, "step index mismatch"};
    }
    if (!agents_equal(step.ego, world.ego)) {
      return {false, step.t, "ego state diverged"};
    }
    if (world.pedestrians.size() != step.pedestrians.size()) {
      return {false, step.t, "pedestrian count diverged"};
    }
    for (std::size_t i = 0; i < world.pedestrians.size(); ++i) {
      if (!agents_equal(step.pedestrians[i], world.pedestrians[i])) {
        return {false, step.t,
                "pedestrian " + std::to_string(i) + " diverged"};
      }
    }
  }

  if (!engine.finished()) {
    return {false, trace.steps_taken, "episode did not terminate on replay"};
  }
  const Outcome& outcome = *engine.outcome();
  if (outcome_name(outcome.kind) != trace.outcome ||
      outcome.total_collision_steps != trace.collision_steps ||
      outcome.steps_taken != trace.steps_taken) {
    return {false, trace.steps_taken, "outcome diverged"};
  }
  return {true, -1, "replay verified bit-exactly"};
}

}  // namespace crowdnav
