#include "crowdnav/checkpoint.hpp"

#include <json.hpp>

#include "crowdnav/errors.hpp"
#include "crowdnav/numio.hpp"

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

void append_array(std::string& out, const std::vector<double>& values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_json_number(values[i]);
  }
  out += ']';
}

std::vector<double> read_array(const nlohmann::json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

}  // namespace

std::string write_checkpoint_text(const Checkpoint& ckpt) {
  std::string out;
  out += "{\"format\":\"crowdnav-checkpoint\",\"version\":";
  out += std::to_string(kCheckpointVersion);
  out += ",\"step\":";
  out += std::to_string(ckpt.step);
  out += ",\"obs_dim\":";
  out += std::to_string(ckpt.params.obs_dim);
  out += ",\"hidden\":";
  out += std::to_string(ckpt.params.hidden);
  out += ",\"config\":";
  append_escaped(out, ckpt.config_text);
  out += ",\"tensors\":{";
  bool first = true;
  for (const auto& [name, tensor] : ckpt.params.tensors()) {
    if (!first) out += ',';
    first = false;
    out += '"';
    out += name;
    out += "\":";
    append_array(out, *tensor);
  }
  out += "},\"normalizer\":{\"count\":";
  out += format_json_number(ckpt.normalizer.count());
  out += ",\"clip\":";
  out += format_json_number(ckpt.normalizer.clip_bound());
  out += ",\"eps\":";
  out += format_json_number(ckpt.normalizer.epsilon());
  out += ",\"mean\":";
  append_array(out, ckpt.normalizer.mean());
  out += ",\"m2\":";
  append_array(out, ckpt.normalizer.m2());
  out += "}}\n";
  return out;
}

Checkpoint parse_checkpoint_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw TraceError("checkpoint: not valid JSON");
  if (j.value("format", "") != "crowdnav-checkpoint") {
    throw TraceError("checkpoint: missing format marker");
  }
  if (j.value("version", -1) != kCheckpointVersion) {
    throw TraceError("checkpoint: unsupported version " +
                     std::to_string(j.value("version", -1)));
  }

  Checkpoint ckpt;
  ckpt.step = j.at("step").get<long long>();
  ckpt.config_text = j.at("config").get<std::string>();
  ckpt.params.obs_dim = j.at("obs_dim").get<int>();
  ckpt.params.hidden = j.at("hidden").get<int>();

  const nlohmann::json& tensors = j.at("tensors");
  for (auto& [name, tensor] : ckpt.params.tensors()) {
    if (!tensors.contains(name)) {
      throw TraceError("checkpoint: missing tensor '" + name + "'");
    }
    *tensor = read_array(tensors.at(name));
  }
  const int h = ckpt.params.hidden;
  const int d = ckpt.params.obs_dim;
  if (static_cast<int>(ckpt.params.w1.size()) != h * d ||
      static_cast<int>(ckpt.params.w2.size()) != h * h ||
      static_cast<int>(ckpt.params.w_mu.size()) != 2 * h ||
      static_cast<int>(ckpt.params.w_v.size()) != h ||
      ckpt.params.log_std.size() != 2) {
    throw TraceError("checkpoint: tensor shapes inconsistent with dims");
  }

  const nlohmann::json& norm = j.at("normalizer");
  ckpt.normalizer = RunningNormalizer::restore(
      norm.at("count").get<double>(), read_array(norm.at("mean")),
      read_array(norm.at("m2")), norm.at("clip").get<double>(),
      norm.at("eps").get<double>());
  if (ckpt.normalizer.dim() != d) {
    throw TraceError("checkpoint: normalizer dimension mismatch");
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_file_atomic(path, write_checkpoint_text(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint_text(read_file(path));
}

}  // namespace crowdnav
