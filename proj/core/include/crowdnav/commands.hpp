#pragma once

#include <string>

#include "crowdnav/config.hpp"

namespace crowdnav {

// Worker cap for parallel episode execution: CROWDNAV_THREADS when set,
// otherwise the hardware concurrency (at least 1).
int worker_thread_count();

// Exit codes: 0 success, 1 runtime failure, 2 config error. The command
// functions throw (ConfigError for exit 2); run_command translates.
int run_command(int (*command)(const RunConfig&, const std::string&),
                const RunConfig& cfg, const std::string& arg);

// Runs one episode with cfg.run.{n, seed, ego}; writes the trace to
// `out_path` (default <out_dir>/trace.jsonl when empty) and prints a one-line
// outcome summary.
int cmd_run(const RunConfig& cfg, const std::string& out_path);

// Trains per cfg.train, writing checkpoints and the training-log CSV under
// cfg.out_dir. `resume_path` continues from a checkpoint whose config
// snapshot must match the current one.
int cmd_train(const RunConfig& cfg, const std::string& resume_path);

// Density sweep for the given ego spec (orca | sfm | random | checkpoint
// path); writes raw and summary CSVs under cfg.out_dir.
int cmd_sweep(const RunConfig& cfg, const std::string& ego_spec);

// Verifies a trace file byte-for-byte against recomputation.
int cmd_replay(const RunConfig& cfg, const std::string& trace_path);

}  // namespace crowdnav
