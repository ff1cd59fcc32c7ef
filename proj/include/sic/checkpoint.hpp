#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sic/algo/trajectory.hpp"
#include "sic/mlp.hpp"

namespace sic {

// Full training state as plain data. Text round-trips byte-exactly:
// serialize(parse(s)) == s for any serialize() output. Doubles are written
// with 17 significant digits, which reconstructs them bit-exactly.
//
// Pending episodes keep only what on-policy updates consume (signals,
// observations, actions, rewards, done flags); collision events and recorded
// hidden vectors are never training inputs and are not persisted.
struct Checkpoint {
  int version = 1;
  long long episode = 0;
  std::string config_text;  // canonical config snapshot, re-runnable on its own

  std::vector<std::pair<std::string, uint64_t>> rng_states;

  struct NetBlock {
    std::string name;
    MlpSpec spec;
    std::vector<Tensor> tensors;  // values only; grads are transient
  };
  std::vector<NetBlock> nets;

  struct AdamBlock {
    std::string name;
    int64_t step_count = 0;
    std::vector<double> m;
    std::vector<double> v;
  };
  std::vector<AdamBlock> adams;

  std::vector<std::pair<std::string, long long>> counters;
  std::vector<std::pair<std::string, double>> state;  // runner scalars

  struct PendingBlock {
    int team = 0;
    std::vector<Trajectory> episodes;
  };
  std::vector<PendingBlock> pending;

  bool has_replay = false;
  std::vector<Transition> replay;  // in storage order
  int replay_next = 0;
  int64_t replay_inserted = 0;
};

std::string serialize_checkpoint(const Checkpoint& ck);
Checkpoint parse_checkpoint(const std::string& text);  // CheckpointError on any defect
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);  // CheckpointError when unreadable

// Parameter movement between blocks and live networks.
Checkpoint::NetBlock snapshot_net(const std::string& name, const Mlp& net);
// Shape or spec mismatch against the live network raises CheckpointError.
void restore_net(const Checkpoint::NetBlock& block, Mlp& net);
// Fresh network built from the stored architecture and values.
Mlp instantiate_net(const Checkpoint::NetBlock& block);

}  // namespace sic
