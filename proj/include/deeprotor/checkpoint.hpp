#pragma once

#include <string>
#include <vector>

#include "deeprotor/network.hpp"

namespace deeprotor {

// Binary checkpoint container.  Layout, all integers little-endian:
//   magic "DQNAV1\n"
//   u64 metadata length, metadata bytes (key-value text)
//   u32 tensor count
//   per tensor: u32 name length, name bytes, u32 dim count, u32 dims...,
//               float32 data (product of dims elements)
struct TensorRecord {
    std::string name;
    std::vector<int> dims;
    std::vector<float> data;
};

struct CheckpointData {
    std::string metadata;
    std::vector<TensorRecord> tensors;

    const TensorRecord* find(const std::string& name) const;
    const TensorRecord& require(const std::string& name) const;
};

std::string serialize_checkpoint(const CheckpointData& data);
// Throws on magic/version mismatch or a truncated stream.
CheckpointData parse_checkpoint(const std::string& bytes);

void save_checkpoint_file(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint_file(const std::string& path);

// Single-network convenience wrappers.  The optimizer hyperparameters ride
// in an internal metadata header above a "---" separator so the float32
// tensor records never truncate them; user metadata is preserved verbatim.
std::string save_checkpoint(const QNetwork<float>& net, const AdamState<float>& opt,
                            const std::string& metadata);

struct LoadedCheckpoint {
    QNetwork<float> net;
    AdamState<float> opt;
    std::string metadata;
};
LoadedCheckpoint load_checkpoint(const std::string& bytes);

// Shared helpers for composed (multi-network) checkpoints.
void append_network_records(CheckpointData& data, const std::string& prefix, const QNetwork<float>& net,
                            const AdamState<float>& opt);
void read_network_records(const CheckpointData& data, const std::string& prefix, QNetwork<float>& net,
                          AdamState<float>& opt);
std::vector<float> encode_net_config(const NetConfig& cfg);
NetConfig decode_net_config(const std::vector<float>& enc);

}  // namespace deeprotor
