#pragma once

#include <filesystem>

#include "json.hpp"

#include "tumorkit/nn/adam.hpp"
#include "tumorkit/nn/config.hpp"
#include "tumorkit/nn/network.hpp"

namespace tumorkit::nn {

nlohmann::json to_json(const NetworkConfig& cfg);
NetworkConfig network_config_from_json(const nlohmann::json& j);

// Checkpoint container (JSON, UTF-8):
//   {
//     "format": "tumorkit-checkpoint", "version": 1,
//     "network": <NetworkConfig>,
//     "parameters": [{"name", "shape", "data"}...],   // Network::params() order
//     "buffers":    [{"name", "shape", "data"}...],   // batch-norm running stats
//     "optimizer":  {"learning_rate", "beta1", "beta2", "epsilon", "step_count",
//                    "first_moment": [...], "second_moment": [...]}
//   }
// Doubles are written in shortest round-trip form, so save/load is bit-exact.
void save_checkpoint(const std::filesystem::path& path, Network& net, const AdamState& optimizer);

struct Checkpoint {
  NetworkConfig config;
  nlohmann::json payload;
};
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Copies parameters and buffers into `net`; throws ShapeError if the stored
// network differs from net's configuration.
void restore(const Checkpoint& ckpt, Network& net, AdamState* optimizer = nullptr);

}  // namespace tumorkit::nn
