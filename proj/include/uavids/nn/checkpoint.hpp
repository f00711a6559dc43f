#pragma once

#include <filesystem>

#include "uavids/dataio.hpp"
#include "uavids/nn/model.hpp"

namespace uavids::nn {

// Binary layout, all integers and floats little-endian:
//   "UAVIDSCK"  u32 version (=1)
//   config: u32 input_h, input_w, filters, kernel_h, kernel_w, pool_h, pool_w,
//           lstm_units, fc_units, output_width, layout; f64 dropout_rate
//   labels: u32 task, u32 class count, then class count x output_width u8 bits
//   u32 tensor count, then per tensor: u32 name length, name, u64 rows, u64 cols,
//           rows*cols f64 in column-major order (declaration order of NetworkParams)
struct Checkpoint {
    ModelConfig config;
    Codebook codebook;
    NetworkParams params;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace uavids::nn
