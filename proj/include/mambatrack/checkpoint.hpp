#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "mambatrack/mtp.hpp"

namespace mambatrack {

// Layout (little-endian):
//   magic "MTPCKPT1" | version u32 | config: 8 x u32 (q, d_m, L, N, E, K,
//   d_mlp, head_hidden) | tensor count u32 | per tensor: name length u32,
//   UTF-8 name, rank u32, dims u64 x rank, float64 payload.
inline constexpr char kCheckpointMagic[8] = {'M', 'T', 'P', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const MtpModel& model, std::ostream& out);
void save_checkpoint(const MtpModel& model, const std::string& path);

// Throws FormatError on bad magic or version, shape inconsistencies with the
// embedded config, unknown or missing tensors and truncated payloads.
MtpModel load_checkpoint(std::istream& in);
MtpModel load_checkpoint(const std::string& path);

}  // namespace mambatrack
