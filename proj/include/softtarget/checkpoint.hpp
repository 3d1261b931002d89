#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "softtarget/adadelta.hpp"
#include "softtarget/network.hpp"
#include "softtarget/softtarget.hpp"

namespace softtarget {

/// Everything needed to resume a training run bit-exactly: the network, the
/// optimizer accumulators, the running label average (when SoftTarget was
/// active), the shuffle/dropout rng streams, and the epoch counter.
///
/// On disk: magic "SOFTCKPT", a u32 format version, then the fields below with
/// all integers and 64-bit reals little-endian (see README for the exact
/// layout). Matrices are stored as u64 rows, u64 cols, then rows*cols reals.
struct Checkpoint {
    Network network;
    std::optional<AdadeltaState> optimizer;
    std::optional<SoftTargetState> soft;
    bool has_rng = false;
    std::array<std::uint64_t, 4> shuffle_rng{};
    std::array<std::uint64_t, 4> dropout_rng{};
    std::uint64_t epochs_completed = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace softtarget
