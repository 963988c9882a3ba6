#pragma once

#include <string>
#include <vector>

#include "relent/euler.hpp"
#include "relent/state.hpp"

namespace relent {

/// Field snapshot block: 32-byte header (magic "RELENT01", u32 dim, u32 n,
/// u32 rank, u32 record count, 8 reserved bytes), then record_count records of
/// rank * n^dim little-endian doubles, row-major.
struct SnapshotBlock {
    Grid grid;
    int rank = 1;  // 1 scalar, dim vector
    std::vector<std::vector<double>> records;
};

void write_snapshot_blocks(const std::string& path, const std::vector<SnapshotBlock>& blocks);
std::vector<SnapshotBlock> read_snapshot_blocks(const std::string& path);

SnapshotBlock block_of(const ScalarField& f);
SnapshotBlock block_of(const VectorField& v);

/// Checkpoint = snapshot file with a (rho) block and an (m) block, plus a JSON
/// sidecar <base>.json carrying t, seed, member, step and run parameters.
void write_checkpoint(const std::string& base_path, const State& s, const std::string& meta_json);
State read_checkpoint(const std::string& base_path);

/// Euler checkpoints store (v, Pi) in the same container.
void write_euler_checkpoint(const std::string& base_path, const EulerState& s,
                            const std::string& meta_json);
EulerState read_euler_checkpoint(const std::string& base_path);

}  // namespace relent
