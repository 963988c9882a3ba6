#include "relent/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace relent {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; big-endian hosts need byte swaps");

namespace {

constexpr char kMagic[8] = {'R', 'E', 'L', 'E', 'N', 'T', '0', '1'};

void write_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

}  // namespace

void write_snapshot_blocks(const std::string& path, const std::vector<SnapshotBlock>& blocks) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    for (const auto& b : blocks) {
        out.write(kMagic, 8);
        write_u32(out, static_cast<std::uint32_t>(b.grid.dim));
        write_u32(out, static_cast<std::uint32_t>(b.grid.n));
        write_u32(out, static_cast<std::uint32_t>(b.rank));
        write_u32(out, static_cast<std::uint32_t>(b.records.size()));
        const char pad[8] = {};
        out.write(pad, 8);
        const std::size_t expected = b.grid.cells() * b.rank;
        for (const auto& rec : b.records) {
            if (rec.size() != expected) throw IoError("snapshot record size mismatch");
            out.write(reinterpret_cast<const char*>(rec.data()),
                      static_cast<std::streamsize>(rec.size() * sizeof(double)));
        }
    }
    if (!out) throw IoError("write failed for " + path);
}

std::vector<SnapshotBlock> read_snapshot_blocks(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<SnapshotBlock> blocks;
    while (true) {
        char magic[8];
        in.read(magic, 8);
        if (in.gcount() == 0) break;  // clean EOF between blocks
        if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
            throw IoError("bad snapshot magic in " + path);
        SnapshotBlock b;
        const std::uint32_t dim = read_u32(in);
        const std::uint32_t n = read_u32(in);
        b.rank = static_cast<int>(read_u32(in));
        const std::uint32_t count = read_u32(in);
        char pad[8];
        in.read(pad, 8);
        b.grid = Grid(static_cast<int>(dim), static_cast<int>(n));
        const std::size_t expected = b.grid.cells() * b.rank;
        for (std::uint32_t rec = 0; rec < count; ++rec) {
            std::vector<double> data(expected);
            in.read(reinterpret_cast<char*>(data.data()),
                    static_cast<std::streamsize>(expected * sizeof(double)));
            if (static_cast<std::size_t>(in.gcount()) != expected * sizeof(double))
                throw IoError("truncated snapshot record in " + path);
            b.records.push_back(std::move(data));
        }
        blocks.push_back(std::move(b));
    }
    return blocks;
}

SnapshotBlock block_of(const ScalarField& f) {
    SnapshotBlock b;
    b.grid = f.grid();
    b.rank = 1;
    b.records.emplace_back(f.data().begin(), f.data().end());
    return b;
}

SnapshotBlock block_of(const VectorField& v) {
    SnapshotBlock b;
    b.grid = v.grid();
    b.rank = v.grid().dim;
    b.records.emplace_back(v.data().begin(), v.data().end());
    return b;
}

namespace {

ScalarField scalar_from(const SnapshotBlock& b, std::size_t rec) {
    if (b.rank != 1) throw IoError("snapshot block is not scalar");
    ScalarField f(b.grid);
    std::copy(b.records[rec].begin(), b.records[rec].end(), f.data().begin());
    return f;
}

VectorField vector_from(const SnapshotBlock& b, std::size_t rec) {
    if (b.rank != b.grid.dim) throw IoError("snapshot block is not a vector field");
    VectorField v(b.grid);
    std::copy(b.records[rec].begin(), b.records[rec].end(), v.data().begin());
    return v;
}

void write_sidecar(const std::string& base, const std::string& meta_json) {
    std::ofstream meta(base + ".json");
    if (!meta) throw IoError("cannot open " + base + ".json");
    meta << meta_json << "\n";
}

}  // namespace

void write_checkpoint(const std::string& base_path, const State& s, const std::string& meta_json) {
    write_snapshot_blocks(base_path + ".bin", {block_of(s.rho), block_of(s.mom)});
    write_sidecar(base_path, meta_json);
}

State read_checkpoint(const std::string& base_path) {
    const auto blocks = read_snapshot_blocks(base_path + ".bin");
    if (blocks.size() != 2) throw IoError("checkpoint must hold (rho, m) blocks");
    State s;
    s.rho = scalar_from(blocks[0], 0);
    s.mom = vector_from(blocks[1], 0);
    if (s.rho.grid() != s.mom.grid()) throw IoError("checkpoint grids differ");
    return s;
}

void write_euler_checkpoint(const std::string& base_path, const EulerState& s,
                            const std::string& meta_json) {
    write_snapshot_blocks(base_path + ".bin", {block_of(s.v), block_of(s.Pi)});
    write_sidecar(base_path, meta_json);
}

EulerState read_euler_checkpoint(const std::string& base_path) {
    const auto blocks = read_snapshot_blocks(base_path + ".bin");
    if (blocks.size() != 2) throw IoError("euler checkpoint must hold (v, Pi) blocks");
    EulerState s;
    s.v = vector_from(blocks[0], 0);
    s.Pi = scalar_from(blocks[1], 0);
    return s;
}

}  // namespace relent
