#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "relent/initial_data.hpp"
#include "relent/io.hpp"
#include "relent/rng.hpp"

using namespace relent;

namespace {
const std::string tmp = (std::filesystem::temp_directory_path() / "relent_io").string();
}

TEST_CASE("snapshot blocks round-trip byte-exactly") {
    std::filesystem::create_directories(tmp);
    Grid g(2, 16);
    ScalarField f(g);
    VectorField v(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = counter_gaussian(1, 0, i, 0);
    for (std::size_t i = 0; i < v.data().size(); ++i) v.data()[i] = counter_gaussian(1, 1, i, 0);

    const std::string path = tmp + "/fields.bin";
    write_snapshot_blocks(path, {block_of(f), block_of(v)});
    auto blocks = read_snapshot_blocks(path);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].rank == 1);
    CHECK(blocks[1].rank == 2);
    CHECK(blocks[0].grid == g);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(blocks[0].records[0][i] == f[i]);
    for (std::size_t i = 0; i < v.data().size(); ++i) CHECK(blocks[1].records[0][i] == v.data()[i]);
}

TEST_CASE("snapshot header layout: 32 bytes with the magic up front") {
    Grid g(1, 8);
    const std::string path = tmp + "/header.bin";
    write_snapshot_blocks(path, {block_of(ScalarField(g, 1.0))});
    std::ifstream in(path, std::ios::binary);
    char header[32];
    in.read(header, 32);
    CHECK(std::string(header, 8) == "RELENT01");
    const auto u32 = [&](int off) {
        std::uint32_t v;
        std::memcpy(&v, header + off, 4);
        return v;
    };
    CHECK(u32(8) == 1);   // dim
    CHECK(u32(12) == 8);  // n
    CHECK(u32(16) == 1);  // rank
    CHECK(u32(20) == 1);  // record count
    // payload follows immediately
    double first;
    in.read(reinterpret_cast<char*>(&first), 8);
    CHECK(first == 1.0);
}

TEST_CASE("corrupt magic is rejected") {
    const std::string path = tmp + "/bad.bin";
    std::ofstream out(path, std::ios::binary);
    out << "NOTMAGIC" << std::string(24, '\0');
    out.close();
    CHECK_THROWS_AS(read_snapshot_blocks(path), IoError);
}

TEST_CASE("state checkpoints carry (rho, m) plus a sidecar") {
    Grid g(1, 32);
    State s = smooth_state(g, 1.0, 0.2, 0.4);
    s.t = 1.25;
    const std::string base = tmp + "/state";
    write_checkpoint(base, s, R"({"t":1.25,"seed":7})");
    State back = read_checkpoint(base);
    for (std::size_t i = 0; i < s.rho.size(); ++i) CHECK(back.rho[i] == s.rho[i]);
    for (std::size_t i = 0; i < s.mom.data().size(); ++i)
        CHECK(back.mom.data()[i] == s.mom.data()[i]);
    std::ifstream meta(base + ".json");
    std::string line;
    std::getline(meta, line);
    CHECK(line.find("\"seed\":7") != std::string::npos);
}

TEST_CASE("euler checkpoints carry (v, Pi)") {
    Grid g(2, 16);
    EulerState s;
    s.v = taylor_green(g, 0.7);
    s.Pi = harmonic_scalar(g, 0.3, 1, 1);
    const std::string base = tmp + "/euler";
    write_euler_checkpoint(base, s, "{}");
    EulerState back = read_euler_checkpoint(base);
    for (std::size_t i = 0; i < s.v.data().size(); ++i) CHECK(back.v.data()[i] == s.v.data()[i]);
    for (std::size_t i = 0; i < s.Pi.size(); ++i) CHECK(back.Pi[i] == s.Pi[i]);
}
