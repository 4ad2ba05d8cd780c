#include <doctest.h>

#include <stdexcept>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "nodseg/dicom.hpp" // read_binary_file / write_binary_file
#include "nodseg/unet.hpp"

using namespace nodseg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    TempDir() {
        static std::atomic<uint64_t> counter{0};
        path = fs::temp_directory_path() /
               ("nodseg_ckpt_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

UNetF small_net(uint64_t seed = 77) {
    UNetConfig cfg;
    cfg.levels = 3;
    cfg.base_channels = 4;
    return build_unet<float>(cfg, seed);
}

// rewrites the trailing CRC so intentional patches elsewhere stay "valid"
void fix_crc(std::vector<uint8_t>& buf) {
    const uint32_t crc = crc32_ieee(buf.data(), buf.size() - 4);
    for (int i = 0; i < 4; ++i) buf[buf.size() - 4 + size_t(i)] = uint8_t((crc >> (8 * i)) & 0xFF);
}

} // namespace

TEST_CASE("crc32 matches the standard check value") {
    const char msg[] = "123456789";
    CHECK(crc32_ieee(msg, 9) == 0xCBF43926u);
    CHECK(crc32_ieee(msg, 0) == 0x00000000u);
}

TEST_CASE("a checkpoint round-trips bitwise") {
    TempDir dir;
    const std::string path = (dir.path / "model.ckpt").string();

    UNetF m = small_net();
    save_checkpoint(m, path);
    UNetF r = load_checkpoint(path);

    CHECK(r.cfg == m.cfg);
    std::vector<float> a, b;
    m.for_each_param([&](Parameter<float>& p) {
        a.insert(a.end(), p.value.data.begin(), p.value.data.end());
    });
    r.for_each_param([&](Parameter<float>& p) {
        b.insert(b.end(), p.value.data.begin(), p.value.data.end());
    });
    CHECK(a == b);

    // identical network -> identical inference
    TensorF x(1, 1, 16, 16);
    Rng rng(3);
    for (auto& v : x.data) v = float(rng.next_double());
    CHECK(unet_forward(m, x).data == unet_forward(r, x).data);

    // serialization is deterministic
    const std::string path2 = (dir.path / "model2.ckpt").string();
    save_checkpoint(r, path2);
    CHECK(read_binary_file(path) == read_binary_file(path2));
}

TEST_CASE("loading with an expected config rejects mismatches") {
    TempDir dir;
    const std::string path = (dir.path / "model.ckpt").string();
    UNetF m = small_net();
    save_checkpoint(m, path);

    CHECK_NOTHROW(load_checkpoint(path, &m.cfg));

    UNetConfig other = m.cfg;
    other.base_channels = 8;
    CHECK_THROWS_WITH_AS(load_checkpoint(path, &other),
                         doctest::Contains("config mismatch"), std::runtime_error);
}

TEST_CASE("a corrupted payload byte fails the checksum") {
    TempDir dir;
    const std::string path = (dir.path / "model.ckpt").string();
    UNetF m = small_net();
    save_checkpoint(m, path);

    std::vector<uint8_t> buf = read_binary_file(path);
    buf[buf.size() / 2] ^= 0x01;
    write_binary_file(path, buf);
    CHECK_THROWS_WITH_AS(load_checkpoint(path),
                         doctest::Contains("checksum mismatch"), std::runtime_error);
}

TEST_CASE("truncated checkpoints are rejected") {
    TempDir dir;
    const std::string path = (dir.path / "model.ckpt").string();
    UNetF m = small_net();
    save_checkpoint(m, path);
    const std::vector<uint8_t> full = read_binary_file(path);

    // cut mid-payload: the trailing-CRC check fails first
    std::vector<uint8_t> cut(full.begin(), full.end() - 40);
    write_binary_file(path, cut);
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);

    // cut below the minimum header size
    std::vector<uint8_t> stub(full.begin(), full.begin() + 10);
    write_binary_file(path, stub);
    CHECK_THROWS_WITH_AS(load_checkpoint(path),
                         doctest::Contains("truncated"), std::runtime_error);
}

TEST_CASE("bad magic and unknown versions are named") {
    TempDir dir;
    const std::string path = (dir.path / "model.ckpt").string();
    UNetF m = small_net();

    save_checkpoint(m, path);
    std::vector<uint8_t> buf = read_binary_file(path);
    buf[0] = 'X';
    fix_crc(buf);
    write_binary_file(path, buf);
    CHECK_THROWS_WITH_AS(load_checkpoint(path),
                         doctest::Contains("bad magic"), std::runtime_error);

    save_checkpoint(m, path);
    buf = read_binary_file(path);
    buf[8] = 9; // version low byte
    fix_crc(buf);
    write_binary_file(path, buf);
    CHECK_THROWS_WITH_AS(load_checkpoint(path),
                         doctest::Contains("version"), std::runtime_error);
}

TEST_CASE("trailing garbage inside a checksummed file is rejected") {
    TempDir dir;
    const std::string path = (dir.path / "model.ckpt").string();
    UNetF m = small_net();
    save_checkpoint(m, path);

    std::vector<uint8_t> buf = read_binary_file(path);
    buf.insert(buf.end() - 4, {0, 0});
    fix_crc(buf);
    write_binary_file(path, buf);
    CHECK_THROWS_WITH_AS(load_checkpoint(path),
                         doctest::Contains("trailing"), std::runtime_error);
}

TEST_CASE("missing files are reported by path") {
    CHECK_THROWS_WITH_AS(load_checkpoint("/nonexistent/model.ckpt"),
                         doctest::Contains("/nonexistent/model.ckpt"), std::runtime_error);
}
