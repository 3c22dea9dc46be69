#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "microcash/bytes.hpp"
#include "microcash/crypto.hpp"

using namespace microcash;

TEST_CASE("sha256 matches the published empty-input digest") {
    Digest d = sha256(std::span<const std::uint8_t>{});
    CHECK(to_hex(d.span()) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("sha256 known vector abc") {
    std::vector<std::uint8_t> abc{'a', 'b', 'c'};
    CHECK(to_hex(sha256(abc).span()) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("multipart sha256 equals hashing the concatenation") {
    std::vector<std::uint8_t> a{1, 2, 3}, b{4, 5}, ab{1, 2, 3, 4, 5};
    CHECK(sha256({a, b}) == sha256(ab));
    CHECK(sha256({a, std::span<const std::uint8_t>{}, b}) == sha256(ab));
}

TEST_CASE("vdf is the iterated hash") {
    Digest seed = sha256({std::vector<std::uint8_t>{9}});
    CHECK(vdf_eval(seed, 1).value == sha256(seed.span()));
    VdfValue five = vdf_eval(seed, 5);
    CHECK(five.iterations == 5);
    CHECK(five.value == sha256(vdf_eval(seed, 4).value.span()));
    SUBCASE("composition") {
        CHECK(vdf_eval(vdf_eval(seed, 3).value, 2).value == five.value);
    }
    CHECK_THROWS_AS(vdf_eval(seed, 0), std::invalid_argument);
}

TEST_CASE("seeded keypairs are deterministic and distinct") {
    KeyPair a1 = keypair_from_seed(7);
    KeyPair a2 = keypair_from_seed(7);
    KeyPair b = keypair_from_seed(8);
    CHECK(a1.pk == a2.pk);
    CHECK(a1.sk == a2.sk);
    CHECK(a1.pk != b.pk);
}

TEST_CASE("sign and verify round-trip") {
    KeyPair kp = keypair_from_seed(1);
    std::vector<std::uint8_t> msg{1, 2, 3, 4};
    Signature sig = sign(kp.sk, msg);
    CHECK(verify(kp.pk, msg, sig));
    msg[0] ^= 1;
    CHECK_FALSE(verify(kp.pk, msg, sig));
    msg[0] ^= 1;
    sig[0] ^= 1;
    CHECK_FALSE(verify(kp.pk, msg, sig));
    CHECK_FALSE(verify(keypair_from_seed(2).pk, msg, sign(kp.sk, msg)));
}

TEST_CASE("operation counters track hash, sign, verify") {
    reset_op_counts();
    KeyPair kp = keypair_from_seed(3);  // 1 hash
    std::vector<std::uint8_t> msg{1};
    Signature sig = sign(kp.sk, msg);
    verify(kp.pk, msg, sig);
    sha256(msg);
    OpCounts c = op_counts();
    CHECK(c.hashes == 2);
    CHECK(c.signs == 1);
    CHECK(c.verifies == 1);
    reset_op_counts();
    c = op_counts();
    CHECK(c.hashes == 0);
    CHECK(c.signs == 0);
    CHECK(c.verifies == 0);
}

TEST_CASE("hex round-trip") {
    std::vector<std::uint8_t> data{0x00, 0xff, 0x1a, 0x2b};
    CHECK(to_hex(data) == "00ff1a2b");
    CHECK(from_hex("00ff1a2b") == data);
    CHECK(from_hex("00FF1A2B") == data);
    CHECK_FALSE(from_hex("abc").has_value());
    CHECK_FALSE(from_hex("zz").has_value());
}
