#include <doctest.h>

#include "qps/errors.hpp"
#include "qps/io.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

using namespace qps;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* name) {
    auto p = fs::temp_directory_path() / ("qps_test_io_" + std::string(name));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void require_same(const band_structure& a, const band_structure& b) {
    REQUIRE(a.bands.size() == b.bands.size());
    REQUIRE(a.index_bands.size() == b.index_bands.size());
    CHECK(a.p == b.p);
    CHECK(a.q == b.q);
    CHECK(a.below == b.below);
    CHECK(a.theta_grid == b.theta_grid);
    for (std::size_t i = 0; i < a.bands.size(); ++i) {
        CHECK(a.bands[i].lo == b.bands[i].lo);
        CHECK(a.bands[i].hi == b.bands[i].hi);
    }
    for (std::size_t i = 0; i < a.index_bands.size(); ++i) {
        CHECK(a.index_bands[i].lo == b.index_bands[i].lo);
        CHECK(a.index_bands[i].hi == b.index_bands[i].hi);
    }
}

} // namespace

TEST_CASE("FNV-1a reference vectors") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
    CHECK(hex64(0x1ULL) == "0000000000000001");
    CHECK(hex64(0x85944171f73967e8ULL) == "85944171f73967e8");
}

TEST_CASE("double formatting round-trips exactly") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 200; ++i) {
        double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(parse_hex_double(hex_double(v)) == v);
        CHECK(std::stod(format_double(v)) == v);
    }
    const double tiny = std::numeric_limits<double>::denorm_min();
    CHECK(parse_hex_double(hex_double(tiny)) == tiny);
    CHECK(parse_hex_double(hex_double(-0.0)) == 0.0);
    CHECK(std::isinf(parse_hex_double(hex_double(INFINITY))));
    CHECK(format_double(NAN) == "nan");
    CHECK(format_double(0.25) == "0.25");
    CHECK_THROWS_AS(parse_hex_double("1.8p+1x"), cache_corruption);
}

TEST_CASE("config text: comments, whitespace and overrides") {
    auto m = parse_config("# header\n lambda = 0.25  # coupling\n\nfreq=golden\nlambda = 0.5\r\n");
    CHECK(m.size() == 2);
    CHECK(m["lambda"] == "0.5");
    CHECK(m["freq"] == "golden");
    CHECK_THROWS_AS(parse_config("lambda 0.25\n"), config_error);
    CHECK_THROWS_AS(parse_config(" = 3\n"), config_error);
    CHECK(parse_config("").empty());
}

TEST_CASE("config hash depends on command and every value") {
    std::map<std::string, std::string> a{{"lambda", "0.25"}, {"q", "89"}};
    auto b = a;
    b["q"] = "144";
    CHECK(config_hash("gaps", a) == config_hash("gaps", a));
    CHECK(config_hash("gaps", a) != config_hash("gaps", b));
    CHECK(config_hash("gaps", a) != config_hash("spectrum", a));
}

TEST_CASE("frequency aliases") {
    CHECK(frequency_from_alias("golden").value == golden_mean().value);
    CHECK(frequency_from_alias(" sqrt2m1 ").value == sqrt2_minus_1().value);
    auto l1 = frequency_from_alias("liouville:beta=0.3:seed=9");
    auto l2 = synth_liouville(0.3, 4, 9);
    CHECK(l1.value == l2.value);
    CHECK(l1.cf == l2.cf);
    CHECK(frequency_from_alias("liouville:seed=9:beta=0.3:levels=4").value == l2.value);
    auto d = frequency_from_alias("0.4142135623730951");
    CHECK(d.cf[0] == 2);
    CHECK(d.cf[3] == 2);
    CHECK_THROWS_AS(frequency_from_alias("liouville:seed=2"), config_error);
    CHECK_THROWS_AS(frequency_from_alias("liouville:beta=0.2:colour=red"), config_error);
    CHECK_THROWS_AS(frequency_from_alias("silver"), config_error);
    CHECK_THROWS_AS(frequency_from_alias("1.5"), config_error);
    CHECK_THROWS_AS(frequency_from_alias("0.5"), config_error);
}

TEST_CASE("potential text") {
    auto c = potential_from_text("cos");
    auto d = potential_from_text("0, 1");
    CHECK(c.band_limit() == d.band_limit());
    for (int k = -1; k <= 1; ++k) CHECK(c.coeff(k) == d.coeff(k));
    auto e = potential_from_text("0.1,1,0.3");
    CHECK(e.coeff(-2) == cplx(0.3, 0));
    CHECK(e.coeff(0) == cplx(0.1, 0));
    CHECK_THROWS_AS(potential_from_text("1,x"), config_error);
}

TEST_CASE("band structure serialization is exact and detects damage") {
    auto bs = build_band_structure(0.7, cosine_potential(), 5, 8);
    spectrum_options opt;
    const auto key = bands_key(0.7, cosine_potential(), 5, 8, opt);
    auto text = serialize_bands(bs, key);
    require_same(bs, deserialize_bands(text, key));
    CHECK_THROWS_AS(deserialize_bands(text, key + 1), cache_corruption);
    auto damaged = text;
    damaged[damaged.find("bands") + 10] ^= 1;
    CHECK_THROWS_AS(deserialize_bands(damaged, key), cache_corruption);
    CHECK_THROWS_AS(deserialize_bands(text.substr(0, text.size() / 2), key), cache_corruption);
    CHECK_THROWS_AS(deserialize_bands("", key), cache_corruption);
    // keys separate every input that changes the result
    CHECK(bands_key(0.7, cosine_potential(), 5, 8, opt) != bands_key(0.7, cosine_potential(), 3, 8, opt));
    CHECK(bands_key(0.7, cosine_potential(), 5, 8, opt) != bands_key(0.71, cosine_potential(), 5, 8, opt));
    spectrum_options ext = opt;
    ext.extended = true;
    CHECK(bands_key(0.7, cosine_potential(), 5, 8, opt) != bands_key(0.7, cosine_potential(), 5, 8, ext));
}

TEST_CASE("stage cache: memory, disk, corruption recovery") {
    auto dir = scratch_dir("cache");
    spectrum_options opt;
    auto fresh = build_band_structure(0.5, cosine_potential(), 8, 13, opt);
    {
        stage_cache c(dir);
        require_same(c.bands(0.5, cosine_potential(), 8, 13, opt), fresh);
        c.bands(0.5, cosine_potential(), 8, 13, opt);
        CHECK(c.misses() == 1);
        CHECK(c.hits() == 1);
    }
    auto chk = verify_cache(dir);
    CHECK(chk.entries == 1);
    CHECK(chk.corrupt.empty());
    {
        stage_cache c(dir);
        require_same(c.bands(0.5, cosine_potential(), 8, 13, opt), fresh);
        CHECK(c.hits() == 1);
        CHECK(c.misses() == 0);
    }
    fs::path entry = fs::directory_iterator(dir)->path();
    auto text = read_file(entry);
    text[text.size() / 2] = text[text.size() / 2] == '1' ? '2' : '1';
    write_file(entry, text);
    CHECK(verify_cache(dir).corrupt.size() == 1);
    {
        stage_cache c(dir);
        require_same(c.bands(0.5, cosine_potential(), 8, 13, opt), fresh);
        CHECK(c.recovered().size() == 1);
    }
    CHECK(verify_cache(dir).corrupt.empty());
    write_file(dir / "not-a-key.bands", "junk");
    CHECK(verify_cache(dir).corrupt.size() == 1);
    CHECK(clear_cache(dir) == 2);
    CHECK(verify_cache(dir).entries == 0);
    fs::remove_all(dir);
}
