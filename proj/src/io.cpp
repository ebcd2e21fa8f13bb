#include "qps/io.hpp"

#include "qps/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qps {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    auto r = std::to_chars(buf, buf + 16, h, 16);
    std::string s(buf, r.ptr);
    return std::string(16 - s.size(), '0') + s;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string hex_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
    return std::string(buf, r.ptr);
}

double parse_hex_double(std::string_view s) {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw cache_corruption("bad hex float '" + std::string(s) + "'");
    return v;
}

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(std::string_view s, const char* what) {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v))
        throw config_error(std::string(what) + ": not a number: '" + std::string(s) + "'");
    return v;
}

} // namespace

std::map<std::string, std::string> parse_config(std::string_view text) {
    std::map<std::string, std::string> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        std::string t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(std::string_view(t).substr(0, eq));
        std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw config_error("config line " + std::to_string(line_no) + ": empty key");
        out[key] = value;
    }
    return out;
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::uint64_t config_hash(std::string_view command, const std::map<std::string, std::string>& canonical) {
    std::string s = "qps ";
    s += tool_version;
    s += '\n';
    s += command;
    s += '\n';
    for (const auto& [k, v] : canonical) s += k + "=" + v + "\n";
    return fnv1a(s);
}

frequency frequency_from_alias(std::string_view alias) {
    std::string a = trim(alias);
    if (a == "golden") return golden_mean();
    if (a == "sqrt2m1") return sqrt2_minus_1();
    if (a.rfind("liouville", 0) == 0) {
        double beta = -1;
        double seed = 1;
        double levels = 4;
        std::string_view rest = std::string_view(a).substr(9);
        while (!rest.empty()) {
            if (rest.front() != ':') throw config_error("frequency alias: expected ':' in '" + a + "'");
            rest.remove_prefix(1);
            auto next = rest.find(':');
            std::string_view field = rest.substr(0, next);
            rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next);
            auto eq = field.find('=');
            if (eq == std::string_view::npos) throw config_error("frequency alias: field without '='");
            auto key = field.substr(0, eq);
            auto val = field.substr(eq + 1);
            if (key == "beta") beta = parse_number(val, "liouville beta");
            else if (key == "seed") seed = parse_number(val, "liouville seed");
            else if (key == "levels") levels = parse_number(val, "liouville levels");
            else throw config_error("frequency alias: unknown field '" + std::string(key) + "'");
        }
        if (!(beta > 0)) throw config_error("frequency alias: liouville needs beta > 0");
        if (seed < 0 || seed != std::floor(seed) || levels < 3 || levels != std::floor(levels))
            throw config_error("frequency alias: seed must be a nonnegative integer and levels >= 3");
        return synth_liouville(beta, static_cast<int>(levels), static_cast<std::uint64_t>(seed));
    }
    double v = parse_number(a, "frequency");
    if (!(v > 0 && v < 1)) throw config_error("frequency must lie in (0, 1)");
    try {
        return expand_cf(static_cast<long double>(v), 30);
    } catch (const rational_input& e) {
        throw config_error(std::string("frequency: ") + e.what());
    }
}

scalar_map potential_from_text(std::string_view text) {
    std::string t = trim(text);
    if (t == "cos") return cosine_potential();
    std::vector<cplx> c;
    std::string_view rest = t;
    while (true) {
        auto comma = rest.find(',');
        c.emplace_back(parse_number(trim(rest.substr(0, comma)), "potential coefficient"), 0.0);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return real_trig(c);
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw qps_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw qps_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qps_error("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

void put_bands(std::string& s, const char* name, const std::vector<band>& bands) {
    s += name;
    s += ' ' + std::to_string(bands.size()) + '\n';
    for (const auto& b : bands) s += hex_double(b.lo) + ' ' + hex_double(b.hi) + ' ' + (b.flagged ? "1" : "0") + '\n';
}

struct line_reader {
    std::string_view text;
    std::size_t pos = 0;

    std::vector<std::string_view> next() {
        if (pos >= text.size()) throw cache_corruption("truncated cache entry");
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) throw cache_corruption("unterminated line in cache entry");
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        std::vector<std::string_view> words;
        std::size_t i = 0;
        while (i < line.size()) {
            auto j = line.find(' ', i);
            if (j == std::string_view::npos) j = line.size();
            if (j > i) words.push_back(line.substr(i, j - i));
            i = j + 1;
        }
        return words;
    }
};

long long to_int(std::string_view s) {
    long long v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw cache_corruption("bad integer in cache entry");
    return v;
}

std::vector<band> get_bands(line_reader& in, std::string_view name) {
    auto head = in.next();
    if (head.size() != 2 || head[0] != name) throw cache_corruption("expected section " + std::string(name));
    long long n = to_int(head[1]);
    if (n < 0 || n > (1 << 24)) throw cache_corruption("bad section size");
    std::vector<band> out(static_cast<std::size_t>(n));
    for (auto& b : out) {
        auto w = in.next();
        if (w.size() != 3) throw cache_corruption("bad band line");
        b.lo = parse_hex_double(w[0]);
        b.hi = parse_hex_double(w[1]);
        b.flagged = w[2] == "1";
        if (!(b.lo <= b.hi)) throw cache_corruption("band with lo > hi");
    }
    return out;
}

} // namespace

std::string serialize_bands(const band_structure& bs, std::uint64_t key) {
    std::string s = "qps-cache 1\nkey " + hex64(key) + "\n";
    s += "p " + std::to_string(bs.p) + " q " + std::to_string(bs.q) + " theta_grid " + std::to_string(bs.theta_grid) +
         " flagged " + std::to_string(bs.flagged) + " extended " + (bs.extended ? "1" : "0") + "\n";
    s += "lambda " + hex_double(bs.lambda) + "\n";
    put_bands(s, "index", bs.index_bands);
    put_bands(s, "bands", bs.bands);
    s += "below " + std::to_string(bs.below.size()) + "\n";
    for (int b : bs.below) s += std::to_string(b) + "\n";
    s += "checksum " + hex64(fnv1a(s)) + "\n";
    return s;
}

band_structure deserialize_bands(std::string_view text, std::uint64_t expected_key) {
    auto cs = text.rfind("checksum ");
    if (cs == std::string_view::npos) throw cache_corruption("missing checksum");
    if (text.substr(cs) != "checksum " + hex64(fnv1a(text.substr(0, cs))) + "\n")
        throw cache_corruption("checksum mismatch");
    line_reader in{text.substr(0, cs)};
    auto magic = in.next();
    if (magic.size() != 2 || magic[0] != "qps-cache" || magic[1] != "1") throw cache_corruption("bad header");
    auto key = in.next();
    if (key.size() != 2 || key[1] != hex64(expected_key)) throw cache_corruption("key mismatch");
    auto meta = in.next();
    if (meta.size() != 10 || meta[0] != "p" || meta[2] != "q" || meta[4] != "theta_grid" || meta[6] != "flagged" ||
        meta[8] != "extended")
        throw cache_corruption("bad metadata line");
    band_structure bs;
    bs.p = to_int(meta[1]);
    bs.q = to_int(meta[3]);
    bs.theta_grid = static_cast<int>(to_int(meta[5]));
    bs.flagged = static_cast<int>(to_int(meta[7]));
    bs.extended = meta[9] == "1";
    auto lam = in.next();
    if (lam.size() != 2 || lam[0] != "lambda") throw cache_corruption("bad lambda line");
    bs.lambda = parse_hex_double(lam[1]);
    bs.index_bands = get_bands(in, "index");
    bs.bands = get_bands(in, "bands");
    auto below = in.next();
    if (below.size() != 2 || below[0] != "below") throw cache_corruption("expected section below");
    long long n = to_int(below[1]);
    if (n != static_cast<long long>(bs.bands.size())) throw cache_corruption("below/bands size mismatch");
    for (long long i = 0; i < n; ++i) {
        auto w = in.next();
        if (w.size() != 1) throw cache_corruption("bad below line");
        bs.below.push_back(static_cast<int>(to_int(w[0])));
    }
    if (in.pos != in.text.size()) throw cache_corruption("trailing data");
    if (bs.bands.empty() || static_cast<std::int64_t>(bs.index_bands.size()) != bs.q)
        throw cache_corruption("inconsistent band counts");
    return bs;
}

std::uint64_t bands_key(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q,
                        const spectrum_options& opt) {
    std::string s = "bands\nlambda " + hex_double(lambda) + "\nf";
    for (const auto& c : f.coefficients()) s += ' ' + hex_double(c.real()) + ',' + hex_double(c.imag());
    s += "\np " + std::to_string(p) + " q " + std::to_string(q) + "\ntheta " + std::to_string(opt.theta_samples) +
         "\nres " + hex_double(opt.e_resolution) + "\nbisect " + hex_double(opt.bisection_tolerance) + "\nbudget " +
         std::to_string(opt.refine_budget) + "\nextended " + (opt.extended ? "1" : "0") + "\n";
    return fnv1a(s);
}

stage_cache::stage_cache(fs::path dir) : dir_(std::move(dir)) {}

band_structure stage_cache::bands(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q,
                                  const spectrum_options& opt) {
    const auto key = bands_key(lambda, f, p, q, opt);
    const fs::path file = dir_.empty() ? fs::path{} : dir_ / (hex64(key) + ".bands");
    {
        std::lock_guard lock(mutex_);
        if (auto it = memory_.find(key); it != memory_.end()) {
            ++hits_;
            return it->second;
        }
        if (!file.empty() && fs::exists(file)) {
            try {
                auto bs = deserialize_bands(read_file(file), key);
                bs.potential = f;
                memory_.emplace(key, bs);
                ++hits_;
                return bs;
            } catch (const cache_corruption& e) {
                recovered_.push_back(file.filename().string() + ": " + e.what());
            }
        }
        ++misses_;
    }
    auto bs = build_band_structure(lambda, f, p, q, opt);
    std::lock_guard lock(mutex_);
    memory_.emplace(key, bs);
    if (!file.empty()) write_file(file, serialize_bands(bs, key));
    return bs;
}

cache_check verify_cache(const fs::path& dir) {
    cache_check out;
    if (!fs::exists(dir)) return out;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".bands") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        ++out.entries;
        std::uint64_t key = 0;
        auto stem = p.stem().string();
        auto r = std::from_chars(stem.data(), stem.data() + stem.size(), key, 16);
        try {
            if (r.ec != std::errc{} || r.ptr != stem.data() + stem.size() || stem.size() != 16)
                throw cache_corruption("file name is not a key");
            deserialize_bands(read_file(p), key);
        } catch (const cache_corruption& e) {
            out.corrupt.push_back(p.filename().string() + ": " + e.what());
        }
    }
    return out;
}

int clear_cache(const fs::path& dir) {
    int n = 0;
    if (!fs::exists(dir)) return 0;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".bands") files.push_back(e.path());
    for (const auto& p : files) n += fs::remove(p) ? 1 : 0;
    return n;
}

} // namespace qps
