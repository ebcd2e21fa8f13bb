// qps: command-line front end for approximant spectra, gap campaigns, Bloch waves and reductions.

#include "qps/errors.hpp"
#include "qps/io.hpp"
#include "qps/pipeline.hpp"
#include "qps/report.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace qps;

namespace {

enum class kind { number, integer, text, numbers, flag };

struct key_def {
    std::string name;
    std::string fallback;
    kind type;
    std::string help;
    /// Part of the config hash (outputs depend on it).
    bool hashed = true;
};

struct command_def {
    std::string name;
    std::string help;
    std::vector<key_def> keys;
};

const std::vector<key_def> common_keys = {
    {"out", "qps_out", kind::text, "output directory", false},
    {"config", "", kind::text, "config file of `key = value` lines (flags override it)", false},
    {"jobs", "1", kind::integer, "worker threads; outputs do not depend on it", false},
    {"emit-plot-data", "false", kind::flag, "also write x/y columns for plotting", false},
    {"precision", "double", kind::text, "double or extended arithmetic for traces and widths"},
    {"cache-dir", "", kind::text, "band-structure cache directory (default <out>/cache)", false},
    {"no-cache", "false", kind::flag, "disable the on-disk cache", false},
};

const key_def k_lambda{"lambda", "", kind::number, "coupling constant"};
const key_def k_freq{"freq", "golden", kind::text, "golden, sqrt2m1, liouville:beta=<x>:seed=<s>[:levels=<n>] or a decimal"};
const key_def k_potential{"potential", "cos", kind::text, "cos or real coefficients c0,c1,... of sum c_k e^{2 pi i k x} + c.c."};
const key_def k_theta{"theta-samples", "0", kind::integer, "phase samples per approximant (0: 4q)"};

std::vector<command_def> commands() {
    return {
        {"spectrum", "bands of a periodic approximant",
         {k_lambda, k_freq, k_potential, k_theta, {"q", "89", kind::integer, "largest approximant denominator"},
          {"sweep-q", "0", kind::integer, "plot data: bands for every p/q with q up to this value"}}},
        {"gaps", "labeled gaps of a periodic approximant",
         {k_lambda, k_freq, k_potential, k_theta, {"q", "233", kind::integer, "largest approximant denominator"}}},
        {"decay", "gap widths against |m| over converging approximants, with the exponential fit",
         {k_lambda, k_freq, k_potential, k_theta, {"m-max", "8", kind::integer, "labels 1..m-max"},
          {"q-min", "0", kind::integer, "coarsest denominator (0: 4 m-max)"},
          {"q-max", "233", kind::integer, "finest denominator"}}},
        {"homogeneity", "window measure ratios of the approximant spectrum",
         {k_lambda, k_freq, k_potential, k_theta, {"q", "233", kind::integer, "largest approximant denominator"},
          {"sigmas", "1e-2,3e-3,1e-3", kind::numbers, "window half-widths"},
          {"samples", "4000", kind::integer, "window centres spread over the spectrum"}}},
        {"reduce", "gap-edge dossier: Bloch wave, parabolic reduction, eps_m and the rotation shift",
         {k_lambda, k_freq, k_potential, k_theta, {"m", "1", kind::integer, "gap label"},
          {"q", "233", kind::integer, "largest approximant denominator"},
          {"edge", "upper", kind::text, "upper or lower gap edge"},
          {"expansion-eps", "0", kind::number, "run the double averaging step at this eps (0: off)"},
          {"iterations", "1000000", kind::integer, "rotation-number iterations"}}},
        {"dual", "Bloch wave of the dual operator at an energy",
         {k_lambda, k_freq, k_potential, {"energy", "", kind::number, "energy"},
          {"N", "256", kind::integer, "initial truncation"},
          {"theta-grid", "512", kind::integer, "phase scan points"},
          {"edge", "false", kind::flag, "energy is an approximate gap edge"},
          {"energy-tolerance", "1e-6", kind::number, "accepted distance between eigenvalue and energy"}}},
        {"beta", "exponential approximation rate of a frequency",
         {{"alpha", "golden", kind::text, "frequency alias or decimal"},
          {"kmax", "10000", kind::integer, "largest denominator examined"}}},
        {"cache", "inspect the band-structure cache",
         {{"action", "verify", kind::text, "verify, list or clear", false}}},
    };
}

[[noreturn]] void bad(const std::string& what) { throw config_error(what); }

double as_number(const std::string& key, const std::string& v) {
    double x = 0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size() || !std::isfinite(x))
        bad("--" + key + ": expected a number, got '" + v + "'");
    return x;
}

long long as_integer(const std::string& key, const std::string& v) {
    long long x = 0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size())
        bad("--" + key + ": expected an integer, got '" + v + "'");
    return x;
}

bool as_flag(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad("--" + key + ": expected true or false, got '" + v + "'");
}

std::vector<double> as_numbers(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        auto comma = v.find(',', pos);
        if (comma == std::string::npos) comma = v.size();
        std::string item = v.substr(pos, comma - pos);
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        out.push_back(as_number(key, item));
        pos = comma + 1;
    }
    return out;
}

/// Parsed settings of one invocation.
struct settings {
    const command_def* cmd = nullptr;
    std::map<std::string, std::string> values;
    std::map<std::string, std::string> canonical;
    std::string hash;

    const std::string& text(const std::string& k) const { return values.at(k); }
    double number(const std::string& k) const { return as_number(k, values.at(k)); }
    long long integer(const std::string& k) const { return as_integer(k, values.at(k)); }
    bool flag(const std::string& k) const { return as_flag(k, values.at(k)); }
    fs::path out() const { return fs::path(text("out")); }
    output_stamp stamp() const { return {cmd->name, hash}; }
};

settings resolve(const command_def& cmd, const std::map<std::string, std::string>& given) {
    settings s;
    s.cmd = &cmd;
    std::vector<key_def> keys = common_keys;
    keys.insert(keys.end(), cmd.keys.begin(), cmd.keys.end());
    for (const auto& k : keys) s.values[k.name] = k.fallback;
    if (auto it = given.find("config"); it != given.end() && !it->second.empty()) {
        for (const auto& [k, v] : read_config_file(it->second)) {
            bool known = false;
            for (const auto& spec : keys) known = known || spec.name == k;
            if (!known) bad("config file: unknown key '" + k + "' for " + cmd.name);
            s.values[k] = v;
        }
    }
    for (const auto& [k, v] : given) s.values[k] = v;

    for (const auto& k : keys) {
        const std::string& v = s.values[k.name];
        std::string canon;
        switch (k.type) {
        case kind::number:
            if (v.empty()) bad("missing required value --" + k.name);
            canon = format_double(as_number(k.name, v));
            break;
        case kind::integer:
            canon = std::to_string(as_integer(k.name, v));
            break;
        case kind::flag:
            canon = as_flag(k.name, v) ? "true" : "false";
            break;
        case kind::numbers: {
            for (double x : as_numbers(k.name, v)) canon += (canon.empty() ? "" : ",") + format_double(x);
            break;
        }
        case kind::text:
            canon = v;
            break;
        }
        if (k.hashed) s.canonical[k.name] = canon;
    }
    if (s.values["precision"] != "double" && s.values["precision"] != "extended")
        bad("--precision must be double or extended");
    if (s.integer("jobs") < 1) bad("--jobs must be at least 1");
    s.hash = hex64(config_hash(cmd.name, s.canonical));
    return s;
}

fs::path cache_dir(const settings& s) {
    return s.text("cache-dir").empty() ? s.out() / "cache" : fs::path(s.text("cache-dir"));
}

pipeline_config make_config(const settings& s, stage_cache& cache) {
    pipeline_config cfg;
    cfg.jobs = static_cast<int>(s.integer("jobs"));
    cfg.spectrum.extended = s.text("precision") == "extended";
    if (s.values.count("theta-samples")) cfg.spectrum.theta_samples = static_cast<int>(s.integer("theta-samples"));
    cfg.cache = &cache;
    return cfg;
}

void emit(const fs::path& path, const std::string& content) {
    write_file(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json with_stamp(const settings& s, const std::string& key, json body) {
    json j = json_stamp(s.stamp());
    j[key] = std::move(body);
    return j;
}

void write_claims(const settings& s, const std::vector<claim>& claims) {
    emit(s.out() / "claims.json", dump(with_stamp(s, "claims", to_json(claims))));
}

int run_spectrum(const settings& s, stage_cache& cache) {
    auto cfg = make_config(s, cache);
    auto freq = frequency_from_alias(s.text("freq"));
    auto f = potential_from_text(s.text("potential"));
    const double lambda = s.number("lambda");
    auto c = freq.best_convergent(s.integer("q"));
    auto bs = approximant(lambda, f, c, cfg);
    std::string csv = csv_preamble(s.stamp(), "p,q,lo,hi,flagged");
    for (const auto& b : bs.bands)
        csv += csv_row({std::to_string(bs.p), std::to_string(bs.q), format_double(b.lo), format_double(b.hi),
                        b.flagged ? "1" : "0"});
    emit(s.out() / "spectrum.csv", csv);
    emit(s.out() / "spectrum.json", dump(with_stamp(s, "spectrum", to_json(bs))));
    if (s.flag("emit-plot-data")) {
        std::string plot = csv_preamble(s.stamp(), "alpha,lo,hi");
        auto add = [&](const band_structure& b) {
            const double a = static_cast<double>(b.p) / static_cast<double>(b.q);
            for (const auto& x : b.bands) plot += csv_row({format_double(a), format_double(x.lo), format_double(x.hi)});
        };
        const long long sweep = s.integer("sweep-q");
        if (sweep > 0) {
            for (long long q = 1; q <= sweep; ++q)
                for (long long p = 0; p <= q; ++p)
                    if (std::gcd(p, q) == 1) add(approximant(lambda, f, convergent{p, q}, cfg));
        } else {
            add(bs);
        }
        emit(s.out() / "spectrum_plot.csv", plot);
    }
    return 0;
}

int run_gaps(const settings& s, stage_cache& cache) {
    auto cfg = make_config(s, cache);
    auto freq = frequency_from_alias(s.text("freq"));
    auto f = potential_from_text(s.text("potential"));
    auto bs = approximant(s.number("lambda"), f, freq.best_convergent(s.integer("q")), cfg);
    label_options lo;
    lo.jobs = cfg.jobs;
    auto gaps = label_gaps(bs, freq, lo);
    std::string csv = csv_preamble(s.stamp(), "m,e_minus,e_plus,width,ids_num,ids_den,rho_resid,flagged");
    std::string lines = json_stamp(s.stamp()).dump() + "\n";
    std::string plot = csv_preamble(s.stamp(), "m,width");
    for (const auto& g : gaps) {
        csv += csv_row({std::to_string(g.m), format_double(g.e_minus), format_double(g.e_plus), format_double(g.width),
                        std::to_string(g.ids_num), std::to_string(g.ids_den), format_double(g.rho_resid),
                        g.flagged ? "1" : "0"});
        lines += to_json(g).dump() + "\n";
        plot += csv_row({std::to_string(g.m), format_double(g.width)});
    }
    emit(s.out() / "gaps.csv", csv);
    emit(s.out() / "gaps.jsonl", lines);
    if (s.flag("emit-plot-data")) emit(s.out() / "gaps_plot.csv", plot);
    return 0;
}

int run_decay(const settings& s, stage_cache& cache) {
    auto cfg = make_config(s, cache);
    cfg.q_min = s.integer("q-min");
    cfg.q_max = s.integer("q-max");
    auto freq = frequency_from_alias(s.text("freq"));
    auto f = potential_from_text(s.text("potential"));
    const long long m_max = s.integer("m-max");
    if (m_max < 1) bad("--m-max must be positive");
    std::vector<std::int64_t> labels;
    for (long long m = 1; m <= m_max; ++m) labels.push_back(m);
    auto rep = decay_campaign(s.number("lambda"), f, freq, labels, cfg);

    std::string cols = "m,width,e_minus,e_plus,relative_change,stable";
    for (const auto& c : rep.convergents) cols += ",width_q" + std::to_string(c.q);
    std::string csv = csv_preamble(s.stamp(), cols);
    for (const auto& row : rep.rows) {
        std::vector<std::string> cells = {std::to_string(row.m), format_double(row.width), format_double(row.e_minus),
                                          format_double(row.e_plus), format_double(row.relative_change),
                                          row.stable ? "1" : "0"};
        for (double w : row.widths) cells.push_back(format_double(w));
        csv += csv_row(cells);
    }
    emit(s.out() / "decay.csv", csv);
    emit(s.out() / "decay.json", dump(with_stamp(s, "decay", to_json(rep))));
    write_claims(s, decay_claims(rep));
    if (s.flag("emit-plot-data")) {
        std::string plot = csv_preamble(s.stamp(), "abs_m,ln_width,ln_fit");
        for (const auto& row : rep.rows) {
            if (!(row.width > 0)) continue;
            const double am = static_cast<double>(std::abs(row.m));
            plot += csv_row({format_double(am), format_double(std::log(row.width)),
                             rep.fit ? format_double(rep.fit->intercept - rep.fit->gamma * am) : "nan"});
        }
        emit(s.out() / "decay_plot.csv", plot);
    }
    return 0;
}

int run_homogeneity(const settings& s, stage_cache& cache) {
    auto cfg = make_config(s, cache);
    cfg.q_max = s.integer("q");
    cfg.homogeneity_samples = static_cast<int>(s.integer("samples"));
    auto freq = frequency_from_alias(s.text("freq"));
    auto f = potential_from_text(s.text("potential"));
    auto sigmas = as_numbers("sigmas", s.text("sigmas"));
    for (double x : sigmas)
        if (!(x > 0)) bad("--sigmas must be positive");
    auto rep = homogeneity_campaign(s.number("lambda"), f, freq, sigmas, cfg);
    std::string csv = csv_preamble(s.stamp(), "sigma,min_ratio,argmin,gap_sum_at_argmin,max_gap_fraction,"
                                              "max_gap_fraction_excluding_lowest");
    std::string plot = csv_preamble(s.stamp(), "sigma,min_ratio");
    for (const auto& row : rep.rows) {
        csv += csv_row({format_double(row.sigma), format_double(row.min_ratio), format_double(row.argmin),
                        format_double(row.at_argmin.total), format_double(row.max_gap_fraction),
                        format_double(row.max_gap_fraction_excluding_lowest)});
        plot += csv_row({format_double(row.sigma), format_double(row.min_ratio)});
    }
    emit(s.out() / "homogeneity.csv", csv);
    emit(s.out() / "homogeneity.json", dump(with_stamp(s, "homogeneity", to_json(rep))));
    write_claims(s, homogeneity_claims(rep));
    if (s.flag("emit-plot-data")) emit(s.out() / "homogeneity_plot.csv", plot);
    return 0;
}

int run_reduce(const settings& s, stage_cache& cache) {
    auto cfg = make_config(s, cache);
    cfg.q_max = s.integer("q");
    const std::string edge = s.text("edge");
    if (edge != "upper" && edge != "lower") bad("--edge must be upper or lower");
    cfg.lower_edge = edge == "lower";
    cfg.expansion_eps = s.number("expansion-eps");
    cfg.rotation_iterations = static_cast<long>(s.integer("iterations"));
    auto freq = frequency_from_alias(s.text("freq"));
    auto f = potential_from_text(s.text("potential"));
    auto ds = analyze_gaps(s.number("lambda"), f, freq, {s.integer("m")}, cfg);
    if (ds.empty()) std::cerr << "gap " << s.integer("m") << " is not open: empty dossier set\n";
    json dossiers = json::array();
    json claims = json::array();
    for (const auto& d : ds) {
        dossiers.push_back(to_json(d));
        claims.push_back(json{{"m", d.m}, {"claims", to_json(dossier_claims(d))}});
    }
    emit(s.out() / "dossier.json", dump(with_stamp(s, "dossiers", dossiers)));
    emit(s.out() / "claims.json", dump(with_stamp(s, "claims", claims)));
    return 0;
}

int run_dual(const settings& s, stage_cache&) {
    auto freq = frequency_from_alias(s.text("freq"));
    auto f = potential_from_text(s.text("potential"));
    const double lambda = s.number("lambda");
    bloch_options opt;
    opt.N = static_cast<int>(s.integer("N"));
    opt.theta_grid = static_cast<int>(s.integer("theta-grid"));
    opt.edge = s.flag("edge");
    opt.energy_tolerance = s.number("energy-tolerance");
    opt.jobs = static_cast<int>(s.integer("jobs"));
    auto sol = find_bloch(lambda, f, freq, s.number("energy"), opt);
    auto res = detect_resonance(sol, freq, 200);
    if (res && opt.edge) sol = snap_to_resonance(lambda, f, freq, sol, res->n_tilde, opt);
    const std::string coeff_file = "bloch_coefficients.csv";
    json body = to_json(sol, coeff_file);
    body["resonant"] = res.has_value();
    emit(s.out() / "bloch.json", dump(with_stamp(s, "bloch", body)));
    std::string csv = csv_preamble(s.stamp(), "k,u_hat");
    for (long k = -sol.N; k <= sol.N; ++k) csv += csv_row({std::to_string(k), format_double(sol.coeff(k))});
    emit(s.out() / coeff_file, csv);
    if (s.flag("emit-plot-data")) {
        std::string plot = csv_preamble(s.stamp(), "k,log10_abs_u_hat");
        for (long k = -sol.N; k <= sol.N; ++k) {
            double a = std::abs(sol.coeff(k));
            if (a > 0) plot += csv_row({std::to_string(k), format_double(std::log10(a))});
        }
        emit(s.out() / "bloch_plot.csv", plot);
    }
    return 0;
}

int run_beta(const settings& s, stage_cache&) {
    auto freq = frequency_from_alias(s.text("alpha"));
    auto b = estimate_beta(freq, s.integer("kmax"));
    json body = to_json(b);
    body["alpha"] = static_cast<double>(freq.value);
    json cf = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(freq.cf.size(), 20); ++i) cf.push_back(freq.cf[i]);
    body["cf_head"] = cf;
    body["warning"] = freq.warning;
    emit(s.out() / "beta.json", dump(with_stamp(s, "beta", body)));
    return 0;
}

int run_cache(const settings& s) {
    const auto dir = cache_dir(s);
    const std::string action = s.text("action");
    if (action == "clear") {
        std::cout << "removed " << clear_cache(dir) << " entries\n";
        return 0;
    }
    if (action != "verify" && action != "list") bad("cache action must be verify, list or clear");
    auto chk = verify_cache(dir);
    std::cout << chk.entries << " entries, " << chk.corrupt.size() << " corrupt\n";
    for (const auto& c : chk.corrupt) std::cerr << "corrupt: " << c << "\n";
    return chk.corrupt.empty() ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qps: spectra, gap labels, Bloch waves and reducibility for quasi-periodic Schrodinger operators"};
    app.require_subcommand(1);
    app.footer("Config files hold one `key = value` per line (# starts a comment); keys are the long option "
               "names of the subcommand. Exit codes: 0 success, 2 config error, 3 numerical stage error, "
               "4 cache corruption.");
    const auto specs = commands();
    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::map<std::string, CLI::Option*>> opts;
    std::map<std::string, std::map<std::string, bool>> flags;
    for (const auto& cmd : specs) {
        auto* sub = app.add_subcommand(cmd.name, cmd.help);
        std::vector<key_def> keys = common_keys;
        keys.insert(keys.end(), cmd.keys.begin(), cmd.keys.end());
        for (const auto& k : keys) {
            std::string help = k.help + (k.fallback.empty() ? "" : " [" + k.fallback + "]");
            if (k.type == kind::flag) {
                opts[cmd.name][k.name] = sub->add_flag("--" + k.name, flags[cmd.name][k.name], help);
            } else if (cmd.name == "cache" && k.name == "action") {
                opts[cmd.name][k.name] = sub->add_option(k.name, raw[cmd.name][k.name], help);
            } else {
                opts[cmd.name][k.name] = sub->add_option("--" + k.name, raw[cmd.name][k.name], help);
            }
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const command_def* cmd = nullptr;
    for (const auto& c : specs)
        if (app.got_subcommand(c.name)) cmd = &c;
    std::map<std::string, std::string> given;
    for (const auto& [name, opt] : opts[cmd->name]) {
        if (opt->count() == 0) continue;
        auto f = flags[cmd->name].find(name);
        given[name] = f != flags[cmd->name].end() ? (f->second ? "true" : "false") : raw[cmd->name][name];
    }

    try {
        auto s = resolve(*cmd, given);
        if (cmd->name == "cache") return run_cache(s);
        stage_cache cache = s.flag("no-cache") ? stage_cache() : stage_cache(cache_dir(s));
        int rc = 0;
        if (cmd->name == "spectrum") rc = run_spectrum(s, cache);
        else if (cmd->name == "gaps") rc = run_gaps(s, cache);
        else if (cmd->name == "decay") rc = run_decay(s, cache);
        else if (cmd->name == "homogeneity") rc = run_homogeneity(s, cache);
        else if (cmd->name == "reduce") rc = run_reduce(s, cache);
        else if (cmd->name == "dual") rc = run_dual(s, cache);
        else if (cmd->name == "beta") rc = run_beta(s, cache);
        for (const auto& r : cache.recovered()) std::cerr << "warning: recomputed corrupt cache entry " << r << "\n";
        return rc;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cache_corruption& e) {
        std::cerr << "cache corruption: " << e.what() << "\n";
        return 4;
    } catch (const numerical_error& e) {
        std::cerr << "numerical stage error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical stage error: " << cmd->name << ": " << e.what() << "\n";
        return 3;
    }
}
