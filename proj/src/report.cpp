#include "qps/report.hpp"

#include "qps/io.hpp"

#include <cmath>

namespace qps {

namespace {

json num(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

json mat(const mat2r& m) { return json::array({json::array({num(m.a), num(m.b)}), json::array({num(m.c), num(m.d)})}); }

} // namespace

std::string csv_preamble(const output_stamp& s, const std::string& columns) {
    return "# qps " + std::string(tool_version) + " " + s.command + " config " + s.config_hash + "\n" + columns + "\n";
}

json json_stamp(const output_stamp& s) {
    json j;
    j["tool"] = "qps";
    j["version"] = std::string(tool_version);
    j["command"] = s.command;
    j["config_hash"] = s.config_hash;
    return j;
}

std::string csv_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out + "\n";
}

json to_json(const band_structure& bs) {
    json j;
    j["p"] = bs.p;
    j["q"] = bs.q;
    j["lambda"] = num(bs.lambda);
    j["measure"] = num(bs.measure());
    j["flagged"] = bs.flagged;
    j["extended_precision"] = bs.extended;
    json bands = json::array();
    for (const auto& b : bs.bands) bands.push_back(json::array({num(b.lo), num(b.hi)}));
    j["bands"] = bands;
    return j;
}

json to_json(const gap_record& g) {
    json j;
    j["m"] = g.m;
    j["e_minus"] = num(g.e_minus);
    j["e_plus"] = num(g.e_plus);
    j["width"] = num(g.width);
    j["ids"] = json::array({g.ids_num, g.ids_den});
    j["rho_resid"] = num(g.rho_resid);
    j["flagged"] = g.flagged;
    return j;
}

json to_json(const decay_fit& f) {
    json j;
    j["gamma"] = num(f.gamma);
    j["intercept"] = num(f.intercept);
    j["max_residual"] = num(f.residual);
    j["rms"] = num(f.rms);
    j["points"] = f.points;
    j["notes"] = f.notes;
    return j;
}

json to_json(const bloch_solution& s, const std::string& coefficient_file) {
    json j;
    j["energy"] = num(s.energy);
    j["eigenvalue"] = num(s.eigenvalue);
    j["theta"] = num(static_cast<double>(s.theta));
    j["theta_reflected"] = s.reflected;
    j["n_tilde"] = s.n_tilde ? json(*s.n_tilde) : json(nullptr);
    j["resonance_defect"] = num(s.resonance_defect);
    j["duality_residual"] = num(s.duality_residual);
    j["decay_rate"] = num(s.decay_rate);
    j["decay_onset"] = s.decay_onset;
    j["separation"] = num(s.separation);
    j["N"] = s.N;
    json hist = json::array();
    for (const auto& [n, e] : s.truncation_history) hist.push_back(json::array({n, num(e)}));
    j["truncation_history"] = hist;
    if (!coefficient_file.empty()) j["coefficients"] = coefficient_file;
    return j;
}

json to_json(const gap_dossier& d) {
    json j;
    j["m"] = d.m;
    j["approximant"] = json::array({d.approximant.p, d.approximant.q});
    j["e_minus"] = num(d.e_minus);
    j["e_plus"] = num(d.e_plus);
    j["width"] = num(d.width);
    j["edge"] = d.upper_edge ? "upper" : "lower";
    j["approximant_edge"] = num(d.edge_energy);
    j["bloch"] = to_json(d.bloch, "");
    j["n_tilde"] = d.res.n_tilde;
    j["label_ratio"] = num(d.res.label_ratio);
    j["relation_residual"] = num(d.relation_residual);
    json r;
    r["energy"] = num(d.red.energy);
    r["sign"] = d.red.P.sign;
    r["mu"] = num(d.red.P.mu);
    r["mu_iterate"] = num(d.red.mu_iterate);
    r["mu_agreement"] = num(d.red.mu_agreement);
    r["choice"] = std::string(1, d.red.choice);
    r["criterion_real"] = num(d.red.criterion_real);
    r["criterion_imag"] = num(d.red.criterion_imag);
    r["residual"] = num(d.red.residual);
    r["degree"] = d.red.R.degree;
    r["flagged"] = d.red.flagged;
    j["reduction"] = r;
    j["collapsed"] = d.collapsed;
    j["mu_consistent"] = d.mu_consistent;
    if (d.av) {
        json a;
        a["r11_sq"] = num(d.av->r11_sq);
        a["r11_r12"] = num(d.av->r11_r12);
        a["r12_sq"] = num(d.av->r12_sq);
        a["r21_sq"] = num(d.av->r21_sq);
        a["shift_identity_defect"] = num(d.av->shift_identity_defect);
        a["gram_determinant"] = num(d.av->wronskian);
        a["r_norm"] = num(d.av->r_norm);
        j["averages"] = a;
        j["epsilon"] = num(d.epsilon);
        j["eps_opposite_mu"] = d.eps_opposite_mu;
        j["width_bound"] = d.width_bound;
        j["width_slack"] = num(d.width_slack);
    }
    if (d.shift) {
        json s;
        s["rho_edge"] = num(d.shift->rho_edge);
        s["rho_shifted"] = num(d.shift->rho_shifted);
        s["error_edge"] = num(d.shift->error_edge);
        s["error_shifted"] = num(d.shift->error_shifted);
        s["differs"] = d.shift->differs;
        s["monotone"] = d.shift->monotone;
        j["rotation_shift"] = s;
    }
    if (d.expansion) {
        json e;
        e["eps"] = num(d.expansion->eps);
        e["remainder_norm"] = num(d.expansion->remainder_norm);
        e["identity_residual"] = num(d.expansion->identity_residual);
        e["degree_before"] = d.expansion->degree_before;
        e["degree_after"] = d.expansion->degree_after;
        e["P2"] = mat(d.expansion->P2);
        e["sqrt_delta"] = d.expansion->sqrt_delta ? num(*d.expansion->sqrt_delta) : json(nullptr);
        j["expansion"] = e;
    }
    j["notes"] = d.notes;
    return j;
}

json to_json(const decay_report& r) {
    json j;
    json convs = json::array();
    for (const auto& c : r.convergents) convs.push_back(json::array({c.p, c.q}));
    j["convergents"] = convs;
    json rows = json::array();
    for (const auto& row : r.rows) {
        json x;
        x["m"] = row.m;
        x["width"] = num(row.width);
        x["e_minus"] = num(row.e_minus);
        x["e_plus"] = num(row.e_plus);
        json ws = json::array();
        for (double w : row.widths) ws.push_back(num(w));
        x["widths"] = ws;
        x["relative_change"] = num(row.relative_change);
        x["stable"] = row.stable;
        rows.push_back(x);
    }
    j["rows"] = rows;
    j["fit"] = r.fit ? to_json(*r.fit) : json(nullptr);
    j["strictly_decreasing"] = r.strictly_decreasing;
    j["monotone_through"] = r.monotone_through;
    j["all_stable"] = r.all_stable;
    j["notes"] = r.notes;
    return j;
}

json to_json(const homogeneity_report& r) {
    json j;
    j["approximant"] = json::array({r.approximant.p, r.approximant.q});
    json rows = json::array();
    for (const auto& row : r.rows) {
        json x;
        x["sigma"] = num(row.sigma);
        x["min_ratio"] = num(row.min_ratio);
        x["argmin"] = num(row.argmin);
        x["gap_sum_at_argmin"] = num(row.at_argmin.total);
        x["lowest_label_at_argmin"] = row.at_argmin.lowest_label;
        x["gap_sum_excluding_lowest_at_argmin"] = num(row.at_argmin.excluding_lowest);
        x["max_gap_fraction"] = num(row.max_gap_fraction);
        x["max_gap_fraction_excluding_lowest"] = num(row.max_gap_fraction_excluding_lowest);
        rows.push_back(x);
    }
    j["rows"] = rows;
    j["non_decreasing"] = r.non_decreasing;
    j["overall_min"] = num(r.overall_min);
    return j;
}

json to_json(const beta_estimate& b) {
    json j;
    j["beta"] = num(static_cast<double>(b.beta));
    j["k_lo"] = b.k_lo;
    j["k_hi"] = b.k_hi;
    j["monotone_growth"] = b.monotone_growth;
    json w = json::array();
    for (const auto& x : b.witnesses) w.push_back(json::array({x.k, num(static_cast<double>(x.ratio))}));
    j["witnesses"] = w;
    return j;
}

json to_json(const std::vector<claim>& claims) {
    json arr = json::array();
    for (const auto& c : claims) {
        json x;
        x["claim"] = c.name;
        x["pass"] = c.pass;
        x["measured"] = num(c.measured);
        x["bound"] = num(c.bound);
        x["slack"] = num(c.slack);
        arr.push_back(x);
    }
    return arr;
}

} // namespace qps
