#pragma once

#include "qps/pipeline.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace qps {

using json = nlohmann::ordered_json;

/// Header fields every output file carries.
struct output_stamp {
    std::string command;
    std::string config_hash;
};

/// `# qps <version> <command> config <hash>` followed by the column header.
std::string csv_preamble(const output_stamp& s, const std::string& columns);
/// Object with tool, version, command and config_hash, ready for more fields.
json json_stamp(const output_stamp& s);

/// Row of comma-joined values.
std::string csv_row(const std::vector<std::string>& cells);

json to_json(const band_structure& bs);
json to_json(const gap_record& g);
json to_json(const decay_fit& f);
json to_json(const bloch_solution& s, const std::string& coefficient_file);
json to_json(const gap_dossier& d);
json to_json(const decay_report& r);
json to_json(const homogeneity_report& r);
json to_json(const beta_estimate& b);
json to_json(const std::vector<claim>& claims);

} // namespace qps
