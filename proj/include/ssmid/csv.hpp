#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ssmid/types.hpp"

namespace ssmid {

/// Dataset CSV layout: header `t,<inputs...>,<measurements...>`, one row per
/// sample, '.' decimal separator, UTF-8. The time column is k*dt for
/// k = 1..T. BattX datasets use the named header `t,I,T_amb,V,T_surf`;
/// generic models use `t,u1..u{n_u},z1..z{n_z}`.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds,
                       const std::vector<std::string>& input_names,
                       const std::vector<std::string>& meas_names);

/// Generic-header convenience overload (u1.., z1..).
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);

/// Parse a dataset CSV. Recognizes the named BattX header and the generic
/// u*/z* header; sampling interval is inferred from the time column and must
/// be uniform.
Dataset read_dataset_csv(const std::filesystem::path& path);

const std::vector<std::string>& battx_input_names(); // {"I", "T_amb"}
const std::vector<std::string>& battx_meas_names();  // {"V", "T_surf"}

/// Write a generic numeric table (used by the experiment drivers for traces
/// and statistics). Values are serialized with round-trip precision.
void write_table_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& header,
                     const Mat& rows);

} // namespace ssmid
