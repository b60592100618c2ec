#include "ssmid/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ssmid {

namespace {

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& context) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("csv: bad number '" + s + "' in " + context);
    }
    if (pos != s.size())
        throw ConfigError("csv: trailing characters in '" + s + "' in " + context);
    return v;
}

} // namespace

const std::vector<std::string>& battx_input_names() {
    static const std::vector<std::string> n = {"I", "T_amb"};
    return n;
}

const std::vector<std::string>& battx_meas_names() {
    static const std::vector<std::string> n = {"V", "T_surf"};
    return n;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds,
                       const std::vector<std::string>& input_names,
                       const std::vector<std::string>& meas_names) {
    ds.validate();
    if (static_cast<Eigen::Index>(input_names.size()) != ds.input_dim() ||
        static_cast<Eigen::Index>(meas_names.size()) != ds.meas_dim())
        throw ConfigError("csv: column name counts do not match dataset dims");

    std::ofstream f(path, std::ios::binary); // binary: byte-stable line endings
    if (!f) throw ConfigError("csv: cannot open '" + path.string() + "' for writing");
    f << "t";
    for (const auto& n : input_names) f << "," << n;
    for (const auto& n : meas_names) f << "," << n;
    f << "\n";
    for (Eigen::Index k = 0; k < ds.length(); ++k) {
        f << fmt_double(static_cast<double>(k + 1) * ds.dt);
        for (Eigen::Index j = 0; j < ds.input_dim(); ++j)
            f << "," << fmt_double(ds.inputs(k, j));
        for (Eigen::Index j = 0; j < ds.meas_dim(); ++j)
            f << "," << fmt_double(ds.measurements(k, j));
        f << "\n";
    }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
    std::vector<std::string> u_names, z_names;
    for (Eigen::Index j = 0; j < ds.input_dim(); ++j)
        u_names.push_back("u" + std::to_string(j + 1));
    for (Eigen::Index j = 0; j < ds.meas_dim(); ++j)
        z_names.push_back("z" + std::to_string(j + 1));
    write_dataset_csv(path, ds, u_names, z_names);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("csv: cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(f, line)) throw ConfigError("csv: empty file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "t")
        throw ConfigError("csv: header must start with 't' and carry input/measurement columns");

    Eigen::Index n_u = 0, n_z = 0;
    const std::vector<std::string> battx_header = {"t", "I", "T_amb", "V", "T_surf"};
    if (header == battx_header) {
        n_u = 2;
        n_z = 2;
    } else {
        for (size_t i = 1; i < header.size(); ++i) {
            if (header[i].starts_with("u")) {
                if (n_z > 0) throw ConfigError("csv: u-columns must precede z-columns");
                ++n_u;
            } else if (header[i].starts_with("z")) {
                ++n_z;
            } else {
                throw ConfigError("csv: unrecognized column '" + header[i] + "'");
            }
        }
        if (n_u == 0 || n_z == 0)
            throw ConfigError("csv: need at least one input and one measurement column");
    }

    std::vector<double> times;
    std::vector<Vec> u_rows, z_rows;
    long row = 1;
    while (std::getline(f, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<Eigen::Index>(fields.size()) != 1 + n_u + n_z)
            throw ConfigError("csv: row " + std::to_string(row) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(1 + n_u + n_z));
        const std::string ctx = path.string() + ":" + std::to_string(row);
        times.push_back(parse_double(fields[0], ctx));
        Vec u(n_u), z(n_z);
        for (Eigen::Index j = 0; j < n_u; ++j)
            u[j] = parse_double(fields[static_cast<size_t>(1 + j)], ctx);
        for (Eigen::Index j = 0; j < n_z; ++j)
            z[j] = parse_double(fields[static_cast<size_t>(1 + n_u + j)], ctx);
        u_rows.push_back(std::move(u));
        z_rows.push_back(std::move(z));
    }
    if (times.empty()) throw ConfigError("csv: no data rows in " + path.string());

    double dt;
    if (times.size() == 1) {
        dt = times[0];
    } else {
        dt = times[1] - times[0];
        for (size_t k = 1; k < times.size(); ++k) {
            const double step = times[k] - times[k - 1];
            if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
                throw ConfigError("csv: non-uniform sampling at row " + std::to_string(k + 2));
        }
    }
    if (!(dt > 0.0)) throw ConfigError("csv: sampling interval must be positive");

    Dataset ds;
    ds.dt = dt;
    ds.label = path.stem().string();
    ds.inputs.resize(static_cast<Eigen::Index>(u_rows.size()), n_u);
    ds.measurements.resize(static_cast<Eigen::Index>(z_rows.size()), n_z);
    for (size_t k = 0; k < u_rows.size(); ++k) {
        ds.inputs.row(static_cast<Eigen::Index>(k)) = u_rows[k].transpose();
        ds.measurements.row(static_cast<Eigen::Index>(k)) = z_rows[k].transpose();
    }
    ds.validate();
    return ds;
}

void write_table_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& header, const Mat& rows) {
    if (static_cast<Eigen::Index>(header.size()) != rows.cols())
        throw ConfigError("csv: table header width does not match data");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("csv: cannot open '" + path.string() + "' for writing");
    for (size_t i = 0; i < header.size(); ++i)
        f << (i ? "," : "") << header[i];
    f << "\n";
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < rows.cols(); ++c)
            f << (c ? "," : "") << fmt_double(rows(r, c));
        f << "\n";
    }
}

} // namespace ssmid
