#include "dvlnav/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dvlnav {
namespace {

const std::vector<std::string> kTruthHeader{"t",  "pn", "pe", "pd", "vn", "ve", "vd", "qw", "qx",
                                            "qy", "qz", "wx", "wy", "wz", "fx", "fy", "fz"};
const std::vector<std::string> kImuHeader{"t", "ax", "ay", "az", "gx", "gy", "gz"};
const std::vector<std::string> kBeamHeader{"t", "b1", "b2", "b3", "b4", "vx_true", "vy_true", "vz_true"};
const std::vector<std::string> kVelocityHeader{"t", "vx", "vy", "vz", "r11", "r22", "r33"};
const std::vector<std::string> kNavHeader{"t",       "vn",      "ve",      "vd",      "roll_deg", "pitch_deg",
                                          "yaw_deg", "p_vn",    "p_ve",    "p_vd",    "p_roll",   "p_pitch",
                                          "p_yaw",   "innov_x", "innov_y", "innov_z", "r11",      "r22",
                                          "r33",     "updated"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Columns are looked up by name so extra columns are tolerated.
std::vector<std::size_t> require_columns(const CsvTable& t, const std::vector<std::string>& names,
                                         const std::filesystem::path& path) {
    std::vector<std::size_t> idx;
    for (const auto& n : names) {
        try {
            idx.push_back(t.column(n));
        } catch (const IoError&) {
            throw IoError(path.string() + ": missing column '" + n + "'");
        }
    }
    return idx;
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw IoError("missing column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": missing header row");
    table.header = split(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != table.header.size()) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(table.header.size()) + " fields, got " + std::to_string(cells.size()));
        }
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& c = cells[i];
            const auto res = std::from_chars(c.data(), c.data() + c.size(), row[i]);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
                throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + c + "'");
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    std::string buf;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        buf += (i ? "," : "") + table.header[i];
    }
    buf += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) buf += ',';
            buf += format_number(row[i]);
        }
        buf += '\n';
    }
    out << buf;
    if (!out) throw IoError("failed writing " + path.string());
}

void write_truth_csv(const std::filesystem::path& path, const std::vector<GroundTruthSample>& truth) {
    CsvTable t{kTruthHeader, {}};
    t.rows.reserve(truth.size());
    for (const auto& s : truth) {
        const Quat& q = s.attitude;
        t.rows.push_back({s.time, s.position.x(), s.position.y(), s.position.z(), s.velocity_n.x(),
                          s.velocity_n.y(), s.velocity_n.z(), q.w(), q.x(), q.y(), q.z(), s.angular_rate_b.x(),
                          s.angular_rate_b.y(), s.angular_rate_b.z(), s.specific_force_b.x(),
                          s.specific_force_b.y(), s.specific_force_b.z()});
    }
    write_csv(path, t);
}

std::vector<GroundTruthSample> read_truth_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const auto c = require_columns(t, kTruthHeader, path);
    std::vector<GroundTruthSample> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        GroundTruthSample s;
        s.time = r[c[0]];
        s.position = {r[c[1]], r[c[2]], r[c[3]]};
        s.velocity_n = {r[c[4]], r[c[5]], r[c[6]]};
        s.attitude = Quat(r[c[7]], r[c[8]], r[c[9]], r[c[10]]);
        s.angular_rate_b = {r[c[11]], r[c[12]], r[c[13]]};
        s.specific_force_b = {r[c[14]], r[c[15]], r[c[16]]};
        out.push_back(s);
    }
    return out;
}

void write_imu_csv(const std::filesystem::path& path, const std::vector<ImuSample>& imu) {
    CsvTable t{kImuHeader, {}};
    t.rows.reserve(imu.size());
    for (const auto& s : imu) {
        t.rows.push_back({s.time, s.accel.x(), s.accel.y(), s.accel.z(), s.gyro.x(), s.gyro.y(), s.gyro.z()});
    }
    write_csv(path, t);
}

std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const auto c = require_columns(t, kImuHeader, path);
    std::vector<ImuSample> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        out.push_back({r[c[0]], {r[c[1]], r[c[2]], r[c[3]]}, {r[c[4]], r[c[5]], r[c[6]]}});
    }
    return out;
}

void write_beam_csv(const std::filesystem::path& path, const std::vector<BeamSample>& beams) {
    CsvTable t{kBeamHeader, {}};
    t.rows.reserve(beams.size());
    for (const auto& s : beams) {
        t.rows.push_back({s.time, s.beams[0], s.beams[1], s.beams[2], s.beams[3], s.truth_velocity_dvl.x(),
                          s.truth_velocity_dvl.y(), s.truth_velocity_dvl.z()});
    }
    write_csv(path, t);
}

std::vector<BeamSample> read_beam_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const auto c = require_columns(t, kBeamHeader, path);
    std::vector<BeamSample> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        BeamSample s;
        s.time = r[c[0]];
        s.beams = {r[c[1]], r[c[2]], r[c[3]], r[c[4]]};
        s.truth_velocity_dvl = {r[c[5]], r[c[6]], r[c[7]]};
        out.push_back(s);
    }
    return out;
}

void write_velocity_csv(const std::filesystem::path& path, const std::vector<TimedEstimate>& estimates) {
    CsvTable t{kVelocityHeader, {}};
    t.rows.reserve(estimates.size());
    for (const auto& e : estimates) {
        const auto& v = e.estimate.velocity_dvl;
        const auto& r = e.estimate.covariance;
        t.rows.push_back({e.time, v.x(), v.y(), v.z(), r(0, 0), r(1, 1), r(2, 2)});
    }
    write_csv(path, t);
}

std::vector<TimedEstimate> read_velocity_csv(const std::filesystem::path& path, EstimateSource source) {
    const CsvTable t = read_csv(path);
    const auto c = require_columns(t, kVelocityHeader, path);
    std::vector<TimedEstimate> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        TimedEstimate e;
        e.time = r[c[0]];
        e.estimate.velocity_dvl = {r[c[1]], r[c[2]], r[c[3]]};
        e.estimate.covariance = Vec3(r[c[4]], r[c[5]], r[c[6]]).asDiagonal();
        e.estimate.source = source;
        out.push_back(e);
    }
    return out;
}

void write_nav_log_csv(const std::filesystem::path& path, const std::vector<NavLogRow>& log) {
    CsvTable t{kNavHeader, {}};
    t.rows.reserve(log.size());
    for (const auto& row : log) {
        const Vec3 e = euler_from_quat(row.nav.attitude) * kRadToDeg;
        const auto& v = row.nav.velocity_n;
        const auto& p = row.p_diag;
        t.rows.push_back({row.time,       v.x(),           v.y(),           v.z(),
                          e.x(),          e.y(),           e.z(),           p[kVel],
                          p[kVel + 1],    p[kVel + 2],     p[kAtt],         p[kAtt + 1],
                          p[kAtt + 2],    row.innovation.x(), row.innovation.y(), row.innovation.z(),
                          row.r_diag.x(), row.r_diag.y(),  row.r_diag.z(),  row.updated ? 1.0 : 0.0});
    }
    write_csv(path, t);
}

std::vector<NavLogRecord> read_nav_log_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const auto c = require_columns(
        t, {"t", "vn", "ve", "vd", "roll_deg", "pitch_deg", "yaw_deg", "r11", "r22", "r33", "updated"}, path);
    std::vector<NavLogRecord> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        NavLogRecord rec;
        rec.time = r[c[0]];
        rec.velocity_n = {r[c[1]], r[c[2]], r[c[3]]};
        rec.euler_deg = {r[c[4]], r[c[5]], r[c[6]]};
        rec.r_diag = {r[c[7]], r[c[8]], r[c[9]]};
        rec.updated = r[c[10]] != 0.0;
        out.push_back(rec);
    }
    return out;
}

}  // namespace dvlnav
