#include "levidm/fileio.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "levidm/errors.hpp"

namespace levidm::io {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_out(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "w"));
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

} // namespace

void write_trajectory_csv(const std::string& path, const sim::Trajectory& traj,
                          const std::string& config_hash) {
    FilePtr f = open_out(path);
    if (!config_hash.empty()) {
        std::fprintf(f.get(), "# config=%s\n", config_hash.c_str());
    }
    std::fprintf(f.get(), "t,x,y,z,vx,vy,vz\n");
    const bool has_v = traj.has_velocities();
    for (std::size_t i = 0; i < traj.n_samples; ++i) {
        const double t = static_cast<double>(i) * traj.dt_s;
        std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t,
                     traj.positions_m[0][i], traj.positions_m[1][i],
                     traj.positions_m[2][i],
                     has_v ? traj.velocities_m_s[0][i] : 0.0,
                     has_v ? traj.velocities_m_s[1][i] : 0.0,
                     has_v ? traj.velocities_m_s[2][i] : 0.0);
    }
}

sim::Trajectory read_trajectory_csv(const std::string& path,
                                    const sim::TrapConfig& trap) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trajectory file: " + path);
    std::string line;
    // Skip comments; the first remaining line must be the header.
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') break;
    }
    if (line.rfind("t,x,y,z", 0) != 0) {
        throw InvalidInput(path + ": not a trajectory CSV (bad header)");
    }

    sim::Trajectory traj;
    traj.trap = trap;
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        double vals[7];
        int consumed = 0;
        const char* p = line.c_str();
        for (int k = 0; k < 7; ++k) {
            char* end = nullptr;
            vals[k] = std::strtod(p, &end);
            if (end == p) {
                throw InvalidInput(path + ": malformed row '" + line + "'");
            }
            p = end;
            if (*p == ',') ++p;
            ++consumed;
        }
        (void)consumed;
        times.push_back(vals[0]);
        traj.positions_m[0].push_back(vals[1]);
        traj.positions_m[1].push_back(vals[2]);
        traj.positions_m[2].push_back(vals[3]);
        traj.velocities_m_s[0].push_back(vals[4]);
        traj.velocities_m_s[1].push_back(vals[5]);
        traj.velocities_m_s[2].push_back(vals[6]);
    }
    if (times.size() < 2) throw InvalidInput(path + ": too few samples");
    const double dt = times[1] - times[0];
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double step = times[i] - times[i - 1];
        if (std::abs(step - dt) > 1e-9 * std::max(dt, 1e-300)) {
            throw InvalidInput(path + ": non-uniform time grid");
        }
    }
    traj.dt_s = dt;
    traj.n_samples = times.size();
    return traj;
}

void write_spectra_csv(const std::string& path,
                       const spectra::SpectralEstimate& est,
                       const std::string& config_hash) {
    FilePtr f = open_out(path);
    if (!config_hash.empty()) {
        std::fprintf(f.get(), "# config=%s\n", config_hash.c_str());
    }
    std::fprintf(f.get(), "f_hz,s_xx,s_yy,s_zz,re_s_xy,im_s_xy\n");
    for (std::size_t k = 0; k < est.freq_hz.size(); ++k) {
        std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                     est.freq_hz[k], est.s_xx[k], est.s_yy[k], est.s_zz[k],
                     est.s_xy[k].real(), est.s_xy[k].imag());
    }
}

void write_scan_csv(const std::string& path, const std::vector<ScanRow>& rows,
                    const std::string& config_hash) {
    FilePtr f = open_out(path);
    if (!config_hash.empty()) {
        std::fprintf(f.get(), "# config=%s\n", config_hash.c_str());
    }
    std::fprintf(f.get(),
                 "m_chi_ev,m_mediator_ev,gamma_per_s,phase_rate_per_s,"
                 "visibility,phase_rad\n");
    for (const auto& r : rows) {
        std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                     r.m_chi_ev, r.m_mediator_ev, r.report.gamma_rate_per_s,
                     r.report.phase_rate_per_s, r.report.visibility,
                     r.report.phase_rad);
    }
}

namespace {

bool glob_match(const std::string& pattern, const std::string& name) {
    std::size_t p = 0, n = 0;
    std::size_t star = std::string::npos, mark = 0;
    while (n < name.size()) {
        if (p < pattern.size() &&
            (pattern[p] == '?' || pattern[p] == name[n])) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = n;
        } else if (star != std::string::npos) {
            p = star + 1;
            n = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

} // namespace

std::vector<std::string> expand_glob(const std::string& pattern) {
    const fs::path pat(pattern);
    const std::string fname = pat.filename().string();
    if (fname.find('*') == std::string::npos &&
        fname.find('?') == std::string::npos) {
        return {pattern};
    }
    fs::path dir = pat.parent_path();
    if (dir.empty()) dir = ".";
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        if (glob_match(fname, entry.path().filename().string())) {
            out.push_back(entry.path().string());
        }
    }
    if (ec) throw IoError("cannot list directory: " + dir.string());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace levidm::io
