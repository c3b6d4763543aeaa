#pragma once

#include <string>
#include <vector>

#include "levidm/decoherence.hpp"
#include "levidm/spectra.hpp"
#include "levidm/trap.hpp"

// Flat-file persistence. Every CSV starts with a `# config=<hash>` comment
// (when a hash is supplied) followed by the column header; values are written
// with 17 significant digits so re-reads are bit-faithful.

namespace levidm::io {

void write_trajectory_csv(const std::string& path, const sim::Trajectory& traj,
                          const std::string& config_hash);

// Reads a trajectory CSV (header t,x,y,z,vx,vy,vz). The trap metadata is not
// stored in the CSV; the caller provides it. Rejects non-uniform time grids.
sim::Trajectory read_trajectory_csv(const std::string& path,
                                    const sim::TrapConfig& trap);

void write_spectra_csv(const std::string& path,
                       const spectra::SpectralEstimate& est,
                       const std::string& config_hash);

struct ScanRow {
    double m_chi_ev = 0.0;
    double m_mediator_ev = 0.0;
    deco::DecoherenceReport report;
};

void write_scan_csv(const std::string& path, const std::vector<ScanRow>& rows,
                    const std::string& config_hash);

// Expands a path that may contain `*`/`?` in its filename component;
// literal paths pass through. Results are sorted.
std::vector<std::string> expand_glob(const std::string& pattern);

} // namespace levidm::io
