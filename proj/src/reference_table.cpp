#include "levidm/reference_table.hpp"

#include <array>
#include <iomanip>

#include "json.hpp"

namespace levidm::reftable {

namespace {

const std::array<ReferenceEntry, 10> kEntries = {{
    {"optical (fg-ng)", "6e-6 - 9e-8", "1e-18 - 6e-21", "Millicharge",
     "charge [e] ~ 1e-4", "GeV - TeV", Flag::measured},
    {"optical (fg-ng)", "6e-6 - 9e-8", "1e-18 - 6e-21", "Composite",
     "sigma_chi-n [cm^2] ~ 1e-28", "1e3 - 1e4 GeV", Flag::measured},
    {"optical (fg-ng)", "6e-6 - 9e-8", "1e-18 - 6e-21", "Low-mass particle",
     "sigma_SI [cm^2] ~ 1e-30", "0.1 - 100 MeV", Flag::multi_particle},
    {"optical (fg-ng)", "6e-6 - 9e-8", "1e-18 - 6e-21", "Sterile neutrino",
     "|U_e4|^2 ~ 1e-4 - 1e-6", "0.1 - 1 MeV", Flag::multi_particle},
    {"magnetic (ug-mg)", "1e-10 - 9e-12", "5e-12 - 5e-19", "ALPs",
     "g_aee ~ 1e-14", "1e-13 - 1e-18 eV", Flag::projected},
    {"magnetic (ug-mg)", "1e-10 - 9e-12", "5e-12 - 5e-19", "Axions",
     "g_a-gamma [1/GeV] ~ 1e-10", "1e-12 - 1e-14 eV", Flag::projected},
    {"magnetic (ug-mg)", "1e-10 - 9e-12", "5e-12 - 5e-19", "Dark photons",
     "epsilon ~ 1e-8", "1e-12 - 1e-14 eV", Flag::projected},
    {"magnetic (ug-mg)", "1e-10 - 9e-12", "5e-12 - 5e-19", "ULDM",
     "g_B-L ~ 1e-25", "1e-14 - 1e-16 eV", Flag::projected},
    {"electric (40 fg)", "5e-6", "2e-21", "ULDM",
     "no concrete experimental proposals", "", Flag::projected},
    {"electric (40 fg)", "5e-6", "2e-21", "Composite",
     "beyond trapped atomic ions", "", Flag::projected},
}};

} // namespace

std::span<const ReferenceEntry> entries() {
    return {kEntries.data(), kEntries.size()};
}

std::string flag_name(Flag f) {
    switch (f) {
    case Flag::measured: return "measured";
    case Flag::projected: return "projected";
    case Flag::multi_particle: return "multi-particle";
    }
    return "unknown";
}

void print_text(std::ostream& os) {
    os << std::left;
    os << std::setw(18) << "system" << std::setw(16) << "sqrt(S_a)[g/rtHz]"
       << " " << std::setw(16) << "sqrt(S_F)[N/rtHz]" << " " << std::setw(19)
       << "candidate" << std::setw(36) << "parameter space" << std::setw(18)
       << "mass range" << "flag" << "\n";
    os << std::string(128, '-') << "\n";
    for (const auto& e : kEntries) {
        os << std::setw(18) << e.levitation_type << std::setw(16)
           << e.sensitivity_a << " " << std::setw(16) << e.sensitivity_f << " "
           << std::setw(19) << e.candidate << std::setw(36)
           << e.parameter_space << std::setw(18) << e.mass_range
           << flag_name(e.flag) << "\n";
    }
}

void print_json(std::ostream& os) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : kEntries) {
        arr.push_back({{"levitation_type", e.levitation_type},
                       {"sensitivity_a_g_rthz", e.sensitivity_a},
                       {"sensitivity_f_n_rthz", e.sensitivity_f},
                       {"candidate", e.candidate},
                       {"parameter_space", e.parameter_space},
                       {"mass_range", e.mass_range},
                       {"flag", flag_name(e.flag)}});
    }
    os << arr.dump(2) << "\n";
}

void print_csv(std::ostream& os) {
    os << "levitation_type,sensitivity_a_g_rthz,sensitivity_f_n_rthz,"
          "candidate,parameter_space,mass_range,flag\n";
    for (const auto& e : kEntries) {
        os << '"' << e.levitation_type << "\",\"" << e.sensitivity_a << "\",\""
           << e.sensitivity_f << "\",\"" << e.candidate << "\",\""
           << e.parameter_space << "\",\"" << e.mass_range << "\",\""
           << flag_name(e.flag) << "\"\n";
    }
}

} // namespace levidm::reftable
