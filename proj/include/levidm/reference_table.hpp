#pragma once

#include <ostream>
#include <span>
#include <string>

// Reference dataset of demonstrated and projected levitated-sensor
// sensitivities and the dark-matter parameter space they probe. Display-only:
// none of these numbers are recomputed anywhere.

namespace levidm::reftable {

enum class Flag { measured, projected, multi_particle };

struct ReferenceEntry {
    std::string levitation_type; // trap class and mass scale
    std::string sensitivity_a;   // acceleration sensitivity, g/rtHz
    std::string sensitivity_f;   // force sensitivity, N/rtHz
    std::string candidate;
    std::string parameter_space;
    std::string mass_range;
    Flag flag = Flag::projected;
};

std::span<const ReferenceEntry> entries();

std::string flag_name(Flag f);

void print_text(std::ostream& os);
void print_json(std::ostream& os);
void print_csv(std::ostream& os);

} // namespace levidm::reftable
