#pragma once

#include "ssmid/harness/config.hpp"

namespace ssmid::harness {

/// Build the (I, T_amb) input sequence for a profile. Currents are
/// discharge-negative amperes derived from the c-rate and the configured
/// cell capacity; the random-walk kind is a seeded, smoothed, reflected walk
/// over the configured c-rate band. Rows are steps.
Mat generate_profile(const ProfileSpec& spec, double capacity_ah);

} // namespace ssmid::harness
