#pragma once

#include <cstdint>
#include <filesystem>

namespace zinreg::testing {

/// Writes a synthetic cohort with the MESA column layout:
/// cac, gender, race, dm, smoking, age, bmi, dbp, sbp, hdl, ldl.
/// The age effect is proportional across the two parts and DBP has no
/// effect at all. About 2% of rows carry a missing value.
/// Returns the number of rows with a missing value.
int write_mesa_fixture(const std::filesystem::path& path, int n, std::uint64_t seed);

}  // namespace zinreg::testing
