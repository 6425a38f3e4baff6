#pragma once

#include <string>

#include "tomocg/randgen.hpp"

namespace tomocg::setup_io {

/// Writes a measurement setup as one operator file per outcome plus a
/// manifest (parameters, then "role filename" lines). Clean POMs are stored
/// the same way with no actual_* files; on load the actual outcomes then
/// default to the intended ones.
void save_setup(const std::string& dir, const randgen::MeasurementSetup& setup,
                bool write_actual = true);

randgen::MeasurementSetup load_setup(const std::string& dir);

/// well outcomes first, then intended; the clean-POM ordering expected by
/// randgen::perturb_pom.
std::vector<qops::PovmElement> clean_elements(const randgen::MeasurementSetup& setup);

}  // namespace tomocg::setup_io
