#pragma once

#include <array>
#include <string>

#include "istb/types.hpp"

namespace istb {

struct CatalogLoadResult {
  SeismicCatalog catalog;
  std::size_t n_below_mc = 0;   // events removed by the completeness filter
  bool was_unsorted = false;    // input required auto-sorting
};

// Catalog CSV: header "t_s,x_m,y_m,z_m,mw". Coordinates are shifted by
// -well_tip so the stored catalog is well-tip-relative. Malformed rows
// raise with the 1-based line number; negative times are rejected.
CatalogLoadResult load_catalog(const std::string& path, double mc,
                               const std::array<double, 3>& well_tip = {0, 0, 0});

// Hydraulics CSV: header "t_s,flow_lps,whp_mpa". Shut-in time is derived
// from the samples (first time after which flow stays zero).
HydraulicSeries load_hydraulics(const std::string& path);

void save_catalog(const std::string& path, const SeismicCatalog& catalog);
void save_hydraulics(const std::string& path, const HydraulicSeries& series);

// Writes content to path via a temp file + rename so rerun output never
// appears half-written.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace istb
