#pragma once

#include "bigthick/teleontology.hpp"
#include "bigthick/unification.hpp"

namespace bigthick {

// Built-in schemas for the geospatial reference source and the diary source.
// Every one of them can be replaced by a JSON file through the CLI config.

/// Place hierarchy under Entity with the OSM-style fclass projection.
Teleontology reference_ktlo();
Teleontology reference_etg();

/// Person, Phone and the Location types named by the diary `where` answers.
Teleontology personal_ktlo();
Teleontology personal_etg();

/// Personal Location types paired with reference place types.
MappingConfig default_mapping();

}  // namespace bigthick
