#pragma once

#include <string>

#include "viseq/behavior.hpp"
#include "viseq/game.hpp"
#include "viseq/signal.hpp"

namespace viseq {

// Shortest decimal that round-trips to the same double, so serialized
// numbers are byte-stable and ingest exactly.
std::string format_double(double value);

// Strict full-string parse; throws ParseError.
double parse_double(const std::string& text);
int parse_int(const std::string& text);

std::string to_token(VisType vis_type);
std::string to_token(InformationAccess access);
std::string to_token(Location location);

VisType vis_type_from_token(const std::string& token);
InformationAccess access_from_token(const std::string& token);
Location location_from_token(const std::string& token);

}  // namespace viseq
