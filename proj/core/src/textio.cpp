#include "viseq/textio.hpp"

#include <charconv>
#include <system_error>

#include "viseq/errors.hpp"

namespace viseq {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end || text.empty()) {
    throw ParseError("not a number: '" + text + "'");
  }
  return value;
}

int parse_int(const std::string& text) {
  int value = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end || text.empty()) {
    throw ParseError("not an integer: '" + text + "'");
  }
  return value;
}

std::string to_token(VisType vis_type) {
  return vis_type == VisType::Bar ? "bar" : "hops";
}

std::string to_token(InformationAccess access) {
  switch (access) {
    case InformationAccess::NoInfo: return "no_info";
    case InformationAccess::Private: return "private";
    case InformationAccess::Public: return "public";
  }
  return "no_info";
}

std::string to_token(Location location) {
  return location == Location::A ? "A" : "B";
}

VisType vis_type_from_token(const std::string& token) {
  if (token == "bar") return VisType::Bar;
  if (token == "hops") return VisType::Hops;
  throw ParseError("unknown vis_type '" + token + "' (expected bar|hops)");
}

InformationAccess access_from_token(const std::string& token) {
  if (token == "no_info") return InformationAccess::NoInfo;
  if (token == "private") return InformationAccess::Private;
  if (token == "public") return InformationAccess::Public;
  throw ParseError("unknown access '" + token + "' (expected private|public|no_info)");
}

Location location_from_token(const std::string& token) {
  if (token == "A") return Location::A;
  if (token == "B") return Location::B;
  throw ParseError("unknown choice '" + token + "' (expected A|B)");
}

}  // namespace viseq
