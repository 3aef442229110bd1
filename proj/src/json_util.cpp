#include "aipi/json_util.hpp"

#include "aipi/common.hpp"

namespace aipi {

std::string canonical_dump(const json& j) {
  std::string out = j.dump(2, ' ', false, json::error_handler_t::strict);
  out.push_back('\n');
  return out;
}

json num(double x) { return round9(x); }

json num(const std::optional<double>& x) { return x ? json(round9(*x)) : json(nullptr); }

}  // namespace aipi
