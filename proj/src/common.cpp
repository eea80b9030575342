#include "combgame/common.hpp"

#include <sstream>

namespace combgame {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_action: return "invalid-action";
    case Errc::inconsistency: return "inconsistency";
    case Errc::uninitialized_arm: return "uninitialized-arm";
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::no_path: return "no-path";
    case Errc::invalid_graph: return "invalid-graph";
    case Errc::invalid_answer: return "invalid-answer";
    case Errc::invalid_answer_space: return "invalid-answer-space";
    case Errc::unsupported_geometry: return "unsupported-geometry";
    case Errc::numeric: return "numeric";
    case Errc::invalid_mass: return "invalid-mass";
    case Errc::invalid_pair: return "invalid-pair";
    case Errc::tracking: return "tracking";
    case Errc::domain: return "domain";
    case Errc::degenerate_instance: return "degenerate-instance";
    case Errc::io: return "io";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

std::size_t ArmSetHash::operator()(const ArmSet& s) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (int a : s) {
    h ^= static_cast<std::size_t>(a) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

std::vector<double> incidence(const ArmSet& action, int d) {
  std::vector<double> v(static_cast<std::size_t>(d), 0.0);
  for (int a : action) {
    if (a < 0 || a >= d) throw Error(Errc::invalid_action, "arm index out of range");
    v[static_cast<std::size_t>(a)] = 1.0;
  }
  return v;
}

double set_sum(const ArmSet& action, std::span<const double> v) {
  double s = 0.0;
  for (int a : action) s += v[static_cast<std::size_t>(a)];
  return s;
}

void symmetric_difference(const ArmSet& i_set, const ArmSet& j_set, std::vector<SignedArm>& out) {
  out.clear();
  std::size_t i = 0, j = 0;
  while (i < i_set.size() || j < j_set.size()) {
    if (j == j_set.size() || (i < i_set.size() && i_set[i] < j_set[j])) {
      out.push_back({i_set[i++], -1});
    } else if (i == i_set.size() || j_set[j] < i_set[i]) {
      out.push_back({j_set[j++], +1});
    } else {
      ++i;
      ++j;
    }
  }
}

std::string format_arm_set(const ArmSet& s) {
  std::ostringstream os;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ';';
    os << s[i] + 1;
  }
  return os.str();
}

}  // namespace combgame
