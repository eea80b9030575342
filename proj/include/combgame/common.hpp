#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace combgame {

// Sorted, duplicate-free list of 0-based arm indices.
using ArmSet = std::vector<int>;

// Dense integer handle for an action inside one run (see ActionRegistry).
using ActionId = std::int32_t;

enum class Errc {
  invalid_action,
  inconsistency,
  uninitialized_arm,
  invalid_parameter,
  no_path,
  invalid_graph,
  invalid_answer,
  invalid_answer_space,
  unsupported_geometry,
  numeric,
  invalid_mass,
  invalid_pair,
  tracking,
  domain,
  degenerate_instance,
  io,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

struct ArmSetHash {
  std::size_t operator()(const ArmSet& s) const noexcept;
};

// 0-1 incidence vector of `action` in dimension d.
std::vector<double> incidence(const ArmSet& action, int d);

// <1_A, v>
double set_sum(const ArmSet& action, std::span<const double> v);

// Symmetric difference of two sorted arm sets, with the sign +1 for arms
// of `j_set` only and -1 for arms of `i_set` only.
struct SignedArm {
  int arm;
  int sign;
};
void symmetric_difference(const ArmSet& i_set, const ArmSet& j_set, std::vector<SignedArm>& out);

std::string format_arm_set(const ArmSet& s);  // 1-based, ';'-separated

}  // namespace combgame
