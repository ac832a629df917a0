#pragma once

// Expression nodes behind Weight / InterpParameter. Internal; shared by the
// evaluator and the JSON codec.

#include <variant>
#include <vector>

#include "sobscale/weights.hpp"

namespace sobscale::detail {

// Knots stored on the log-log scale.
struct LogTable {
  std::vector<double> log_t;
  std::vector<double> log_v;
  std::vector<Knot> knots;  // original values, for serialization
};

struct WPower { double s; };
struct WPowerLog { double s, r; };
struct WPowerLogLog { double s, r, q; };
struct WTabulated { LogTable table; double tail_exponent; };
struct WProduct { Weight left, right; };
struct WReciprocal { Weight inner; };
struct WShifted { Weight inner; double m; };
struct WFromParameter { InterpParameter psi; double s0, s1; };
struct WQuadratic { Weight phi0, phi1; InterpParameter psi; };

struct WeightNode {
  std::variant<WPower, WPowerLog, WPowerLogLog, WTabulated, WProduct, WReciprocal, WShifted,
               WFromParameter, WQuadratic>
      form;
};

struct PPower { double exponent; };
struct PFromWeight { Weight phi; double s0, s1; };
struct PTabulated { LogTable table; double left_exponent, right_exponent; };
struct PQuadratic { InterpParameter lambda, eta, psi; };
struct PDual { InterpParameter inner; };

struct ParamNode {
  std::variant<PPower, PFromWeight, PTabulated, PQuadratic, PDual> form;
};

}  // namespace sobscale::detail
