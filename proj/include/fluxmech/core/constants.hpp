#pragma once

namespace fluxmech {

// CODATA 2018 SI values (h and e are exact by definition).
inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPlanck = 6.62607015e-34;            // J s
inline constexpr double kHbar = kPlanck / kTwoPi;            // J s
inline constexpr double kElementaryCharge = 1.602176634e-19; // C

// Magnetic flux quantum h/2e and its reduced form hbar/2e.
inline constexpr double kFluxQuantum = kPlanck / (2.0 * kElementaryCharge);       // Wb
inline constexpr double kReducedFluxQuantum = kHbar / (2.0 * kElementaryCharge);  // Wb

#ifndef FLUXMECH_VERSION
#define FLUXMECH_VERSION "0.1.0"
#endif
inline constexpr const char* kVersion = FLUXMECH_VERSION;

} // namespace fluxmech
