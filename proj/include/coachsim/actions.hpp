#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "coachsim/sim_types.hpp"

namespace coachsim::agent {

/// Closed vocabulary of atomic driving operations.
enum class AtomicAction {
    AccelerateGentle,
    AccelerateHard,
    Maintain,
    DecelerateGentle,
    BrakeHard,
    StopAndWait,
    ChangeLaneLeft,
    ChangeLaneRight,
    TurnLeft,
    TurnRight,
    ProceedStraight,
};

inline constexpr int kActionCount = 11;

const std::array<AtomicAction, kActionCount>& all_actions();

std::string_view action_token(AtomicAction action);

/// Case-insensitive token lookup, e.g. "brake_hard" -> BrakeHard.
std::optional<AtomicAction> action_from_token(std::string_view token);

/// Fixed action -> actuator table. Maintain-style actions emit the
/// throttle that holds the current speed against drag.
sim::ControlInput action_to_control(AtomicAction action, double current_speed,
                                    const sim::DynamicsParams& dynamics);

bool is_acceleration(AtomicAction action);
bool is_deceleration(AtomicAction action);

}  // namespace coachsim::agent
