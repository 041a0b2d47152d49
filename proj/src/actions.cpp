#include "coachsim/actions.hpp"

#include <algorithm>
#include <cctype>

namespace coachsim::agent {

namespace {

struct ActionEntry {
    AtomicAction action;
    std::string_view token;
};

constexpr std::array<ActionEntry, kActionCount> kTable = {{
    {AtomicAction::AccelerateGentle, "ACCELERATE_GENTLE"},
    {AtomicAction::AccelerateHard, "ACCELERATE_HARD"},
    {AtomicAction::Maintain, "MAINTAIN"},
    {AtomicAction::DecelerateGentle, "DECELERATE_GENTLE"},
    {AtomicAction::BrakeHard, "BRAKE_HARD"},
    {AtomicAction::StopAndWait, "STOP_AND_WAIT"},
    {AtomicAction::ChangeLaneLeft, "CHANGE_LANE_LEFT"},
    {AtomicAction::ChangeLaneRight, "CHANGE_LANE_RIGHT"},
    {AtomicAction::TurnLeft, "TURN_LEFT"},
    {AtomicAction::TurnRight, "TURN_RIGHT"},
    {AtomicAction::ProceedStraight, "PROCEED_STRAIGHT"},
}};

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

}  // namespace

const std::array<AtomicAction, kActionCount>& all_actions() {
    static const std::array<AtomicAction, kActionCount> actions = [] {
        std::array<AtomicAction, kActionCount> a{};
        for (std::size_t i = 0; i < kTable.size(); ++i) a[i] = kTable[i].action;
        return a;
    }();
    return actions;
}

std::string_view action_token(AtomicAction action) {
    for (const ActionEntry& e : kTable) {
        if (e.action == action) return e.token;
    }
    return "MAINTAIN";
}

std::optional<AtomicAction> action_from_token(std::string_view token) {
    const std::string up = upper(token);
    for (const ActionEntry& e : kTable) {
        if (up == e.token) return e.action;
    }
    return std::nullopt;
}

sim::ControlInput action_to_control(AtomicAction action, double current_speed,
                                    const sim::DynamicsParams& dynamics) {
    sim::ControlInput c;
    const double hold = dynamics.hold_throttle(current_speed);
    switch (action) {
        case AtomicAction::AccelerateGentle: c.throttle_pct = 25.0; break;
        case AtomicAction::AccelerateHard: c.throttle_pct = 60.0; break;
        case AtomicAction::Maintain: c.throttle_pct = hold; break;
        case AtomicAction::DecelerateGentle: c.brake_pct = 30.0; break;
        case AtomicAction::BrakeHard: c.brake_pct = 70.0; break;
        case AtomicAction::StopAndWait: c.brake_pct = 100.0; break;
        case AtomicAction::ChangeLaneLeft:
            c.throttle_pct = hold;
            c.lane_command = sim::LaneCommand::ShiftLeft;
            break;
        case AtomicAction::ChangeLaneRight:
            c.throttle_pct = hold;
            c.lane_command = sim::LaneCommand::ShiftRight;
            break;
        case AtomicAction::TurnLeft:
            c.throttle_pct = hold;
            c.turn_command = sim::TurnCommand::Left;
            break;
        case AtomicAction::TurnRight:
            c.throttle_pct = hold;
            c.turn_command = sim::TurnCommand::Right;
            break;
        case AtomicAction::ProceedStraight: c.throttle_pct = hold; break;
    }
    return c;
}

bool is_acceleration(AtomicAction action) {
    return action == AtomicAction::AccelerateGentle || action == AtomicAction::AccelerateHard;
}

bool is_deceleration(AtomicAction action) {
    return action == AtomicAction::DecelerateGentle || action == AtomicAction::BrakeHard ||
           action == AtomicAction::StopAndWait;
}

}  // namespace coachsim::agent
