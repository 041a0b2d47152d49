#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace coachsim::reasoning {

/// Parameterizes the rule backend's driving character.
struct StyleProfile {
    double speed_fraction = 0.9;     // desired speed as a fraction of the limit
    double headway_threshold_s = 1.5;
    double gap_acceptance_m = 6.0;
    double hard_action_bias = 0.4;   // [0, 1]; >= 0.5 prefers hard maneuvers

    void validate() const {
        if (speed_fraction < 0.0 || hard_action_bias < 0.0 || hard_action_bias > 1.0) {
            throw std::invalid_argument("style profile fractions out of range");
        }
        if (headway_threshold_s <= 0.0 || gap_acceptance_m <= 0.0) {
            throw std::invalid_argument("style profile thresholds must be > 0");
        }
    }
};

StyleProfile cautious_profile();
StyleProfile risky_profile();
StyleProfile neutral_profile();

/// StyleProfile plus the situational reaction margins the rule backend
/// uses; guidelines adjust these.
struct EffectiveProfile {
    StyleProfile base;
    double pedestrian_margin_scale = 1.0;
    double signal_margin_scale = 1.0;
};

/// Deterministic guideline-to-behavior mapping: the presence of a known
/// guideline phrase anchors the matching profile knob. Unknown texts are
/// ignored.
EffectiveProfile apply_guidelines(const StyleProfile& base,
                                  const std::vector<std::string>& guideline_texts);

}  // namespace coachsim::reasoning
