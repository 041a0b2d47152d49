#include "coachsim/style_profile.hpp"

#include <algorithm>
#include <cctype>

namespace coachsim::reasoning {

StyleProfile cautious_profile() { return {0.70, 2.0, 8.0, 0.1}; }
StyleProfile risky_profile() { return {1.10, 0.8, 3.0, 0.8}; }
StyleProfile neutral_profile() { return {0.90, 1.5, 6.0, 0.4}; }

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

EffectiveProfile apply_guidelines(const StyleProfile& base,
                                  const std::vector<std::string>& guideline_texts) {
    EffectiveProfile eff;
    eff.base = base;
    for (const std::string& raw : guideline_texts) {
        const std::string text = lower(raw);
        auto has = [&](const char* phrase) { return text.find(phrase) != std::string::npos; };
        if (has("pedestrian")) eff.pedestrian_margin_scale = std::max(eff.pedestrian_margin_scale, 1.5);
        if (has("red signal")) eff.signal_margin_scale = std::max(eff.signal_margin_scale, 1.5);
        if (has("following distance")) eff.base.headway_threshold_s = std::max(eff.base.headway_threshold_s, 2.2);
        if (has("posted speed limit")) eff.base.speed_fraction = std::min(eff.base.speed_fraction, 0.95);
        if (has("gentle")) eff.base.hard_action_bias = std::min(eff.base.hard_action_bias, 0.2);
        if (has("comfortably below")) eff.base.speed_fraction = std::min(eff.base.speed_fraction, 0.70);
        if (has("momentum")) eff.base.hard_action_bias = std::max(eff.base.hard_action_bias, 0.7);
        if (has("assertively")) eff.base.speed_fraction = std::max(eff.base.speed_fraction, 1.10);
    }
    return eff;
}

}  // namespace coachsim::reasoning
