#pragma once

// Discrete PI controller in position form with integral clamping and an
// actuator (PWM code) saturation.

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wncs {

inline constexpr double kDefaultKp = 1.69;
inline constexpr double kDefaultKi = 0.1488;
inline constexpr double kPwmMax = 255.0;
inline constexpr double kSupplyVolts = 5.0;

struct PiConfig {
    double kp = kDefaultKp;
    double ki = kDefaultKi;  // per controller sample
    double i_thres = kPwmMax / kDefaultKi;
    double drive_min = 0.0;
    double drive_max = kPwmMax;

    /// Integral clamp at which the I term alone reaches drive_max.
    static PiConfig with_gains(double kp, double ki) {
        PiConfig cfg;
        cfg.kp = kp;
        cfg.ki = ki;
        cfg.i_thres = ki > 0.0 ? cfg.drive_max / ki : cfg.i_thres;
        return cfg;
    }

    void validate() const {
        if (!(drive_min < drive_max)) {
            throw std::invalid_argument("PiConfig: drive_min must be below drive_max");
        }
        if (!(i_thres > 0.0)) {
            throw std::invalid_argument("PiConfig: integral clamp must be positive");
        }
    }
};

struct PiState {
    double i_sum = 0.0;
    double last_drive = 0.0;
};

/**
 * One controller sample: DRIVE = clamp(Kp e + Ki I_sum), then I_sum += e,
 * clamped symmetrically to +-i_thres. The integral uses the error sum up to
 * the previous sample.
 */
inline double pi_step(const PiConfig& cfg, PiState& state, double e2) {
    const double p = e2 * cfg.kp;
    const double i = state.i_sum * cfg.ki;
    const double drive = std::clamp(p + i, cfg.drive_min, cfg.drive_max);
    state.i_sum = std::clamp(state.i_sum + e2, -cfg.i_thres, cfg.i_thres);
    state.last_drive = drive;
    return drive;
}

/// 8-bit PWM code for a drive value (round half away from zero, then clamp).
inline int quantize_pwm(double drive) {
    return static_cast<int>(std::clamp(std::lround(drive), 0L, static_cast<long>(kPwmMax)));
}

inline void require_pwm_range(double drive) {
    if (!(drive >= 0.0 && drive <= kPwmMax)) {
        throw std::out_of_range("drive outside the 0..255 PWM range");
    }
}

/// PWM duty in percent; 255 is 100 %.
inline double duty_ratio(double drive) {
    require_pwm_range(drive);
    return 100.0 * drive / kPwmMax;
}

/// Average actuator voltage; 100 % duty is the 5 V supply.
inline double drive_volts(double drive) {
    require_pwm_range(drive);
    return kSupplyVolts * drive / kPwmMax;
}

}  // namespace wncs
