use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseFamily {
    /// `Gm(t) = g sin(πt/2T)`, `Go(t) = g cos(πt/2T)`.
    SinCos,
}

/// Time dependence of the two FSL couplings over one pump period.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    /// Peak coupling in rad/µs.
    pub g_peak: f64,
    /// Pump duration in µs.
    pub duration: f64,
    pub family: PulseFamily,
}

impl PulseSchedule {
    pub fn sin_cos(g_peak: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::domain(format!("pump duration must be positive, got {duration} µs")));
        }
        if !(g_peak >= 0.0 && g_peak.is_finite()) {
            return Err(Error::domain(format!("peak coupling must be non-negative, got {g_peak}")));
        }
        Ok(Self { g_peak, duration, family: PulseFamily::SinCos })
    }

    /// `(Gm(t), Go(t))` in rad/µs for `0 ≤ t ≤ T`.
    pub fn envelopes(&self, t: f64) -> Result<(f64, f64)> {
        let slack = 1e-12 * self.duration;
        if !(t >= -slack && t <= self.duration + slack) {
            return Err(Error::domain(format!("t = {t} µs outside the pump window [0, {}]", self.duration)));
        }
        Ok(self.envelopes_clamped(t))
    }

    /// Envelope values with `t` clamped into `[0, T]`; used by integrators
    /// whose stage times may overshoot `T` by rounding.
    pub fn envelopes_clamped(&self, t: f64) -> (f64, f64) {
        let t = t.clamp(0.0, self.duration);
        match self.family {
            PulseFamily::SinCos => {
                let (s, c) = (FRAC_PI_2 * t / self.duration).sin_cos();
                (self.g_peak * s, self.g_peak * c)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints_and_midpoint() {
        let s = PulseSchedule::sin_cos(2.0, 8.2).unwrap();
        let (gm, go) = s.envelopes(0.0).unwrap();
        assert_eq!((gm, go), (0.0, 2.0));
        let (gm, go) = s.envelopes(8.2).unwrap();
        assert!((gm - 2.0).abs() < 1e-15 && go.abs() < 1e-15);
        let (gm, go) = s.envelopes(4.1).unwrap();
        assert!((gm - 2f64.sqrt()).abs() < 1e-15 && (go - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn outside_window_is_rejected() {
        let s = PulseSchedule::sin_cos(1.0, 1.0).unwrap();
        assert!(s.envelopes(-0.1).is_err());
        assert!(s.envelopes(1.1).is_err());
        assert!(PulseSchedule::sin_cos(1.0, 0.0).is_err());
    }

    #[test]
    fn schedule_identity_on_dense_grid() {
        let g = std::f64::consts::TAU * 0.282;
        let s = PulseSchedule::sin_cos(g, 8.2).unwrap();
        for i in 0..10_000 {
            let t = 8.2 * i as f64 / 9_999.0;
            let (gm, go) = s.envelopes(t).unwrap();
            assert!((gm * gm + go * go - g * g).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn envelopes_stay_on_circle(g in 0.0f64..20.0, t_frac in 0.0f64..=1.0, dur in 0.01f64..200.0) {
            let s = PulseSchedule::sin_cos(g, dur).unwrap();
            let (gm, go) = s.envelopes(t_frac * dur).unwrap();
            prop_assert!(gm >= 0.0 && go >= -1e-15);
            prop_assert!((gm.hypot(go) - g).abs() <= 1e-14 * g.max(1.0));
        }
    }
}
