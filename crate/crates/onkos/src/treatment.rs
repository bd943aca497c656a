//! Drug infusion schedules.
//!
//! Treatment starts at `t_init` and delivers drug through the vessel
//! network either as a constant infusion or as periodic pulses: `d_p` for
//! `t_on`, then nothing for `t_off`, repeating. On-windows are closed at
//! the start and open at the end. Seven named presets pair four pulsed
//! regimens with three constant rates; presets 1 through 5 all deliver a
//! total dose of 100 per 50-unit period, making them directly comparable.

/// Default treatment start time.
pub const DEFAULT_T_INIT: f64 = 14.0;

/// Length of the dose-accounting period shared by all presets.
pub const DEFAULT_PERIOD: f64 = 50.0;

/// The shape of the infusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// Constant supply rate `d_c` from `t_init` on.
    Continuous { d_c: f64 },
    /// Supply `d_p` during `[t_init + i·(t_on+t_off), ... + t_on)`, zero
    /// otherwise.
    Pulsed { d_p: f64, t_on: f64, t_off: f64 },
}

/// A drug supply schedule `S_d(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreatmentSchedule {
    pub kind: ScheduleKind,
    pub t_init: f64,
    pub period_length: f64,
}

impl TreatmentSchedule {
    /// Constant infusion at rate `d_c` starting at `t_init`.
    pub fn continuous(d_c: f64, t_init: f64) -> Self {
        assert!(d_c >= 0.0 && t_init >= 0.0);
        Self {
            kind: ScheduleKind::Continuous { d_c },
            t_init,
            period_length: DEFAULT_PERIOD,
        }
    }

    /// Pulsed infusion: `d_p` for `t_on`, off for `t_off`, repeating from
    /// `t_init`.
    pub fn pulsed(d_p: f64, t_on: f64, t_off: f64, t_init: f64) -> Self {
        assert!(d_p >= 0.0 && t_init >= 0.0);
        assert!(t_on > 0.0, "on-window must have positive length");
        assert!(t_off >= 0.0, "off-window length must be non-negative");
        Self {
            kind: ScheduleKind::Pulsed { d_p, t_on, t_off },
            t_init,
            period_length: DEFAULT_PERIOD,
        }
    }

    /// No treatment at all.
    pub fn none() -> Self {
        Self::continuous(0.0, 0.0)
    }

    /// One of the seven preset strategies, by name `"strategy1"` through
    /// `"strategy7"`. Strategies 1 to 4 are pulsed with decreasing peak
    /// rate and increasing duty cycle; 5 to 7 are constant infusions.
    pub fn from_preset_name(name: &str) -> Option<Self> {
        let t0 = DEFAULT_T_INIT;
        Some(match name {
            "strategy1" => Self::pulsed(10.0, 10.0, 40.0, t0),
            "strategy2" => Self::pulsed(5.0, 20.0, 30.0, t0),
            "strategy3" => Self::pulsed(10.0 / 3.0, 30.0, 20.0, t0),
            "strategy4" => Self::pulsed(2.5, 40.0, 10.0, t0),
            "strategy5" => Self::continuous(2.0, t0),
            "strategy6" => Self::continuous(5.0, t0),
            "strategy7" => Self::continuous(10.0, t0),
            _ => return None,
        })
    }

    /// All preset names, in order.
    pub fn preset_names() -> [&'static str; 7] {
        [
            "strategy1",
            "strategy2",
            "strategy3",
            "strategy4",
            "strategy5",
            "strategy6",
            "strategy7",
        ]
    }

    /// Supply rate at time `t`.
    pub fn supply_rate(&self, t: f64) -> f64 {
        assert!(t >= 0.0, "time must be non-negative");
        if t < self.t_init {
            return 0.0;
        }
        match self.kind {
            ScheduleKind::Continuous { d_c } => d_c,
            ScheduleKind::Pulsed { d_p, t_on, t_off } => {
                let phase = (t - self.t_init).rem_euclid(t_on + t_off);
                if phase < t_on {
                    d_p
                } else {
                    0.0
                }
            }
        }
    }

    /// Exact integral of the supply rate over `[from, to]`, from the
    /// closed form of the piecewise-constant schedule.
    pub fn total_dose(&self, from: f64, to: f64) -> f64 {
        assert!(0.0 <= from && from <= to, "window must be ordered and non-negative");
        match self.kind {
            ScheduleKind::Continuous { d_c } => d_c * ((to - self.t_init).max(0.0) - (from - self.t_init).max(0.0)),
            ScheduleKind::Pulsed { d_p, t_on, t_off } => {
                // On-time of [t_init, t_init + u) as a function of u.
                let cycle = t_on + t_off;
                let on_time = |u: f64| {
                    let u = u.max(0.0);
                    (u / cycle).floor() * t_on + (u % cycle).min(t_on)
                };
                d_p * (on_time(to - self.t_init) - on_time(from - self.t_init))
            }
        }
    }

    /// Dose delivered over one accounting period starting at `t_init`.
    pub fn dose_per_period(&self) -> f64 {
        self.total_dose(self.t_init, self.t_init + self.period_length)
    }

    /// Constant rate delivering the same dose per accounting period; for a
    /// pulsed schedule this is `d_p·t_on/(t_on + t_off)` whenever the
    /// pulse cycle equals the period.
    pub fn dose_equivalent_rate(&self) -> f64 {
        self.dose_per_period() / self.period_length
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn silent_before_treatment_starts() {
        for name in TreatmentSchedule::preset_names() {
            let s = TreatmentSchedule::from_preset_name(name).unwrap();
            assert_eq!(s.supply_rate(0.0), 0.0);
            assert_eq!(s.supply_rate(13.999), 0.0);
        }
    }

    #[test]
    fn pulsed_preset_on_and_off_windows() {
        let s = TreatmentSchedule::from_preset_name("strategy1").unwrap();
        assert_eq!(s.supply_rate(DEFAULT_T_INIT + 5.0), 10.0);
        assert_eq!(s.supply_rate(DEFAULT_T_INIT + 30.0), 0.0);
    }

    #[test]
    fn continuous_preset_is_flat() {
        let s = TreatmentSchedule::from_preset_name("strategy5").unwrap();
        for t in [14.0, 14.001, 50.0, 333.3] {
            assert_eq!(s.supply_rate(t), 2.0);
        }
    }

    #[test]
    fn on_window_is_closed_at_start_open_at_end() {
        let s = TreatmentSchedule::pulsed(10.0, 10.0, 40.0, 14.0);
        assert_eq!(s.supply_rate(14.0), 10.0);
        assert_eq!(s.supply_rate(24.0), 0.0);
        // Next cycle starts exactly one cycle later.
        assert_eq!(s.supply_rate(64.0), 10.0);
    }

    #[test]
    fn unknown_preset_name_is_rejected() {
        assert!(TreatmentSchedule::from_preset_name("strategy8").is_none());
        assert!(TreatmentSchedule::from_preset_name("").is_none());
    }

    #[test]
    fn per_period_doses_match_the_preset_table() {
        // 10/3·30 is not exactly representable, hence the tolerance.
        let expected = [100.0, 100.0, 100.0, 100.0, 100.0, 250.0, 500.0];
        for (name, want) in TreatmentSchedule::preset_names().iter().zip(expected) {
            let s = TreatmentSchedule::from_preset_name(name).unwrap();
            assert_abs_diff_eq!(s.dose_per_period(), want, epsilon = 1e-9);
        }
    }

    #[test]
    fn matched_presets_share_the_equivalent_rate() {
        for name in &TreatmentSchedule::preset_names()[..5] {
            let s = TreatmentSchedule::from_preset_name(name).unwrap();
            assert_abs_diff_eq!(s.dose_equivalent_rate(), 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_rate_schedule_delivers_nothing() {
        let s = TreatmentSchedule::none();
        assert_eq!(s.total_dose(0.0, 1000.0), 0.0);
        let z = TreatmentSchedule::pulsed(0.0, 10.0, 40.0, 14.0);
        assert_eq!(z.total_dose(0.0, 1000.0), 0.0);
    }

    #[test]
    fn partial_window_doses_are_exact() {
        let s = TreatmentSchedule::pulsed(10.0, 10.0, 40.0, 14.0);
        // Whole on-window, then a window straddling on and off.
        assert_abs_diff_eq!(s.total_dose(14.0, 24.0), 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.total_dose(19.0, 29.0), 50.0, epsilon = 1e-12);
        // Window entirely before treatment.
        assert_eq!(s.total_dose(0.0, 14.0), 0.0);
        // Two full periods.
        assert_abs_diff_eq!(s.total_dose(14.0, 114.0), 200.0, epsilon = 1e-12);
    }

    #[test]
    fn continuous_dose_clips_the_pre_treatment_stretch() {
        let s = TreatmentSchedule::continuous(2.0, 14.0);
        assert_abs_diff_eq!(s.total_dose(0.0, 64.0), 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.total_dose(20.0, 30.0), 20.0, epsilon = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// The rate is constant between consecutive breakpoints
        /// t_init + i·cycle and t_init + i·cycle + t_on.
        #[test]
        fn piecewise_constant_between_breakpoints(
            cycle_idx in 0u32..20,
            lambda in 0.0f64..1.0,
            mu in 0.0f64..1.0,
        ) {
            let s = TreatmentSchedule::pulsed(5.0, 20.0, 30.0, 14.0);
            let base = 14.0 + cycle_idx as f64 * 50.0;
            // Strictly inside the on-window.
            let t1 = base + 1e-6 + lambda * (20.0 - 2e-6);
            // Strictly inside the off-window.
            let t2 = base + 20.0 + 1e-6 + mu * (30.0 - 2e-6);
            prop_assert_eq!(s.supply_rate(t1), 5.0);
            prop_assert_eq!(s.supply_rate(t2), 0.0);
        }

        /// total_dose matches a fine Riemann sum on random windows.
        #[test]
        fn dose_integral_matches_riemann_sum(a in 0.0f64..200.0, len in 0.0f64..200.0) {
            let s = TreatmentSchedule::pulsed(10.0, 10.0, 40.0, 14.0);
            let b = a + len;
            let n = 200_000;
            let h = (b - a) / n as f64;
            let riemann: f64 = (0..n)
                .map(|k| s.supply_rate(a + (k as f64 + 0.5) * h) * h)
                .sum();
            // Midpoint sums are exact away from breakpoints; each of the
            // at most 2 breakpoints per cycle can contribute d_p·h.
            let bound = 20.0 * 10.0 * h + 1e-9;
            prop_assert!(
                (s.total_dose(a, b) - riemann).abs() <= bound,
                "integral {} vs riemann {}",
                s.total_dose(a, b),
                riemann,
            );
        }
    }
}
