/// Periodic trapezoidal source, SPICE `PULSE(v1 v2 td tr tf pw per)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub v1: f64,
    pub v2: f64,
    pub t_delay: f64,
    pub t_rise: f64,
    pub t_fall: f64,
    pub t_pw: f64,
    pub t_period: f64,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.t_rise > 0.0 && self.t_fall > 0.0) {
            return Err("pulse rise and fall times must be positive".into());
        }
        if !(self.t_delay >= 0.0 && self.t_pw >= 0.0) {
            return Err("pulse delay and width must be non-negative".into());
        }
        if self.t_period < self.t_rise + self.t_pw + self.t_fall {
            return Err(format!(
                "pulse period {} shorter than tr + pw + tf = {}",
                self.t_period,
                self.t_rise + self.t_pw + self.t_fall
            ));
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        if t < self.t_delay {
            return self.v1;
        }
        let local = t - self.t_delay;
        let tp = local - self.t_period * (local / self.t_period).floor();
        let (tr, pw, tf) = (self.t_rise, self.t_pw, self.t_fall);
        if tp < tr {
            self.v1 + (self.v2 - self.v1) * tp / tr
        } else if tp < tr + pw {
            self.v2
        } else if tp < tr + pw + tf {
            self.v2 + (self.v1 - self.v2) * (tp - tr - pw) / tf
        } else {
            self.v1
        }
    }

    /// Start times of the rising edges inside `[0, t_stop)`.
    pub fn rise_starts(&self, t_stop: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = self.t_delay;
        while t < t_stop {
            out.push(t);
            t += self.t_period;
        }
        out
    }

    pub fn frequency(&self) -> f64 {
        1.0 / self.t_period
    }
}

pub fn pulse_value(p: &PulseSpec, t: f64) -> f64 {
    p.value_at(t)
}
