use crate::error::SolverError;
use crate::tableau::stages_for_order;

/// Absolute tolerance, either shared or per component.
#[derive(Clone, Debug, PartialEq)]
pub enum Atol {
    Scalar(f64),
    PerComponent(Vec<f64>),
}

impl Atol {
    pub fn get(&self, i: usize) -> f64 {
        match self {
            Atol::Scalar(a) => *a,
            Atol::PerComponent(v) => v[i],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: Atol,
    /// Method orders `2s - 1`; all must be `≡ 1 (mod 4)`.
    pub min_order: usize,
    pub max_order: usize,
    pub initial_order: usize,
    /// `None` selects `7 + (s - 3)` for `s` stages.
    pub max_newton_iters: Option<usize>,
    pub dt_init: Option<f64>,
    /// Bounds on `dt_new / dt` chosen by the step-size controller.
    pub dt_min_factor: f64,
    pub dt_max_factor: f64,
    pub safety: f64,
    /// Factor and solve the Newton blocks concurrently.
    pub parallel_blocks: bool,
    /// Newton stopping constant applied to the tolerance-scaled increment.
    pub newton_kappa: f64,
    /// Take exactly this many equal steps without error or order control.
    pub fixed_steps: Option<usize>,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rtol: 1e-6,
            atol: Atol::Scalar(1e-6),
            min_order: 5,
            max_order: 25,
            initial_order: 5,
            max_newton_iters: None,
            dt_init: None,
            dt_min_factor: 0.2,
            dt_max_factor: 8.0,
            safety: 0.9,
            parallel_blocks: false,
            newton_kappa: 1e-2,
            fixed_steps: None,
            max_steps: 1_000_000,
        }
    }
}

impl SolverOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        SolverOptions {
            rtol,
            atol: Atol::Scalar(atol),
            ..Default::default()
        }
    }

    /// Pins the method to a single order.
    pub fn fixed_order(mut self, order: usize) -> Self {
        self.min_order = order;
        self.max_order = order;
        self.initial_order = order;
        self
    }

    pub fn order_range(mut self, min: usize, max: usize) -> Self {
        self.min_order = min;
        self.max_order = max;
        if min <= max {
            self.initial_order = self.initial_order.clamp(min, max);
        }
        self
    }

    pub fn newton_iter_limit(&self, stages: usize) -> usize {
        self.max_newton_iters
            .unwrap_or(7 + stages.saturating_sub(3))
    }

    pub fn min_stages(&self) -> usize {
        stages_for_order(self.min_order)
    }

    pub fn max_stages(&self) -> usize {
        stages_for_order(self.max_order)
    }

    pub fn validate(&self, dim: usize) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidOptions(msg));
        if !(self.rtol > 0.0) {
            return bad(format!("rtol must be positive, got {}", self.rtol));
        }
        match &self.atol {
            Atol::Scalar(a) if !(*a > 0.0) => {
                return bad(format!("atol must be positive, got {a}"));
            }
            Atol::PerComponent(v) => {
                if v.len() != dim {
                    return bad(format!("atol has {} components, state has {dim}", v.len()));
                }
                if v.iter().any(|a| !(*a > 0.0)) {
                    return bad("every atol component must be positive".into());
                }
            }
            _ => {}
        }
        for (name, p) in [
            ("min_order", self.min_order),
            ("max_order", self.max_order),
            ("initial_order", self.initial_order),
        ] {
            if p % 4 != 1 {
                return bad(format!("{name} must be 1 mod 4 (5, 9, 13, ...), got {p}"));
            }
        }
        if self.min_order > self.max_order {
            return bad(format!(
                "min_order {} exceeds max_order {}",
                self.min_order, self.max_order
            ));
        }
        if !(self.min_order..=self.max_order).contains(&self.initial_order) {
            return bad(format!(
                "initial_order {} outside [{}, {}]",
                self.initial_order, self.min_order, self.max_order
            ));
        }
        if !(self.dt_min_factor > 0.0 && self.dt_min_factor <= 1.0 && self.dt_max_factor >= 1.0) {
            return bad("need 0 < dt_min_factor <= 1 <= dt_max_factor".into());
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad(format!("safety must lie in (0, 1], got {}", self.safety));
        }
        if self.max_newton_iters == Some(0) {
            return bad("max_newton_iters must be positive".into());
        }
        if self.fixed_steps == Some(0) {
            return bad("fixed_steps must be positive".into());
        }
        if let Some(dt) = self.dt_init {
            if !(dt > 0.0) {
                return bad(format!("dt_init must be positive, got {dt}"));
            }
        }
        Ok(())
    }
}
