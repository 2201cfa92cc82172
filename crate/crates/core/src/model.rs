//! Host-vector malaria model with three time-dependent interventions.
//!
//! Compartments are susceptible, infected and partially immune humans
//! (`S_H, I_H, R_H`) plus susceptible and infected mosquitoes (`S_V, I_V`).
//! The controls are treated bednets `u1`, treatment of infected humans `u2`
//! and insecticide spray `u3`. Every rate constant enters the fractional
//! system raised to the order α; the transmission probabilities `b`, `c` and
//! the cost weights do not.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::FracOrder;
use crate::sweep::OptimalitySystem;

pub const STATE_NAMES: [&str; 5] = ["S_H", "I_H", "R_H", "S_V", "I_V"];
pub const CONTROL_NAMES: [&str; 3] = ["u1", "u2", "u3"];
pub const COSTATE_NAMES: [&str; 5] = ["lambda1", "lambda2", "lambda3", "lambda4", "lambda5"];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateVec {
    #[serde(rename = "S_H")]
    pub s_h: f64,
    #[serde(rename = "I_H")]
    pub i_h: f64,
    #[serde(rename = "R_H")]
    pub r_h: f64,
    #[serde(rename = "S_V")]
    pub s_v: f64,
    #[serde(rename = "I_V")]
    pub i_v: f64,
}

impl StateVec {
    pub fn new(s_h: f64, i_h: f64, r_h: f64, s_v: f64, i_v: f64) -> Self {
        Self { s_h, i_h, r_h, s_v, i_v }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.s_h, self.i_h, self.r_h, self.s_v, self.i_v]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2], x[3], x[4])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostateVec(pub [f64; 5]);

impl CostateVec {
    pub fn from_slice(l: &[f64]) -> Self {
        Self([l[0], l[1], l[2], l[3], l[4]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlVec {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl ControlVec {
    pub fn new(u1: f64, u2: f64, u3: f64) -> Self {
        Self { u1, u2, u3 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.u1, self.u2, self.u3]
    }

    pub fn from_slice(u: &[f64]) -> Self {
        Self::new(u[0], u[1], u[2])
    }
}

/// Which interventions are switched on for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StrategyMask {
    pub use_u1: bool,
    pub use_u2: bool,
    pub use_u3: bool,
}

impl StrategyMask {
    pub const NONE: Self = Self::new(false, false, false);
    pub const ALL: Self = Self::new(true, true, true);

    /// The seven intervention combinations, singles first.
    pub const SEVEN: [Self; 7] = [
        Self::new(true, false, false),
        Self::new(false, true, false),
        Self::new(false, false, true),
        Self::new(true, true, false),
        Self::new(true, false, true),
        Self::new(false, true, true),
        Self::new(true, true, true),
    ];

    pub const fn new(use_u1: bool, use_u2: bool, use_u3: bool) -> Self {
        Self { use_u1, use_u2, use_u3 }
    }

    pub fn is_none(self) -> bool {
        self == Self::NONE
    }

    pub fn name(self) -> &'static str {
        match (self.use_u1, self.use_u2, self.use_u3) {
            (false, false, false) => "none",
            (true, false, false) => "bednets",
            (false, true, false) => "treatment",
            (false, false, true) => "spray",
            (true, true, false) => "bednets_treatment",
            (true, false, true) => "bednets_spray",
            (false, true, true) => "treatment_spray",
            (true, true, true) => "all",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        std::iter::once(Self::NONE)
            .chain(Self::SEVEN)
            .find(|m| m.name() == name)
    }

    pub fn bits(self) -> u32 {
        u32::from(self.use_u1) | u32::from(self.use_u2) << 1 | u32::from(self.use_u3) << 2
    }

    pub fn from_bits(bits: u32) -> Option<Self> {
        (bits < 8).then(|| Self::new(bits & 1 != 0, bits & 2 != 0, bits & 4 != 0))
    }

    fn apply(self, u: ControlVec) -> ControlVec {
        ControlVec::new(
            if self.use_u1 { u.u1 } else { 0.0 },
            if self.use_u2 { u.u2 } else { 0.0 },
            if self.use_u3 { u.u3 } else { 0.0 },
        )
    }
}

/// Costate right-hand side to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostateVariant {
    /// Costate system in its commonly quoted hand-derived form, term for term.
    Literature,
    /// `∂W/∂X + λᵀ∂M/∂X` differentiated from the state system.
    #[default]
    MechanicalAdjoint,
}

/// Biological rates (per day), transmission probabilities and cost weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub lambda_h: f64,
    pub lambda_v: f64,
    pub mu_h: f64,
    pub mu_v: f64,
    /// Daily biting rate of a single mosquito.
    pub a: f64,
    #[serde(rename = "b", alias = "b_prob")]
    pub b_prob: f64,
    #[serde(rename = "c", alias = "c_prob")]
    pub c_prob: f64,
    pub delta: f64,
    pub nu: f64,
    pub gamma: f64,
    pub r: f64,
    pub rho: f64,
    pub eta: f64,
    /// Weight on infected humans in the running cost.
    #[serde(rename = "A")]
    pub weight_infected: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    #[serde(skip)]
    pub alpha: FracOrder,
}

impl Default for ModelParams {
    fn default() -> Self {
        default_params()
    }
}

pub fn default_params() -> ModelParams {
    ModelParams {
        lambda_h: 0.0015875,
        lambda_v: 0.071,
        mu_h: 0.00004,
        mu_v: 0.1429,
        a: 0.29,
        b_prob: 0.75,
        c_prob: 0.75,
        delta: 0.02,
        nu: 0.0022,
        gamma: 0.000017,
        r: 0.05,
        rho: 0.7,
        eta: 0.25,
        weight_infected: 100.0,
        d1: 70.0,
        d2: 130.0,
        d3: 40.0,
        alpha: FracOrder::ONE,
    }
}

pub fn default_initial_state() -> StateVec {
    StateVec::new(800.0, 200.0, 20.0, 1000.0, 500.0)
}

impl ModelParams {
    pub fn with_alpha(mut self, alpha: FracOrder) -> Self {
        self.alpha = alpha;
        self
    }

    fn named(&self) -> [(&'static str, f64); 17] {
        [
            ("lambda_h", self.lambda_h),
            ("lambda_v", self.lambda_v),
            ("mu_h", self.mu_h),
            ("mu_v", self.mu_v),
            ("a", self.a),
            ("b", self.b_prob),
            ("c", self.c_prob),
            ("delta", self.delta),
            ("nu", self.nu),
            ("gamma", self.gamma),
            ("r", self.r),
            ("rho", self.rho),
            ("eta", self.eta),
            ("A", self.weight_infected),
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
        ]
    }

    /// Sets a parameter by its config-file key.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "lambda_h" => &mut self.lambda_h,
            "lambda_v" => &mut self.lambda_v,
            "mu_h" => &mut self.mu_h,
            "mu_v" => &mut self.mu_v,
            "a" => &mut self.a,
            "b" | "b_prob" => &mut self.b_prob,
            "c" | "c_prob" => &mut self.c_prob,
            "delta" => &mut self.delta,
            "nu" => &mut self.nu,
            "gamma" => &mut self.gamma,
            "r" => &mut self.r,
            "rho" => &mut self.rho,
            "eta" => &mut self.eta,
            "A" => &mut self.weight_infected,
            "d1" => &mut self.d1,
            "d2" => &mut self.d2,
            "d3" => &mut self.d3,
            "alpha" => {
                self.alpha = FracOrder::new(value)?;
                return Ok(());
            }
            other => return Err(Error::Config(format!("unknown parameter `{other}`"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "params.{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        for (name, v) in [("d1", self.d1), ("d2", self.d2), ("d3", self.d3)] {
            if v <= 0.0 {
                return Err(Error::Config(format!("params.{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    fn powered(&self) -> Rates {
        let p = |x: f64| x.powf(self.alpha.value());
        Rates {
            lambda_h: p(self.lambda_h),
            lambda_v: p(self.lambda_v),
            mu_h: p(self.mu_h),
            mu_v: p(self.mu_v),
            a: p(self.a),
            delta: p(self.delta),
            nu: p(self.nu),
            gamma: p(self.gamma),
            r: p(self.r),
            rho: p(self.rho),
            eta: p(self.eta),
            b: self.b_prob,
            c: self.c_prob,
            weight_infected: self.weight_infected,
            d: [self.d1, self.d2, self.d3],
        }
    }
}

/// Rate constants already raised to α.
#[derive(Debug, Clone, Copy)]
struct Rates {
    lambda_h: f64,
    lambda_v: f64,
    mu_h: f64,
    mu_v: f64,
    a: f64,
    delta: f64,
    nu: f64,
    gamma: f64,
    r: f64,
    rho: f64,
    eta: f64,
    b: f64,
    c: f64,
    weight_infected: f64,
    d: [f64; 3],
}

pub fn total_populations(x: &StateVec) -> (f64, f64) {
    (x.s_h + x.i_h + x.r_h, x.s_v + x.i_v)
}

fn human_total(x: &StateVec) -> Result<f64> {
    let (n_h, _) = total_populations(x);
    if n_h == 0.0 {
        return Err(Error::Domain("total human population N_H is zero".into()));
    }
    Ok(n_h)
}

fn state_rhs_with(x: &StateVec, u: &ControlVec, k: &Rates) -> Result<StateVec> {
    let n_h = human_total(x)?;
    let n_v = x.s_v + x.i_v;
    let human_infection = (1.0 - u.u1) * k.a * k.b * x.s_h * x.i_v / n_h;
    let vector_infection = (1.0 - u.u1) * k.a * k.c * x.s_v * x.i_h / n_h;
    let recovery = k.r + k.rho * u.u2;
    Ok(StateVec {
        s_h: k.lambda_h * n_h - human_infection + k.nu * x.i_h + k.gamma * x.r_h - k.mu_h * x.s_h,
        i_h: human_infection - k.nu * x.i_h - recovery * x.i_h - k.delta * x.i_h - k.mu_h * x.i_h,
        r_h: recovery * x.i_h - (k.gamma + k.mu_h) * x.r_h,
        s_v: (1.0 - u.u3) * k.lambda_v * n_v
            - vector_infection
            - k.mu_v * x.s_v
            - k.eta * u.u3 * x.s_v,
        i_v: vector_infection - k.mu_v * x.i_v - k.eta * u.u3 * x.i_v,
    })
}

/// Fractional state dynamics `M(X, U)`.
pub fn state_rhs(_t: f64, x: &StateVec, u: &ControlVec, p: &ModelParams) -> Result<StateVec> {
    state_rhs_with(x, u, &p.powered())
}

fn costate_literature_with(x: &StateVec, l: &CostateVec, u: &ControlVec, k: &Rates) -> Result<CostateVec> {
    let n_h = human_total(x)?;
    let n2 = n_h * n_h;
    let [l1, l2, l3, l4, l5] = l.0;
    let bite_b = (1.0 - u.u1) * k.a * k.b;
    let bite_c = (1.0 - u.u1) * k.a * k.c;
    let recovery = k.r + k.rho * u.u2;
    let sh_term = bite_b * x.s_h * x.i_v / n2;

    let g1 = l1 * (k.lambda_h - bite_b * (x.i_h + x.r_h) * x.i_v / n2 - k.mu_h)
        + l2 * (bite_b * (x.i_h + x.r_h) * x.i_v / n2)
        - (l5 - l4) * (bite_c * x.s_h * x.i_h / n2);
    let g2 = k.weight_infected + l1 * (k.lambda_h + sh_term + k.nu)
        - (l4 - l5) * (bite_c * (x.s_h + x.r_h) * x.s_v / n2)
        - l2 * (sh_term + k.nu + recovery + k.delta + k.mu_h)
        + l3 * recovery;
    // printed as γ_h^α; read as the immunity-loss rate γ^α
    let g3 = l1 * (k.lambda_h + sh_term + k.gamma) - l2 * sh_term - l3 * (k.gamma + k.mu_h)
        - (l5 - l4) * (bite_c * x.s_v * x.i_h / n2);
    let g4 = l4 * ((1.0 - u.u3) * k.lambda_v + bite_c * x.i_h / n_h - k.mu_v - k.eta * u.u3)
        + l5 * (bite_c * x.i_h / n_h);
    let g5 = (l2 - l1) * (bite_b * x.s_h / n_h) + l4 * ((1.0 - u.u3) * k.lambda_v)
        - l5 * (k.mu_v + k.eta * u.u3);
    Ok(CostateVec([g1, g2, g3, g4, g5]))
}

fn costate_mechanical_with(
    x: &StateVec,
    l: &CostateVec,
    u: &ControlVec,
    k: &Rates,
) -> Result<CostateVec> {
    let n_h = human_total(x)?;
    let n2 = n_h * n_h;
    let [l1, l2, l3, l4, l5] = l.0;
    let bite_b = (1.0 - u.u1) * k.a * k.b;
    let bite_c = (1.0 - u.u1) * k.a * k.c;
    let recovery = k.r + k.rho * u.u2;

    // partials of the two incidence terms
    // H = bite_b·S_H·I_V/N_H, V = bite_c·S_V·I_H/N_H
    let dh_dsh = bite_b * x.i_v * (x.i_h + x.r_h) / n2;
    let dh_dih = -bite_b * x.s_h * x.i_v / n2;
    let dh_drh = dh_dih;
    let dh_div = bite_b * x.s_h / n_h;
    let dv_dsh = -bite_c * x.s_v * x.i_h / n2;
    let dv_dih = bite_c * x.s_v * (x.s_h + x.r_h) / n2;
    let dv_drh = dv_dsh;
    let dv_dsv = bite_c * x.i_h / n_h;

    let g1 = l1 * (k.lambda_h - dh_dsh - k.mu_h) + l2 * dh_dsh + (l5 - l4) * dv_dsh;
    let g2 = k.weight_infected
        + l1 * (k.lambda_h - dh_dih + k.nu)
        + l2 * (dh_dih - k.nu - recovery - k.delta - k.mu_h)
        + l3 * recovery
        + (l5 - l4) * dv_dih;
    let g3 = l1 * (k.lambda_h - dh_drh + k.gamma) + l2 * dh_drh - l3 * (k.gamma + k.mu_h)
        + (l5 - l4) * dv_drh;
    let g4 = l4 * ((1.0 - u.u3) * k.lambda_v - dv_dsv - k.mu_v - k.eta * u.u3) + l5 * dv_dsv;
    let g5 = (l2 - l1) * dh_div + l4 * (1.0 - u.u3) * k.lambda_v - l5 * (k.mu_v + k.eta * u.u3);
    Ok(CostateVec([g1, g2, g3, g4, g5]))
}

/// Right-hand side of the right-Caputo costate system.
pub fn costate_rhs(
    _t: f64,
    x: &StateVec,
    l: &CostateVec,
    u: &ControlVec,
    p: &ModelParams,
    variant: CostateVariant,
) -> Result<CostateVec> {
    let k = p.powered();
    match variant {
        CostateVariant::Literature => costate_literature_with(x, l, u, &k),
        CostateVariant::MechanicalAdjoint => costate_mechanical_with(x, l, u, &k),
    }
}

fn control_with(x: &StateVec, l: &CostateVec, k: &Rates, mask: StrategyMask) -> Result<ControlVec> {
    let n_h = human_total(x)?;
    let n_v = x.s_v + x.i_v;
    let [l1, l2, l3, l4, l5] = l.0;
    let u1 = ((l2 - l1) * k.a * k.b * x.s_h * x.i_v / n_h
        + (l5 - l4) * k.a * k.c * x.s_v * x.i_h / n_h)
        / k.d[0];
    let u2 = (l2 - l3) * k.rho * x.i_h / k.d[1];
    let u3 = (l4 * (k.lambda_v * n_v + k.eta * x.s_v) + l5 * k.eta * x.i_v) / k.d[2];
    let clamp = |v: f64| v.clamp(0.0, 1.0);
    Ok(mask.apply(ControlVec::new(clamp(u1), clamp(u2), clamp(u3))))
}

/// Stationary point of the Hamiltonian in each control, projected onto
/// `[0, 1]` and masked.
pub fn control_characterization(
    x: &StateVec,
    l: &CostateVec,
    p: &ModelParams,
    mask: StrategyMask,
) -> Result<ControlVec> {
    control_with(x, l, &p.powered(), mask)
}

/// Running cost `A·I_H + Σ dᵢuᵢ²/2`.
pub fn integrand_w(x: &StateVec, u: &ControlVec, p: &ModelParams) -> f64 {
    p.weight_infected * x.i_h
        + 0.5 * (p.d1 * u.u1 * u.u1 + p.d2 * u.u2 * u.u2 + p.d3 * u.u3 * u.u3)
}

/// The malaria optimality system, ready for [`crate::sweep::sweep`].
#[derive(Debug, Clone)]
pub struct MalariaSystem {
    params: ModelParams,
    rates: Rates,
    mask: StrategyMask,
    variant: CostateVariant,
}

impl MalariaSystem {
    pub fn new(params: ModelParams, mask: StrategyMask, variant: CostateVariant) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            rates: params.powered(),
            mask,
            variant,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn mask(&self) -> StrategyMask {
        self.mask
    }
}

impl OptimalitySystem for MalariaSystem {
    fn state_dim(&self) -> usize {
        5
    }

    fn control_dim(&self) -> usize {
        3
    }

    fn state_rhs(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()> {
        if let Some(i) = x.iter().position(|&v| v < 0.0) {
            return Err(Error::NegativeState {
                compartment: STATE_NAMES[i],
                value: x[i],
                t,
            });
        }
        let d = state_rhs_with(&StateVec::from_slice(x), &ControlVec::from_slice(u), &self.rates)?;
        dx.copy_from_slice(&d.to_array());
        Ok(())
    }

    fn costate_rhs(&self, _t: f64, x: &[f64], l: &[f64], u: &[f64], dl: &mut [f64]) -> Result<()> {
        let (x, l, u) = (
            StateVec::from_slice(x),
            CostateVec::from_slice(l),
            ControlVec::from_slice(u),
        );
        let g = match self.variant {
            CostateVariant::Literature => costate_literature_with(&x, &l, &u, &self.rates)?,
            CostateVariant::MechanicalAdjoint => costate_mechanical_with(&x, &l, &u, &self.rates)?,
        };
        dl.copy_from_slice(&g.0);
        Ok(())
    }

    fn control(&self, _t: f64, x: &[f64], l: &[f64], u: &mut [f64]) -> Result<()> {
        let c = control_with(
            &StateVec::from_slice(x),
            &CostateVec::from_slice(l),
            &self.rates,
            self.mask,
        )?;
        u.copy_from_slice(&c.to_array());
        Ok(())
    }

    fn integrand(&self, _t: f64, x: &[f64], u: &[f64]) -> f64 {
        integrand_w(&StateVec::from_slice(x), &ControlVec::from_slice(u), &self.params)
    }
}
