use serde::{Deserialize, Serialize};

/// Every numerical threshold used by validators and verdicts.
///
/// Validators that take no explicit tolerances read [`Tolerances::default`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `max |M - M†|` for Hermitian matrices.
    pub hermitian: f64,
    /// `max |U†U - I|`.
    pub unitary: f64,
    /// `max |P² - P|`.
    pub projector: f64,
    /// Distance of projector eigenvalues from {0, 1}.
    pub projector_eigen: f64,
    /// `|Tr ρ - 1|`.
    pub density_trace: f64,
    /// Most negative eigenvalue allowed for density matrices and effects.
    pub psd: f64,
    /// Orthogonality, commutation and resolution-of-identity closure.
    pub closure: f64,
    /// Subspace decisions: meet cutoff, implication, orthomodular law.
    pub subspace: f64,
    /// Out-of-range slack for probabilities before clamping.
    pub probability: f64,
    /// Row/column sums of transition matrices.
    pub stochastic: f64,
    /// Per-resolution sum of frame-function values.
    pub frame_sum: f64,
    /// Range slack for frame-function values.
    pub frame_range: f64,
    /// Max-norm distance under which two projectors count as the same.
    pub context_match: f64,
    /// Allowed disagreement of values assigned to the same projector.
    pub context_value: f64,
    /// Group-law deviation of propagators.
    pub group_law: f64,
    /// Round-trip recoveries (logarithm, fitted states, dilations).
    pub round_trip: f64,
    /// Fit residual and reduced-vs-joint probability agreement.
    pub residual: f64,
    /// Effects recovered through a unitary completion.
    pub effect_recovery: f64,
    /// Eigenvalue clustering when splitting superselection sectors.
    pub sector_cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            unitary: 1e-10,
            projector: 1e-10,
            projector_eigen: 1e-8,
            density_trace: 1e-12,
            psd: 1e-10,
            closure: 1e-10,
            subspace: 1e-8,
            probability: 1e-12,
            stochastic: 1e-10,
            frame_sum: 1e-8,
            frame_range: 1e-10,
            context_match: 1e-8,
            context_value: 1e-6,
            group_law: 1e-9,
            round_trip: 1e-8,
            residual: 1e-10,
            effect_recovery: 1e-9,
            sector_cluster: 1e-6,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 19] = [
        "hermitian",
        "unitary",
        "projector",
        "projector_eigen",
        "density_trace",
        "psd",
        "closure",
        "subspace",
        "probability",
        "stochastic",
        "frame_sum",
        "frame_range",
        "context_match",
        "context_value",
        "group_law",
        "round_trip",
        "residual",
        "effect_recovery",
        "sector_cluster",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "hermitian" => &mut self.hermitian,
            "unitary" => &mut self.unitary,
            "projector" => &mut self.projector,
            "projector_eigen" => &mut self.projector_eigen,
            "density_trace" => &mut self.density_trace,
            "psd" => &mut self.psd,
            "closure" => &mut self.closure,
            "subspace" => &mut self.subspace,
            "probability" => &mut self.probability,
            "stochastic" => &mut self.stochastic,
            "frame_sum" => &mut self.frame_sum,
            "frame_range" => &mut self.frame_range,
            "context_match" => &mut self.context_match,
            "context_value" => &mut self.context_value,
            "group_law" => &mut self.group_law,
            "round_trip" => &mut self.round_trip,
            "residual" => &mut self.residual,
            "effect_recovery" => &mut self.effect_recovery,
            "sector_cluster" => &mut self.sector_cluster,
            _ => return None,
        })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot(key).map(|v| *v)
    }

    /// Overrides one threshold by name. Values must be finite and non-negative.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(format!(
                "tolerance `{key}` must be a finite non-negative number"
            ));
        }
        match self.slot(key) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(format!("unknown tolerance key `{key}`")),
        }
    }

    /// Parses a `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), String> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{spec}`"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a number", value.trim()))?;
        self.set(key.trim(), value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_cover_every_field() {
        let mut t = Tolerances::default();
        for key in Tolerances::KEYS {
            t.set(key, 0.5).unwrap();
            assert_eq!(t.get(key), Some(0.5));
        }
        let json = serde_json::to_value(t).unwrap();
        assert_eq!(json.as_object().unwrap().len(), Tolerances::KEYS.len());
    }

    #[test]
    fn overrides_parse() {
        let mut t = Tolerances::default();
        t.apply_override("group_law = 1e-6").unwrap();
        assert_eq!(t.group_law, 1e-6);
        assert!(t.apply_override("nope=1").is_err());
        assert!(t.apply_override("stochastic").is_err());
        assert!(t.apply_override("stochastic=-1").is_err());
    }
}
