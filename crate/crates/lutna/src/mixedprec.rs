//! Cumulative MAC profiling and the boundary-layer mixed-precision search:
//! assign the exact or the approximate divide-and-conquer scheme per layer
//! under an accuracy-loss budget.
//!
//! The search formalizes what is otherwise done by inspecting a sweep plot:
//! evaluate every boundary position, then pick the feasible plan with the
//! lowest energy. Cost accounting assumes one multiplier unit per layer, so
//! plan area is the sum of per-layer unit areas and plan energy is
//! `sum_l macs_l * energy_per_mac(scheme_l)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::hwcost::{area, energy_per_inference, UnitCosts};
use crate::lutcore::{MultiplierConfig, Scheme};
use crate::modelio::Dataset;
use crate::netsim::QuantModel;

/// Per-layer surviving MAC counts with the running percentage.
#[derive(Debug, Clone, PartialEq)]
pub struct MacProfile {
    pub per_layer: Vec<u64>,
    /// Non-decreasing, last entry 100 (when any MACs exist at all).
    pub cumulative_pct: Vec<f64>,
}

pub fn cumulative_mac_profile(model: &QuantModel) -> Result<MacProfile> {
    let per_layer = model.mac_counts()?;
    if per_layer.is_empty() {
        return Err(Error::InvalidConfig("model has no mac layers".into()));
    }
    let total: u64 = per_layer.iter().sum();
    let mut running = 0u64;
    let cumulative_pct = per_layer
        .iter()
        .map(|&m| {
            running += m;
            if total == 0 {
                0.0
            } else {
                100.0 * running as f64 / total as f64
            }
        })
        .collect();
    Ok(MacProfile {
        per_layer,
        cumulative_pct,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Approximate the initial `n` layers, keep the rest exact.
    ApproxFirst,
    /// Keep the initial `n` layers exact, approximate the rest.
    ExactFirst,
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::ApproxFirst => "approx_first",
            Policy::ExactFirst => "exact_first",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Front-loaded MAC mass (VGG-like profiles) → approx_first; back-loaded
/// (ResNet-like) → exact_first. The midpoint layer is index ceil(L/2),
/// 1-based; a profile sitting exactly at 50% there counts as front-loaded.
pub fn choose_policy(profile: &MacProfile) -> Policy {
    let l = profile.cumulative_pct.len();
    let midpoint = l.div_ceil(2); // 1-based
    if profile.cumulative_pct[midpoint - 1] >= 50.0 {
        Policy::ApproxFirst
    } else {
        Policy::ExactFirst
    }
}

/// A boundary-layer scheme assignment: the first `boundary` mac layers get
/// the policy's leading scheme, the rest the other one.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPlan {
    pub policy: Policy,
    pub boundary: usize,
    pub assignment: Vec<MultiplierConfig>,
}

impl MixedPlan {
    pub fn new(
        policy: Policy,
        boundary: usize,
        layer_count: usize,
        act_bits: u8,
        weight_bits: u8,
    ) -> Result<MixedPlan> {
        if boundary > layer_count {
            return Err(Error::InvalidConfig(format!(
                "boundary {boundary} exceeds layer count {layer_count}"
            )));
        }
        let exact = MultiplierConfig::new(Scheme::DncExact, act_bits, weight_bits)?;
        let approx = MultiplierConfig::new(Scheme::DncApprox, act_bits, weight_bits)?;
        let (head, tail) = match policy {
            Policy::ApproxFirst => (approx, exact),
            Policy::ExactFirst => (exact, approx),
        };
        let assignment = (0..layer_count)
            .map(|i| if i < boundary { head } else { tail })
            .collect();
        Ok(MixedPlan {
            policy,
            boundary,
            assignment,
        })
    }
}

/// One evaluated boundary position of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub policy: Policy,
    pub boundary: usize,
    pub accuracy: f64,
    pub energy_units: f64,
    pub area_units: f64,
}

/// Evaluates every boundary position 0..=L for the given policy. Returns
/// layer_count + 1 points; accuracy comes from the quantized forward pass,
/// energy and area from the hardware cost model.
pub fn boundary_sweep(
    model: &QuantModel,
    dataset: &Dataset,
    policy: Policy,
    costs: &UnitCosts,
) -> Result<Vec<SweepPoint>> {
    let layer_count = model.mac_layer_indices().len();
    let macs = model.mac_counts()?;
    let mut points = Vec::with_capacity(layer_count + 1);
    for boundary in 0..=layer_count {
        let plan = MixedPlan::new(
            policy,
            boundary,
            layer_count,
            model.act_bits,
            model.weight_bits,
        )?;
        let accuracy = model.evaluate(dataset, Some(&plan.assignment))?;
        let energy_units = energy_per_inference(&macs, &plan.assignment, costs)?;
        let mut area_units = 0.0;
        for cfg in &plan.assignment {
            area_units += area(cfg, costs)?;
        }
        points.push(SweepPoint {
            policy,
            boundary,
            accuracy,
            energy_units,
            area_units,
        });
    }
    Ok(points)
}

/// `policy,n,accuracy,energy_units,area_units` CSV of a sweep.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("policy,n,accuracy,energy_units,area_units\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.policy, p.boundary, p.accuracy, p.energy_units, p.area_units
        );
    }
    out
}

/// Picks the minimum-energy plan whose accuracy stays within `max_loss` of
/// the baseline; ties go to smaller area, then smaller boundary. Errors with
/// the best achievable loss when nothing is feasible.
pub fn select_boundary(
    sweep: &[SweepPoint],
    baseline_accuracy: f64,
    max_loss: f64,
) -> Result<&SweepPoint> {
    if sweep.is_empty() {
        return Err(Error::InvalidConfig("empty boundary sweep".into()));
    }
    let floor = baseline_accuracy - max_loss;
    let mut best: Option<&SweepPoint> = None;
    for p in sweep {
        if p.accuracy < floor {
            continue;
        }
        best = Some(match best {
            None => p,
            Some(b) => {
                let better = p.energy_units < b.energy_units
                    || (p.energy_units == b.energy_units
                        && (p.area_units < b.area_units
                            || (p.area_units == b.area_units && p.boundary < b.boundary)));
                if better {
                    p
                } else {
                    b
                }
            }
        });
    }
    best.ok_or_else(|| {
        let best_loss = sweep
            .iter()
            .map(|p| baseline_accuracy - p.accuracy)
            .fold(f64::INFINITY, f64::min);
        Error::NoFeasiblePlan { best_loss }
    })
}
