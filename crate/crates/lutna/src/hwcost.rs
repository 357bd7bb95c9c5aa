//! Component-count, area, and energy cost model for every multiplier scheme.
//!
//! Counts are anchored to the published 4b figures for the optimized
//! divide-and-conquer structures: exact = 12 SRAM cells, 18 2:1 1b muxes,
//! 3 half adders, 3 full adders, 1 sign xor; approximate = 10 SRAM cells,
//! 18 muxes, no adders. The stored-entry sum at 4b is 9 cells (4 for w*1,
//! 5 for the MSBs of w*3), so the published totals carry a fixed
//! per-multiplier overhead: 3 cells for the exact structure and 1 for the
//! approximate one. The same overhead constants are applied at other widths.
//!
//! Mux counting follows the bank-sharing reading of the 4b figure: one
//! 4:1 mux of entry width per multiplier, shared across the chunks of the
//! same weight, i.e. `3 (n_w + 2)` 2:1 1b muxes.
//!
//! Absolute process-node areas and energies are not modeled; unit costs are
//! dimensionless and configurable, and all comparisons are reported as
//! ratios.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lutcore::{MultiplierConfig, Scheme};

/// Fixed per-multiplier cell overhead that reconciles the stored-entry sum
/// with the published 4b totals.
const EXACT_CELL_OVERHEAD: u64 = 3;
const APPROX_CELL_OVERHEAD: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ComponentCount {
    pub sram_cells: u64,
    pub mux2x1_1b: u64,
    pub half_adders: u64,
    pub full_adders: u64,
    pub xor_gates: u64,
    pub and_gates: u64,
}

impl ComponentCount {
    pub fn add(&self, other: &ComponentCount) -> ComponentCount {
        ComponentCount {
            sram_cells: self.sram_cells + other.sram_cells,
            mux2x1_1b: self.mux2x1_1b + other.mux2x1_1b,
            half_adders: self.half_adders + other.half_adders,
            full_adders: self.full_adders + other.full_adders,
            xor_gates: self.xor_gates + other.xor_gates,
            and_gates: self.and_gates + other.and_gates,
        }
    }

    /// Component-wise `<=` on every field.
    pub fn dominated_by(&self, other: &ComponentCount) -> bool {
        self.sram_cells <= other.sram_cells
            && self.mux2x1_1b <= other.mux2x1_1b
            && self.half_adders <= other.half_adders
            && self.full_adders <= other.full_adders
            && self.xor_gates <= other.xor_gates
            && self.and_gates <= other.and_gates
    }
}

/// Storage counting mode for the exact divide-and-conquer scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    /// Shared bank, wired shifts, published overhead constants. The default.
    Optimized,
    /// Full per-chunk entry storage with per-chunk mux trees.
    Unoptimized,
}

/// Per-component unit area and energy. Dimensionless; defaults ship in
/// `configs/unit_costs.default` and via [`UnitCosts::default_units`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCosts {
    pub area: ComponentUnit,
    pub energy: ComponentUnit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentUnit {
    pub sram_cells: f64,
    pub mux2x1_1b: f64,
    pub half_adders: f64,
    pub full_adders: f64,
    pub xor_gates: f64,
    pub and_gates: f64,
}

impl ComponentUnit {
    fn dot(&self, c: &ComponentCount) -> f64 {
        self.sram_cells * c.sram_cells as f64
            + self.mux2x1_1b * c.mux2x1_1b as f64
            + self.half_adders * c.half_adders as f64
            + self.full_adders * c.full_adders as f64
            + self.xor_gates * c.xor_gates as f64
            + self.and_gates * c.and_gates as f64
    }

    fn all_positive(&self) -> bool {
        [
            self.sram_cells,
            self.mux2x1_1b,
            self.half_adders,
            self.full_adders,
            self.xor_gates,
            self.and_gates,
        ]
        .iter()
        .all(|&v| v > 0.0 && v.is_finite())
    }
}

impl UnitCosts {
    pub fn default_units() -> UnitCosts {
        UnitCosts {
            area: ComponentUnit {
                sram_cells: 1.0,
                mux2x1_1b: 0.8,
                half_adders: 2.0,
                full_adders: 3.5,
                xor_gates: 1.2,
                and_gates: 0.8,
            },
            energy: ComponentUnit {
                sram_cells: 0.05,
                mux2x1_1b: 0.02,
                half_adders: 0.10,
                full_adders: 0.18,
                xor_gates: 0.06,
                and_gates: 0.04,
            },
        }
    }

    /// Loads a flat `component.area = v` / `component.energy = v` file.
    /// Unlisted keys keep their defaults; `#` starts a comment.
    pub fn load(path: &Path) -> Result<UnitCosts> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    // negated comparison keeps NaN costs invalid
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn parse(text: &str) -> Result<UnitCosts> {
        let mut costs = Self::default_units();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |detail: String| Error::Format {
                what: "unit-costs file".into(),
                detail: format!("line {}: {detail}", lineno + 1),
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected `component.kind = value`".into()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad number {:?}", value.trim())))?;
            let (component, kind) = key
                .trim()
                .split_once('.')
                .ok_or_else(|| bad(format!("bad key {:?}", key.trim())))?;
            let unit = match kind {
                "area" => &mut costs.area,
                "energy" => &mut costs.energy,
                other => return Err(bad(format!("unknown cost kind {other:?}"))),
            };
            let slot = match component {
                "sram_cells" => &mut unit.sram_cells,
                "mux2x1_1b" => &mut unit.mux2x1_1b,
                "half_adders" => &mut unit.half_adders,
                "full_adders" => &mut unit.full_adders,
                "xor_gates" => &mut unit.xor_gates,
                "and_gates" => &mut unit.and_gates,
                other => return Err(bad(format!("unknown component {other:?}"))),
            };
            if !(value > 0.0) || !value.is_finite() {
                return Err(bad(format!("cost must be strictly positive, got {value}")));
            }
            *slot = value;
        }
        if !costs.area.all_positive() || !costs.energy.all_positive() {
            return Err(Error::Format {
                what: "unit-costs file".into(),
                detail: "all unit costs must be strictly positive".into(),
            });
        }
        Ok(costs)
    }
}

/// Adder cells for one shift-add merge stage of the chunk recombination:
/// the 2b shift leaves one carry-free overlap position (HA), `n_w - 1`
/// positions with carry-in (FA), and two top positions absorbing the carry
/// into the shifted entry (HA each). Reproduces 3 HA + 3 FA at `n_w = 4`.
fn merge_stage_adders(n_w: u64) -> (u64, u64) {
    (3, n_w.saturating_sub(1))
}

pub fn component_count(cfg: &MultiplierConfig) -> Result<ComponentCount> {
    component_count_with(cfg, Storage::Optimized)
}

pub fn component_count_with(cfg: &MultiplierConfig, storage: Storage) -> Result<ComponentCount> {
    let n_d = cfg.data_bits as u64;
    let n_w = cfg.weight_bits as u64;
    let entry_width = n_w + 2;
    match cfg.scheme {
        Scheme::DncExact => {
            let chunks = n_d / 2;
            let (ha_per_merge, fa_per_merge) = merge_stage_adders(n_w);
            let merges = chunks - 1;
            let (sram, mux) = match storage {
                Storage::Optimized => {
                    // shared bank: stored entries (2 n_w + 1) + fixed overhead,
                    // one 4:1 mux of entry width shared across chunks
                    (2 * n_w + 1 + EXACT_CELL_OVERHEAD, 3 * entry_width)
                }
                Storage::Unoptimized => (chunks * 4 * entry_width, chunks * 3 * entry_width),
            };
            Ok(ComponentCount {
                sram_cells: sram,
                mux2x1_1b: mux,
                half_adders: merges * ha_per_merge,
                full_adders: merges * fa_per_merge,
                xor_gates: 1,
                and_gates: 0,
            })
        }
        Scheme::DncApprox => {
            // One half-product datapath (the inactive half reuses the same
            // hardware); no final adder joins the halves. Within a half wider
            // than one chunk, the exact merge chain remains.
            let split = cfg.approx_split as u64;
            let half_chunks = split.div_ceil(2).max((n_d - split).div_ceil(2));
            let merges = half_chunks - 1;
            let (ha_per_merge, fa_per_merge) = merge_stage_adders(n_w);
            Ok(ComponentCount {
                sram_cells: 2 * n_w + 1 + APPROX_CELL_OVERHEAD,
                mux2x1_1b: 3 * entry_width,
                half_adders: merges * ha_per_merge,
                full_adders: merges * fa_per_merge,
                xor_gates: 1,
                and_gates: 0,
            })
        }
        Scheme::TLut => {
            let entries = 1u64 << n_d;
            let result_width = n_d + n_w;
            Ok(ComponentCount {
                sram_cells: entries * result_width,
                mux2x1_1b: (entries - 1) * result_width,
                half_adders: 0,
                full_adders: 0,
                xor_gates: 1,
                and_gates: 0,
            })
        }
        Scheme::DigitalArray => {
            let n = n_d.max(n_w);
            if n < 2 {
                return Err(Error::InvalidConfig(format!(
                    "array multiplier needs width >= 2, got {n}"
                )));
            }
            Ok(ComponentCount {
                sram_cells: 0,
                mux2x1_1b: 0,
                half_adders: n,
                full_adders: n * (n - 2),
                xor_gates: 1,
                and_gates: n * n,
            })
        }
        Scheme::DigitalWallace => {
            let n = n_d.max(n_w);
            if n < 2 {
                return Err(Error::InvalidConfig(format!(
                    "wallace multiplier needs width >= 2, got {n}"
                )));
            }
            let (ha, fa) = wallace_adders(n as usize);
            Ok(ComponentCount {
                sram_cells: 0,
                mux2x1_1b: 0,
                half_adders: ha,
                full_adders: fa,
                xor_gates: 1,
                and_gates: n * n,
            })
        }
    }
}

/// Adder counts from a standard Wallace reduction of the n x n partial
/// product parallelogram down to two rows, plus the final carry-propagate
/// adder.
fn wallace_adders(n: usize) -> (u64, u64) {
    let mut cols: Vec<usize> = (0..2 * n - 1)
        .map(|i| {
            // column height of the partial-product parallelogram
            let lo = i.saturating_sub(n - 1);
            let hi = i.min(n - 1);
            hi - lo + 1
        })
        .collect();
    let mut ha = 0u64;
    let mut fa = 0u64;
    while cols.iter().copied().max().unwrap_or(0) > 2 {
        let mut next = vec![0usize; cols.len() + 1];
        for (i, &h) in cols.iter().enumerate() {
            let fas = h / 3;
            let rem = h % 3;
            let has = usize::from(rem == 2);
            fa += fas as u64;
            ha += has as u64;
            next[i] += fas + has + usize::from(rem == 1);
            next[i + 1] += fas + has;
        }
        while next.last() == Some(&0) {
            next.pop();
        }
        cols = next;
    }
    // final carry-propagate adder over the two remaining rows
    let mut carry = false;
    for &h in &cols {
        match (h, carry) {
            (2, false) => {
                ha += 1;
                carry = true;
            }
            (2, true) => fa += 1,
            (1, true) => ha += 1,
            _ => {}
        }
    }
    (ha, fa)
}

pub fn area(cfg: &MultiplierConfig, costs: &UnitCosts) -> Result<f64> {
    Ok(costs.area.dot(&component_count(cfg)?))
}

/// Energy of one multiply. The approximate scheme already counts a single
/// half-product datapath, so its component sum is the active-half energy.
pub fn energy_per_mac(cfg: &MultiplierConfig, costs: &UnitCosts) -> Result<f64> {
    Ok(costs.energy.dot(&component_count(cfg)?))
}

pub fn area_of_count(count: &ComponentCount, costs: &UnitCosts) -> f64 {
    costs.area.dot(count)
}

pub fn energy_of_count(count: &ComponentCount, costs: &UnitCosts) -> f64 {
    costs.energy.dot(count)
}

/// Cost summary for one configuration, or for a whole model inference when
/// `total_macs` / `energy_per_inference` are set.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub config_id: String,
    pub count: ComponentCount,
    pub area_units: f64,
    pub energy_per_mac_units: f64,
    pub total_macs: Option<u64>,
    pub energy_per_inference_units: Option<f64>,
}

pub fn cost_report(cfg: &MultiplierConfig, costs: &UnitCosts) -> Result<CostReport> {
    let count = component_count(cfg)?;
    Ok(CostReport {
        config_id: cfg.id(),
        count,
        area_units: area_of_count(&count, costs),
        energy_per_mac_units: energy_of_count(&count, costs),
        total_macs: None,
        energy_per_inference_units: None,
    })
}

/// Energy of a whole inference given per-layer surviving MAC counts and a
/// per-layer scheme plan: `sum_l macs_l * energy_per_mac(plan_l)`.
pub fn energy_per_inference(
    layer_macs: &[u64],
    plan: &[MultiplierConfig],
    costs: &UnitCosts,
) -> Result<f64> {
    if layer_macs.len() != plan.len() {
        return Err(Error::PlanLayerMismatch {
            plan: plan.len(),
            model: layer_macs.len(),
        });
    }
    let mut total = 0.0;
    for (&macs, cfg) in layer_macs.iter().zip(plan) {
        total += macs as f64 * energy_per_mac(cfg, costs)?;
    }
    Ok(total)
}

/// One row of a comparison table: absolute units plus ratios of the baseline
/// config's cost to this config's cost (>1 means cheaper than baseline).
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub report: CostReport,
    pub area_ratio_to_baseline: f64,
    pub energy_ratio_to_baseline: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub baseline_id: String,
    pub rows: Vec<CompareRow>,
}

/// Published headline ratios kept alongside computed reports as external
/// references; they come from a 45nm synthesis flow this model does not
/// reproduce.
pub const PUBLISHED_REFERENCE_RATIOS: &[(&str, f64, f64)] = &[
    ("tlut-vs-dnc-exact-8", 29.54, 3.34),
    ("digital-mac-vs-dnc-exact-8", 1.23, 1.80),
    ("tlut-vs-dnc-approx-8", 62.85, 8.10),
    ("digital-mac-vs-dnc-approx-8", 2.64, 4.38),
];

/// Compares configs against a baseline contained in the list. Rows keep the
/// input order; ratio = baseline cost / row cost.
pub fn compare_report(
    cfgs: &[MultiplierConfig],
    baseline: &MultiplierConfig,
    costs: &UnitCosts,
) -> Result<CompareReport> {
    if !cfgs.contains(baseline) {
        return Err(Error::BaselineMissing);
    }
    let base = cost_report(baseline, costs)?;
    let rows = cfgs
        .iter()
        .map(|cfg| {
            let report = cost_report(cfg, costs)?;
            Ok(CompareRow {
                area_ratio_to_baseline: base.area_units / report.area_units,
                energy_ratio_to_baseline: base.energy_per_mac_units / report.energy_per_mac_units,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareReport {
        baseline_id: baseline.id(),
        rows,
    })
}

impl CompareReport {
    /// CSV with one row per config; trailing `#`-prefixed lines record the
    /// published reference ratios, flagged as not independently derived.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "config,sram,mux,ha,fa,xor,and,area,energy_per_mac,ratio_to_baseline,energy_ratio_to_baseline\n",
        );
        for row in &self.rows {
            let c = &row.report.count;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                row.report.config_id,
                c.sram_cells,
                c.mux2x1_1b,
                c.half_adders,
                c.full_adders,
                c.xor_gates,
                c.and_gates,
                fmt(row.report.area_units),
                fmt(row.report.energy_per_mac_units),
                fmt(row.area_ratio_to_baseline),
                fmt(row.energy_ratio_to_baseline),
            );
        }
        let _ = writeln!(out, "# baseline: {}", self.baseline_id);
        for (name, a, e) in PUBLISHED_REFERENCE_RATIOS {
            let _ = writeln!(
                out,
                "# reference: {name} area {a}x energy {e}x (published 45nm figures, not independently derived)"
            );
        }
        out
    }
}

fn fmt(v: f64) -> String {
    // stable shortest round-trip formatting keeps CSV bytes reproducible
    format!("{v}")
}

/// Ordered (scheme id -> count) map, mostly for diagnostics.
pub fn count_table(cfgs: &[MultiplierConfig]) -> Result<BTreeMap<String, ComponentCount>> {
    cfgs.iter()
        .map(|c| Ok((c.id(), component_count(c)?)))
        .collect()
}
