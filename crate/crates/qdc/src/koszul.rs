//! Bookkeeping for the restriction-surjectivity argument: twisted terms of
//! the Koszul resolution, their classification through the lattice layer,
//! the vanishing grid of the zeroth spectral-sequence page, and the verdict.

use crate::bbf::{
    classify, nef_perturbation, Class, ConeSpec, H2Lattice, LatticeError, TrichotomyCase,
};
use crate::scalar::Rat;
use num::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KoszulError {
    #[error("below threshold: N = {n_power} but N must exceed N0 = {n0}")]
    BelowThreshold { n_power: i64, n0: Rat },
    #[error("configuration invariant violated: {0}")]
    ConfigInvariant(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A nef class with q(l,l) = 0, ample classes cutting the subvariety, and
/// the twist power N.
#[derive(Clone, Debug)]
pub struct DivisorConfig {
    pub lattice: H2Lattice,
    pub cone: ConeSpec,
    pub nef_class: Class,
    pub amples: Vec<Class>,
    pub n: usize,
    pub power: i64,
}

impl DivisorConfig {
    pub fn new(
        lattice: H2Lattice,
        cone: ConeSpec,
        nef_class: Class,
        amples: Vec<Class>,
        n: usize,
        power: i64,
    ) -> Result<Self, KoszulError> {
        let q_ll = lattice.q(&nef_class, &nef_class)?;
        if !q_ll.is_zero() {
            return Err(KoszulError::ConfigInvariant(format!(
                "nef class must be isotropic, q(l,l) = {}",
                q_ll
            )));
        }
        for (i, g) in cone.generators().iter().enumerate() {
            let v = lattice.q(&nef_class, g)?;
            if v.is_negative() {
                return Err(KoszulError::ConfigInvariant(format!(
                    "nef class pairs negatively with generator {}",
                    i + 1
                )));
            }
        }
        for (i, h) in amples.iter().enumerate() {
            let v = lattice.q(&nef_class, h)?;
            if !v.is_positive() {
                return Err(KoszulError::ConfigInvariant(format!(
                    "q(l, h{}) = {} is not positive",
                    i + 1,
                    v
                )));
            }
            for (j, h2) in amples.iter().enumerate().skip(i) {
                let w = lattice.q(h, h2)?;
                if !w.is_positive() {
                    return Err(KoszulError::ConfigInvariant(format!(
                        "q(h{}, h{}) = {} is not positive",
                        i + 1,
                        j + 1,
                        w
                    )));
                }
            }
            for (j, g) in cone.generators().iter().enumerate() {
                let w = lattice.q(h, g)?;
                if !w.is_positive() {
                    return Err(KoszulError::ConfigInvariant(format!(
                        "ample h{} pairs non-positively with generator {}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(DivisorConfig {
            lattice,
            cone,
            nef_class,
            amples,
            n,
            power,
        })
    }

    pub fn codim(&self) -> usize {
        self.amples.len()
    }
}

fn subset_sum(amples: &[Class], subset: u32) -> Class {
    let rank = amples[0].len();
    let mut out = vec![Rat::zero(); rank];
    for (i, h) in amples.iter().enumerate() {
        if subset & (1 << i) != 0 {
            for (o, x) in out.iter_mut().zip(h.iter()) {
                *o += x;
            }
        }
    }
    out
}

/// The 2^k resolution terms: per subset S, the class N·l − Σ_{i∈S} h_i.
pub fn koszul_terms(cfg: &DivisorConfig) -> Vec<(u32, Class)> {
    let k = cfg.codim();
    let mut out = Vec::with_capacity(1 << k);
    for subset in 0..(1u32 << k) {
        let hs = if k == 0 {
            vec![Rat::zero(); cfg.nef_class.len()]
        } else {
            subset_sum(&cfg.amples, subset)
        };
        let class: Class = cfg
            .nef_class
            .iter()
            .zip(hs.iter())
            .map(|(l, h)| l * Rat::from_integer(cfg.power.into()) - h)
            .collect();
        out.push((subset, class));
    }
    out
}

/// N₀ = max over nonempty subsets S of q(h_S,h_S)/q(l,h_S); every integer
/// N > N₀ pushes each subtracted term outside both closed dual cones.
pub fn n0_threshold(cfg: &DivisorConfig) -> Result<Rat, KoszulError> {
    let k = cfg.codim();
    let mut best: Option<Rat> = None;
    for subset in 1..(1u32 << k) {
        let hs = subset_sum(&cfg.amples, subset);
        let q_hh = cfg.lattice.q(&hs, &hs)?;
        let q_lh = cfg.lattice.q(&cfg.nef_class, &hs)?;
        if !q_lh.is_positive() {
            return Err(KoszulError::ConfigInvariant(format!(
                "q(l, h_S) = {} is not positive for subset {:#b}",
                q_lh, subset
            )));
        }
        let ratio = q_hh / q_lh;
        best = Some(match best {
            None => ratio,
            Some(b) => {
                if ratio > b {
                    ratio
                } else {
                    b
                }
            }
        });
    }
    Ok(best.unwrap_or_else(Rat::zero))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Zero,
    PossiblyNonzero,
    Input,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Zero => write!(f, "0"),
            Cell::PossiblyNonzero => write!(f, "?"),
            Cell::Input => write!(f, "input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TermClassification {
    pub subset: u32,
    pub class: Class,
    pub case: TrichotomyCase,
    pub zero_degrees: Vec<usize>,
}

/// Zeroth-page vanishing grid: rows are cohomology degrees 0..n, columns
/// run from the fully subtracted Koszul term to the restriction column.
#[derive(Clone, Debug)]
pub struct SpectralGrid {
    pub n: usize,
    pub k: usize,
    /// per subtracted-count s = k, k−1, …, 0: the aggregated column cells.
    pub columns: Vec<GridColumn>,
    pub classifications: Vec<TermClassification>,
}

#[derive(Clone, Debug)]
pub struct GridColumn {
    pub subtracted: usize,
    pub cells: Vec<Cell>,
}

impl SpectralGrid {
    pub fn cell(&self, subtracted: usize, row: usize) -> Cell {
        self.columns
            .iter()
            .find(|c| c.subtracted == subtracted)
            .map(|c| c.cells[row])
            .unwrap_or(Cell::Input)
    }

    /// Text rendering in the layout of the spectral-sequence page: top row
    /// is degree n, the rightmost column is the restriction input.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for row in (0..=self.n).rev() {
            let mut cells: Vec<String> = Vec::new();
            for col in &self.columns {
                cells.push(format!("{:>6}", col.cells[row].to_string()));
            }
            cells.push(format!("{:>6}", Cell::Input.to_string()));
            out.push_str(&format!("H^{} |{}\n", row, cells.join(" ")));
        }
        let mut hdr: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{:>6}", format!("-{}H", c.subtracted)))
            .collect();
        hdr.push(format!("{:>6}", "restr"));
        out.push_str(&format!("     {}\n", hdr.join(" ")));
        out
    }
}

/// Kähler classes witnessing the position of the subtracted terms: each
/// ample sum h_S lies in the cone, and so does l + δ_S·h_S for the
/// perturbation δ_S (nef + ample is Kähler; cone membership of these classes
/// is the positivity oracle the configuration invariants encode). Adjoining
/// them makes the polyhedral trichotomy agree with the perturbation
/// argument.
fn enriched_cone(cfg: &DivisorConfig) -> Result<ConeSpec, KoszulError> {
    let mut gens: Vec<Class> = cfg.cone.generators().to_vec();
    let k = cfg.codim();
    if k > 0 {
        let eps = Rat::one() / Rat::from_integer(cfg.power.into());
        for subset in 1..(1u32 << k) {
            let hs = subset_sum(&cfg.amples, subset);
            let p = nef_perturbation(&cfg.lattice, &cfg.nef_class, &hs, &eps)?;
            let witness: Class = cfg
                .nef_class
                .iter()
                .zip(hs.iter())
                .map(|(l, h)| l + &(h * &p.delta))
                .collect();
            gens.push(hs);
            gens.push(witness);
        }
    }
    Ok(ConeSpec::new(&cfg.lattice, gens)?)
}

/// Classify every Koszul term and assemble the vanishing grid.
pub fn vanishing_grid(cfg: &DivisorConfig) -> Result<SpectralGrid, KoszulError> {
    let n0 = n0_threshold(cfg)?;
    if Rat::from_integer(cfg.power.into()) <= n0 {
        return Err(KoszulError::BelowThreshold {
            n_power: cfg.power,
            n0,
        });
    }
    let k = cfg.codim();
    let cone = enriched_cone(cfg)?;
    let mut classifications = Vec::new();
    for (subset, class) in koszul_terms(cfg) {
        let report = classify(&cfg.lattice, &cone, &class, cfg.n)?;
        classifications.push(TermClassification {
            subset,
            class,
            case: report.case,
            zero_degrees: report.zero_degrees,
        });
    }
    let mut columns = Vec::new();
    for subtracted in (0..=k).rev() {
        let mut cells = vec![Cell::Zero; cfg.n + 1];
        for row in 0..=cfg.n {
            let all_zero = classifications
                .iter()
                .filter(|c| (c.subset.count_ones() as usize) == subtracted)
                .all(|c| c.zero_degrees.contains(&row));
            cells[row] = if all_zero { Cell::Zero } else { Cell::PossiblyNonzero };
        }
        columns.push(GridColumn { subtracted, cells });
    }
    Ok(SpectralGrid {
        n: cfg.n,
        k,
        columns,
        classifications,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Surjective,
    NotApplicable { reason: String },
}

#[derive(Clone, Debug)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub n0: Rat,
    pub grid: SpectralGrid,
    /// per subset: the classification justifying each zero the argument uses.
    pub trace: Vec<String>,
}

/// Surjectivity of the restriction on global sections: needs codimension
/// k < n and zeros in rows r−1 of the r-subtracted columns for r = 1..k —
/// exactly the differentials that could interfere with the restriction map.
pub fn surjectivity_verdict(cfg: &DivisorConfig) -> Result<VerdictReport, KoszulError> {
    let grid = vanishing_grid(cfg)?;
    let n0 = n0_threshold(cfg)?;
    let k = cfg.codim();
    let mut trace = Vec::new();
    if k >= cfg.n {
        return Ok(VerdictReport {
            verdict: Verdict::NotApplicable {
                reason: format!(
                    "codimension k = {} must be smaller than n = {} (the subvariety must have dimension above half)",
                    k, cfg.n
                ),
            },
            n0,
            grid,
            trace,
        });
    }
    let mut ok = true;
    for r in 1..=k {
        let cell = grid.cell(r, r - 1);
        if cell != Cell::Zero {
            ok = false;
        }
        for c in grid
            .classifications
            .iter()
            .filter(|c| (c.subset.count_ones() as usize) == r)
        {
            trace.push(format!(
                "subset {:#0width$b}: case {} kills H^{}",
                c.subset,
                c.case,
                r - 1,
                width = k + 2
            ));
        }
    }
    trace.push("remaining differential into the restriction column is the restriction map".into());
    if !ok {
        return Ok(VerdictReport {
            verdict: Verdict::NotApplicable {
                reason: "required vanishing cells are not zero".into(),
            },
            n0,
            grid,
            trace,
        });
    }
    Ok(VerdictReport {
        verdict: Verdict::Surjective,
        n0,
        grid,
        trace,
    })
}
