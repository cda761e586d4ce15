//! Reliable facility location under disruptions and random demand.
//!
//! Second stage for customer t and site s (the last site is the emergency
//! facility, never disrupted, unit cost M):
//! `min Σ c_ts d_t y_ts  s.t.  Σ_s y_ts = 1,  y ≥ 0,  y_ts ≤ δ_s x_s`.
//! Demand d is the objective block `ξ_q` (`Q[(t,s), t] = c_ts`) and
//! availability δ is the constraint block `ξ_T` (`T(x)` has `x_s` at
//! row `(t,s)`, column s).

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use drtsp_lp::{solve, LinearModel, LpStatus, ObjectiveSense, Sense, VarId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DrtspError, Result};
use crate::io::fmt_g9;
use crate::model::{
    AffineMatrixMap, AffineVectorMap, AmbiguitySet, DrtspInstance, FirstStage, NormP, SignMark, SupportKind,
};
use crate::recourse::evaluate_recourse;
use crate::reformulate::solve_drtsp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlpParams {
    pub n_sites: usize,
    pub n_customers: usize,
    pub n_samples: usize,
    /// Probability that a site is disrupted in a sample.
    pub disruption_prob: f64,
    pub demand_range: (f64, f64),
    pub fixed_cost_range: (f64, f64),
    pub big_m: f64,
}

impl Default for FlpParams {
    fn default() -> Self {
        FlpParams {
            n_sites: 4,
            n_customers: 4,
            n_samples: 5,
            disruption_prob: 0.05,
            demand_range: (0.05, 1.0),
            fixed_cost_range: (10.0, 60.0),
            big_m: 10000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlpInstance {
    pub n_sites: usize,
    pub n_customers: usize,
    pub fixed_cost: Vec<f64>,
    /// `n_customers × (n_sites + 1)`; the last column is the emergency cost M.
    pub unit_cost: Vec<Vec<f64>>,
    pub disruption_prob: Vec<f64>,
    pub demand_range: (f64, f64),
    pub big_m: f64,
    pub site_xy: Vec<(f64, f64)>,
    pub customer_xy: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    /// Availability, `N × n_sites`, 1 = functioning.
    pub delta: Vec<Vec<f64>>,
    /// Demand, `N × n_customers`.
    pub demand: Vec<Vec<f64>>,
    pub seed: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn mean_demand(&self) -> Vec<f64> {
        let n = self.demand.len() as f64;
        let c = self.demand.first().map_or(0, |d| d.len());
        (0..c).map(|t| self.demand.iter().map(|d| d[t]).sum::<f64>() / n).collect()
    }
}

fn check_params(p: &FlpParams) -> Result<()> {
    if p.n_sites == 0 || p.n_customers == 0 {
        return Err(DrtspError::Dimension("facility location needs at least one site and one customer".into()));
    }
    if !(0.0..=1.0).contains(&p.disruption_prob) {
        return Err(DrtspError::Dimension(format!("disruption probability {} is outside [0, 1]", p.disruption_prob)));
    }
    if p.demand_range.0 > p.demand_range.1 || p.fixed_cost_range.0 > p.fixed_cost_range.1 {
        return Err(DrtspError::Dimension("empty demand or fixed-cost range".into()));
    }
    Ok(())
}

fn draw<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Sites and customers uniform in the unit square, `c_ts = 100·distance`,
/// then `params.n_samples` training samples.
pub fn generate_flp(params: &FlpParams, seed: u64) -> Result<(FlpInstance, SampleSet)> {
    check_params(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| (rng.gen::<f64>(), rng.gen::<f64>());
    let site_xy: Vec<(f64, f64)> = (0..params.n_sites).map(|_| point(&mut rng)).collect();
    let customer_xy: Vec<(f64, f64)> = (0..params.n_customers).map(|_| point(&mut rng)).collect();
    let fixed_cost = (0..params.n_sites).map(|_| draw(&mut rng, params.fixed_cost_range.0, params.fixed_cost_range.1)).collect();
    let unit_cost: Vec<Vec<f64>> = customer_xy
        .iter()
        .map(|&(cx, cy)| {
            let mut row: Vec<f64> = site_xy.iter().map(|&(sx, sy)| 100.0 * ((cx - sx).powi(2) + (cy - sy).powi(2)).sqrt()).collect();
            row.push(params.big_m);
            row
        })
        .collect();
    let flp = FlpInstance {
        n_sites: params.n_sites,
        n_customers: params.n_customers,
        fixed_cost,
        unit_cost,
        disruption_prob: vec![params.disruption_prob; params.n_sites],
        demand_range: params.demand_range,
        big_m: params.big_m,
        site_xy,
        customer_xy,
    };
    let samples = draw_samples(&flp, params.n_samples, seed.wrapping_add(1));
    Ok((flp, samples))
}

/// Independent availability (Bernoulli(1 − p)) and uniform demands.
pub fn draw_samples(flp: &FlpInstance, n: usize, seed: u64) -> SampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = flp.demand_range;
    let mut delta = Vec::with_capacity(n);
    let mut demand = Vec::with_capacity(n);
    for _ in 0..n {
        delta.push(flp.disruption_prob.iter().map(|&p| if rng.gen::<f64>() < p { 0.0 } else { 1.0 }).collect());
        demand.push((0..flp.n_customers).map(|_| draw(&mut rng, lo, hi)).collect());
    }
    SampleSet { delta, demand, seed }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlpVariant {
    /// Continuous demand and availability, p = ∞.
    Box15,
    /// Demand only; availability fixed to all ones.
    DemandOnly18,
    /// Availability only (continuous), demand fixed to its sample mean, p = 1.
    DisruptL1_21,
    /// Continuous demand, binary availability, p = ∞.
    Binary22,
    /// Binary availability only, demand fixed to its sample mean, p = 1.
    BinaryL1_29,
}

impl FlpVariant {
    pub const ALL: [FlpVariant; 5] =
        [FlpVariant::Box15, FlpVariant::DemandOnly18, FlpVariant::DisruptL1_21, FlpVariant::Binary22, FlpVariant::BinaryL1_29];

    pub fn name(self) -> &'static str {
        match self {
            FlpVariant::Box15 => "Box15",
            FlpVariant::DemandOnly18 => "DemandOnly18",
            FlpVariant::DisruptL1_21 => "DisruptL1_21",
            FlpVariant::Binary22 => "Binary22",
            FlpVariant::BinaryL1_29 => "BinaryL1_29",
        }
    }

    pub fn default_p(self) -> NormP {
        match self {
            FlpVariant::Box15 | FlpVariant::Binary22 => NormP::Inf,
            FlpVariant::DemandOnly18 => NormP::Finite(2.0),
            FlpVariant::DisruptL1_21 | FlpVariant::BinaryL1_29 => NormP::Finite(1.0),
        }
    }
}

impl fmt::Display for FlpVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlpVariant {
    type Err = DrtspError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        FlpVariant::ALL
            .into_iter()
            .find(|v| v.name().chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase() == key)
            .ok_or_else(|| DrtspError::Parse(format!("unknown facility-location variant {:?}", s)))
    }
}

/// Index of `y_ts` among the second-stage variables.
pub fn y_index(flp: &FlpInstance, t: usize, s: usize) -> usize {
    t * (flp.n_sites + 1) + s
}

/// Rows: assignment pairs `±Σ_s y_ts ≥ ±1`, then `y_ts ≥ 0`, then
/// `x_s δ_s − y_ts ≥ 0`.
fn recourse_structure(flp: &FlpInstance) -> DrtspInstance {
    let (ns, nc) = (flp.n_sites, flp.n_customers);
    let n2 = nc * (ns + 1);
    let mut w = Vec::new();
    let mut h = Vec::new();
    for t in 0..nc {
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; n2];
            for s in 0..=ns {
                row[y_index(flp, t, s)] = sign;
            }
            w.push(row);
            h.push(sign);
        }
    }
    for k in 0..n2 {
        let mut row = vec![0.0; n2];
        row[k] = 1.0;
        w.push(row);
        h.push(0.0);
    }
    let cap0 = w.len();
    for t in 0..nc {
        for s in 0..ns {
            let mut row = vec![0.0; n2];
            row[y_index(flp, t, s)] = -1.0;
            w.push(row);
            h.push(0.0);
        }
    }
    let l = w.len();
    let mut coeffs = vec![vec![vec![0.0; ns]; l]; ns];
    for t in 0..nc {
        for s in 0..ns {
            coeffs[s][cap0 + t * ns + s][s] = 1.0;
        }
    }
    let mut q_mat = vec![vec![0.0; nc]; n2];
    for t in 0..nc {
        for s in 0..=ns {
            q_mat[y_index(flp, t, s)][t] = flp.unit_cost[t][s];
        }
    }
    DrtspInstance {
        n1: ns,
        n2,
        m1: nc,
        m2: ns,
        l,
        c: flp.fixed_cost.clone(),
        first_stage: FirstStage {
            a: Vec::new(),
            b: Vec::new(),
            lb: vec![0.0; ns],
            ub: vec![1.0; ns],
            binary: vec![true; ns],
        },
        w,
        q_mat,
        q: vec![0.0; n2],
        t: AffineMatrixMap { base: vec![vec![0.0; ns]; l], coeffs, sign: vec![vec![SignMark::NonNeg; ns]; l] },
        h: AffineVectorMap::constant(h, ns),
    }
}

/// The variant's instance and ambiguity set at radius `theta` with the
/// variant's default norm.
pub fn flp_to_drtsp(flp: &FlpInstance, samples: &SampleSet, variant: FlpVariant, theta: f64) -> Result<(DrtspInstance, AmbiguitySet)> {
    if samples.is_empty() {
        return Err(DrtspError::Dimension("no training samples".into()));
    }
    let inst = recourse_structure(flp);
    let n = samples.len();
    let mean = samples.mean_demand();
    let ones = vec![1.0; flp.n_sites];
    let (samples_q, support_q, samples_t, support_t) = match variant {
        FlpVariant::Box15 => (samples.demand.clone(), SupportKind::Continuous, samples.delta.clone(), SupportKind::Continuous),
        FlpVariant::DemandOnly18 => {
            (samples.demand.clone(), SupportKind::Continuous, vec![ones.clone(); n], SupportKind::Singleton(ones))
        }
        FlpVariant::DisruptL1_21 => {
            (vec![mean.clone(); n], SupportKind::Singleton(mean), samples.delta.clone(), SupportKind::Continuous)
        }
        FlpVariant::Binary22 => (samples.demand.clone(), SupportKind::Continuous, samples.delta.clone(), SupportKind::Binary),
        FlpVariant::BinaryL1_29 => {
            (vec![mean.clone(); n], SupportKind::Singleton(mean), samples.delta.clone(), SupportKind::Binary)
        }
    };
    let amb = AmbiguitySet { p: variant.default_p(), theta, samples_q, samples_t, support_q, support_t };
    Ok((inst, amb))
}

/// Recourse cost of one realization; the emergency column keeps it finite.
pub fn flp_recourse(flp: &FlpInstance, x: &[f64], delta: &[f64], demand: &[f64]) -> Result<f64> {
    let inst = recourse_structure(flp);
    Ok(evaluate_recourse(&inst, x, demand, delta)?.0)
}

/// Which form of the facility-location MILP [`direct_model`] writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectForm {
    Box15,
    /// Objective-only with `p ∈ {1, ∞}`.
    DemandOnly18,
    /// Sweep over sites i and signs r ∈ {−1, +1}.
    DisruptL1Full,
    /// Sweep over sites i with r = +1 only.
    DisruptL1Plus,
    Binary22,
    /// Neighbour availability vectors: the sample and each single flip.
    BinaryL1_29,
}

/// The facility-location MILP written directly over `x_s`, `y_ts^{j…}`
/// and `η_j`, without the generic reformulation machinery. `x` occupies
/// columns `0..n_sites`.
pub fn direct_model(flp: &FlpInstance, samples: &SampleSet, form: DirectForm, theta: f64, p: NormP) -> Result<LinearModel> {
    let (ns, nc) = (flp.n_sites, flp.n_customers);
    let n = samples.len();
    let wgt = 1.0 / n as f64;
    let mut lp = LinearModel::new(ObjectiveSense::Minimize);
    let x: Vec<VarId> = (0..ns).map(|s| lp.add_binary(format!("x{}", s), flp.fixed_cost[s])).collect();
    let mean = samples.mean_demand();
    if form == DirectForm::BinaryL1_29 && theta >= 2f64.powf(1.0 / p_val(p)) {
        return Err(DrtspError::RegimeMismatch("the single-flip neighbourhood needs theta < 2^(1/p)".into()));
    }
    if form == DirectForm::DemandOnly18 && !(p.is_inf() || p.is_one()) {
        return Err(DrtspError::RegimeMismatch("the direct demand-only model is linear only for p in {1, inf}".into()));
    }
    for j in 0..n {
        let delta = &samples.delta[j];
        // (label, availability coefficient of x_s per site, demand used).
        let copies: Vec<(String, Vec<f64>)> = match form {
            DirectForm::Box15 => vec![("b".into(), delta.iter().map(|d| d - theta).collect())],
            DirectForm::DemandOnly18 => vec![("b".into(), vec![1.0; ns])],
            DirectForm::Binary22 => vec![("b".into(), delta.iter().map(|&d| if theta < 1.0 { d } else { 0.0 }).collect())],
            DirectForm::DisruptL1Full | DirectForm::DisruptL1Plus => {
                let rs: &[f64] = if form == DirectForm::DisruptL1Full { &[-1.0, 1.0] } else { &[1.0] };
                let mut v = Vec::new();
                for i in 0..ns {
                    for &r in rs {
                        let cap = (0..ns).map(|s| delta[s] - if s == i { theta * r } else { 0.0 }).collect();
                        v.push((format!("i{}r{}", i, r), cap));
                    }
                }
                v
            }
            DirectForm::BinaryL1_29 => {
                let mut v = vec![("i0".to_string(), delta.clone())];
                if theta >= 1.0 {
                    for i in 0..ns {
                        let mut d = delta.clone();
                        d[i] = 1.0 - d[i];
                        v.push((format!("i{}", i + 1), d));
                    }
                }
                v
            }
        };
        let demand: &[f64] = match form {
            DirectForm::DisruptL1Full | DirectForm::DisruptL1Plus | DirectForm::BinaryL1_29 => &mean,
            _ => &samples.demand[j],
        };
        let eta = if copies.len() > 1 {
            Some(lp.add_var(format!("eta{}", j), f64::NEG_INFINITY, f64::INFINITY, wgt))
        } else {
            None
        };
        for (label, cap) in &copies {
            let mut cost: Vec<(VarId, f64)> = Vec::new();
            let mut by_customer: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); nc];
            for t in 0..nc {
                let mut assign = Vec::with_capacity(ns + 1);
                for s in 0..=ns {
                    let y = lp.add_var(format!("y{}_{}_{}_{}", j, label, t, s), 0.0, f64::INFINITY, 0.0);
                    assign.push((y, 1.0));
                    let c = flp.unit_cost[t][s];
                    let unit = match form {
                        DirectForm::Box15 | DirectForm::Binary22 => c * (demand[t] + theta),
                        _ => c * demand[t],
                    };
                    cost.push((y, unit));
                    by_customer[t].push((y, c));
                    if s < ns {
                        lp.add_row(format!("cap{}_{}_{}_{}", j, label, t, s), &[(y, -1.0), (x[s], cap[s])], Sense::Ge, 0.0);
                    }
                }
                lp.add_row(format!("assign{}_{}_{}", j, label, t), &assign, Sense::Eq, 1.0);
            }
            if form == DirectForm::DemandOnly18 && theta > 0.0 {
                // θ‖(Σ_s c_ts y_ts)_t‖_{p*}, nonnegative entries.
                if p.is_inf() {
                    for e in &by_customer {
                        cost.extend(e.iter().map(|&(v, c)| (v, theta * c)));
                    }
                } else {
                    let w = lp.add_var(format!("w{}", j), 0.0, f64::INFINITY, 0.0);
                    for (t, e) in by_customer.iter().enumerate() {
                        let mut row = vec![(w, 1.0)];
                        row.extend(e.iter().map(|&(v, c)| (v, -c)));
                        lp.add_row(format!("wmax{}_{}", j, t), &row, Sense::Ge, 0.0);
                    }
                    cost.push((w, theta));
                }
            }
            match eta {
                None => {
                    for (v, c) in cost {
                        lp.objective[v] += wgt * c;
                    }
                }
                Some(e) => {
                    let mut row = vec![(e, 1.0)];
                    row.extend(cost.iter().map(|&(v, c)| (v, -c)));
                    lp.add_row(format!("epi{}_{}", j, label), &row, Sense::Ge, 0.0);
                }
            }
        }
    }
    Ok(lp)
}

fn p_val(p: NormP) -> f64 {
    match p {
        NormP::Inf => f64::INFINITY,
        NormP::Finite(v) => v,
    }
}

/// Optimal value and first stage of [`direct_model`].
pub fn solve_direct(flp: &FlpInstance, samples: &SampleSet, form: DirectForm, theta: f64, p: NormP) -> Result<(f64, Vec<f64>)> {
    let lp = direct_model(flp, samples, form, theta, p)?;
    let sol = solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(DrtspError::Solver(format!("direct facility-location model ended {:?}", sol.status)));
    }
    Ok((sol.objective, sol.x[..flp.n_sites].to_vec()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutOfSample {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

/// Mean of `fᵀx + Z(x, ξ)` over `eval` with a normal-approximation 95%
/// interval `mean ± 1.96·stderr`.
pub fn out_of_sample_eval(flp: &FlpInstance, x: &[f64], eval: &SampleSet) -> Result<OutOfSample> {
    if eval.is_empty() {
        return Err(DrtspError::Dimension("no evaluation samples".into()));
    }
    let inst = recourse_structure(flp);
    let fx: f64 = flp.fixed_cost.iter().zip(x).map(|(f, v)| f * v).sum();
    let vals: Vec<Result<f64>> = (0..eval.len())
        .into_par_iter()
        .map(|j| Ok(fx + evaluate_recourse(&inst, x, &eval.demand[j], &eval.delta[j])?.0))
        .collect();
    let vals = vals.into_iter().collect::<Result<Vec<f64>>>()?;
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let stderr = if vals.len() > 1 {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(OutOfSample { mean, ci_low: mean - 1.96 * stderr, ci_high: mean + 1.96 * stderr, n: vals.len() })
}

/// Smallest holdout size for which an interval row is reported.
pub const MIN_HOLDOUT: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValRow {
    pub theta: f64,
    pub opt_val: f64,
    pub time_s: f64,
    /// One-based site indices.
    pub built_facilities: Vec<usize>,
    pub holdout_mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValReport {
    pub variant: FlpVariant,
    pub rows: Vec<CrossValRow>,
    pub chosen_theta: f64,
    /// False when no θ cleared its interval and the largest was taken.
    pub qualified: bool,
}

/// Solves the variant at every grid radius on `train`, evaluates each
/// first stage on `n_holdout` fresh samples drawn from `seed`, and picks
/// the smallest θ whose optimal value exceeds its interval's upper end.
pub fn cross_validate(
    flp: &FlpInstance,
    train: &SampleSet,
    variant: FlpVariant,
    theta_grid: &[f64],
    seed: u64,
    n_holdout: usize,
) -> Result<CrossValReport> {
    if theta_grid.is_empty() || theta_grid.windows(2).any(|w| w[0] > w[1]) || theta_grid[0] != 0.0 {
        return Err(DrtspError::Dimension("theta grid must be sorted ascending and start at 0".into()));
    }
    if n_holdout < MIN_HOLDOUT {
        return Err(DrtspError::Dimension(format!("holdout size {} is below {}", n_holdout, MIN_HOLDOUT)));
    }
    let holdout = draw_samples(flp, n_holdout, seed);
    let rows: Vec<Result<CrossValRow>> = theta_grid
        .par_iter()
        .map(|&theta| {
            let (inst, amb) = flp_to_drtsp(flp, train, variant, theta)?;
            let start = Instant::now();
            let sol = solve_drtsp(&inst, &amb)?;
            let time_s = start.elapsed().as_secs_f64();
            let oos = out_of_sample_eval(flp, &sol.x, &holdout)?;
            Ok(CrossValRow {
                theta,
                opt_val: sol.objective,
                time_s,
                built_facilities: sol.x.iter().enumerate().filter(|(_, v)| **v > 0.5).map(|(s, _)| s + 1).collect(),
                holdout_mean: oos.mean,
                ci_low: oos.ci_low,
                ci_high: oos.ci_high,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let pick = rows.iter().find(|r| r.opt_val > r.ci_high);
    let (chosen_theta, qualified) = match pick {
        Some(r) => (r.theta, true),
        None => (rows.last().expect("nonempty grid").theta, false),
    };
    Ok(CrossValReport { variant, rows, chosen_theta, qualified })
}

pub const CROSSVAL_HEADER: [&str; 8] =
    ["theta", "opt_val", "time_s", "built_facilities", "holdout_mean", "ci_low", "ci_high", "chosen"];

/// One line per grid radius; `chosen` is `yes`, `fallback` (no radius
/// qualified, largest taken) or `no`.
pub fn crossval_csv(report: &CrossValReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| DrtspError::Io(std::io::Error::new(std::io::ErrorKind::Other, e));
    w.write_record(CROSSVAL_HEADER).map_err(io)?;
    for r in &report.rows {
        let chosen = if r.theta == report.chosen_theta {
            if report.qualified {
                "yes"
            } else {
                "fallback"
            }
        } else {
            "no"
        };
        let built = format!("[{}]", r.built_facilities.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "));
        w.write_record([
            fmt_g9(r.theta),
            fmt_g9(r.opt_val),
            format!("{:.3}", r.time_s),
            built,
            fmt_g9(r.holdout_mean),
            fmt_g9(r.ci_low),
            fmt_g9(r.ci_high),
            chosen.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| DrtspError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
