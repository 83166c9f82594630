//! Seeded Monte Carlo campaigns.
//!
//! A trial samples one random code on `G*`, restricts it to the base
//! network and records whether both terminals of `G*` decode `(M, N)`,
//! whether `T` decodes `M`, and whether every `z`-subset of base edges is
//! secure.
//!
//! Trial seeds are derived in counter mode: trial `i` of rate point `(R, z)`
//! uses `derive_seed(base_seed, (R << 32) | z, i)`, so trials are independent
//! of each other and of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{audit_all, binomial, AuditError, AuditOptions, SecurityReport};
use crate::codec::{decodable, star_feasible_on, CodecError, LinearCode};
use crate::field::{Matrix, PrimeField};
use crate::network::{CutCapacities, Network, NetworkError};
use crate::region::{self, Bound, RatePoint, RegionError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("rank experiment needs n <= m, got n = {n}, m = {m}")]
    Shape { n: usize, m: usize },
    #[error("{states} matrices exceed the enumeration budget of {limit}")]
    EnumerationBudget { states: u128, limit: u128 },
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// `splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index)`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index)
}

fn point_stream(rate: usize, wiretap: usize) -> u64 {
    ((rate as u64) << 32) | wiretap as u64
}

/// A lower bound of the form `1 - penalty / q`, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityBound {
    pub penalty: u128,
    pub denominator: u64,
    pub value: f64,
    /// false when the bound is at or below zero and says nothing
    pub binding: bool,
}

impl ProbabilityBound {
    pub fn new(penalty: u128, q: u64) -> Self {
        Self {
            penalty,
            denominator: q,
            value: 1.0 - penalty as f64 / q as f64,
            binding: penalty < q as u128,
        }
    }
}

/// `1 - 2(|E| + R + z)^2 / q`: decodability of the random code.
pub fn decodability_bound(edges: usize, rate: usize, wiretap: usize, q: u64) -> ProbabilityBound {
    let n = (edges + rate + wiretap) as u128;
    ProbabilityBound::new(2 * n * n, q)
}

/// `1 - C(|E|, z) · 2z / q`: security of the random code.
pub fn security_bound(edges: usize, wiretap: usize, q: u64) -> ProbabilityBound {
    ProbabilityBound::new(binomial(edges, wiretap).saturating_mul(2 * wiretap as u128), q)
}

/// Union of the two failure events.
pub fn feasibility_bound(edges: usize, rate: usize, wiretap: usize, q: u64) -> ProbabilityBound {
    let a = decodability_bound(edges, rate, wiretap, q).penalty;
    let b = security_bound(edges, wiretap, q).penalty;
    ProbabilityBound::new(a.saturating_add(b), q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub seed: u64,
    /// both `T` and `T*` decode `(M, N)` on `G*`
    pub star_ok: bool,
    pub decodable: bool,
    pub secure: bool,
    pub feasible: bool,
}

/// Everything produced by one trial, for callers that want the code itself.
#[derive(Debug, Clone)]
pub struct Construction {
    /// the code on `G*`; restrict it to get the code on the base network
    pub code: LinearCode,
    pub report: SecurityReport,
    pub outcome: TrialOutcome,
}

pub fn construct(
    net: &Network,
    rate: usize,
    wiretap: usize,
    field: PrimeField,
    seed: u64,
    opts: &AuditOptions,
) -> Result<Construction, ExperimentError> {
    RatePoint::new(rate, wiretap)?;
    let aug = net.augment_star(rate, wiretap)?;
    let code = LinearCode::sample_star(&aug, rate, wiretap, field, seed);
    let star_ok = star_feasible_on(&code.propagate(), &aug);
    let enc = code.restrict_to_base()?.propagate();
    let decodable = decodable(&enc, net);
    let report = audit_all(&enc, net, wiretap, opts)?;
    let outcome = TrialOutcome {
        seed,
        star_ok,
        decodable,
        secure: report.secure,
        feasible: decodable && report.secure,
    };
    Ok(Construction {
        code,
        report,
        outcome,
    })
}

pub fn run_trial(
    net: &Network,
    rate: usize,
    wiretap: usize,
    field: PrimeField,
    seed: u64,
    opts: &AuditOptions,
) -> Result<TrialOutcome, ExperimentError> {
    construct(net, rate, wiretap, field, seed, opts).map(|c| c.outcome)
}

/// Event counts over a batch of trials. Merging is a plain sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    pub star_ok: u64,
    pub decodable: u64,
    pub secure: u64,
    pub feasible: u64,
    /// trials with `star_ok` but not `decodable`
    pub restriction_violations: u64,
}

impl Tally {
    fn record(&mut self, t: &TrialOutcome) {
        self.trials += 1;
        self.star_ok += u64::from(t.star_ok);
        self.decodable += u64::from(t.decodable);
        self.secure += u64::from(t.secure);
        self.feasible += u64::from(t.feasible);
        self.restriction_violations += u64::from(t.star_ok && !t.decodable);
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.star_ok += other.star_ok;
        self.decodable += other.decodable;
        self.secure += other.secure;
        self.feasible += other.feasible;
        self.restriction_violations += other.restriction_violations;
        self
    }
}

fn run_batch(
    net: &Network,
    rate: usize,
    wiretap: usize,
    field: PrimeField,
    trials: u64,
    base_seed: u64,
    opts: &AuditOptions,
) -> Result<Tally, ExperimentError> {
    let stream = point_stream(rate, wiretap);
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(base_seed, stream, i);
            let mut t = Tally::default();
            t.record(&run_trial(net, rate, wiretap, field, seed, opts)?);
            Ok(t)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

/// Normal-approximation standard error of an empirical rate.
pub fn sampling_sigma(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let p = successes as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub rate_point: RatePoint,
    pub q: u64,
    pub edges: usize,
    pub base_seed: u64,
    pub region_feasible: bool,
    pub tally: Tally,
    pub decodability_bound: ProbabilityBound,
    pub security_bound: ProbabilityBound,
    pub feasibility_bound: ProbabilityBound,
}

impl CampaignResult {
    fn rate(&self, n: u64) -> f64 {
        n as f64 / self.tally.trials as f64
    }

    pub fn decodable_rate(&self) -> f64 {
        self.rate(self.tally.decodable)
    }

    pub fn secure_rate(&self) -> f64 {
        self.rate(self.tally.secure)
    }

    pub fn joint_rate(&self) -> f64 {
        self.rate(self.tally.feasible)
    }

    pub fn successes(&self) -> u64 {
        self.tally.feasible
    }

    pub fn row(&self) -> CampaignRow {
        let label = |b: &ProbabilityBound| if b.binding { "BINDING" } else { "NON-BINDING" };
        CampaignRow {
            rate: self.rate_point.rate,
            wiretap: self.rate_point.wiretap,
            q: self.q,
            edges: self.edges,
            trials: self.tally.trials,
            star_ok: self.tally.star_ok,
            decodable: self.tally.decodable,
            secure: self.tally.secure,
            joint: self.tally.feasible,
            restriction_violations: self.tally.restriction_violations,
            decodable_rate: self.decodable_rate(),
            secure_rate: self.secure_rate(),
            joint_rate: self.joint_rate(),
            decodability_bound: self.decodability_bound.value,
            decodability_bound_status: label(&self.decodability_bound),
            security_bound: self.security_bound.value,
            security_bound_status: label(&self.security_bound),
            feasibility_bound: self.feasibility_bound.value,
            feasibility_bound_status: label(&self.feasibility_bound),
            region_feasible: self.region_feasible,
        }
    }
}

/// One CSV/JSON row of a campaign. Column order is part of the output format.
#[derive(Debug, Clone, Serialize)]
pub struct CampaignRow {
    pub rate: usize,
    pub wiretap: usize,
    pub q: u64,
    pub edges: usize,
    pub trials: u64,
    pub star_ok: u64,
    pub decodable: u64,
    pub secure: u64,
    pub joint: u64,
    pub restriction_violations: u64,
    pub decodable_rate: f64,
    pub secure_rate: f64,
    pub joint_rate: f64,
    pub decodability_bound: f64,
    pub decodability_bound_status: &'static str,
    pub security_bound: f64,
    pub security_bound_status: &'static str,
    pub feasibility_bound: f64,
    pub feasibility_bound_status: &'static str,
    pub region_feasible: bool,
}

pub fn success_rate(
    net: &Network,
    rate: usize,
    wiretap: usize,
    field: PrimeField,
    trials: u64,
    base_seed: u64,
    opts: &AuditOptions,
) -> Result<CampaignResult, ExperimentError> {
    let point = RatePoint::new(rate, wiretap)?;
    let caps = net.cut_capacities();
    let tally = run_batch(net, rate, wiretap, field, trials, base_seed, opts)?;
    let (edges, q) = (net.edge_count(), field.q());
    Ok(CampaignResult {
        rate_point: point,
        q,
        edges,
        base_seed,
        region_feasible: region::feasible(&caps, point)?.feasible,
        tally,
        decodability_bound: decodability_bound(edges, rate, wiretap, q),
        security_bound: security_bound(edges, wiretap, q),
        feasibility_bound: feasibility_bound(edges, rate, wiretap, q),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum PointStatus {
    /// at least one trial produced a feasible code
    Achieved,
    /// no trial did
    EmpiricallyInfeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub rate_point: RatePoint,
    pub region_feasible: bool,
    pub violated: Vec<Bound>,
    pub tally: Tally,
    pub status: PointStatus,
    /// a feasible code was found where the region says none exists
    pub contradiction: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionScan {
    pub q: u64,
    pub edges: usize,
    pub trials_per_point: u64,
    pub base_seed: u64,
    pub caps: CutCapacities,
    pub points: Vec<ScanPoint>,
}

impl RegionScan {
    pub fn contradictions(&self) -> usize {
        self.points.iter().filter(|p| p.contradiction).count()
    }

    /// Feasible points where no trial succeeded.
    pub fn unachieved(&self) -> usize {
        self.points
            .iter()
            .filter(|p| p.region_feasible && p.status != PointStatus::Achieved)
            .count()
    }

    pub fn restriction_violations(&self) -> u64 {
        self.points.iter().map(|p| p.tally.restriction_violations).sum()
    }

    /// The empirically achieved set equals the predicted region.
    pub fn matches_region(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.region_feasible == (p.status == PointStatus::Achieved))
    }

    pub fn rows(&self) -> Vec<ScanRow> {
        self.points
            .iter()
            .map(|p| ScanRow {
                rate: p.rate_point.rate,
                wiretap: p.rate_point.wiretap,
                q: self.q,
                trials: p.tally.trials,
                region_feasible: p.region_feasible,
                violated: p
                    .violated
                    .iter()
                    .map(|b| format!("{b:?}"))
                    .collect::<Vec<_>>()
                    .join("+"),
                successes: p.tally.feasible,
                star_ok: p.tally.star_ok,
                decodable: p.tally.decodable,
                secure: p.tally.secure,
                status: match p.status {
                    PointStatus::Achieved => "ACHIEVED",
                    PointStatus::EmpiricallyInfeasible => "EMPIRICALLY-INFEASIBLE",
                },
                contradiction: p.contradiction,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub rate: usize,
    pub wiretap: usize,
    pub q: u64,
    pub trials: u64,
    pub region_feasible: bool,
    pub violated: String,
    pub successes: u64,
    pub star_ok: u64,
    pub decodable: u64,
    pub secure: u64,
    pub status: &'static str,
    pub contradiction: bool,
}

/// Runs `trials_per_point` trials at every `(R, z)` with
/// `1 ≤ R ≤ C_{KS-T}` and `0 ≤ z ≤ |E|`.
pub fn region_scan(
    net: &Network,
    field: PrimeField,
    trials_per_point: u64,
    base_seed: u64,
    opts: &AuditOptions,
) -> Result<RegionScan, ExperimentError> {
    let caps = net.cut_capacities();
    let mut points = Vec::new();
    for rate in 1..=caps.c_kst {
        for wiretap in 0..=net.edge_count() {
            let point = RatePoint::new(rate, wiretap)?;
            let verdict = region::feasible(&caps, point)?;
            let tally = run_batch(net, rate, wiretap, field, trials_per_point, base_seed, opts)?;
            let status = if tally.feasible > 0 {
                PointStatus::Achieved
            } else {
                PointStatus::EmpiricallyInfeasible
            };
            points.push(ScanPoint {
                rate_point: point,
                region_feasible: verdict.feasible,
                contradiction: !verdict.feasible && tally.feasible > 0,
                violated: verdict.violated,
                tally,
                status,
            });
        }
    }
    Ok(RegionScan {
        q: field.q(),
        edges: net.edge_count(),
        trials_per_point,
        base_seed,
        caps,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankExperiment {
    pub n: usize,
    pub m: usize,
    pub q: u64,
    pub trials: u64,
    pub full_rank: u64,
    pub probability: f64,
    /// `1 - n / q`
    pub bound: ProbabilityBound,
}

impl RankExperiment {
    pub fn sigma(&self) -> f64 {
        sampling_sigma(self.full_rank, self.trials)
    }
}

/// Random `n × m` matrix of rank `n`, by rejection.
fn full_row_rank<R: rand::Rng>(n: usize, m: usize, field: &PrimeField, rng: &mut R) -> Matrix {
    loop {
        let a = field.random_matrix(n, m, rng);
        if field.rank(&a) == n {
            return a;
        }
    }
}

/// Estimates `Pr{rank(A·B) = n}` for a full-row-rank `n × m` matrix `A` and a
/// uniform `m × n` matrix `B`. A fresh `A` is drawn for every trial.
pub fn rank_product_experiment(
    n: usize,
    m: usize,
    field: PrimeField,
    trials: u64,
    seed: u64,
) -> Result<RankExperiment, ExperimentError> {
    if n > m {
        return Err(ExperimentError::Shape { n, m });
    }
    let full_rank = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, i));
            let a = full_row_rank(n, m, &field, &mut rng);
            let b = field.random_matrix(m, n, &mut rng);
            field.rank(&field.mat_mul(&a, &b).expect("shapes agree")) == n
        })
        .count() as u64;
    Ok(RankExperiment {
        n,
        m,
        q: field.q(),
        trials,
        full_rank,
        probability: if trials == 0 { 1.0 } else { full_rank as f64 / trials as f64 },
        bound: ProbabilityBound::new(n as u128, field.q()),
    })
}

/// Exact `Pr{rank(A·B) = n}` for one full-row-rank `A` drawn from `seed`,
/// by enumerating all `q^(m·n)` matrices `B`. Returns `(count, total)`.
pub fn rank_product_exact(
    n: usize,
    m: usize,
    field: PrimeField,
    seed: u64,
    max_states: u128,
) -> Result<(u128, u128), ExperimentError> {
    if n > m {
        return Err(ExperimentError::Shape { n, m });
    }
    let cells = m * n;
    let q = field.q() as u128;
    let total = (0..cells).try_fold(1u128, |acc, _| acc.checked_mul(q)).unwrap_or(u128::MAX);
    if total > max_states {
        return Err(ExperimentError::EnumerationBudget {
            states: total,
            limit: max_states,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = full_row_rank(n, m, &field, &mut rng);
    let mut entries = vec![0u64; cells];
    let mut count = 0u128;
    for _ in 0..total {
        let b = Matrix::new(m, n, entries.clone()).expect("m·n entries");
        if field.rank(&field.mat_mul(&a, &b).expect("shapes agree")) == n {
            count += 1;
        }
        for v in entries.iter_mut() {
            *v += 1;
            if *v < field.q() {
                break;
            }
            *v = 0;
        }
    }
    Ok((count, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    fn line() -> Network {
        Network::parse("edge K S\nedge S T\nsource S\nkey K\nterminal T").unwrap()
    }

    fn butterfly() -> Network {
        Network::parse(include_str!("../../../docs/examples/butterfly.net")).unwrap()
    }

    #[test]
    fn seeds_are_spread_out() {
        let seeds: std::collections::HashSet<u64> =
            (0..1000).map(|i| derive_seed(7, point_stream(1, 1), i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(7, point_stream(1, 1), 0), derive_seed(7, point_stream(1, 2), 0));
        assert_ne!(derive_seed(7, 0, 0), derive_seed(8, 0, 0));
    }

    #[test]
    fn bounds() {
        let b = decodability_bound(10, 1, 1, 10007);
        assert_eq!(b.penalty, 288);
        assert!((b.value - 0.97122).abs() < 1e-4);
        let s = security_bound(10, 1, 10007);
        assert_eq!(s.penalty, 20);
        assert!((s.value - 0.99800).abs() < 1e-4);
        assert_eq!(feasibility_bound(10, 1, 1, 10007).penalty, 308);
        let weak = decodability_bound(10, 1, 1, 101);
        assert!(!weak.binding);
        assert!(weak.value < 0.0);
    }

    #[test]
    fn line_without_keys_succeeds_with_nonzero_coefficients() {
        let net = line();
        for seed in 0..50 {
            let c = construct(&net, 1, 0, f(5), seed, &AuditOptions::default()).unwrap();
            let base = c.code.restrict_to_base().unwrap();
            let nonzero = base.source_message().get(0, 0) != 0;
            assert_eq!(c.outcome.decodable, nonzero);
            assert!(c.outcome.secure);
            assert_eq!(c.outcome.feasible, nonzero);
        }
    }

    #[test]
    fn infeasible_points_never_succeed() {
        let net = butterfly();
        // (2, 2) violates R + z <= C_{KS-T} = 3; (1, 3) violates z <= 2
        for (r, z) in [(2, 2), (1, 3), (3, 0)] {
            for seed in 0..40 {
                let t = run_trial(&net, r, z, f(101), seed, &AuditOptions::default()).unwrap();
                assert!(!t.feasible, "({r},{z}) seed {seed}");
                assert!(!t.star_ok || t.decodable);
            }
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let net = butterfly();
        let a = construct(&net, 1, 1, f(101), 42, &AuditOptions::default()).unwrap();
        let b = construct(&net, 1, 1, f(101), 42, &AuditOptions::default()).unwrap();
        assert_eq!(a.code, b.code);
        assert_eq!(a.outcome, b.outcome);
        // replay from serialized code
        let json = serde_json::to_string(&a.code).unwrap();
        let replay: LinearCode = serde_json::from_str(&json).unwrap();
        let enc = replay.restrict_to_base().unwrap().propagate();
        assert_eq!(decodable(&enc, &net), a.outcome.decodable);
        assert_eq!(
            audit_all(&enc, &net, 1, &AuditOptions::default()).unwrap(),
            a.report
        );
    }

    #[test]
    fn campaign_is_deterministic_and_consistent() {
        let net = butterfly();
        let opts = AuditOptions::default();
        let a = success_rate(&net, 1, 1, f(101), 200, 5, &opts).unwrap();
        let b = success_rate(&net, 1, 1, f(101), 200, 5, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tally.trials, 200);
        assert!(a.tally.feasible <= a.tally.decodable.min(a.tally.secure));
        assert_eq!(a.tally.restriction_violations, 0);
        assert!(a.region_feasible);
        // bounds are vacuous at q = 101 but still reported
        assert!(!a.decodability_bound.binding);
        assert_eq!(a.row().decodability_bound_status, "NON-BINDING");
        // at q = 101 most codes still work
        assert!(a.joint_rate() > 0.5, "{}", a.joint_rate());
    }

    #[test]
    fn zero_rate_is_rejected() {
        let net = butterfly();
        assert!(matches!(
            success_rate(&net, 0, 1, f(101), 10, 0, &AuditOptions::default()),
            Err(ExperimentError::Region(RegionError::ZeroRate))
        ));
    }

    #[test]
    fn direct_edge_region() {
        let net = Network::parse("node K\nedge S T\nsource S\nkey K\nterminal T").unwrap();
        let scan = region_scan(&net, f(101), 20, 1, &AuditOptions::default()).unwrap();
        let achieved: Vec<(usize, usize)> = scan
            .points
            .iter()
            .filter(|p| p.status == PointStatus::Achieved)
            .map(|p| (p.rate_point.rate, p.rate_point.wiretap))
            .collect();
        assert_eq!(achieved, vec![(1, 0)]);
        assert_eq!(scan.contradictions(), 0);
        assert!(scan.matches_region());
    }

    #[test]
    fn rank_experiment_small_cases() {
        let e = rank_product_experiment(0, 3, f(5), 100, 1).unwrap();
        assert_eq!(e.probability, 1.0);
        assert!(matches!(
            rank_product_experiment(3, 2, f(5), 1, 1),
            Err(ExperimentError::Shape { n: 3, m: 2 })
        ));
        // with n = m = 1, A = [a] with a != 0, so rank(AB) = 1 iff B != 0
        for q in [2u64, 3, 5] {
            assert_eq!(rank_product_exact(1, 1, f(q), 9, 1 << 20).unwrap(), ((q - 1) as u128, q as u128));
        }
        let a = rank_product_experiment(2, 3, f(7), 2000, 4).unwrap();
        let b = rank_product_experiment(2, 3, f(7), 2000, 4).unwrap();
        assert_eq!(a, b);
    }
}
