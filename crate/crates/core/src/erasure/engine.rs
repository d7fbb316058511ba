use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::{beamsplitter_map, parity_project, ApparatusParams, DetectorSide, MatterState, ParityPhase, Scheme};
use crate::error::{Error, Result};
use crate::statevec::gates::{ONE, ZERO};
use crate::statevec::{DensityState, PureState};

/// Click counts in one detection window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Clicks {
    pub left: u32,
    pub right: u32,
}

impl Clicks {
    pub fn total(self) -> u32 {
        self.left + self.right
    }

    fn single_side(self) -> Option<DetectorSide> {
        match (self.left, self.right) {
            (1, 0) => Some(DetectorSide::Left),
            (0, 1) => Some(DetectorSide::Right),
            _ => None,
        }
    }
}

/// Outcome of one sampled attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldRecord {
    /// Clicks per detection round.
    pub rounds: Vec<Clicks>,
    pub clicks_left: u32,
    pub clicks_right: u32,
    pub accepted: bool,
    /// Phase of the applied odd-parity projector, when accepted.
    pub phase: Option<ParityPhase>,
    /// The accepted pattern came from a loss or dark-count event. Not
    /// visible to protocol logic.
    pub false_herald: bool,
    /// Probability of this click record.
    pub probability: f64,
    pub post_state: MatterState,
}

/// One click record of the exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldOutcome {
    pub rounds: Vec<Clicks>,
    pub probability: f64,
    pub accepted: bool,
    pub phase: Option<ParityPhase>,
    /// Share of this record's probability carried by loss or dark-count
    /// histories.
    pub false_fraction: f64,
    pub state: DensityState,
    /// Ideal-pathway state for an accepted record.
    pub target: Option<PureState>,
}

impl HeraldOutcome {
    pub fn fidelity(&self) -> Option<f64> {
        self.target.as_ref().map(|t| self.state.fidelity(t).expect("same register"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClickRow {
    pub rounds: Vec<[u32; 2]>,
    pub probability: f64,
    pub accepted: bool,
    pub phase: Option<ParityPhase>,
    pub fidelity: Option<f64>,
}

/// Exact success probability and heralded fidelity of an apparatus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Performance {
    pub success_prob: f64,
    pub fidelity: f64,
    pub click_table: Vec<ClickRow>,
}

#[derive(Debug, Clone)]
struct Branch {
    /// Classical weight of the dark-count history.
    weight: f64,
    /// Unnormalised matter amplitudes.
    amps: Vec<Complex64>,
    rounds: Vec<Clicks>,
    ideal: bool,
}

impl Branch {
    fn probability(&self) -> f64 {
        self.weight * self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

/// Amplitude for surviving photons `(from_left, from_right)` to reach the
/// detectors as `(n_left, n_right)`.
fn fock_amplitude(from_left: bool, from_right: bool, n_left: u32, n_right: u32) -> Complex64 {
    let arms = [(from_left, beamsplitter_map(ONE, ZERO)), (from_right, beamsplitter_map(ZERO, ONE))];
    // polynomial in b_L^dagger, b_R^dagger; coeffs[k] multiplies b_L^k b_R^(deg - k)
    let mut coeffs = vec![ONE];
    for (present, (l, r)) in arms {
        if !present {
            continue;
        }
        let mut next = vec![ZERO; coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c * l;
            next[k] += c * r;
        }
        coeffs = next;
    }
    let degree = coeffs.len() as u32 - 1;
    if n_left + n_right != degree {
        return ZERO;
    }
    let factorial = |k: u32| (1..=k).product::<u32>() as f64;
    coeffs[n_left as usize] * (factorial(n_left) * factorial(n_right)).sqrt()
}

fn flip_emitters(amps: &[Complex64], a: usize, b: usize) -> Vec<Complex64> {
    let mask = (1 << a) | (1 << b);
    (0..amps.len()).map(|x| amps[x ^ mask]).collect()
}

fn emission_round(branches: Vec<Branch>, a: usize, b: usize, params: &ApparatusParams) -> Vec<Branch> {
    let keep = params.eta.sqrt();
    let lose = (1.0 - params.eta).sqrt();
    let d = params.dark_prob;
    let dark_options: &[(u32, f64)] = if d == 0.0 { &[(0, 1.0)] } else { &[(0, 1.0 - d), (1, d)] };
    let mut out = Vec::new();
    for br in branches {
        for lost in 0..4u8 {
            let (lost_a, lost_b) = (lost & 1 == 1, lost & 2 == 2);
            let arm_factor = |has: bool, lost: bool| match (has, lost) {
                (false, false) => 1.0,
                (false, true) => 0.0,
                (true, false) => keep,
                (true, true) => lose,
            };
            for photons in 0..=2u32 {
                for n_left in 0..=photons {
                    let n_right = photons - n_left;
                    let amps: Vec<Complex64> = br
                        .amps
                        .iter()
                        .enumerate()
                        .map(|(x, &z)| {
                            let (has_a, has_b) = ((x >> a) & 1 == 1, (x >> b) & 1 == 1);
                            let f = arm_factor(has_a, lost_a) * arm_factor(has_b, lost_b);
                            if f == 0.0 {
                                return ZERO;
                            }
                            z * f * fock_amplitude(has_a && !lost_a, has_b && !lost_b, n_left, n_right)
                        })
                        .collect();
                    if amps.iter().all(|z| z.norm_sqr() == 0.0) {
                        continue;
                    }
                    for &(dark_l, wl) in dark_options {
                        for &(dark_r, wr) in dark_options {
                            let count = |n: u32, dark: u32| {
                                if params.number_resolving {
                                    n + dark
                                } else {
                                    (n + dark).min(1)
                                }
                            };
                            let mut rounds = br.rounds.clone();
                            rounds.push(Clicks { left: count(n_left, dark_l), right: count(n_right, dark_r) });
                            out.push(Branch {
                                weight: br.weight * wl * wr,
                                amps: amps.clone(),
                                rounds,
                                ideal: br.ideal && lost == 0 && dark_l + dark_r == 0 && photons == 1,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

fn all_branches(input: &PureState, a: usize, b: usize, params: &ApparatusParams) -> Vec<Branch> {
    let mut branches = vec![Branch { weight: 1.0, amps: input.amplitudes().to_vec(), rounds: Vec::new(), ideal: true }];
    let rounds = params.scheme.rounds();
    for _ in 0..rounds {
        branches = emission_round(branches, a, b, params);
        if rounds > 1 {
            for br in &mut branches {
                br.amps = flip_emitters(&br.amps, a, b);
            }
        }
    }
    branches
}

fn is_accepted(scheme: Scheme, rounds: &[Clicks]) -> bool {
    match scheme {
        Scheme::TwoPhoton => rounds.iter().all(|c| c.total() == 1),
        _ => rounds.first().is_some_and(|c| c.total() == 1),
    }
}

/// Projector phase and ideal-pathway state for an accepted record.
fn ideal_pathway(
    input: &PureState,
    a: usize,
    b: usize,
    scheme: Scheme,
    rounds: &[Clicks],
) -> Result<(ParityPhase, PureState)> {
    let mut state = input.clone();
    let mut phases = Vec::new();
    for c in rounds {
        let side = c.single_side().ok_or_else(|| Error::param("clicks", "not a single-click round"))?;
        let p = ParityPhase::for_click(side);
        state = parity_project(&state, a, b, p)?.0;
        phases.push(p);
        if scheme.rounds() > 1 {
            state = PureState::from_amplitudes(flip_emitters(state.amplitudes(), a, b))?;
        }
    }
    let net = match phases.as_slice() {
        [p] => *p,
        [p1, p2] => ParityPhase::from_value(p1.value() / p2.value()).expect("ratio of fourth roots"),
        _ => unreachable!("one or two rounds"),
    };
    Ok((net, state))
}

fn check_input(input: &PureState, a: usize, b: usize) -> Result<()> {
    let n = input.num_qubits();
    for q in [a, b] {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: n });
        }
    }
    if a == b {
        return Err(Error::IndexCollision(a));
    }
    Ok(())
}

fn grouped(branches: Vec<Branch>) -> BTreeMap<Vec<Clicks>, Vec<Branch>> {
    let mut groups: BTreeMap<Vec<Clicks>, Vec<Branch>> = BTreeMap::new();
    for br in branches {
        groups.entry(br.rounds.clone()).or_default().push(br);
    }
    groups
}

/// Every click record with its probability and conditional state, in a
/// fixed order. Emitters sit on qubits `a` (left arm) and `b` (right arm).
pub fn enumerate_heralds(
    input: &PureState,
    a: usize,
    b: usize,
    params: &ApparatusParams,
) -> Result<Vec<HeraldOutcome>> {
    params.validate()?;
    check_input(input, a, b)?;
    let n = input.num_qubits();
    grouped(all_branches(input, a, b, params))
        .into_iter()
        .map(|(rounds, members)| {
            let (m, probability) = DensityState::accumulate(n, members.iter().map(|br| (br.weight, br.amps.as_slice())))?;
            let false_weight: f64 = members.iter().filter(|br| !br.ideal).map(Branch::probability).sum();
            let accepted = is_accepted(params.scheme, &rounds);
            let (phase, target) = match accepted {
                true => match ideal_pathway(input, a, b, params.scheme, &rounds) {
                    Ok((p, t)) => (Some(p), Some(t)),
                    Err(Error::ZeroNorm) => (None, None),
                    Err(e) => return Err(e),
                },
                false => (None, None),
            };
            Ok(HeraldOutcome {
                rounds,
                probability,
                accepted,
                phase,
                false_fraction: if accepted { false_weight / probability } else { 0.0 },
                state: DensityState::from_unnormalized(n, m)?,
                target,
            })
        })
        .collect()
}

/// Exact performance of `params` on the scheme's default two-emitter input.
pub fn heralded_performance(params: &ApparatusParams) -> Result<Performance> {
    heralded_performance_for(&params.scheme.default_input()?, 1, 0, params)
}

/// Exact success probability and probability-weighted heralded fidelity of
/// `params` on `input`. An accepted record with no ideal pathway counts as
/// fidelity zero.
pub fn heralded_performance_for(
    input: &PureState,
    a: usize,
    b: usize,
    params: &ApparatusParams,
) -> Result<Performance> {
    let outcomes = enumerate_heralds(input, a, b, params)?;
    let mut success_prob = 0.0;
    let mut weighted = 0.0;
    let mut click_table = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        let fidelity = o.fidelity();
        if o.accepted {
            success_prob += o.probability;
            weighted += o.probability * fidelity.unwrap_or(0.0);
        }
        click_table.push(ClickRow {
            rounds: o.rounds.iter().map(|c| [c.left, c.right]).collect(),
            probability: o.probability,
            accepted: o.accepted,
            phase: o.phase,
            fidelity,
        });
    }
    let fidelity = if success_prob > 0.0 { weighted / success_prob } else { 0.0 };
    Ok(Performance { success_prob, fidelity, click_table })
}

/// Draws a click record and a history within it. Both draws always happen,
/// so equal seeds give equal traces whatever the parameters.
fn sample<R: Rng + ?Sized>(
    input: &PureState,
    a: usize,
    b: usize,
    params: &ApparatusParams,
    rng: &mut R,
) -> Result<(Vec<Clicks>, Vec<Branch>, usize, f64)> {
    params.validate()?;
    check_input(input, a, b)?;
    let groups: Vec<(Vec<Clicks>, Vec<Branch>)> = grouped(all_branches(input, a, b, params)).into_iter().collect();
    let probs: Vec<f64> = groups.iter().map(|(_, m)| m.iter().map(Branch::probability).sum()).collect();
    let (u_group, u_branch): (f64, f64) = (rng.random(), rng.random());
    let total: f64 = probs.iter().sum();
    let mut acc = 0.0;
    let mut pick = groups.len() - 1;
    for (i, p) in probs.iter().enumerate() {
        acc += p / total;
        if u_group < acc {
            pick = i;
            break;
        }
    }
    let (rounds, members) = groups.into_iter().nth(pick).expect("nonempty enumeration");
    let mut acc = 0.0;
    let mut which = members.len() - 1;
    for (i, br) in members.iter().enumerate() {
        acc += br.probability() / probs[pick];
        if u_branch < acc {
            which = i;
            break;
        }
    }
    Ok((rounds, members, which, probs[pick]))
}

fn record(
    params: &ApparatusParams,
    input: &PureState,
    a: usize,
    b: usize,
    rounds: Vec<Clicks>,
    false_herald: bool,
    probability: f64,
    post_state: MatterState,
) -> HeraldRecord {
    let accepted = is_accepted(params.scheme, &rounds);
    let phase = if accepted { ideal_pathway(input, a, b, params.scheme, &rounds).ok().map(|(p, _)| p) } else { None };
    HeraldRecord {
        clicks_left: rounds.iter().map(|c| c.left).sum(),
        clicks_right: rounds.iter().map(|c| c.right).sum(),
        rounds,
        accepted,
        phase,
        false_herald: accepted && false_herald,
        probability,
        post_state,
    }
}

/// One lossless, noiseless attempt on a two-qubit input `|AB>` (qubit 1 is
/// `A`, which feeds the left arm).
pub fn ideal_attempt<R: Rng + ?Sized>(input: &PureState, rng: &mut R) -> Result<HeraldRecord> {
    if input.num_qubits() != 2 {
        return Err(Error::DimensionMismatch(input.num_qubits(), 2));
    }
    ideal_attempt_on(input, 1, 0, rng)
}

/// One lossless, noiseless attempt with emitters on qubits `a` and `b` of
/// a larger register. The post state is pure.
pub fn ideal_attempt_on<R: Rng + ?Sized>(input: &PureState, a: usize, b: usize, rng: &mut R) -> Result<HeraldRecord> {
    let params = ApparatusParams::ideal();
    let (rounds, members, which, probability) = sample(input, a, b, &params, rng)?;
    let branch = &members[which];
    let post = PureState::from_unnormalized(branch.amps.clone())?;
    Ok(record(&params, input, a, b, rounds, !branch.ideal, probability, MatterState::Pure(post)))
}

/// One attempt through a lossy, noisy apparatus on a two-qubit input.
pub fn lossy_attempt<R: Rng + ?Sized>(input: &PureState, params: &ApparatusParams, rng: &mut R) -> Result<HeraldRecord> {
    if input.num_qubits() != 2 {
        return Err(Error::DimensionMismatch(input.num_qubits(), 2));
    }
    lossy_attempt_on(input, 1, 0, params, rng)
}

/// One attempt through a lossy, noisy apparatus. The post state is the
/// mixture over every history consistent with the observed clicks.
pub fn lossy_attempt_on<R: Rng + ?Sized>(
    input: &PureState,
    a: usize,
    b: usize,
    params: &ApparatusParams,
    rng: &mut R,
) -> Result<HeraldRecord> {
    let (rounds, members, which, probability) = sample(input, a, b, params, rng)?;
    let n = input.num_qubits();
    let (m, _) = DensityState::accumulate(n, members.iter().map(|br| (br.weight, br.amps.as_slice())))?;
    let post = DensityState::from_unnormalized(n, m)?;
    let false_herald = !members[which].ideal;
    Ok(record(params, input, a, b, rounds, false_herald, probability, MatterState::Mixed(post)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::gates::I;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus() -> PureState {
        PureState::init_plus(2).unwrap()
    }

    #[test]
    fn two_photons_bunch() {
        let i_h = I * std::f64::consts::FRAC_1_SQRT_2;
        assert!((fock_amplitude(true, true, 2, 0) - i_h).norm() < 1e-15);
        assert!((fock_amplitude(true, true, 0, 2) - i_h).norm() < 1e-15);
        assert!(fock_amplitude(true, true, 1, 1).norm() < 1e-15);
        assert_eq!(fock_amplitude(false, false, 0, 0), ONE);
    }

    #[test]
    fn ideal_enumeration_of_plus_pair() {
        let out = enumerate_heralds(&plus(), 1, 0, &ApparatusParams::ideal()).unwrap();
        let total: f64 = out.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for o in &out {
            let expected = if o.rounds[0].total() == 2 { 0.125 } else { 0.25 };
            assert!((o.probability - expected).abs() < 1e-12, "{:?}", o.rounds);
            assert_eq!(o.false_fraction, 0.0);
        }
        let none = out.iter().find(|o| o.rounds[0].total() == 0).unwrap();
        assert!((none.state.fidelity(&PureState::zero(2).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        for double in out.iter().filter(|o| o.rounds[0].total() == 2) {
            assert!((double.state.fidelity(&PureState::basis_state(2, 3).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_clicks_herald_the_expected_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let left = PureState::from_labels(&[("01", ONE), ("10", I)]).unwrap();
        let right = PureState::from_labels(&[("01", I), ("10", ONE)]).unwrap();
        let mut seen = [false; 2];
        for _ in 0..64 {
            let rec = ideal_attempt(&plus(), &mut rng).unwrap();
            let MatterState::Pure(post) = &rec.post_state else { panic!("ideal is pure") };
            match (rec.clicks_left, rec.clicks_right) {
                (1, 0) => {
                    assert!(post.equal_up_to_global_phase(&left, 1e-10).unwrap());
                    seen[0] = true;
                }
                (0, 1) => {
                    assert!(post.equal_up_to_global_phase(&right, 1e-10).unwrap());
                    seen[1] = true;
                }
                _ => assert!(!rec.accepted),
            }
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn lossless_lossy_attempt_replays_ideal_attempt() {
        let mut r1 = ChaCha8Rng::seed_from_u64(11);
        let mut r2 = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let ideal = ideal_attempt(&plus(), &mut r1).unwrap();
            let lossy = lossy_attempt(&plus(), &ApparatusParams::ideal(), &mut r2).unwrap();
            assert_eq!(ideal.rounds, lossy.rounds);
            assert_eq!(ideal.phase, lossy.phase);
            let diff = ideal.post_state.to_density().unwrap().max_abs_diff(&lossy.post_state.to_density().unwrap());
            assert!(diff.unwrap() < 1e-12);
        }
    }

    #[test]
    fn ideal_performance() {
        let perf = heralded_performance(&ApparatusParams::ideal()).unwrap();
        assert!((perf.success_prob - 0.5).abs() < 1e-12);
        assert!((perf.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_photon_loss_only_costs_rate() {
        for eta in [1.0, 0.3, 0.01] {
            let params = ApparatusParams { eta, dark_prob: 0.0, scheme: Scheme::TwoPhoton, number_resolving: false };
            let perf = heralded_performance(&params).unwrap();
            assert!((perf.fidelity - 1.0).abs() < 1e-12);
            assert!((perf.success_prob - 0.5 * eta * eta).abs() < 1e-15);
        }
    }

    #[test]
    fn two_photon_phase_is_ratio_of_round_phases() {
        let params = ApparatusParams { eta: 1.0, dark_prob: 0.0, scheme: Scheme::TwoPhoton, number_resolving: false };
        for o in enumerate_heralds(&plus(), 1, 0, &params).unwrap().iter().filter(|o| o.accepted) {
            let (direct, _) = parity_project(&plus(), 1, 0, o.phase.unwrap()).unwrap();
            assert!(direct.equal_up_to_global_phase(o.target.as_ref().unwrap(), 1e-12).unwrap());
        }
    }

    #[test]
    fn weak_excitation_loses_fidelity_to_double_emission() {
        let params = |epsilon| ApparatusParams {
            eta: 0.5,
            dark_prob: 0.0,
            scheme: Scheme::WeakExcitation { epsilon },
            number_resolving: true,
        };
        let small = heralded_performance(&params(0.1)).unwrap();
        let large = heralded_performance(&params(0.5)).unwrap();
        assert!(small.fidelity > large.fidelity);
        assert!(small.fidelity < 1.0);
    }
}
