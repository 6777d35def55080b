#![allow(dead_code)]

use photonic_cluster::config::{ConsumeMode, RunConfig};
use photonic_cluster::engine::Engine;
use photonic_cluster::frame::PauliFrame;
use photonic_cluster::group::subgroup_on;
use photonic_cluster::module::{module_cycle, ModuleState, PhotonRole};
use photonic_cluster::network::simulate;
use photonic_cluster::oracle::{oracle_compare, StateVector};
use photonic_cluster::{Gate, Pauli, PauliString, Sign, StabilizerTableau};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-9;

pub fn random_gate(rng: &mut impl Rng, n: usize) -> Gate {
    let q = rng.gen_range(0..n);
    let kinds = if n >= 2 { 7 } else { 5 };
    match rng.gen_range(0..kinds) {
        0 => Gate::H(q),
        1 => Gate::S(q),
        2 => Gate::X(q),
        3 => Gate::Y(q),
        4 => Gate::Z(q),
        k => {
            let mut r = rng.gen_range(0..n - 1);
            if r >= q {
                r += 1;
            }
            if k == 5 {
                Gate::Cnot { control: q, target: r }
            } else {
                Gate::Module { photon: q, atom: r }
            }
        }
    }
}

pub fn random_product(rng: &mut impl Rng, n: usize) -> PauliString {
    loop {
        let p = PauliString::from_sparse(n, (0..n).map(|q| (q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)])));
        if p.weight() > 0 {
            return p;
        }
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Runs one random Clifford+measurement circuit on the tableau and the
/// state vector side by side.
pub fn cosim(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=5);
    let mut t = StabilizerTableau::new(n);
    let mut psi = StateVector::zero(n).map_err(err)?;
    for step in 0..rng.gen_range(1..=40) {
        if rng.gen_bool(0.3) {
            let p = random_product(&mut rng, n);
            let m = t.measure(&p, &mut rng).map_err(err)?;
            let o = psi.oracle_measure(&p).map_err(err)?;
            if m.deterministic != o.is_deterministic() {
                return Err(format!("seed {seed} step {step}: {p} deterministic {} vs oracle {}", m.deterministic, o.is_deterministic()));
            }
            let prob = if m.outcome == Sign::Plus { o.p_plus } else { o.p_minus };
            let want = if m.deterministic { 1.0 } else { 0.5 };
            if (prob - want).abs() > TOL {
                return Err(format!("seed {seed} step {step}: {p} outcome {:?} has probability {prob}", m.outcome));
            }
            psi = o.post_state(m.outcome).ok_or("missing post state")?.clone();
        } else {
            let g = random_gate(&mut rng, n);
            t.apply(g).map_err(err)?;
            psi.apply(g).map_err(err)?;
        }
    }
    t.check_invariants()?;
    if !oracle_compare(&t, &psi).map_err(err)? {
        return Err(format!("seed {seed}: final stabilizer group differs from the oracle state"));
    }
    Ok(())
}

/// One module cycle against a direct projection of the photons onto the
/// product of their role letters.
pub fn module_equivalence(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=4);
    let mut roles = PhotonRole::ALL.to_vec();
    roles.shuffle(&mut rng);
    roles.truncate(k);

    let mut engine = Engine::new(k);
    let mut psi = StateVector::zero(k).map_err(err)?;
    for _ in 0..rng.gen_range(0..20) {
        let g = random_gate(&mut rng, k);
        engine.apply(g).map_err(err)?;
        psi.apply(g).map_err(err)?;
    }
    let mut module = ModuleState::allocate(&mut engine);
    let mut frame = PauliFrame::new(engine.num_qubits());
    let photons: Vec<usize> = (0..k).collect();
    let out = module_cycle(&mut engine, &mut module, &photons, &roles, &mut frame, &mut rng, 0, 1).map_err(err)?;

    let op = PauliString::from_sparse(k, roles.iter().enumerate().map(|(q, r)| (q, r.letter())));
    if !out.operator.resized(k).same_letters(&op) || out.operator.weight() != k {
        return Err(format!("seed {seed}: measured {} but roles give {op}", out.operator));
    }
    let o = psi.oracle_measure(&op).map_err(err)?;
    if out.deterministic != o.is_deterministic() {
        return Err(format!("seed {seed}: deterministic {} vs oracle {}", out.deterministic, o.is_deterministic()));
    }
    let post = o.post_state(out.outcome).ok_or_else(|| format!("seed {seed}: impossible outcome {:?}", out.outcome))?;
    let photon_group = subgroup_on(engine.tableau().stabilizers(), &photons);
    if photon_group.len() != k {
        return Err(format!("seed {seed}: atom left entangled with the photons"));
    }
    for g in &photon_group {
        if (post.expectation(g).map_err(err)? - 1.0).abs() > TOL {
            return Err(format!("seed {seed}: {g} does not stabilize the projected state"));
        }
    }
    Ok(())
}

/// Verdicts on the 5-row async register: with the frame kept virtual, and
/// with the frame applied physically and an empty frame.
pub fn frame_invariance(seed: u64) -> Result<(bool, bool), String> {
    let cfg = RunConfig::asynchronous(5, 40).with_seed(seed).with_consume(ConsumeMode::None);
    let out = simulate(&cfg).map_err(err)?;
    let n = out.engine.num_qubits();
    let virtual_verdict = out.verify_register(&out.engine, &out.frame).map_err(err)?.pass;
    let mut physical = out.engine.clone();
    physical.apply_pauli(&out.frame.as_pauli(n)).map_err(err)?;
    let physical_verdict = out.verify_register(&physical, &PauliFrame::new(n)).map_err(err)?.pass;
    if virtual_verdict != out.result.pass {
        return Err(format!("seed {seed}: re-verification disagrees with the run"));
    }
    Ok((virtual_verdict, physical_verdict))
}
